//! Dimensionless result planes and the point-to-polyline Fréchet cost.
//!
//! Every experimental curve is mapped onto a unit plane using normalizers
//! taken from the experimental points; the simulated trajectory of the same
//! test is mapped with the identical normalizers. The deviation of a plane is
//! the Euclidean norm of the per-point distances to the simulated polyline,
//! concatenated over all tests contributing to that plane.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::element::{simulate, SimError, TestKind, TestSpec, Trajectory};
use crate::model::{HypoParams, SearchParams};
use crate::num::Real;

pub type Point<T> = [T; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Plane {
    /// (ε̂_E, T̂1)
    Oedometer,
    /// (ε̂_a, q̂)
    Deviatoric,
    /// (ε̂_a, ε̂_v)
    Volumetric,
}

impl Plane {
    pub const ALL: [Plane; 3] = [Plane::Oedometer, Plane::Deviatoric, Plane::Volumetric];

    pub fn index(self) -> usize {
        match self {
            Plane::Oedometer => 0,
            Plane::Deviatoric => 1,
            Plane::Volumetric => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OedometerPoint<T> {
    pub t1: T,
    pub e: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriaxialPoint<T> {
    pub eps_a: T,
    pub q: T,
    pub eps_v: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Curves<T> {
    Oedometer(Vec<OedometerPoint<T>>),
    Triaxial(Vec<TriaxialPoint<T>>),
}

impl<T> Curves<T> {
    pub fn len(&self) -> usize {
        match self {
            Curves::Oedometer(p) => p.len(),
            Curves::Triaxial(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentalTest<T> {
    pub name: String,
    pub spec: TestSpec<T>,
    pub curves: Curves<T>,
}

impl<T: Real> ExperimentalTest<T> {
    pub fn planes(&self) -> &'static [Plane] {
        match self.spec.kind {
            TestKind::Oedometer { .. } => &[Plane::Oedometer],
            TestKind::TriaxialDrained { .. } => &[Plane::Deviatoric, Plane::Volumetric],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("dataset contains no tests")]
    Empty,
    #[error("test {test}: {source}")]
    Spec { test: String, source: SimError },
    #[error("test {test}: curve type does not match the test kind")]
    KindMismatch { test: String },
    #[error("test {test}: at least 2 points are required, found {found}")]
    TooFewPoints { test: String, found: usize },
    #[error("test {test}: {points} points exceed the {samples} simulated samples")]
    TooManyPoints {
        test: String,
        points: usize,
        samples: usize,
    },
    #[error("test {test}: point {index}: axial strain decreases")]
    NonMonotoneStrain { test: String, index: usize },
    #[error("test {test}: point {index}: void ratio increases along the compression path")]
    IncreasingVoidRatio { test: String, index: usize },
    #[error("test {test}: point {index}: stress is not compressive")]
    PositiveStress { test: String, index: usize },
    #[error("test {test}: point {index}: non-finite value")]
    NonFinite { test: String, index: usize },
}

/// Validated collection of experimental tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentalDataset<T> {
    tests: Vec<ExperimentalTest<T>>,
}

impl<T: Real> ExperimentalDataset<T> {
    pub fn new(tests: Vec<ExperimentalTest<T>>) -> Result<Self, DatasetError> {
        if tests.is_empty() {
            return Err(DatasetError::Empty);
        }
        for t in &tests {
            validate_test(t)?;
        }
        Ok(Self { tests })
    }

    pub fn tests(&self) -> &[ExperimentalTest<T>] {
        &self.tests
    }

    pub fn count_kind(&self, oedometer: bool) -> usize {
        self.tests
            .iter()
            .filter(|t| t.spec.is_oedometer() == oedometer)
            .count()
    }
}

fn validate_test<T: Real>(t: &ExperimentalTest<T>) -> Result<(), DatasetError> {
    let test = || t.name.clone();
    t.spec.validate().map_err(|source| DatasetError::Spec {
        test: test(),
        source,
    })?;
    if !(t.spec.initial.trace() < T::zero()) {
        return Err(DatasetError::PositiveStress {
            test: test(),
            index: 0,
        });
    }
    let m = t.curves.len();
    if m < 2 {
        return Err(DatasetError::TooFewPoints {
            test: test(),
            found: m,
        });
    }
    if m > t.spec.n_step + 1 {
        return Err(DatasetError::TooManyPoints {
            test: test(),
            points: m,
            samples: t.spec.n_step + 1,
        });
    }
    match (&t.spec.kind, &t.curves) {
        (TestKind::Oedometer { .. }, Curves::Oedometer(points)) => {
            for (index, p) in points.iter().enumerate() {
                if !(p.t1.is_finite() && p.e.is_finite()) {
                    return Err(DatasetError::NonFinite {
                        test: test(),
                        index,
                    });
                }
                if !(p.t1 < T::zero()) {
                    return Err(DatasetError::PositiveStress {
                        test: test(),
                        index,
                    });
                }
                if index > 0 && p.e > points[index - 1].e {
                    return Err(DatasetError::IncreasingVoidRatio {
                        test: test(),
                        index,
                    });
                }
            }
        }
        (TestKind::TriaxialDrained { .. }, Curves::Triaxial(points)) => {
            for (index, p) in points.iter().enumerate() {
                if !(p.eps_a.is_finite() && p.q.is_finite() && p.eps_v.is_finite()) {
                    return Err(DatasetError::NonFinite {
                        test: test(),
                        index,
                    });
                }
                if index > 0 && p.eps_a < points[index - 1].eps_a {
                    return Err(DatasetError::NonMonotoneStrain {
                        test: test(),
                        index,
                    });
                }
            }
        }
        _ => return Err(DatasetError::KindMismatch { test: test() }),
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("test {test}: degenerate normalizer ({which} is zero)")]
    DegenerateNormalizer { test: String, which: &'static str },
    #[error("test {test} has no {plane:?} plane")]
    PlaneMismatch { test: String, plane: Plane },
    #[error("invalid cost weights: {0}")]
    InvalidWeights(&'static str),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledCurve<T> {
    pub plane: Plane,
    pub points: Vec<Point<T>>,
}

/// Maps one test's values into a dimensionless plane.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Normalizer<T> {
    Oedometer { e0: T, log_ref: T, stress: T },
    Strain { eps_fin: T, y_scale: T },
}

impl<T: Real> Normalizer<T> {
    fn new(test: &ExperimentalTest<T>, plane: Plane) -> Result<Self, MetricsError> {
        let degenerate = |which| MetricsError::DegenerateNormalizer {
            test: test.name.clone(),
            which,
        };
        match (test.spec.kind, &test.curves, plane) {
            (TestKind::Oedometer { e_fin }, Curves::Oedometer(points), Plane::Oedometer) => {
                let e0 = test.spec.initial.e;
                let log_ref = oedometer_log(e0, e_fin);
                if !(log_ref != T::zero()) {
                    return Err(degenerate("e_0 - e_fin"));
                }
                let stress = points.iter().fold(T::zero(), |m, p| m.max(-p.t1));
                if !(stress > T::zero()) {
                    return Err(degenerate("max(-T1)"));
                }
                Ok(Normalizer::Oedometer {
                    e0,
                    log_ref,
                    stress,
                })
            }
            (
                TestKind::TriaxialDrained { eps_fin },
                Curves::Triaxial(points),
                Plane::Deviatoric | Plane::Volumetric,
            ) => {
                if !(eps_fin > T::zero()) {
                    return Err(degenerate("eps_fin"));
                }
                let y_scale = if plane == Plane::Deviatoric {
                    let s = points.iter().fold(T::neg_infinity(), |m, p| m.max(p.q));
                    if !(s > T::zero()) {
                        return Err(degenerate("max(q)"));
                    }
                    s
                } else {
                    let s = points.iter().fold(T::zero(), |m, p| m.max(p.eps_v.abs()));
                    if !(s > T::zero()) {
                        return Err(degenerate("max|eps_v|"));
                    }
                    s
                };
                Ok(Normalizer::Strain { eps_fin, y_scale })
            }
            _ => Err(MetricsError::PlaneMismatch {
                test: test.name.clone(),
                plane,
            }),
        }
    }

    fn experimental(&self, curves: &Curves<T>, plane: Plane) -> Vec<Point<T>> {
        match (self, curves) {
            (
                Normalizer::Oedometer {
                    e0,
                    log_ref,
                    stress,
                },
                Curves::Oedometer(points),
            ) => points
                .iter()
                .map(|p| [oedometer_log(*e0, p.e) / *log_ref, -p.t1 / *stress])
                .collect(),
            (Normalizer::Strain { eps_fin, y_scale }, Curves::Triaxial(points)) => points
                .iter()
                .map(|p| {
                    let y = if plane == Plane::Deviatoric {
                        p.q
                    } else {
                        p.eps_v
                    };
                    [p.eps_a / *eps_fin, y / *y_scale]
                })
                .collect(),
            _ => unreachable!("normalizer built for this curve type"),
        }
    }

    fn simulated(&self, traj: &Trajectory<T>, plane: Plane) -> Vec<Point<T>> {
        match *self {
            Normalizer::Oedometer {
                e0,
                log_ref,
                stress,
            } => traj
                .samples
                .iter()
                .map(|s| [oedometer_log(e0, s.e) / log_ref, -s.t1 / stress])
                .collect(),
            Normalizer::Strain { eps_fin, y_scale } => (0..traj.len())
                .map(|i| {
                    let y = if plane == Plane::Deviatoric {
                        traj.q(i)
                    } else {
                        traj.eps_v(i)
                    };
                    [traj.eps_a(i) / eps_fin, y / y_scale]
                })
                .collect(),
        }
    }
}

/// `ln(1 - (e0 - e)/(e0 + 1))`, the oedometric log strain up to sign.
fn oedometer_log<T: Real>(e0: T, e: T) -> T {
    (T::one() - (e0 - e) / (e0 + T::one())).ln()
}

/// Scales an experimental curve and its simulated counterpart into `plane`
/// using normalizers derived from the experimental curve.
pub fn scale_pair<T: Real>(
    test: &ExperimentalTest<T>,
    traj: &Trajectory<T>,
    plane: Plane,
) -> Result<(ScaledCurve<T>, ScaledCurve<T>), MetricsError> {
    let norm = Normalizer::new(test, plane)?;
    Ok((
        ScaledCurve {
            plane,
            points: norm.experimental(&test.curves, plane),
        },
        ScaledCurve {
            plane,
            points: norm.simulated(traj, plane),
        },
    ))
}

fn segment_distance<T: Real>(p: Point<T>, a: Point<T>, b: Point<T>) -> T {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let to_a = (p[0] - a[0]).hypot(p[1] - a[1]);
    let to_b = (p[0] - b[0]).hypot(p[1] - b[1]);
    if !(len2 > T::zero()) {
        return to_a;
    }
    let t = ((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2;
    // endpoints are compared exactly so vertices sit at distance zero
    if t <= T::zero() || t >= T::one() {
        return to_a.min(to_b);
    }
    (p[0] - (a[0] + t * d[0]))
        .hypot(p[1] - (a[1] + t * d[1]))
        .min(to_a)
        .min(to_b)
}

/// Distance from `p` to the closest segment of `polyline`.
pub fn polyline_distance<T: Real>(p: Point<T>, polyline: &[Point<T>]) -> T {
    match polyline {
        [] => T::infinity(),
        [only] => (p[0] - only[0]).hypot(p[1] - only[1]),
        _ => polyline
            .windows(2)
            .map(|w| segment_distance(p, w[0], w[1]))
            .fold(T::infinity(), T::min),
    }
}

/// Per-point distances `D_F(k)` from each experimental point to the polyline.
pub fn frechet_vector<T: Real>(points: &[Point<T>], polyline: &[Point<T>]) -> Vec<T> {
    points
        .iter()
        .map(|&p| polyline_distance(p, polyline))
        .collect()
}

/// Relative importance of the oedometric, deviatoric and volumetric planes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights<T> {
    pub w1: T,
    pub w2: T,
    pub w3: T,
}

impl<T: Real> CostWeights<T> {
    pub fn unit() -> Self {
        Self {
            w1: T::one(),
            w2: T::one(),
            w3: T::one(),
        }
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.w1, self.w2, self.w3]
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        let w = self.as_array();
        if w.iter().any(|v| !(v.is_finite() && *v >= T::zero())) {
            return Err(MetricsError::InvalidWeights(
                "weights must be finite and non-negative",
            ));
        }
        if w.iter().all(|v| *v == T::zero()) {
            return Err(MetricsError::InvalidWeights(
                "at least one weight must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown<T> {
    pub total: T,
    /// Per-plane deviations δ1, δ2, δ3.
    pub deltas: [T; 3],
}

impl<T: Real> CostBreakdown<T> {
    pub fn rejected() -> Self {
        Self {
            total: T::infinity(),
            deltas: [T::infinity(); 3],
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.total.is_finite()
    }
}

#[derive(Debug, Clone)]
struct PreparedPlane<T> {
    plane: Plane,
    norm: Normalizer<T>,
    points: Vec<Point<T>>,
}

#[derive(Debug, Clone)]
struct PreparedTest<T> {
    spec: TestSpec<T>,
    planes: Vec<PreparedPlane<T>>,
}

/// Cost function with the experimental side scaled once up front.
#[derive(Debug, Clone)]
pub struct CostModel<T> {
    tests: Vec<PreparedTest<T>>,
    weights: CostWeights<T>,
}

impl<T: Real> CostModel<T> {
    pub fn new(
        data: &ExperimentalDataset<T>,
        weights: CostWeights<T>,
    ) -> Result<Self, MetricsError> {
        weights.validate()?;
        let tests = data
            .tests()
            .iter()
            .map(|test| {
                let planes = test
                    .planes()
                    .iter()
                    .map(|&plane| {
                        let norm = Normalizer::new(test, plane)?;
                        Ok(PreparedPlane {
                            plane,
                            norm,
                            points: norm.experimental(&test.curves, plane),
                        })
                    })
                    .collect::<Result<Vec<_>, MetricsError>>()?;
                Ok(PreparedTest {
                    spec: test.spec,
                    planes,
                })
            })
            .collect::<Result<Vec<_>, MetricsError>>()?;
        Ok(Self { tests, weights })
    }

    pub fn weights(&self) -> &CostWeights<T> {
        &self.weights
    }

    /// Weighted cost of a full parameter set; any rejected simulation yields
    /// the `+∞` sentinel.
    pub fn evaluate(&self, params: &HypoParams<T>) -> CostBreakdown<T> {
        let mut sq = [T::zero(); 3];
        for test in &self.tests {
            let traj = match simulate(&test.spec, params) {
                Ok(t) => t,
                Err(_) => return CostBreakdown::rejected(),
            };
            for plane in &test.planes {
                let polyline = plane.norm.simulated(&traj, plane.plane);
                let acc = &mut sq[plane.plane.index()];
                for &p in &plane.points {
                    let d = polyline_distance(p, &polyline);
                    *acc = *acc + d * d;
                }
            }
        }
        let deltas = sq.map(|s| s.sqrt());
        let total = self
            .weights
            .as_array()
            .iter()
            .zip(deltas)
            .fold(T::zero(), |acc, (w, d)| acc + *w * d);
        if total.is_finite() {
            CostBreakdown { total, deltas }
        } else {
            CostBreakdown::rejected()
        }
    }

    pub fn evaluate_search(&self, params: &SearchParams<T>) -> CostBreakdown<T> {
        match params.expand() {
            Ok(p) => self.evaluate(&p),
            Err(_) => CostBreakdown::rejected(),
        }
    }
}

/// Cost of a reduced parameter set against `data`.
pub fn cost<T: Real>(
    params: &SearchParams<T>,
    data: &ExperimentalDataset<T>,
    weights: &CostWeights<T>,
) -> Result<T, MetricsError> {
    Ok(CostModel::new(data, *weights)?
        .evaluate_search(params)
        .total)
}

/// Cost of a full eight-parameter set, e.g. a published reference calibration.
pub fn cost_full<T: Real>(
    params: &HypoParams<T>,
    data: &ExperimentalDataset<T>,
    weights: &CostWeights<T>,
) -> Result<T, MetricsError> {
    Ok(CostModel::new(data, *weights)?.evaluate(params).total)
}
