//! Reference parameter sets, test programmes and synthetic datasets.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::element::{simulate, SimError, TestSpec, Trajectory};
use crate::ga::{seeded_rng, Bounds};
use crate::metrics::{
    Curves, DatasetError, ExperimentalDataset, ExperimentalTest, OedometerPoint, TriaxialPoint,
};
use crate::model::{ElementState, HypoParams, SearchParams};

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTest {
    pub name: String,
    pub spec: TestSpec<f64>,
    /// Number of points sampled from the simulated curve.
    pub points: usize,
}

impl NamedTest {
    fn new(name: &str, spec: TestSpec<f64>, points: usize) -> Self {
        Self {
            name: name.to_string(),
            spec,
            points,
        }
    }
}

/// Hochstetten sand, reference set W.
pub fn hochstetten_w() -> HypoParams<f64> {
    HypoParams::from_degrees(33.0, 1.0e6, 0.25, 0.55, 0.95, 1.05, 0.25, 1.5).expect("valid")
}

/// Hochstetten sand, reference set H.
pub fn hochstetten_h() -> HypoParams<f64> {
    HypoParams::from_degrees(33.0, 1.5e6, 0.28, 0.55, 0.95, 1.05, 0.25, 1.0).expect("valid")
}

/// Published GA calibration of Hochstetten sand (void ratios in canonical order).
pub fn hochstetten_ga() -> HypoParams<f64> {
    HypoParams::from_degrees(32.73, 1.32e6, 0.23, 0.624, 1.04, 1.248, 0.23, 1.26).expect("valid")
}

pub fn validation_params() -> HypoParams<f64> {
    hochstetten_w()
}

pub fn validation_tests() -> Vec<NamedTest> {
    vec![
        NamedTest::new(
            "EDO",
            TestSpec::oedometer(ElementState::new(-10.0, -10.0, 0.73), 0.68),
            15,
        ),
        NamedTest::new(
            "TxD",
            TestSpec::triaxial(ElementState::new(-300.0, -300.0, 0.66), 0.11),
            10,
        ),
    ]
}

/// Generating parameters of the synthetic round-trip benchmark.
pub fn synthetic_search() -> SearchParams<f64> {
    SearchParams {
        phi_c: 34f64.to_radians(),
        h_s: 3.8e6,
        n: 0.30,
        e_c0: 0.886,
        alpha: 0.144,
        beta: 1.5,
        lambda_d: 0.60,
        lambda_i: 1.20,
    }
}

pub fn synthetic_tests() -> Vec<NamedTest> {
    let tx = |name: &str, p: f64, e: f64| {
        NamedTest::new(
            name,
            TestSpec::triaxial(ElementState::new(-p, -p, e), 0.20),
            10,
        )
    };
    vec![
        tx("TxD1", 50.0, 0.524),
        tx("TxD2", 100.0, 0.545),
        tx("TxD3", 200.0, 0.588),
        NamedTest::new(
            "EDO1",
            TestSpec::oedometer(ElementState::new(-8.0, -4.0, 0.784), 0.72),
            15,
        ),
    ]
}

/// Search box of the synthetic benchmark.
pub fn synthetic_bounds() -> Bounds {
    Bounds::from_table(
        [25.0, 1.0, 0.25, 0.6, 0.05, 1.0],
        [40.0, 9.0, 0.40, 1.1, 0.20, 2.0],
    )
}

/// Search box of the Hochstetten calibration.
pub fn hochstetten_bounds() -> Bounds {
    Bounds::from_table(
        [25.0, 1.0, 0.25, 0.6, 0.05, 0.9],
        [40.0, 9.0, 0.40, 1.1, 0.20, 2.0],
    )
}

pub fn hochstetten_tests() -> Vec<NamedTest> {
    let tx = |name: &str, p: f64, e: f64| {
        NamedTest::new(
            name,
            TestSpec::triaxial(ElementState::new(-p, -p, e), 0.20),
            12,
        )
    };
    vec![
        tx("TxD1", 100.0, 0.690),
        tx("TxD2", 200.0, 0.670),
        tx("TxD3", 300.0, 0.660),
        NamedTest::new(
            "EDO1",
            TestSpec::oedometer(ElementState::new(-25.0, -12.5, 0.730), 0.672),
            15,
        ),
        NamedTest::new(
            "EDO2",
            TestSpec::oedometer(ElementState::new(-25.0, -12.5, 0.695), 0.643),
            15,
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SampleError {
    #[error("test {test}: {source}")]
    Simulation { test: String, source: SimError },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Measurement imperfections applied when sampling a dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Digitization {
    /// Significant digits kept in every value.
    pub digits: usize,
    /// Relative Gaussian scatter on stresses.
    pub stress_noise: f64,
    /// Absolute Gaussian scatter on void ratios and strains.
    pub strain_noise: f64,
    pub seed: u64,
}

impl Digitization {
    pub fn exact(digits: usize) -> Self {
        Self {
            digits,
            stress_noise: 0.0,
            strain_noise: 0.0,
            seed: 0,
        }
    }
}

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .expect("formatted float")
}

/// Trajectory indices evenly spread over `0..len`, always including both ends.
pub fn sample_indices(len: usize, points: usize) -> Vec<usize> {
    if points <= 1 || len <= 1 {
        return vec![len.saturating_sub(1)];
    }
    (0..points)
        .map(|k| ((k * (len - 1)) as f64 / (points - 1) as f64).round() as usize)
        .collect()
}

fn sample_curves(
    traj: &Trajectory<f64>,
    oedometer: bool,
    points: usize,
    dig: &Digitization,
    rng: &mut impl Rng,
) -> Curves<f64> {
    let stress = Normal::new(0.0, dig.stress_noise.max(0.0)).expect("sigma");
    let strain = Normal::new(0.0, dig.strain_noise.max(0.0)).expect("sigma");
    let idx = sample_indices(traj.len(), points);
    let r = |x: f64| round_sig(x, dig.digits);
    if oedometer {
        let mut pts: Vec<OedometerPoint<f64>> = idx
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let s = &traj.samples[i];
                // the first point anchors the test's initial state
                let (ds, de) = if k == 0 {
                    (0.0, 0.0)
                } else {
                    (stress.sample(rng), strain.sample(rng))
                };
                OedometerPoint {
                    t1: r(s.t1 * (1.0 + ds)),
                    e: r(s.e + de),
                }
            })
            .collect();
        for k in 1..pts.len() {
            pts[k].e = pts[k].e.min(pts[k - 1].e);
        }
        Curves::Oedometer(pts)
    } else {
        let pts = idx
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let (ds, dv) = if k == 0 {
                    (0.0, 0.0)
                } else {
                    (stress.sample(rng), strain.sample(rng))
                };
                TriaxialPoint {
                    eps_a: r(traj.eps_a(i)),
                    q: r(traj.q(i) * (1.0 + ds)),
                    eps_v: r(traj.eps_v(i) + dv),
                }
            })
            .collect();
        Curves::Triaxial(pts)
    }
}

/// Simulates every test with `params` and samples the curves as data.
pub fn sample_dataset(
    params: &HypoParams<f64>,
    tests: &[NamedTest],
    dig: &Digitization,
) -> Result<ExperimentalDataset<f64>, SampleError> {
    let mut rng = seeded_rng(dig.seed);
    let mut out = Vec::with_capacity(tests.len());
    for t in tests {
        let traj = simulate(&t.spec, params).map_err(|source| SampleError::Simulation {
            test: t.name.clone(),
            source,
        })?;
        out.push(ExperimentalTest {
            name: t.name.clone(),
            spec: t.spec,
            curves: sample_curves(&traj, t.spec.is_oedometer(), t.points, dig, &mut rng),
        });
    }
    Ok(ExperimentalDataset::new(out)?)
}

/// Noise-free synthetic benchmark exported at six significant digits.
pub fn synthetic_dataset() -> ExperimentalDataset<f64> {
    let params = synthetic_search().expand().expect("valid");
    sample_dataset(&params, &synthetic_tests(), &Digitization::exact(6))
        .expect("benchmark simulates")
}

/// Digitization settings of the committed Hochstetten surrogate.
pub const HOCHSTETTEN_DIGITIZATION: Digitization = Digitization {
    digits: 4,
    stress_noise: 0.01,
    strain_noise: 2.0e-4,
    seed: 20,
};

/// Surrogate Hochstetten dataset generated from the published GA calibration.
pub fn hochstetten_surrogate() -> ExperimentalDataset<f64> {
    sample_dataset(
        &hochstetten_ga(),
        &hochstetten_tests(),
        &HOCHSTETTEN_DIGITIZATION,
    )
    .expect("surrogate simulates")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{cost_full, CostWeights};

    #[test]
    fn rounding() {
        assert_eq!(round_sig(123.456789, 4), 123.5);
        assert_eq!(round_sig(-0.000123456, 3), -0.000123);
        assert_eq!(round_sig(0.0, 3), 0.0);
    }

    #[test]
    fn indices_cover_ends() {
        assert_eq!(
            sample_indices(101, 11),
            (0..=100).step_by(10).collect::<Vec<_>>()
        );
        let idx = sample_indices(101, 15);
        assert_eq!((idx[0], *idx.last().unwrap(), idx.len()), (0, 100, 15));
    }

    #[test]
    fn synthetic_floor_is_small() {
        let data = synthetic_dataset();
        assert_eq!(data.count_kind(true), 1);
        let c = cost_full(
            &synthetic_search().expand().unwrap(),
            &data,
            &CostWeights::unit(),
        )
        .unwrap();
        assert!(c < 1e-4, "{c}");
    }

    #[test]
    fn surrogate_is_reproducible() {
        assert_eq!(hochstetten_surrogate(), hochstetten_surrogate());
    }
}
