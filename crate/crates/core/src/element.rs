//! Element-test drivers: oedometric and drained triaxial compression of an
//! axisymmetric sample, integrated with fixed-step explicit Euler.
//!
//! The rate law is first-order homogeneous in the stretching, so the axial
//! stretching is fixed to [`D1`] and test duration is expressed as pseudo-time.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    coeff_a, pykno_fd, stiffness_with, void_limits, ElementState, HypoParams, InvalidParams,
    ModelError,
};
use crate::num::Real;

/// Reference axial stretching shared by both drivers.
pub const D1: f64 = -1.0;

pub const DEFAULT_N_STEP: usize = 100;

/// A root of the triaxial norm quadratic counts as positive above this
/// multiple of `|D1|`.
pub const ROOT_POSITIVITY_TOL: f64 = 1e-12;

const TRIAXIAL_RESIDUAL_TOL: f64 = 1e-9;
const NORM_CONSISTENCY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestKind<T> {
    /// Radial strain prevented; runs until the void ratio reaches `e_fin`.
    Oedometer { e_fin: T },
    /// Constant radial stress; runs until the axial strain reaches `eps_fin`.
    TriaxialDrained { eps_fin: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSpec<T> {
    pub kind: TestKind<T>,
    pub initial: ElementState<T>,
    pub n_step: usize,
}

impl<T: Real> TestSpec<T> {
    pub fn oedometer(initial: ElementState<T>, e_fin: T) -> Self {
        Self {
            kind: TestKind::Oedometer { e_fin },
            initial,
            n_step: DEFAULT_N_STEP,
        }
    }

    pub fn triaxial(initial: ElementState<T>, eps_fin: T) -> Self {
        Self {
            kind: TestKind::TriaxialDrained { eps_fin },
            initial,
            n_step: DEFAULT_N_STEP,
        }
    }

    pub fn with_steps(mut self, n_step: usize) -> Self {
        self.n_step = n_step;
        self
    }

    pub fn is_oedometer(&self) -> bool {
        matches!(self.kind, TestKind::Oedometer { .. })
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_step == 0 {
            return Err(SimError::InvalidSpec("n_step must be positive"));
        }
        match self.kind {
            TestKind::Oedometer { e_fin } if !(e_fin <= self.initial.e) => Err(
                SimError::InvalidSpec("oedometer e_fin must not exceed the initial void ratio"),
            ),
            TestKind::Oedometer { e_fin } if !(e_fin > -T::one()) => {
                Err(SimError::InvalidSpec("oedometer e_fin must exceed -1"))
            }
            TestKind::TriaxialDrained { eps_fin } if !(eps_fin >= T::zero()) => Err(
                SimError::InvalidSpec("triaxial eps_fin must not be negative"),
            ),
            _ => Ok(()),
        }
    }
}

/// Matrix form of the axisymmetric rate equations:
/// `(Ṫ1, Ṫ2) = f_s·(L·(D1, D2) + f_d·N·√(D1² + 2D2²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisymRates<T> {
    pub l: [[T; 2]; 2],
    pub n: [T; 2],
    pub f_s: T,
    pub f_d: T,
}

impl<T: Real> AxisymRates<T> {
    pub fn stress_rate(&self, d1: T, d2: T) -> [T; 2] {
        let x = (d1 * d1 + T::lit(2.0) * d2 * d2).sqrt();
        self.stress_rate_with_norm(d1, d2, x)
    }

    fn stress_rate_with_norm(&self, d1: T, d2: T, x: T) -> [T; 2] {
        let row = |i: usize| {
            self.f_s * (self.l[i][0] * d1 + self.l[i][1] * d2 + self.f_d * self.n[i] * x)
        };
        [row(0), row(1)]
    }

    pub fn det_l(&self) -> T {
        self.l[0][0] * self.l[1][1] - self.l[0][1] * self.l[1][0]
    }
}

/// Expands the general law on `T = diag(T1, T2, T2)`, `D = diag(D1, D2, D2)`.
pub fn axisym_rates<T: Real>(
    state: &ElementState<T>,
    params: &HypoParams<T>,
) -> Result<AxisymRates<T>, ModelError> {
    let state = state.admit(params)?;
    let (t1, t2) = (state.t1, state.t2);
    let tr = state.trace();
    let limits = void_limits(params, tr)?;
    let a = coeff_a(params.phi_c)?;
    let f_s = stiffness_with(params, a, &limits, state.e, tr)?;
    let f_d = pykno_fd(state.e, &limits, params.alpha)?;

    let two = T::lit(2.0);
    let a2 = a * a;
    let sq = t1 * t1 + two * t2 * t2; // tr(T²)
    let k = tr * tr / sq;
    let l = [
        [
            k * (T::one() + a2 * t1 * t1 / (tr * tr)),
            two * a2 * t1 * t2 / sq,
        ],
        [
            a2 * t1 * t2 / sq,
            k * (T::one() + two * a2 * t2 * t2 / (tr * tr)),
        ],
    ];
    let third_a = a / T::lit(3.0);
    let n = [
        tr / sq * third_a * (T::lit(5.0) * t1 - two * t2),
        tr / sq * third_a * (T::lit(4.0) * t2 - t1),
    ];
    Ok(AxisymRates { l, n, f_s, f_d })
}

/// Rate of the state vector `(T1, T2, e)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRate<T> {
    pub t1_dot: T,
    pub t2_dot: T,
    pub e_dot: T,
}

/// Oedometer driver: `D1 = -1`, `D2 = 0`.
pub fn oedometer_rate<T: Real>(
    state: &ElementState<T>,
    params: &HypoParams<T>,
) -> Result<StateRate<T>, ModelError> {
    let r = axisym_rates(state, params)?;
    let d1 = T::lit(D1);
    let [t1_dot, t2_dot] = r.stress_rate_with_norm(d1, T::zero(), d1.abs());
    Ok(StateRate {
        t1_dot,
        t2_dot,
        e_dot: (T::one() + state.e) * d1,
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("stretching norm quadratic has {positive_roots} positive roots, expected exactly one")]
    NonUniqueRoot { positive_roots: usize },
    #[error("radial stress-rate residual {residual:e} exceeds tolerance")]
    Residual { residual: f64 },
}

/// Solution of the mixed triaxial problem at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriaxialRates<T> {
    pub t1_dot: T,
    /// Residual of the `Ṫ2 = 0` constraint.
    pub t2_dot: T,
    pub d2: T,
    /// Norm of the stretching, `√(D1² + 2D2²)`.
    pub x: T,
    pub e_dot: T,
    pub f_s: T,
}

/// Coefficients `[A, B, C]` of `A·x² + B·x + C = 0`, obtained by substituting
/// `D2 = -(f_d·N2·x + L21·D1)/L22` into `x² = D1² + 2·D2²`.
pub fn norm_quadratic<T: Real>(r: &AxisymRates<T>, d1: T) -> [T; 3] {
    let two = T::lit(2.0);
    let (l21, l22, n2, fd) = (r.l[1][0], r.l[1][1], r.n[1], r.f_d);
    [
        l22 * l22 - two * fd * fd * n2 * n2,
        -T::lit(4.0) * fd * n2 * l21 * d1,
        -(l22 * l22 + two * l21 * l21) * d1 * d1,
    ]
}

/// Real roots of `A·x² + B·x + C` via the cancellation-free form.
pub fn quadratic_roots<T: Real>([a, b, c]: [T; 3]) -> Vec<T> {
    if a == T::zero() {
        return if b == T::zero() { vec![] } else { vec![-c / b] };
    }
    let disc = b * b - T::lit(4.0) * a * c;
    if disc < T::zero() {
        return vec![];
    }
    let sign = if b < T::zero() { -T::one() } else { T::one() };
    let q = -T::lit(0.5) * (b + sign * disc.sqrt());
    if q == T::zero() {
        return vec![T::zero(), T::zero()];
    }
    vec![q / a, c / q]
}

/// Triaxial driver: `D1 = -1`, `Ṫ2 = 0`, solving for `D2` through the unique
/// positive root of the stretching-norm quadratic.
pub fn triaxial_rate<T: Real>(
    state: &ElementState<T>,
    params: &HypoParams<T>,
) -> Result<TriaxialRates<T>, RateError> {
    let r = axisym_rates(state, params)?;
    let d1 = T::lit(D1);
    let threshold = T::lit(ROOT_POSITIVITY_TOL) * d1.abs();
    let positive: Vec<T> = quadratic_roots(norm_quadratic(&r, d1))
        .into_iter()
        .filter(|&x| x > threshold)
        .collect();
    let x = match positive.as_slice() {
        [x] => *x,
        roots => {
            return Err(RateError::NonUniqueRoot {
                positive_roots: roots.len(),
            })
        }
    };
    let d2 = -(r.f_d * r.n[1] * x + r.l[1][0] * d1) / r.l[1][1];
    let [t1_dot, t2_dot] = r.stress_rate_with_norm(d1, d2, x);

    let residual_tol = T::lit(TRIAXIAL_RESIDUAL_TOL).max(T::epsilon() * T::lit(4096.0));
    if !(t2_dot.abs() <= residual_tol * r.f_s.abs()) {
        return Err(RateError::Residual {
            residual: (t2_dot / r.f_s).to_f64().unwrap_or(f64::NAN),
        });
    }
    let norm_tol = T::lit(NORM_CONSISTENCY_TOL).max(T::epsilon() * T::lit(4096.0));
    let norm_gap = (x - (d1 * d1 + T::lit(2.0) * d2 * d2).sqrt()).abs();
    if !(norm_gap <= norm_tol * d1.abs()) {
        return Err(RateError::Residual {
            residual: norm_gap.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(TriaxialRates {
        t1_dot,
        t2_dot,
        d2,
        x,
        e_dot: (T::one() + state.e) * (d1 + T::lit(2.0) * d2),
        f_s: r.f_s,
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid test specification: {0}")]
    InvalidSpec(&'static str),
    #[error(transparent)]
    InvalidParams(#[from] InvalidParams),
    /// The parameter set produced an inadmissible or non-unique response.
    #[error("simulation rejected at step {step}: {reason}")]
    Rejected { step: usize, reason: RateError },
}

/// Pseudo-time at which the test reaches its prescribed deformation.
pub fn integration_time<T: Real>(spec: &TestSpec<T>) -> Result<T, SimError> {
    spec.validate()?;
    Ok(match spec.kind {
        TestKind::Oedometer { e_fin } => {
            let e0 = spec.initial.e;
            -(T::one() - (e0 - e_fin) / (e0 + T::one())).ln()
        }
        TestKind::TriaxialDrained { eps_fin } => eps_fin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample<T> {
    pub t: T,
    pub t1: T,
    pub t2: T,
    pub e: T,
}

impl<T: Real> Sample<T> {
    pub fn state(&self) -> ElementState<T> {
        ElementState::new(self.t1, self.t2, self.e)
    }
}

/// Simulated response of one test: `n_step + 1` Euler states.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub samples: Vec<Sample<T>>,
    /// Number of steps whose void ratio was clamped back onto `[e_d, e_i]`.
    pub clamped_steps: usize,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn initial(&self) -> &Sample<T> {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample<T> {
        self.samples
            .last()
            .expect("trajectory holds the initial sample")
    }

    /// Axial strain; equals pseudo-time for `D1 = -1`.
    pub fn eps_a(&self, i: usize) -> T {
        self.samples[i].t * -T::lit(D1)
    }

    /// Deviatoric stress `q = T2 - T1`.
    pub fn q(&self, i: usize) -> T {
        self.samples[i].t2 - self.samples[i].t1
    }

    pub fn eps_v(&self, i: usize) -> T {
        let e0 = self.samples[0].e;
        (self.samples[i].e - e0) / (T::one() + e0)
    }
}

/// Runs one element test with `n_step` explicit Euler steps, checking
/// admissibility after every step.
pub fn simulate<T: Real>(
    spec: &TestSpec<T>,
    params: &HypoParams<T>,
) -> Result<Trajectory<T>, SimError> {
    params.validate()?;
    let t_f = integration_time(spec)?;
    let reject = |step: usize, reason: RateError| SimError::Rejected { step, reason };

    let mut state = spec
        .initial
        .admit(params)
        .map_err(|e| reject(0, e.into()))?;
    let mut clamped_steps = usize::from(state.e != spec.initial.e);
    let mut samples = Vec::with_capacity(spec.n_step + 1);
    samples.push(Sample {
        t: T::zero(),
        t1: state.t1,
        t2: state.t2,
        e: state.e,
    });
    if t_f == T::zero() {
        return Ok(Trajectory {
            samples,
            clamped_steps,
        });
    }

    let dt = t_f / T::from_usize(spec.n_step).expect("step count fits the scalar type");
    for step in 1..=spec.n_step {
        let rate = match spec.kind {
            TestKind::Oedometer { .. } => {
                oedometer_rate(&state, params).map_err(|e| reject(step, e.into()))?
            }
            TestKind::TriaxialDrained { .. } => {
                let r = triaxial_rate(&state, params).map_err(|e| reject(step, e))?;
                StateRate {
                    t1_dot: r.t1_dot,
                    t2_dot: r.t2_dot,
                    e_dot: r.e_dot,
                }
            }
        };
        let next = ElementState::new(
            state.t1 + rate.t1_dot * dt,
            state.t2 + rate.t2_dot * dt,
            state.e + rate.e_dot * dt,
        );
        if !(next.t1.is_finite() && next.t2.is_finite() && next.e.is_finite()) {
            return Err(reject(step, ModelError::Domain("non-finite state").into()));
        }
        let admitted = next.admit(params).map_err(|e| reject(step, e.into()))?;
        if admitted.e != next.e {
            clamped_steps += 1;
        }
        state = admitted;
        let t = if step == spec.n_step {
            t_f
        } else {
            dt * T::from_usize(step).expect("step index fits the scalar type")
        };
        samples.push(Sample {
            t,
            t1: state.t1,
            t2: state.t2,
            e: state.e,
        });
    }
    Ok(Trajectory {
        samples,
        clamped_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hochstetten() -> HypoParams<f64> {
        HypoParams::from_degrees(33.0, 1.0e6, 0.25, 0.55, 0.95, 1.05, 0.25, 1.5).unwrap()
    }

    #[test]
    fn isotropic_n_ratio_is_one() {
        let r = axisym_rates(&ElementState::new(-300.0, -300.0, 0.66), &hochstetten()).unwrap();
        assert!((r.n[0] / r.n[1] - 1.0).abs() < 1e-14);
        assert!(r.f_s > 0.0);
        assert!(r.det_l().abs() > 0.0);
        assert!(r
            .l
            .iter()
            .flatten()
            .chain(r.n.iter())
            .all(|v| v.is_finite()));
    }

    #[test]
    fn printed_coefficients_agree_except_l22() {
        let (t1, t2) = (-420.0_f64, -150.0_f64);
        let p = hochstetten();
        let r = axisym_rates(&ElementState::new(t1, t2, 0.7), &p).unwrap();
        let a = coeff_a(p.phi_c).unwrap();
        let tr = t1 + 2.0 * t2;
        let sq = t1 * t1 + 2.0 * t2 * t2;
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-13 * y.abs().max(1.0);
        assert!(close(
            r.l[0][0],
            tr * tr / sq * (1.0 + a * a * t1 * t1 / (tr * tr))
        ));
        assert!(close(r.l[0][1], 2.0 * a * a * t1 * t2 / sq));
        assert!(close(r.l[1][0], a * a * t1 * t2 / sq));
        assert!(close(r.n[0], tr / sq * a / 3.0 * (5.0 * t1 - 2.0 * t2)));
        assert!(close(r.n[1], tr / sq * a / 3.0 * (4.0 * t2 - t1)));
        let printed_l22 = 2.0 * a * a * t1 * t2 / sq * (1.0 + a * a * t2 * t2 / (tr * tr));
        assert!(!close(r.l[1][1], printed_l22));
    }

    #[test]
    fn oedometer_continuity() {
        let s = ElementState::new(-40.0, -20.0, 0.71);
        let r = oedometer_rate(&s, &hochstetten()).unwrap();
        assert_eq!(r.e_dot, -(1.0 + 0.71));
    }

    #[test]
    fn integration_times() {
        let init = ElementState::new(-10.0, -10.0, 0.73);
        let t: f64 = integration_time(&TestSpec::oedometer(init, 0.68)).unwrap();
        assert!((t - 0.029_327_615_094_52).abs() < 1e-12);
        assert_eq!(
            integration_time(&TestSpec::triaxial(init, 0.2)).unwrap(),
            0.2
        );
        assert_eq!(
            integration_time(&TestSpec::oedometer(init, 0.73)).unwrap(),
            0.0
        );
        assert!(integration_time(&TestSpec::oedometer(init, 0.75)).is_err());
        assert!(integration_time(&TestSpec::triaxial(init, -0.1)).is_err());
        assert!(integration_time(&TestSpec::triaxial(init, 0.1).with_steps(0)).is_err());
    }

    #[test]
    fn zero_length_test_is_initial_only() {
        let init = ElementState::new(-10.0, -10.0, 0.73);
        let traj = simulate(&TestSpec::oedometer(init, 0.73), &hochstetten()).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.samples[0].state(), init);
    }

    #[test]
    fn oedometer_validation_run() {
        let init = ElementState::new(-10.0, -10.0, 0.73);
        let spec = TestSpec::oedometer(init, 0.68);
        let traj = simulate(&spec, &hochstetten()).unwrap();
        assert_eq!(traj.len(), 101);
        let dt = integration_time(&spec).unwrap() / 100.0;
        // Euler on ė = -(1+e) lands within one step of the exact endpoint
        assert!((traj.last().e - 0.68).abs() < dt * (1.0 + 0.73));
        for w in traj.samples.windows(2) {
            assert!(w[1].e < w[0].e);
            assert!(-w[1].t1 > -w[0].t1);
            assert!(w[1].t > w[0].t);
        }
        assert_eq!(traj.last().t, integration_time(&spec).unwrap());
    }

    #[test]
    fn triaxial_isotropic_start() {
        let init = ElementState::new(-300.0, -300.0, 0.66);
        let traj = simulate(&TestSpec::triaxial(init, 0.11), &hochstetten()).unwrap();
        assert_eq!(traj.q(0), 0.0);
        assert_eq!(traj.eps_v(0), 0.0);
        assert!(traj.q(100) > 0.0);
        let drift = (traj.last().t2 - init.t2).abs() / init.t2.abs();
        assert!(drift <= 1e-3, "{drift}");
    }

    #[test]
    fn inadmissible_initial_state_is_rejected() {
        let init = ElementState::new(-100.0, -100.0, 1.2);
        let err = simulate(&TestSpec::triaxial(init, 0.1), &hochstetten()).unwrap_err();
        assert!(matches!(err, SimError::Rejected { step: 0, .. }));
    }

    #[test]
    fn quadratic_roots_cases() {
        let mut r = quadratic_roots([1.0, -3.0, 2.0]);
        r.sort_by(f64::total_cmp);
        assert_eq!(r, vec![1.0, 2.0]);
        assert!(quadratic_roots([1.0, 0.0, 1.0]).is_empty());
        assert_eq!(quadratic_roots([0.0, 2.0, -4.0]), vec![2.0]);
    }

    #[test]
    fn simulates_in_f32() {
        let p = HypoParams::<f32>::from_degrees(33.0, 1.0e6, 0.25, 0.55, 0.95, 1.05, 0.25, 1.5)
            .unwrap();
        let init = ElementState::new(-300.0_f32, -300.0, 0.66);
        let traj = simulate(&TestSpec::triaxial(init, 0.11), &p).unwrap();
        let reference = simulate(
            &TestSpec::triaxial(ElementState::new(-300.0, -300.0, 0.66), 0.11),
            &hochstetten(),
        )
        .unwrap();
        let rel = (traj.last().t1 as f64 / reference.last().t1 - 1.0).abs();
        assert!(rel < 1e-3, "{rel}");
    }
}
