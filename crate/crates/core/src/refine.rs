//! Step-refinement study of the explicit integrator.

use serde::{Deserialize, Serialize};

use crate::element::{simulate, triaxial_rate, RateError, SimError, TestSpec, Trajectory};
use crate::model::HypoParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub steps: Vec<usize>,
    /// Final states `[T1, T2, e]` at each step count.
    pub finals: Vec<[f64; 3]>,
    /// Scaled differences between successive refinements.
    pub differences: Vec<f64>,
    /// Observed orders `log2(d_k / d_{k+1})`.
    pub orders: Vec<f64>,
}

impl RefinementStudy {
    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn scaled_gap(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3)
        .map(|k| (a[k] - b[k]).abs() / a[k].abs().max(b[k].abs()).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Runs `spec` with `n_step·2^k` steps for `k < levels` and estimates the
/// convergence order from the end states.
pub fn refinement_study(
    spec: &TestSpec<f64>,
    params: &HypoParams<f64>,
    levels: usize,
) -> Result<RefinementStudy, SimError> {
    let steps: Vec<usize> = (0..levels).map(|k| spec.n_step << k).collect();
    let finals = steps
        .iter()
        .map(|&n| {
            let s = simulate(&spec.with_steps(n), params)?.last().state();
            Ok([s.t1, s.t2, s.e])
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    let differences: Vec<f64> = finals
        .windows(2)
        .map(|w| scaled_gap(&w[0], &w[1]))
        .collect();
    let orders = differences
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .collect();
    Ok(RefinementStudy {
        steps,
        finals,
        differences,
        orders,
    })
}

/// Largest `|Ṫ2| / |f_s|` over the states at which a triaxial trajectory
/// evaluated its rates.
pub fn max_radial_residual(
    traj: &Trajectory<f64>,
    params: &HypoParams<f64>,
) -> Result<f64, RateError> {
    let mut worst = 0.0f64;
    for s in &traj.samples[..traj.len().saturating_sub(1)] {
        let r = triaxial_rate(&s.state(), params)?;
        worst = worst.max((r.t2_dot / r.f_s).abs());
    }
    Ok(worst)
}
