//! The von Wolffersdorff sand hypoplasticity law.
//!
//! Stresses follow the soil-mechanics-inverted sign convention of continuum
//! mechanics: compression is negative, so every admissible stress state has a
//! strictly negative trace. Friction angles are stored in radians.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Real;
use crate::tensor::Tensor3;

/// Relative band within which a void ratio just outside `[e_d, e_i]` is
/// clamped back instead of rejected.
pub const VOID_CLAMP_TOL: f64 = 1e-9;

/// Threshold on the distance of `T̂*` from an axisymmetric tensor below which
/// `F` takes its documented limit value of one.
pub const AXISYM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Inadmissibility {
    #[error("stress trace is not strictly compressive")]
    NonCompressive,
    #[error("void ratio below the minimal void ratio e_d")]
    BelowMinVoid,
    #[error("void ratio above the maximal void ratio e_i")]
    AboveMaxVoid,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("inadmissible state: {0}")]
    Inadmissible(#[from] Inadmissibility),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid parameter set: {0}")]
pub struct InvalidParams(pub &'static str);

/// The eight material constants of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypoParams<T> {
    /// Critical friction angle in radians.
    pub phi_c: T,
    /// Granular hardness in kPa.
    pub h_s: T,
    pub n: T,
    pub e_d0: T,
    pub e_c0: T,
    pub e_i0: T,
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> HypoParams<T> {
    /// Builds a validated parameter set; the friction angle is given in degrees.
    #[allow(clippy::too_many_arguments)]
    pub fn from_degrees(
        phi_c_deg: T,
        h_s: T,
        n: T,
        e_d0: T,
        e_c0: T,
        e_i0: T,
        alpha: T,
        beta: T,
    ) -> Result<Self, InvalidParams> {
        let p = Self {
            phi_c: phi_c_deg.to_radians(),
            h_s,
            n,
            e_d0,
            e_c0,
            e_i0,
            alpha,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn phi_c_deg(&self) -> T {
        self.phi_c.to_degrees()
    }

    pub fn validate(&self) -> Result<(), InvalidParams> {
        let zero = T::zero();
        let all = [
            self.phi_c, self.h_s, self.n, self.e_d0, self.e_c0, self.e_i0, self.alpha, self.beta,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(InvalidParams("non-finite parameter"));
        }
        if !(self.phi_c > zero && self.phi_c < T::FRAC_PI_2()) {
            return Err(InvalidParams("phi_c must lie in (0, 90) degrees"));
        }
        if self.h_s <= zero {
            return Err(InvalidParams("h_s must be positive"));
        }
        if !(self.n > zero && self.n < T::one()) {
            return Err(InvalidParams("n must lie in (0, 1)"));
        }
        if !(zero < self.e_d0 && self.e_d0 < self.e_c0 && self.e_c0 < self.e_i0) {
            return Err(InvalidParams(
                "void ratios must satisfy 0 < e_d0 < e_c0 < e_i0",
            ));
        }
        if self.alpha <= zero || self.beta <= zero {
            return Err(InvalidParams("alpha and beta must be positive"));
        }
        Ok(())
    }
}

/// The reduced set the optimizer acts on: `e_d0` and `e_i0` are tied to
/// `e_c0` through fixed ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams<T> {
    pub phi_c: T,
    pub h_s: T,
    pub n: T,
    pub e_c0: T,
    pub alpha: T,
    pub beta: T,
    /// e_d0 / e_c0
    pub lambda_d: T,
    /// e_i0 / e_c0
    pub lambda_i: T,
}

impl<T: Real> SearchParams<T> {
    pub fn expand(&self) -> Result<HypoParams<T>, InvalidParams> {
        if !(self.lambda_d > T::zero() && self.lambda_d < T::one() && self.lambda_i > T::one()) {
            return Err(InvalidParams(
                "ratios must satisfy 0 < lambda_d < 1 < lambda_i",
            ));
        }
        let p = HypoParams {
            phi_c: self.phi_c,
            h_s: self.h_s,
            n: self.n,
            e_d0: self.lambda_d * self.e_c0,
            e_c0: self.e_c0,
            e_i0: self.lambda_i * self.e_c0,
            alpha: self.alpha,
            beta: self.beta,
        };
        p.validate()?;
        Ok(p)
    }
}

/// Axisymmetric element state: axial stress, radial stress, void ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementState<T> {
    pub t1: T,
    pub t2: T,
    pub e: T,
}

impl<T: Real> ElementState<T> {
    pub fn new(t1: T, t2: T, e: T) -> Self {
        Self { t1, t2, e }
    }

    pub fn trace(&self) -> T {
        self.t1 + self.t2 + self.t2
    }

    pub fn stress_tensor(&self) -> Tensor3<T> {
        Tensor3::diag(self.t1, self.t2, self.t2)
    }

    /// Checks admissibility against `params`, returning the state with the
    /// void ratio clamped when it sits within the rounding band.
    pub fn admit(&self, params: &HypoParams<T>) -> Result<Self, ModelError> {
        if !(self.trace() < T::zero()) {
            return Err(Inadmissibility::NonCompressive.into());
        }
        let limits = void_limits(params, self.trace())?;
        Ok(Self {
            e: limits.admit(self.e)?,
            ..*self
        })
    }
}

/// Pressure-dependent minimal, critical and maximal void ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoidLimits<T> {
    pub e_d: T,
    pub e_c: T,
    pub e_i: T,
}

impl<T: Real> VoidLimits<T> {
    /// Returns `e` if it lies in `[e_d, e_i]`, the nearer bound if it is
    /// outside by no more than [`VOID_CLAMP_TOL`] relative, an error otherwise.
    pub fn admit(&self, e: T) -> Result<T, Inadmissibility> {
        let tol = T::tol(VOID_CLAMP_TOL);
        if !e.is_finite() {
            return Err(Inadmissibility::BelowMinVoid);
        }
        if e < self.e_d {
            if e >= self.e_d * (T::one() - tol) {
                Ok(self.e_d)
            } else {
                Err(Inadmissibility::BelowMinVoid)
            }
        } else if e > self.e_i {
            if e <= self.e_i * (T::one() + tol) {
                Ok(self.e_i)
            } else {
                Err(Inadmissibility::AboveMaxVoid)
            }
        } else {
            Ok(e)
        }
    }
}

/// Matsuoka–Nakai coefficient `a(φ_c)`.
pub fn coeff_a<T: Real>(phi_c: T) -> Result<T, ModelError> {
    let s = phi_c.sin();
    if !(s > T::zero()) {
        return Err(ModelError::Domain("sin(phi_c) must be positive"));
    }
    let three = T::lit(3.0);
    Ok(three.sqrt() * (three - s) / (T::lit(2.0) * T::SQRT_2() * s))
}

/// Bauer's compression law: all three limits scale with
/// `exp[-(-tr T / h_s)^n]`.
pub fn void_limits<T: Real>(params: &HypoParams<T>, tr_t: T) -> Result<VoidLimits<T>, ModelError> {
    if tr_t > T::zero() {
        return Err(ModelError::Domain("stress trace must not be tensile"));
    }
    let ratio = (-(-tr_t / params.h_s).powf(params.n)).exp();
    Ok(VoidLimits {
        e_d: params.e_d0 * ratio,
        e_c: params.e_c0 * ratio,
        e_i: params.e_i0 * ratio,
    })
}

/// Pyknotropy factor `f_d = ((e - e_d)/(e_c - e_d))^α`.
pub fn pykno_fd<T: Real>(e: T, limits: &VoidLimits<T>, alpha: T) -> Result<T, ModelError> {
    let base = (e - limits.e_d) / (limits.e_c - limits.e_d);
    if base < T::zero() {
        return Err(Inadmissibility::BelowMinVoid.into());
    }
    Ok(base.powf(alpha))
}

/// Combined barotropy/pyknotropy stiffness factor `f_s = f_b·f_e`, in kPa.
pub fn stiffness_fs<T: Real>(params: &HypoParams<T>, e: T, tr_t: T) -> Result<T, ModelError> {
    if tr_t >= T::zero() {
        return Err(Inadmissibility::NonCompressive.into());
    }
    if e <= T::zero() {
        return Err(ModelError::Domain("void ratio must be positive"));
    }
    let limits = void_limits(params, tr_t)?;
    let a = coeff_a(params.phi_c)?;
    stiffness_with(params, a, &limits, e, tr_t)
}

pub(crate) fn stiffness_with<T: Real>(
    params: &HypoParams<T>,
    a: T,
    limits: &VoidLimits<T>,
    e: T,
    tr_t: T,
) -> Result<T, ModelError> {
    let three = T::lit(3.0);
    let e_i = limits.e_i;
    let pykno0 = ((params.e_i0 - params.e_d0) / (params.e_c0 - params.e_d0)).powf(params.alpha);
    let denom = three + a * a - a * three.sqrt() * pykno0;
    if !(denom > T::zero()) {
        return Err(ModelError::Domain("f_s denominator is not positive"));
    }
    let num = params.h_s / params.n * (T::one() + e_i) / e_i
        * (e_i / e).powf(params.beta)
        * (-tr_t / params.h_s).powf(T::one() - params.n);
    Ok(num / denom)
}

/// Deviatoric shape factor `F` of the limit surface.
///
/// Axisymmetric and hydrostatic stresses return exactly one, the limit the
/// general expression tends to there.
pub fn factor_f<T: Real>(stress: &Tensor3<T>) -> Result<T, ModelError> {
    let tr = stress.trace();
    if tr >= T::zero() {
        return Err(Inadmissibility::NonCompressive.into());
    }
    let t_hat = stress.scale(T::one() / tr);
    let dev = t_hat - Tensor3::identity().scale(T::one() / T::lit(3.0));
    if axisym_distance(&dev) < T::tol(AXISYM_TOL) {
        return Ok(T::one());
    }
    let two = T::lit(2.0);
    let tan_psi = T::lit(3.0).sqrt() * dev.norm();
    let dev2 = dev.matmul(&dev);
    let tr2 = dev2.trace();
    let tr3 = dev2.matmul(&dev).trace();
    let cos3 = (-T::lit(6.0).sqrt() * tr3 / tr2.powf(T::lit(1.5)))
        .max(-T::one())
        .min(T::one());
    let t2 = tan_psi * tan_psi;
    let den = two + T::SQRT_2() * tan_psi * cos3;
    let arg = t2 / T::lit(8.0) + (two - t2) / den;
    if !(den > T::zero()) || !(arg >= T::zero()) {
        return Err(ModelError::Domain("stress state outside the limit surface"));
    }
    Ok(arg.sqrt() - tan_psi / (two * T::SQRT_2()))
}

/// Smallest distance from `dev` to a diagonal tensor with two equal entries.
fn axisym_distance<T: Real>(dev: &Tensor3<T>) -> T {
    let mut off = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                off = off + dev[(i, j)] * dev[(i, j)];
            }
        }
    }
    let d = [dev[(0, 0)], dev[(1, 1)], dev[(2, 2)]];
    let half = T::lit(0.5);
    let best = (0..3)
        .map(|axis| {
            let (j, k) = ((axis + 1) % 3, (axis + 2) % 3);
            let diff = d[j] - d[k];
            // distance of (d_j, d_k) from their mean, squared
            half * diff * diff
        })
        .fold(T::infinity(), T::min);
    (off + best).sqrt()
}

/// Objective stress rate and void-ratio rate for a general 3×3 state with
/// vanishing spin.
pub fn rate_general<T: Real>(
    stress: &Tensor3<T>,
    stretching: &Tensor3<T>,
    e: T,
    params: &HypoParams<T>,
) -> Result<(Tensor3<T>, T), ModelError> {
    let tr = stress.trace();
    if !(tr < T::zero()) {
        return Err(Inadmissibility::NonCompressive.into());
    }
    let limits = void_limits(params, tr)?;
    let e = limits.admit(e)?;
    let a = coeff_a(params.phi_c)?;
    let f_s = stiffness_with(params, a, &limits, e, tr)?;
    let f_d = pykno_fd(e, &limits, params.alpha)?;
    let f = factor_f(stress)?;

    let t_hat = stress.scale(T::one() / tr);
    let dev = t_hat - Tensor3::identity().scale(T::one() / T::lit(3.0));
    let tr_hat2 = t_hat.inner(&t_hat);
    let d_norm = stretching.norm();

    let linear = stretching.scale(f * f) + t_hat.scale(a * a * t_hat.inner(stretching));
    let nonlinear = (t_hat + dev).scale(f_d * a * f * d_norm);
    let t_dot = (linear + nonlinear).scale(f_s / tr_hat2);
    let e_dot = (T::one() + e) * stretching.trace();
    Ok((t_dot, e_dot))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hochstetten() -> HypoParams<f64> {
        HypoParams::from_degrees(33.0, 1.0e6, 0.25, 0.55, 0.95, 1.05, 0.25, 1.5).unwrap()
    }

    #[test]
    fn coeff_a_values() {
        assert!((coeff_a(30f64.to_radians()).unwrap() - 3.061862178).abs() < 1e-8);
        assert!((coeff_a(33f64.to_radians()).unwrap() - 2.760719078).abs() < 1e-8);
        let limit = 3f64.sqrt() * 2.0 / (2.0 * 2f64.sqrt());
        assert!((coeff_a(std::f64::consts::FRAC_PI_2).unwrap() - limit).abs() < 1e-12);
        assert!(coeff_a(0.0_f64).is_err());
        assert!(coeff_a(-0.1_f64).is_err());
    }

    #[test]
    fn coeff_a_strictly_decreasing() {
        let grid: Vec<f64> = (1..=100)
            .map(|k| k as f64 / 101.0 * std::f64::consts::FRAC_PI_2)
            .collect();
        for w in grid.windows(2) {
            assert!(coeff_a(w[1]).unwrap() < coeff_a(w[0]).unwrap());
        }
    }

    #[test]
    fn void_limits_reference_and_pressure() {
        let p = hochstetten();
        let l0 = void_limits(&p, 0.0).unwrap();
        assert_eq!((l0.e_d, l0.e_c, l0.e_i), (0.55, 0.95, 1.05));
        let l = void_limits(&p, -900.0).unwrap();
        assert!((l.e_c / 0.95 - 0.840965131393).abs() < 1e-10);
        assert!((l.e_c - 0.798916874823).abs() < 1e-10);
        assert!(void_limits(&p, 1.0).is_err());
    }

    #[test]
    fn pykno_fd_edges() {
        let l = VoidLimits {
            e_d: 0.5,
            e_c: 0.9,
            e_i: 1.0,
        };
        assert_eq!(pykno_fd(0.9, &l, 0.25).unwrap(), 1.0);
        assert_eq!(pykno_fd(0.5, &l, 0.25).unwrap(), 0.0);
        assert!((pykno_fd(0.7_f64, &l, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(pykno_fd(0.49, &l, 0.25).is_err());
    }

    #[test]
    fn fs_matches_independent_evaluation() {
        // 30-digit evaluation of the f_s expression at trT = -30 kPa, e = 0.73
        let fs = stiffness_fs(&hochstetten(), 0.73, -30.0).unwrap();
        assert!((fs / FS_REF_HOCH_30 - 1.0).abs() < 1e-12, "{fs}");
    }

    #[test]
    fn fs_beta_zero_drops_density_factor() {
        let mut p = hochstetten();
        let fs_a = stiffness_fs(&p, 0.9, -100.0).unwrap();
        p.beta = 0.0;
        let fs0 = stiffness_fs(&p, 0.9, -100.0).unwrap();
        let l = void_limits(&p, -100.0).unwrap();
        assert!((fs_a / fs0 - (l.e_i / 0.9).powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn void_clamp_band() {
        let l = VoidLimits {
            e_d: 0.5,
            e_c: 0.9,
            e_i: 1.0,
        };
        assert_eq!(l.admit(0.5 * (1.0 - 1e-12)).unwrap(), 0.5);
        assert_eq!(l.admit(1.0 + 1e-12).unwrap(), 1.0);
        assert_eq!(l.admit(0.49), Err(Inadmissibility::BelowMinVoid));
        assert_eq!(l.admit(1.01), Err(Inadmissibility::AboveMaxVoid));
    }

    #[test]
    fn factor_f_limits() {
        let iso = Tensor3::diag(-100.0, -100.0, -100.0);
        assert_eq!(factor_f(&iso).unwrap(), 1.0);
        let axi = Tensor3::diag(-300.0, -100.0, -100.0);
        assert_eq!(factor_f(&axi).unwrap(), 1.0);
        let axi_other_axis = Tensor3::diag(-100.0, -100.0, -250.0);
        assert_eq!(factor_f(&axi_other_axis).unwrap(), 1.0);
        let mut rotated = Tensor3::diag(-200.0, -200.0, -200.0);
        rotated[(0, 1)] = 0.0;
        assert_eq!(factor_f(&rotated).unwrap(), 1.0);
    }

    #[test]
    fn factor_f_general_state_below_one() {
        // true triaxial state between compression and extension meridians
        let t = Tensor3::diag(-300.0, -200.0, -100.0);
        let f = factor_f(&t).unwrap();
        assert!(f > 0.0 && f < 1.0, "{f}");
        // approaching the compression meridian recovers the axisymmetric value
        let near = Tensor3::diag(-300.0_f64, -100.0 - 1e-6, -100.0);
        assert!((factor_f(&near).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rate_zero_stretching() {
        let t = Tensor3::diag(-150.0, -100.0, -100.0);
        let (td, ed) = rate_general(&t, &Tensor3::zero(), 0.7, &hochstetten()).unwrap();
        assert_eq!(td, Tensor3::zero());
        assert_eq!(ed, 0.0);
    }

    #[test]
    fn rate_rejects_inadmissible() {
        let p = hochstetten();
        let d = Tensor3::diag(-1.0, 0.0, 0.0);
        let tension = Tensor3::diag(10.0, -1.0, -1.0);
        assert!(rate_general(&tension, &d, 0.7, &p).is_err());
        let t = Tensor3::diag(-100.0, -100.0, -100.0);
        assert_eq!(
            rate_general(&t, &d, 0.3, &p).unwrap_err(),
            ModelError::Inadmissible(Inadmissibility::BelowMinVoid)
        );
        assert_eq!(
            rate_general(&t, &d, 1.2, &p).unwrap_err(),
            ModelError::Inadmissible(Inadmissibility::AboveMaxVoid)
        );
    }

    #[test]
    fn search_params_expand() {
        let s = SearchParams {
            phi_c: 34f64.to_radians(),
            h_s: 3.8e6,
            n: 0.3,
            e_c0: 0.886,
            alpha: 0.144,
            beta: 1.5,
            lambda_d: 0.6,
            lambda_i: 1.2,
        };
        let p = s.expand().unwrap();
        assert!((p.e_d0 - 0.5316).abs() < 1e-12);
        assert!((p.e_i0 - 1.0632).abs() < 1e-12);
        let bad = SearchParams { lambda_i: 0.9, ..s };
        assert!(bad.expand().is_err());
    }

    #[test]
    fn param_validation() {
        assert!(HypoParams::from_degrees(33.0, 1e6, 0.25, 0.95, 0.55, 1.05, 0.25, 1.5).is_err());
        assert!(HypoParams::from_degrees(95.0, 1e6, 0.25, 0.55, 0.95, 1.05, 0.25, 1.5).is_err());
        assert!(HypoParams::from_degrees(33.0, 1e6, 1.25, 0.55, 0.95, 1.05, 0.25, 1.5).is_err());
        assert!(HypoParams::from_degrees(33.0, -1.0, 0.25, 0.55, 0.95, 1.05, 0.25, 1.5).is_err());
    }

    const FS_REF_HOCH_30: f64 = 911.008_475_582_116_4;
}
