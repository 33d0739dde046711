//! Error estimates of the dilation and the mode-count estimator.

use std::f64::consts::{E, PI, SQRT_2};
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{normalization, ContinuousPart, MemoryKernel};
use crate::numeric::quad::{bisect, golden_max};

fn check(pairs: &[(&str, f64)]) -> Result<()> {
    for (name, v) in pairs {
        if !(*v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} must be finite and nonnegative, got {v}")));
        }
    }
    Ok(())
}

/// `M₀ = sup_{ω>0} ω² e^{-√ω}`, located numerically.
pub fn m0() -> f64 {
    static M0: OnceLock<f64> = OnceLock::new();
    *M0.get_or_init(|| golden_max(|w| w * w * (-w.sqrt()).exp(), 1.0, 100.0, 1e-12).1)
}

/// `γ₀ = 2¹⁰ A₀² M₀ / (e² π)`.
pub fn gamma0() -> f64 {
    1024.0 * normalization().powi(2) * m0() / (E * E * PI)
}

/// `8tnλ₀(2δ) + 8tn[1 + (4t + 32t TV(V))n] λ₁(2δ)` with
/// `λ₀(2δ) = 4 window_tv` and `λ₁(2δ) = 4δ TV(V)`; `window_tv` is
/// `Σ_{t'∈{0,t}} TV(V_c; [t' - 2δ, t' + 2δ])`.
pub fn regularization_error_bound(t: f64, n_terms: f64, tv_v: f64, window_tv: f64, delta: f64) -> Result<f64> {
    check(&[("t", t), ("n_terms", n_terms), ("TV(V)", tv_v), ("window TV", window_tv), ("δ", delta)])?;
    let lambda0 = 4.0 * window_tv;
    let lambda1 = 2.0 * (2.0 * delta) * tv_v;
    Ok(8.0 * t * n_terms * lambda0 + 8.0 * t * n_terms * (1.0 + (4.0 * t + 32.0 * t * tv_v) * n_terms) * lambda1)
}

/// The regularization bound with the window total variations taken from `v`.
pub fn regularization_error_bound_for_kernel(v: &MemoryKernel, t: f64, n_terms: f64, delta: f64) -> Result<f64> {
    let tv = v.total_variation(None)?;
    let vc = MemoryKernel::new(v.continuous().clone(), Vec::new())?;
    let mut windows = vc.total_variation(Some((-2.0 * delta, 2.0 * delta)))?;
    windows += vc.total_variation(Some((t - 2.0 * delta, t + 2.0 * delta)))?;
    regularization_error_bound(t, n_terms, tv, windows, delta)
}

/// `(4√γ₀/√(δ³ω_c)) t² n ‖O‖ TV(V) exp[-½(ω_c δ/16e)^{1/2}]`.
pub fn freq_cutoff_error_bound(t: f64, n_terms: f64, o_norm: f64, tv_v: f64, delta: f64, omega_c: f64) -> Result<f64> {
    check(&[("t", t), ("n_terms", n_terms), ("‖O‖", o_norm), ("TV(V)", tv_v)])?;
    if !(delta > 0.0 && omega_c > 0.0) {
        return Err(Error::InvalidArgument(format!("δ and ω_c must be positive, got {delta}, {omega_c}")));
    }
    let prefactor = 4.0 * gamma0().sqrt() / (delta.powi(3) * omega_c).sqrt();
    Ok(prefactor * t * t * n_terms * o_norm * tv_v * (-0.5 * (omega_c * delta / (16.0 * E)).sqrt()).exp())
}

/// `2√2 t² n ‖O‖ TV(V) (N_m/δ)(2eω_c t/N_m)^{N_m/2}`, evaluated in log space.
pub fn chain_truncation_error_bound(
    t: f64,
    n_terms: f64,
    o_norm: f64,
    tv_v: f64,
    n_m: usize,
    delta: f64,
    omega_c: f64,
) -> Result<f64> {
    check(&[("t", t), ("n_terms", n_terms), ("‖O‖", o_norm), ("TV(V)", tv_v), ("ω_c", omega_c)])?;
    if !(delta > 0.0) || n_m == 0 {
        return Err(Error::InvalidArgument(format!("need δ > 0 and N_m >= 1, got {delta}, {n_m}")));
    }
    let pre = 2.0 * SQRT_2 * t * t * n_terms * o_norm * tv_v;
    if pre == 0.0 || omega_c == 0.0 {
        return Ok(0.0);
    }
    let n = n_m as f64;
    let log = pre.ln() + (n / delta).ln() + 0.5 * n * (2.0 * E * omega_c * t / n).ln();
    Ok(log.exp())
}

/// `κ` with `Σ_{τ∈{0,t}} ∫_{τ-κ}^{τ+κ} U_c = 1/x`; `u_c` must be nonnegative.
pub fn kappa0_solve(x: f64, u_c: &ContinuousPart, t: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) || !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("need x > 0 and t >= 0, got x = {x}, t = {t}")));
    }
    let target = 1.0 / x;
    let window = |k: f64| -> Result<f64> { Ok(u_c.abs_integral(-k, k)? + u_c.abs_integral(t - k, t + k)?) };
    let saturation = 2.0 * u_c.abs_integral(f64::NEG_INFINITY, f64::INFINITY)?;
    if target >= saturation {
        return Err(Error::NoSolution { target, saturation });
    }
    let mut hi = 1.0;
    while window(hi)? < target {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::NoSolution { target, saturation });
        }
    }
    bisect(|k| Ok(window(k)? - target), 0.0, hi, 1e-12)
}

/// Order-of-magnitude mode count with unit asymptotic constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeCountEstimate {
    /// `t^{2d+3}/ε`.
    pub time_term: f64,
    /// `ε⁻¹ ln ε⁻¹`.
    pub precision_term: f64,
    /// `t / κ₀(x)` with `x = t^{d+1}/ε + t lnᵈ ε⁻¹`.
    pub memory_term: f64,
    pub kappa0: f64,
    pub modes: u64,
}

pub fn prop2_mode_count(eps: f64, t: f64, d: u32, u_c: &ContinuousPart) -> Result<ModeCountEstimate> {
    if !(eps > 0.0 && eps < 1.0) || !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("need 0 < ε < 1 and t > 0, got ε = {eps}, t = {t}")));
    }
    let inv = 1.0 / eps;
    let time_term = inv * t.powi(2 * d as i32 + 3);
    let precision_term = inv * inv.ln();
    let x = inv * t.powi(d as i32 + 1) + t * inv.ln().powi(d as i32);
    let kappa0 = kappa0_solve(x, u_c, t)?;
    let memory_term = t / kappa0;
    let total = time_term + precision_term + memory_term;
    Ok(ModeCountEstimate { time_term, precision_term, memory_term, kappa0, modes: total.ceil() as u64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Shape;

    #[test]
    fn m0_is_located_at_sixteen() {
        assert!((m0() - 256.0 * (-4.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn bounds_vanish_without_coupling() {
        assert_eq!(regularization_error_bound(1.0, 2.0, 0.0, 0.0, 0.1).unwrap(), 0.0);
        assert_eq!(freq_cutoff_error_bound(1.0, 2.0, 0.0, 1.0, 0.1, 10.0).unwrap(), 0.0);
        assert_eq!(chain_truncation_error_bound(0.0, 1.0, 1.0, 1.0, 10, 0.1, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn kappa0_for_exponential_tail() {
        let u = ContinuousPart::preset(Shape::Exponential { gamma: 1.0 }, 1.0.into()).unwrap();
        let k = kappa0_solve(2.0, &u, 100.0).unwrap();
        assert!((k - 2f64.ln()).abs() < 1e-9);
        assert!(matches!(kappa0_solve(0.5, &u, 100.0), Err(Error::NoSolution { .. })));
    }

    #[test]
    fn kappa0_for_flat_kernel() {
        let c = 0.25;
        let u = ContinuousPart::preset(Shape::Box { half_width: 1e6 }, c.into()).unwrap();
        for x in [1.0, 3.0, 10.0] {
            let k = kappa0_solve(x, &u, 5.0).unwrap();
            assert!((k - 1.0 / (4.0 * c * x)).abs() < 1e-9, "{x}: {k}");
        }
    }
}
