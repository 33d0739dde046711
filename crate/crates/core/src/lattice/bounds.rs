//! Light-cone velocity and the explicit restriction-error bound.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_nonnegative(pairs: &[(&str, f64)]) -> Result<()> {
    for (name, v) in pairs {
        if !(*v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} must be finite and nonnegative, got {v}")));
        }
    }
    Ok(())
}

/// `v_LR = e a0 Z (1 + 56 TV(U))`.
pub fn lr_velocity(a0: f64, z: f64, tv_u: f64) -> Result<f64> {
    check_nonnegative(&[("a0", a0), ("Z", z), ("TV(U)", tv_u)])?;
    Ok(E * a0 * z * (1.0 + 56.0 * tv_u))
}

/// Arguments of the restriction-error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prop1Inputs {
    pub o_norm: f64,
    pub diam_x: f64,
    pub l: f64,
    /// `|t - t'|`.
    pub dt: f64,
    pub a0: f64,
    pub z: f64,
    pub tv_u: f64,
    pub d: u32,
}

fn check_inputs(p: &Prop1Inputs) -> Result<()> {
    check_nonnegative(&[
        ("‖O‖", p.o_norm),
        ("diam(X)", p.diam_x),
        ("l", p.l),
        ("|t - t'|", p.dt),
        ("a0", p.a0),
        ("Z", p.z),
        ("TV(U)", p.tv_u),
    ])?;
    if p.a0 == 0.0 {
        return Err(Error::InvalidArgument("a0 = 0: the bound needs interacting supports".into()));
    }
    if p.d == 0 {
        return Err(Error::InvalidArgument("lattice dimension must be at least 1".into()));
    }
    Ok(())
}

/// `‖O‖ (a0^d Z / (e v)) [(D + 2l + a0)^d - (D + 2l)^d] e^{-l/a0} (e^{v|t-t'|/a0} - 1)`
/// with `D = diam(X)` and `v = v_LR`.
pub fn prop1_bound(p: &Prop1Inputs) -> Result<f64> {
    check_inputs(p)?;
    let v = lr_velocity(p.a0, p.z, p.tv_u)?;
    let d = p.d as i32;
    let inner = p.diam_x + 2.0 * p.l;
    let shell = (inner + p.a0).powi(d) - inner.powi(d);
    let growth = (v * p.dt / p.a0).exp_m1();
    Ok(p.o_norm * p.a0.powi(d) * p.z / (E * v) * shell * (-p.l / p.a0).exp() * growth)
}

/// Natural logarithm of [`prop1_bound`], finite where the bound itself
/// overflows. Returns `-inf` when the bound is zero.
pub fn prop1_log_bound(p: &Prop1Inputs) -> Result<f64> {
    check_inputs(p)?;
    if p.o_norm == 0.0 || p.dt == 0.0 || p.z == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let v = lr_velocity(p.a0, p.z, p.tv_u)?;
    let d = p.d as i32;
    let inner = p.diam_x + 2.0 * p.l;
    let shell = (inner + p.a0).powi(d) - inner.powi(d);
    let x = v * p.dt / p.a0;
    // ln(e^x - 1) = x + ln(1 - e^{-x})
    let log_growth = x + (-(-x).exp_m1()).ln();
    Ok(p.o_norm.ln() + d as f64 * p.a0.ln() + p.z.ln() - 1.0 - v.ln() + shell.ln() - p.l / p.a0 + log_growth)
}

impl Prop1Inputs {
    pub fn bound(&self) -> Result<f64> {
        prop1_bound(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Prop1Inputs {
        Prop1Inputs { o_norm: 1.0, diam_x: 0.0, l: 5.0, dt: 0.01, a0: 1.0, z: 3.0, tv_u: 1.0, d: 1 }
    }

    #[test]
    fn velocity_examples() {
        assert!((lr_velocity(1.0, 3.0, 0.0).unwrap() - 3.0 * E).abs() < 1e-12);
        assert!((lr_velocity(1.0, 3.0, 1.0).unwrap() - 171.0 * E).abs() < 1e-10);
        assert!((lr_velocity(2.0, 5.0, 0.5).unwrap() - 290.0 * E).abs() < 1e-10);
        assert!(lr_velocity(-1.0, 3.0, 0.0).is_err());
    }

    #[test]
    fn bound_vanishes_trivially() {
        assert_eq!(prop1_bound(&Prop1Inputs { dt: 0.0, ..base() }).unwrap(), 0.0);
        assert_eq!(prop1_bound(&Prop1Inputs { o_norm: 0.0, ..base() }).unwrap(), 0.0);
        assert!(prop1_bound(&Prop1Inputs { a0: 0.0, ..base() }).is_err());
    }

    #[test]
    fn log_bound_agrees_and_survives_overflow() {
        let p = base();
        assert!((prop1_log_bound(&p).unwrap() - prop1_bound(&p).unwrap().ln()).abs() < 1e-12);
        let far = Prop1Inputs { dt: 50.0, ..base() };
        assert!(prop1_bound(&far).unwrap().is_infinite());
        let v = 171.0 * E;
        let want = 3f64.ln() - 1.0 - v.ln() - 5.0 + v * 50.0;
        assert!((prop1_log_bound(&far).unwrap() - want).abs() < 1e-9 * want);
    }

    #[test]
    fn bound_matches_hand_evaluation() {
        let p = base();
        let v = 171.0 * E;
        let want = 3.0 / (E * v) * (11.0 - 10.0) * (-5.0f64).exp() * ((v * 0.01).exp() - 1.0);
        assert!((prop1_bound(&p).unwrap() - want).abs() < 1e-12 * want);
    }
}
