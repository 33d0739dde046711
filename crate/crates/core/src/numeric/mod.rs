//! Numerical building blocks shared by the physics modules.

pub mod krylov;
pub mod quad;
pub mod sparse;

/// Shortest decimal form of `x` rounded to twelve significant digits.
pub fn fmt12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let v: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e15) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}
