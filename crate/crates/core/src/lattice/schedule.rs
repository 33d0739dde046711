//! Time dependence of local operators: constant, piecewise-constant or
//! pulse-modulated matrices.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::bump;
use crate::ops::{check_hermitian, hermitian_norm, matrix_serde, CMatrix};

/// Unit-interval envelope `ξ` with `∫₀¹ ξ = π/2` and `ξ(0) = ξ(1) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    /// `c·exp(-1/(1-(2s-1)²))`, i.e. `π η(2s - 1)` with the standard bump `η`.
    #[default]
    Bump,
    /// `π sin²(πs)`.
    SinSquared,
}

impl PulseShape {
    pub fn xi(&self, s: f64) -> f64 {
        if !(s > 0.0 && s < 1.0) {
            return 0.0;
        }
        match self {
            PulseShape::Bump => PI * bump(2.0 * s - 1.0),
            PulseShape::SinSquared => PI * (PI * s).sin().powi(2),
        }
    }

    /// Peak value `max ξ`, attained at `s = 1/2`.
    pub fn peak(&self) -> f64 {
        self.xi(0.5)
    }
}

/// `amplitude · ξ((t - start)/duration) / duration`; its time integral is
/// `amplitude · π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pulse {
    #[serde(default)]
    pub shape: PulseShape,
    pub start: f64,
    pub duration: f64,
    pub amplitude: f64,
}

impl Pulse {
    pub fn new(shape: PulseShape, start: f64, duration: f64, amplitude: f64) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite() && start.is_finite() && amplitude.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "pulse needs finite start/amplitude and positive duration (start {start}, duration {duration})"
            )));
        }
        Ok(Self { shape, start, duration, amplitude })
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * self.shape.xi((t - self.start) / self.duration) / self.duration
    }

    pub fn area(&self) -> f64 {
        self.amplitude * PI / 2.0
    }

    pub fn peak_time(&self) -> f64 {
        self.start + 0.5 * self.duration
    }
}

/// Scalar time dependence multiplying a fixed matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    One,
    /// Indicator of `[start, end)`.
    Window { start: f64, end: f64 },
    Pulse(Pulse),
}

impl Coefficient {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Coefficient::One => 1.0,
            Coefficient::Window { start, end } => {
                if t >= start && t < end {
                    1.0
                } else {
                    0.0
                }
            }
            Coefficient::Pulse(p) => p.value(t),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Coefficient::One)
    }

    /// Times at which the coefficient is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Coefficient::One => Vec::new(),
            Coefficient::Window { start, end } => vec![start, end],
            Coefficient::Pulse(p) => vec![p.start, p.end()],
        }
    }

    /// `[a, b)` outside of which the coefficient vanishes.
    pub fn active_interval(&self) -> (f64, f64) {
        match *self {
            Coefficient::One => (f64::NEG_INFINITY, f64::INFINITY),
            Coefficient::Window { start, end } => (start, end),
            Coefficient::Pulse(p) => (p.start, p.end()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchedulePiece {
    pub start: f64,
    pub end: f64,
    #[serde(with = "matrix_serde")]
    pub matrix: CMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulsedMatrix {
    pub pulse: Pulse,
    #[serde(with = "matrix_serde")]
    pub matrix: CMatrix,
}

/// A time-dependent Hermitian matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    Constant(#[serde(with = "matrix_serde")] CMatrix),
    /// Zero outside the listed `[start, end)` pieces.
    Piecewise(Vec<SchedulePiece>),
    /// Sum of pulse-modulated matrices.
    Pulsed(Vec<PulsedMatrix>),
}

impl Schedule {
    pub fn zero(dim: usize) -> Self {
        Schedule::Constant(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Schedule::Constant(m) => Some(m.nrows()),
            Schedule::Piecewise(p) => p.first().map(|x| x.matrix.nrows()),
            Schedule::Pulsed(p) => p.first().map(|x| x.matrix.nrows()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components().iter().all(|(_, m)| m.iter().all(|z| z.norm() == 0.0))
    }

    /// `(coefficient, matrix)` pairs whose sum is the schedule.
    pub fn components(&self) -> Vec<(Coefficient, &CMatrix)> {
        match self {
            Schedule::Constant(m) => vec![(Coefficient::One, m)],
            Schedule::Piecewise(p) => {
                p.iter().map(|x| (Coefficient::Window { start: x.start, end: x.end }, &x.matrix)).collect()
            }
            Schedule::Pulsed(p) => p.iter().map(|x| (Coefficient::Pulse(x.pulse), &x.matrix)).collect(),
        }
    }

    pub fn eval(&self, t: f64, dim: usize) -> CMatrix {
        let mut out = CMatrix::zeros(dim, dim);
        for (c, m) in self.components() {
            let v = c.value(t);
            if v != 0.0 {
                out += m * num_complex::Complex64::new(v, 0.0);
            }
        }
        out
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.components().iter().flat_map(|(c, _)| c.breakpoints()).collect()
    }

    /// Times at which norms are checked: piece starts and pulse peaks.
    fn check_times(&self) -> Vec<f64> {
        match self {
            Schedule::Constant(_) => vec![0.0],
            Schedule::Piecewise(p) => p.iter().map(|x| x.start).collect(),
            Schedule::Pulsed(p) => p.iter().map(|x| x.pulse.peak_time()).collect(),
        }
    }

    /// Dimension, Hermiticity and `‖·‖ <= 1` at the check times.
    pub fn validate(&self, dim: usize, what: &str) -> Result<()> {
        for (c, m) in self.components() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: m.nrows() });
            }
            check_hermitian(m)?;
            if let Coefficient::Window { start, end } = c {
                if !(start < end) {
                    return Err(Error::InvalidModel(format!("{what}: empty schedule piece [{start}, {end})")));
                }
            }
        }
        for t in self.check_times() {
            let n = hermitian_norm(&self.eval(t, dim));
            if n > 1.0 + 1e-12 {
                return Err(Error::InvalidModel(format!("{what}: operator norm {n} exceeds 1 at t = {t}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::quad::adaptive_simpson;
    use crate::ops::{sigma_x, sigma_z};
    use num_complex::Complex64 as C64;

    #[test]
    fn pulse_area_is_half_pi() {
        for shape in [PulseShape::Bump, PulseShape::SinSquared] {
            let area: f64 = adaptive_simpson(|s| shape.xi(s), 0.0, 1.0, 1e-13).unwrap();
            assert!((area - PI / 2.0).abs() < 1e-10, "{shape:?}: {area}");
            assert_eq!(shape.xi(0.0), 0.0);
            assert_eq!(shape.xi(1.0), 0.0);
        }
        let p = Pulse::new(PulseShape::Bump, 2.0, 0.5, 0.5).unwrap();
        let area: f64 = adaptive_simpson(|t| p.value(t), 2.0, 2.5, 1e-13).unwrap();
        assert!((area - p.area()).abs() < 1e-10);
    }

    #[test]
    fn piecewise_schedule_evaluates_pieces() {
        let s = Schedule::Piecewise(vec![
            SchedulePiece { start: 0.0, end: 1.0, matrix: sigma_x() * C64::new(0.5, 0.0) },
            SchedulePiece { start: 1.0, end: 2.0, matrix: sigma_z() * C64::new(0.5, 0.0) },
        ]);
        assert_eq!(s.eval(0.5, 2), sigma_x() * C64::new(0.5, 0.0));
        assert_eq!(s.eval(1.0, 2), sigma_z() * C64::new(0.5, 0.0));
        assert!(s.eval(2.0, 2).iter().all(|z| z.norm() == 0.0));
        assert!(s.validate(2, "h").is_ok());
        assert!(Schedule::Constant(sigma_x() * C64::new(2.0, 0.0)).validate(2, "h").is_err());
    }

    #[test]
    fn schedule_json_round_trip() {
        let s = Schedule::Pulsed(vec![PulsedMatrix {
            pulse: Pulse::new(PulseShape::SinSquared, 0.0, 1.0, 0.2).unwrap(),
            matrix: sigma_x(),
        }]);
        let text = serde_json::to_string(&s).unwrap();
        let back: Schedule = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
