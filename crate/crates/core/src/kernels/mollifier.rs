//! The standard bump `η(x) = A₀ exp(-1/(1-x²))` on `(-1, 1)`, its rescalings
//! `η_δ(x) = η(x/δ)/δ` and the convolutions `η_δ ⋆ η_δ'`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::numeric::quad::GaussLegendre;

fn unnormalized(x: f64) -> f64 {
    let s = 1.0 - x * x;
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// Normalization `A₀` making `∫η = 1` (≈ 2.2522836).
pub fn normalization() -> f64 {
    static A0: OnceLock<f64> = OnceLock::new();
    *A0.get_or_init(|| {
        let mass: f64 = gl16().integrate_composite(-1.0, 1.0, 64, unnormalized);
        1.0 / mass
    })
}

/// `η(x)`.
pub fn bump(x: f64) -> f64 {
    normalization() * unnormalized(x)
}

/// `η'(x)`.
pub fn bump_derivative(x: f64) -> f64 {
    let v = bump(x);
    if v == 0.0 {
        return 0.0;
    }
    let s = 1.0 - x * x;
    -2.0 * x / (s * s) * v
}

/// Nodes and weights `w_i η(x_i)` for the cosine transform of the bump.
fn fourier_table() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let rule = gl16();
        let panels = 64;
        let h = 2.0 / panels as f64;
        let mut t = Vec::with_capacity(panels * rule.nodes.len());
        for p in 0..panels {
            let a = -1.0 + h * p as f64;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let node = a + 0.5 * h * (x + 1.0);
                t.push((node, 0.5 * h * w * bump(node)));
            }
        }
        t
    })
}

/// `η̂(k) = ∫η(x) cos(kx) dx`, real because the bump is even.
pub fn bump_fourier(k: f64) -> f64 {
    fourier_table().iter().map(|&(x, w)| w * (k * x).cos()).sum()
}

/// The rescaled bump `η_δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    width: f64,
}

impl Mollifier {
    pub fn new(width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidArgument(format!("mollifier width must be positive, got {width}")));
        }
        Ok(Self { width })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn eval(&self, t: f64) -> f64 {
        bump(t / self.width) / self.width
    }

    pub fn derivative(&self, t: f64) -> f64 {
        bump_derivative(t / self.width) / (self.width * self.width)
    }

    /// `∫η_δ(t) e^{iωt} dt = η̂(ωδ)`.
    pub fn fourier(&self, omega: f64) -> f64 {
        bump_fourier(omega * self.width)
    }
}

const TABLE_INTERVALS: usize = 4096;

/// Tabulated `η_δ ⋆ η_δ'` with cubic Hermite interpolation; the table stores
/// values and exact derivatives, both computed by Gauss-Legendre quadrature.
#[derive(Debug, Clone)]
pub struct BumpConvolution {
    widths: (f64, f64),
    radius: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl BumpConvolution {
    pub fn new(delta: f64, delta_prime: f64) -> Result<Self> {
        let m1 = Mollifier::new(delta)?;
        let m2 = Mollifier::new(delta_prime)?;
        let radius = delta + delta_prime;
        let step = 2.0 * radius / TABLE_INTERVALS as f64;
        let rule = gl16();
        let mut values = Vec::with_capacity(TABLE_INTERVALS + 1);
        let mut slopes = Vec::with_capacity(TABLE_INTERVALS + 1);
        for i in 0..=TABLE_INTERVALS {
            let x = -radius + step * i as f64;
            let lo = (-delta).max(x - delta_prime);
            let hi = delta.min(x + delta_prime);
            if hi <= lo {
                values.push(0.0);
                slopes.push(0.0);
                continue;
            }
            let v: f64 = rule.integrate_composite(lo, hi, 32, |y| m1.eval(y) * m2.eval(x - y));
            let d: f64 = rule.integrate_composite(lo, hi, 32, |y| m1.eval(y) * m2.derivative(x - y));
            values.push(v);
            slopes.push(d);
        }
        values[0] = 0.0;
        values[TABLE_INTERVALS] = 0.0;
        Ok(Self { widths: (delta, delta_prime), radius, step, values, slopes })
    }

    pub fn widths(&self) -> (f64, f64) {
        self.widths
    }

    /// Support half-width `δ + δ'`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= -self.radius || x >= self.radius {
            return 0.0;
        }
        let u = (x + self.radius) / self.step;
        let i = (u.floor() as usize).min(TABLE_INTERVALS - 1);
        let s = u - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1;
        v.max(0.0)
    }

    /// Peak value `(η_δ ⋆ η_δ')(0)`.
    pub fn peak(&self) -> f64 {
        self.values[TABLE_INTERVALS / 2]
    }
}
