//! Continuous parts `K_c` of memory kernels.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::mollifier::BumpConvolution;
use super::Atom;
use crate::error::{Error, Result};
use crate::numeric::quad::{adaptive_simpson_split, GaussLegendre};

/// Absolute quadrature tolerance for kernel integrals.
pub const KERNEL_TOL: f64 = 1e-10;

/// Infinite-support presets are cut where `|K_c|` falls below this fraction
/// of its peak.
pub const TRUNCATION: f64 = 1e-14;

/// Closed-form continuous kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    /// `(γ/2) e^{-γ|τ|}`; unit total variation.
    Exponential { gamma: f64 },
    /// `(α ω_c²/2π) / (1 + i ω_c τ)²`, whose transform is `α ω e^{-ω/ω_c}` for `ω > 0`.
    Ohmic { alpha: f64, cutoff: f64 },
    /// Indicator of `[-w, w]`.
    Box { half_width: f64 },
}

impl Shape {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Shape::Exponential { gamma } => gamma > 0.0 && gamma.is_finite(),
            Shape::Ohmic { alpha, cutoff } => alpha >= 0.0 && alpha.is_finite() && cutoff > 0.0 && cutoff.is_finite(),
            Shape::Box { half_width } => half_width > 0.0 && half_width.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid preset parameters {self:?}")))
        }
    }

    pub fn eval(&self, t: f64) -> C64 {
        match *self {
            Shape::Exponential { gamma } => C64::new(0.5 * gamma * (-gamma * t.abs()).exp(), 0.0),
            Shape::Ohmic { alpha, cutoff } => {
                let d = C64::new(1.0, cutoff * t);
                C64::new(alpha * cutoff * cutoff / (2.0 * PI), 0.0) / (d * d)
            }
            Shape::Box { half_width } => {
                if t.abs() <= half_width {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
        }
    }

    pub fn peak_modulus(&self) -> f64 {
        match *self {
            Shape::Exponential { gamma } => 0.5 * gamma,
            Shape::Ohmic { alpha, cutoff } => alpha * cutoff * cutoff / (2.0 * PI),
            Shape::Box { .. } => 1.0,
        }
    }

    /// Radius beyond which `|K_c| < TRUNCATION · peak`.
    pub fn truncation_radius(&self) -> f64 {
        match *self {
            Shape::Exponential { gamma } => -TRUNCATION.ln() / gamma,
            Shape::Ohmic { cutoff, .. } => (1.0 / TRUNCATION - 1.0).sqrt() / cutoff,
            Shape::Box { half_width } => half_width,
        }
    }

    /// `∫_0^x |K_c|`.
    fn abs_antiderivative(&self, x: f64) -> f64 {
        match *self {
            Shape::Exponential { gamma } => 0.5 * x.signum() * (1.0 - (-gamma * x.abs()).exp()),
            Shape::Ohmic { alpha, cutoff } => alpha * cutoff / (2.0 * PI) * (cutoff * x).atan(),
            Shape::Box { half_width } => x.clamp(-half_width, half_width),
        }
    }

    pub fn abs_integral(&self, a: f64, b: f64) -> f64 {
        self.abs_antiderivative(b) - self.abs_antiderivative(a)
    }

    /// `∫ K_c(τ) e^{iωτ} dτ` over the whole line.
    pub fn fourier(&self, omega: f64) -> C64 {
        match *self {
            Shape::Exponential { gamma } => C64::new(gamma * gamma / (gamma * gamma + omega * omega), 0.0),
            Shape::Ohmic { alpha, cutoff } => {
                if omega > 0.0 {
                    C64::new(alpha * omega * (-omega / cutoff).exp(), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            Shape::Box { half_width } => {
                if omega == 0.0 {
                    C64::new(2.0 * half_width, 0.0)
                } else {
                    C64::new(2.0 * (omega * half_width).sin() / omega, 0.0)
                }
            }
        }
    }

    fn features(&self) -> Vec<f64> {
        match *self {
            Shape::Exponential { .. } | Shape::Ohmic { .. } => vec![0.0],
            Shape::Box { half_width } => vec![-half_width, half_width],
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            Shape::Exponential { gamma } => 1.0 / gamma,
            Shape::Ohmic { cutoff, .. } => 1.0 / cutoff,
            Shape::Box { half_width } => half_width,
        }
    }
}

/// Uniformly sampled values with linear interpolation, zero outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGrid {
    start: f64,
    step: f64,
    values: Vec<C64>,
}

impl SampledGrid {
    pub fn new(start: f64, step: f64, values: Vec<C64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidArgument("a sampled grid needs at least two values".into()));
        }
        if !(step > 0.0 && step.is_finite() && start.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid grid start {start} / step {step}")));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::DivergentKernel("sampled grid contains non-finite values".into()));
        }
        Ok(Self { start, step, values })
    }

    /// Samples `f` on `2^10` intervals of `[a, b]` unless `intervals` is given.
    pub fn sample<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, intervals: Option<usize>) -> Result<Self> {
        if !(b > a) {
            return Err(Error::InvalidArgument(format!("empty sampling interval [{a}, {b}]")));
        }
        let n = intervals.unwrap_or(1 << 10).max(1);
        let step = (b - a) / n as f64;
        Self::new(a, step, (0..=n).map(|i| f(a + step * i as f64)).collect())
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> C64 {
        let u = (t - self.start) / self.step;
        let last = self.values.len() - 1;
        if !(u >= 0.0 && u <= last as f64) {
            return C64::new(0.0, 0.0);
        }
        let i = (u.floor() as usize).min(last - 1);
        let s = u - i as f64;
        self.values[i] * (1.0 - s) + self.values[i + 1] * s
    }

    fn nodes(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.start + self.step * i as f64).collect()
    }
}

/// `(base + atoms) ⋆ η_δ ⋆ η_δ'`, evaluated on demand.
#[derive(Debug, Clone)]
pub struct MollifiedPart {
    base: ContinuousPart,
    atoms: Vec<Atom>,
    bump: Arc<BumpConvolution>,
    base_cuts: Vec<f64>,
    base_support: Option<(f64, f64)>,
}

fn gl(n: usize) -> &'static GaussLegendre {
    static G4: OnceLock<GaussLegendre> = OnceLock::new();
    static G16: OnceLock<GaussLegendre> = OnceLock::new();
    if n <= 4 {
        G4.get_or_init(|| GaussLegendre::new(4))
    } else {
        G16.get_or_init(|| GaussLegendre::new(16))
    }
}

impl MollifiedPart {
    pub fn new(base: ContinuousPart, atoms: Vec<Atom>, bump: Arc<BumpConvolution>) -> Self {
        let base_cuts = base.cut_points();
        let base_support = base.support();
        Self { base, atoms, bump, base_cuts, base_support }
    }

    pub fn base(&self) -> &ContinuousPart {
        &self.base
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bump(&self) -> &BumpConvolution {
        &self.bump
    }

    fn eval(&self, t: f64) -> C64 {
        let r = self.bump.radius();
        let mut acc = C64::new(0.0, 0.0);
        for a in &self.atoms {
            if (t - a.location).abs() < r {
                acc += a.weight * self.bump.eval(t - a.location);
            }
        }
        let Some((s0, s1)) = self.base_support else {
            return acc;
        };
        let lo = (t - r).max(s0);
        let hi = (t + r).min(s1);
        if hi <= lo {
            return acc;
        }
        let first = self.base_cuts.partition_point(|&c| c <= lo);
        let last = self.base_cuts.partition_point(|&c| c < hi);
        let mut edges = Vec::with_capacity(last - first + 2);
        edges.push(lo);
        edges.extend_from_slice(&self.base_cuts[first..last]);
        edges.push(hi);
        let max_len = r / 4.0;
        let integrand = |s: f64| self.base.eval(s) * self.bump.eval(t - s);
        for w in edges.windows(2) {
            let len = w[1] - w[0];
            if len <= 0.0 {
                continue;
            }
            let pieces = (len / max_len).ceil().max(1.0) as usize;
            let rule = if len < r / 16.0 { gl(4) } else { gl(16) };
            acc += rule.integrate_composite(w[0], w[1], pieces, integrand);
        }
        acc
    }

    fn support(&self) -> Option<(f64, f64)> {
        let r = self.bump.radius();
        let mut hull: Option<(f64, f64)> = self.base_support.map(|(a, b)| (a - r, b + r));
        for a in &self.atoms {
            let (lo, hi) = (a.location - r, a.location + r);
            hull = Some(match hull {
                None => (lo, hi),
                Some((x, y)) => (x.min(lo), y.max(hi)),
            });
        }
        hull
    }

    fn cut_points(&self) -> Vec<f64> {
        let r = self.bump.radius();
        let mut cuts = self.base_cuts.clone();
        for a in &self.atoms {
            cuts.extend([a.location - r, a.location, a.location + r]);
        }
        if let Some((a, b)) = self.support() {
            // resolve the bump scale across the whole support
            let n = ((b - a) / (0.25 * r)).ceil().min(1e5) as usize;
            if n <= 4096 {
                cuts.extend((1..n).map(|k| a + (b - a) * k as f64 / n as f64));
            }
        }
        sort_dedup(cuts)
    }
}

/// The continuous part of a kernel. Compositions are evaluated lazily.
#[derive(Debug, Clone, Default)]
pub enum ContinuousPart {
    #[default]
    Zero,
    Preset { shape: Shape, scale: C64 },
    Grid(Arc<SampledGrid>),
    /// Pointwise maximum of the moduli of the parts (real, nonnegative).
    Envelope(Arc<Vec<ContinuousPart>>),
    Mollified(Arc<MollifiedPart>),
    /// `factor · base(±τ)`.
    Transformed { base: Arc<ContinuousPart>, factor: C64, reflect: bool },
}

fn sort_dedup(mut v: Vec<f64>) -> Vec<f64> {
    v.retain(|x| x.is_finite());
    v.sort_by(f64::total_cmp);
    v.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + x.abs()));
    v
}

/// Geometric ladder of cut points around `center`, from `scale` out to `radius`.
fn graded(center: f64, scale: f64, radius: f64) -> Vec<f64> {
    let mut out = vec![center];
    let mut s = scale / 8.0;
    while s < radius {
        out.push(center - s);
        out.push(center + s);
        s *= 2.0;
    }
    out
}

impl ContinuousPart {
    pub fn preset(shape: Shape, scale: C64) -> Result<Self> {
        shape.validate()?;
        Ok(ContinuousPart::Preset { shape, scale })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ContinuousPart::Zero => true,
            ContinuousPart::Preset { shape, scale } => *scale == C64::new(0.0, 0.0) || shape.peak_modulus() == 0.0,
            ContinuousPart::Grid(g) => g.values.iter().all(|v| *v == C64::new(0.0, 0.0)),
            ContinuousPart::Envelope(parts) => parts.iter().all(|p| p.is_zero()),
            ContinuousPart::Mollified(m) => m.base.is_zero() && m.atoms.is_empty(),
            ContinuousPart::Transformed { base, factor, .. } => *factor == C64::new(0.0, 0.0) || base.is_zero(),
        }
    }

    pub fn eval(&self, t: f64) -> C64 {
        match self {
            ContinuousPart::Zero => C64::new(0.0, 0.0),
            ContinuousPart::Preset { shape, scale } => *scale * shape.eval(t),
            ContinuousPart::Grid(g) => g.eval(t),
            ContinuousPart::Envelope(parts) => {
                C64::new(parts.iter().map(|p| p.eval(t).norm()).fold(0.0, f64::max), 0.0)
            }
            ContinuousPart::Mollified(m) => m.eval(t),
            ContinuousPart::Transformed { base, factor, reflect } => {
                *factor * base.eval(if *reflect { -t } else { t })
            }
        }
    }

    /// Closed interval outside of which the part vanishes (up to truncation).
    pub fn support(&self) -> Option<(f64, f64)> {
        if self.is_zero() {
            return None;
        }
        match self {
            ContinuousPart::Zero => None,
            ContinuousPart::Preset { shape, .. } => {
                let r = shape.truncation_radius();
                Some((-r, r))
            }
            ContinuousPart::Grid(g) => Some((g.start, g.end())),
            ContinuousPart::Envelope(parts) => parts.iter().filter_map(|p| p.support()).reduce(|x, y| (x.0.min(y.0), x.1.max(y.1))),
            ContinuousPart::Mollified(m) => m.support(),
            ContinuousPart::Transformed { base, reflect, .. } => {
                base.support().map(|(a, b)| if *reflect { (-b, -a) } else { (a, b) })
            }
        }
    }

    /// Sorted points at which the part may be non-smooth or varies on a finer
    /// scale; quadrature splits there.
    pub fn cut_points(&self) -> Vec<f64> {
        let cuts = match self {
            ContinuousPart::Zero => Vec::new(),
            ContinuousPart::Preset { shape, .. } => {
                let r = shape.truncation_radius();
                let mut c = vec![-r, r];
                for f in shape.features() {
                    c.extend(graded(f, shape.scale(), 2.0 * r));
                }
                c
            }
            ContinuousPart::Grid(g) => g.nodes(),
            ContinuousPart::Envelope(parts) => parts.iter().flat_map(|p| p.cut_points()).collect(),
            ContinuousPart::Mollified(m) => m.cut_points(),
            ContinuousPart::Transformed { base, reflect, .. } => {
                let c = base.cut_points();
                if *reflect {
                    c.into_iter().map(|x| -x).collect()
                } else {
                    c
                }
            }
        };
        sort_dedup(cuts)
    }

    /// Closed-form `∫_a^b |K_c|` when available.
    fn abs_integral_exact(&self, a: f64, b: f64) -> Option<f64> {
        match self {
            ContinuousPart::Zero => Some(0.0),
            ContinuousPart::Preset { shape, scale } => Some(scale.norm() * shape.abs_integral(a, b)),
            ContinuousPart::Transformed { base, factor, reflect } => {
                let (lo, hi) = if *reflect { (-b, -a) } else { (a, b) };
                base.abs_integral_exact(lo, hi).map(|v| factor.norm() * v)
            }
            _ => None,
        }
    }

    /// `∫_a^b |K_c(τ)| dτ` for `a <= b`; infinite endpoints are allowed.
    pub fn abs_integral(&self, a: f64, b: f64) -> Result<f64> {
        if a > b {
            return Err(Error::InvalidArgument(format!("interval [{a}, {b}] is reversed")));
        }
        if let Some(v) = self.abs_integral_exact(a, b) {
            return Ok(v);
        }
        let Some((s0, s1)) = self.support() else {
            return Ok(0.0);
        };
        let lo = a.max(s0);
        let hi = b.min(s1);
        if hi <= lo {
            return Ok(0.0);
        }
        let cuts = self.cut_points();
        adaptive_simpson_split(|t| self.eval(t).norm(), lo, hi, &cuts, KERNEL_TOL)
            .map_err(|_| Error::DivergentKernel(format!("|K_c| is not integrable on [{lo}, {hi}]")))
            .and_then(|v: f64| {
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::DivergentKernel("non-finite total variation".into()))
                }
            })
    }

    /// `∫ K_c(τ) f(τ) dτ` over `[a, b]` ∩ support, splitting at the part's cut
    /// points and at `extra_cuts`.
    pub fn integrate_against<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, extra_cuts: &[f64], tol: f64) -> Result<C64> {
        let Some((s0, s1)) = self.support() else {
            return Ok(C64::new(0.0, 0.0));
        };
        let lo = a.max(s0);
        let hi = b.min(s1);
        if hi <= lo {
            return Ok(C64::new(0.0, 0.0));
        }
        let mut cuts = self.cut_points();
        cuts.extend_from_slice(extra_cuts);
        adaptive_simpson_split(|t| self.eval(t) * f(t), lo, hi, &sort_dedup(cuts), tol)
    }

    /// Closed-form transform `∫K_c(τ)e^{iωτ}dτ` when available.
    pub fn fourier_exact(&self, omega: f64) -> Option<C64> {
        match self {
            ContinuousPart::Zero => Some(C64::new(0.0, 0.0)),
            ContinuousPart::Preset { shape, scale } => Some(*scale * shape.fourier(omega)),
            ContinuousPart::Transformed { base, factor, reflect } => {
                base.fourier_exact(if *reflect { -omega } else { omega }).map(|v| *factor * v)
            }
            _ => None,
        }
    }

    /// `∫K_c(τ)e^{iωτ}dτ` by quadrature over the support.
    pub fn fourier_quadrature(&self, omega: f64, tol: f64) -> Result<C64> {
        let Some((s0, s1)) = self.support() else {
            return Ok(C64::new(0.0, 0.0));
        };
        let cuts = self.cut_points();
        adaptive_simpson_split(|t| self.eval(t) * C64::from_polar(1.0, omega * t), s0, s1, &cuts, tol)
    }

    pub fn fourier(&self, omega: f64) -> Result<C64> {
        match self.fourier_exact(omega) {
            Some(v) => Ok(v),
            None => self.fourier_quadrature(omega, KERNEL_TOL),
        }
    }

    /// Largest `|K_c|` over `samples` equally spaced points of the support plus
    /// the cut points.
    pub fn sup_estimate(&self, samples: usize) -> f64 {
        let Some((a, b)) = self.support() else {
            return 0.0;
        };
        let mut best = 0.0f64;
        let n = samples.max(2);
        for k in 0..=n {
            best = best.max(self.eval(a + (b - a) * k as f64 / n as f64).norm());
        }
        for c in self.cut_points() {
            if c >= a && c <= b {
                best = best.max(self.eval(c).norm());
            }
        }
        best
    }

    /// Samples the part onto a uniform grid (used for export of lazy parts).
    pub fn materialize(&self, intervals: usize) -> Result<ContinuousPart> {
        match self.support() {
            None => Ok(ContinuousPart::Zero),
            Some((a, b)) => Ok(ContinuousPart::Grid(Arc::new(SampledGrid::sample(|t| self.eval(t), a, b, Some(intervals))?))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::quad::adaptive_simpson;

    #[test]
    fn preset_values() {
        let e = Shape::Exponential { gamma: 2.0 };
        assert!((e.eval(0.5).re - (-1.0f64).exp()).abs() < 1e-15);
        let o = Shape::Ohmic { alpha: 0.5, cutoff: 3.0 };
        let v = o.eval(0.0);
        assert!((v.re - 0.5 * 9.0 / (2.0 * PI)).abs() < 1e-14);
        assert_eq!(Shape::Box { half_width: 1.0 }.eval(1.0).re, 1.0);
        assert!(Shape::Exponential { gamma: -1.0 }.validate().is_err());
    }

    #[test]
    fn closed_form_integrals_match_quadrature() {
        let shapes = [
            Shape::Exponential { gamma: 1.3 },
            Shape::Ohmic { alpha: 0.7, cutoff: 2.0 },
            Shape::Box { half_width: 0.6 },
        ];
        for s in shapes {
            for (a, b) in [(-0.3, 1.1), (0.2, 0.9), (-2.0, -0.1)] {
                let q: f64 = adaptive_simpson_split(|t| s.eval(t).norm(), a, b, &s.features(), 1e-13).unwrap();
                assert!((s.abs_integral(a, b) - q).abs() < 1e-11, "{s:?} on [{a}, {b}]");
            }
        }
    }

    #[test]
    fn closed_form_fourier_matches_quadrature() {
        let e = ContinuousPart::preset(Shape::Exponential { gamma: 1.0 }, C64::new(1.0, 0.0)).unwrap();
        let o = ContinuousPart::preset(Shape::Ohmic { alpha: 1.0, cutoff: 1.0 }, C64::new(1.0, 0.0)).unwrap();
        for w in [0.0, 0.5, 2.0] {
            let q = e.fourier_quadrature(w, 1e-12).unwrap();
            assert!((q - e.fourier(w).unwrap()).norm() < 1e-9);
        }
        // the Ohmic tail decays like 1/τ², so compare on a truncated window
        // with the analytic tail correction left out: loose tolerance
        for w in [-1.0, 0.7, 1.5] {
            let q: C64 = adaptive_simpson_split(
                |t| o.eval(t) * C64::from_polar(1.0, w * t),
                -4000.0,
                4000.0,
                &graded(0.0, 1.0, 4000.0),
                1e-11,
            )
            .unwrap();
            assert!((q - o.fourier(w).unwrap()).norm() < 2e-4, "w = {w}: {q}");
        }
    }

    #[test]
    fn grid_interpolates_linearly_and_vanishes_outside() {
        let g = SampledGrid::new(0.0, 0.5, vec![C64::new(0.0, 0.0), C64::new(1.0, 2.0), C64::new(0.0, 0.0)]).unwrap();
        assert_eq!(g.eval(0.25), C64::new(0.5, 1.0));
        assert_eq!(g.eval(-0.01), C64::new(0.0, 0.0));
        assert_eq!(g.eval(1.01), C64::new(0.0, 0.0));
        let part = ContinuousPart::Grid(Arc::new(g));
        let tv = part.abs_integral(f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert!((tv - 0.5 * 5f64.sqrt()).abs() < 1e-10);
        assert!(SampledGrid::new(0.0, 1.0, vec![C64::new(f64::NAN, 0.0), C64::new(0.0, 0.0)]).is_err());
    }

    #[test]
    fn envelope_and_reflection() {
        let a = ContinuousPart::preset(Shape::Exponential { gamma: 1.0 }, C64::new(1.0, 0.0)).unwrap();
        let b = ContinuousPart::preset(Shape::Exponential { gamma: 2.0 }, C64::new(0.0, -0.5)).unwrap();
        let env = ContinuousPart::Envelope(Arc::new(vec![a.clone(), b.clone()]));
        for t in [-3.0, -0.2, 0.0, 0.4, 5.0] {
            let want = a.eval(t).norm().max(b.eval(t).norm());
            assert_eq!(env.eval(t).re, want);
        }
        let shifted = ContinuousPart::Transformed {
            base: Arc::new(ContinuousPart::Grid(Arc::new(
                SampledGrid::new(0.0, 1.0, vec![C64::new(1.0, 0.0), C64::new(3.0, 0.0)]).unwrap(),
            ))),
            factor: C64::new(2.0, 0.0),
            reflect: true,
        };
        assert_eq!(shifted.eval(-0.5).re, 4.0);
        assert_eq!(shifted.support(), Some((-1.0, 0.0)));
        let direct: f64 = adaptive_simpson(|t| shifted.eval(t).norm(), -1.0, 0.0, 1e-12).unwrap();
        assert!((shifted.abs_integral(-5.0, 5.0).unwrap() - direct).abs() < 1e-10);
    }
}
