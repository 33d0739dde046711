//! Memory kernels `K = K_c + Σ_j k_j δ(τ - T_j)`: total variation, upper
//! bounds, mollification, closeness tests and window integrals.

mod closeness;
mod continuous;
mod io;
mod mollifier;

use std::sync::Arc;

use num_complex::Complex64 as C64;

pub use closeness::{closeness_test, lemma_lambdas, ClosenessReport, TestFunction};
pub use continuous::{ContinuousPart, MollifiedPart, SampledGrid, Shape, KERNEL_TOL, TRUNCATION};
pub use io::KernelSpec;
pub use mollifier::{bump, bump_derivative, bump_fourier, normalization, BumpConvolution, Mollifier};

use crate::error::{Error, Result};

/// Atoms closer than this are merged.
pub const ATOM_MERGE_TOL: f64 = 1e-12;

/// A Dirac atom `k δ(τ - T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub weight: C64,
    pub location: f64,
}

impl Atom {
    pub fn new(weight: C64, location: f64) -> Self {
        Self { weight, location }
    }
}

/// Weight of an atom at `x` in the closed interval `[a, b]`.
pub fn boundary_weight(x: f64, a: f64, b: f64) -> f64 {
    let on = |e: f64| e.is_finite() && (x - e).abs() <= ATOM_MERGE_TOL * (1.0 + e.abs());
    if on(a) || on(b) {
        0.5
    } else if x > a && x < b {
        1.0
    } else {
        0.0
    }
}

fn normalize_atoms(mut atoms: Vec<Atom>) -> Result<Vec<Atom>> {
    if atoms.iter().any(|a| !a.location.is_finite() || !(a.weight.re.is_finite() && a.weight.im.is_finite())) {
        return Err(Error::InvalidArgument("atoms must have finite weights and locations".into()));
    }
    atoms.sort_by(|x, y| x.location.total_cmp(&y.location));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(last) if (a.location - last.location).abs() < ATOM_MERGE_TOL => last.weight += a.weight,
            _ => out.push(a),
        }
    }
    Ok(out)
}

/// A memory kernel: continuous part plus Dirac atoms at increasing locations.
#[derive(Debug, Clone, Default)]
pub struct MemoryKernel {
    continuous: ContinuousPart,
    atoms: Vec<Atom>,
}

impl MemoryKernel {
    pub fn new(continuous: ContinuousPart, atoms: Vec<Atom>) -> Result<Self> {
        Ok(Self { continuous, atoms: normalize_atoms(atoms)? })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `(γ/2) e^{-γ|τ|}`.
    pub fn exponential(gamma: f64) -> Result<Self> {
        Self::from_shape(Shape::Exponential { gamma }, C64::new(1.0, 0.0))
    }

    /// `(α ω_c²/2π)/(1 + iω_cτ)²`.
    pub fn ohmic(alpha: f64, cutoff: f64) -> Result<Self> {
        Self::from_shape(Shape::Ohmic { alpha, cutoff }, C64::new(1.0, 0.0))
    }

    /// Constant `height` on `[-half_width, half_width]`.
    pub fn boxcar(half_width: f64, height: f64) -> Result<Self> {
        Self::from_shape(Shape::Box { half_width }, C64::new(height, 0.0))
    }

    pub fn from_shape(shape: Shape, scale: C64) -> Result<Self> {
        Ok(Self { continuous: ContinuousPart::preset(shape, scale)?, atoms: Vec::new() })
    }

    /// Single atom `k δ(τ - T)`.
    pub fn dirac(weight: C64, location: f64) -> Result<Self> {
        Self::new(ContinuousPart::Zero, vec![Atom::new(weight, location)])
    }

    pub fn sampled(grid: SampledGrid) -> Self {
        Self { continuous: ContinuousPart::Grid(Arc::new(grid)), atoms: Vec::new() }
    }

    pub fn with_atom(mut self, weight: C64, location: f64) -> Result<Self> {
        self.atoms.push(Atom::new(weight, location));
        self.atoms = normalize_atoms(self.atoms)?;
        Ok(self)
    }

    pub fn continuous(&self) -> &ContinuousPart {
        &self.continuous
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_zero(&self) -> bool {
        self.continuous.is_zero() && self.atoms.iter().all(|a| a.weight == C64::new(0.0, 0.0))
    }

    /// `K_c(τ)`.
    pub fn eval_continuous(&self, t: f64) -> C64 {
        self.continuous.eval(t)
    }

    /// `c · K(±τ)`.
    pub fn transformed(&self, factor: C64, reflect: bool) -> Self {
        let continuous = if self.continuous.is_zero() {
            ContinuousPart::Zero
        } else {
            ContinuousPart::Transformed { base: Arc::new(self.continuous.clone()), factor, reflect }
        };
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom::new(factor * a.weight, if reflect { -a.location } else { a.location }))
            .collect();
        Self { continuous, atoms: normalize_atoms(atoms).expect("finite atoms stay finite") }
    }

    /// `TV(K; I)`; the whole line when `interval` is `None`.
    pub fn total_variation(&self, interval: Option<(f64, f64)>) -> Result<f64> {
        let (a, b) = interval.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
        if a.is_nan() || b.is_nan() || a > b {
            return Err(Error::InvalidArgument(format!("invalid interval [{a}, {b}]")));
        }
        let continuous = self.continuous.abs_integral(a, b)?;
        let atoms: f64 = self.atoms.iter().map(|at| at.weight.norm() * boundary_weight(at.location, a, b)).sum();
        Ok(continuous + atoms)
    }

    /// `∫K(τ)e^{iωτ}dτ`, atoms exact.
    pub fn fourier(&self, omega: f64) -> Result<C64> {
        let atoms: C64 = self.atoms.iter().map(|a| a.weight * C64::from_polar(1.0, omega * a.location)).sum();
        Ok(self.continuous.fourier(omega)? + atoms)
    }
}

/// A nonnegative kernel dominating a family of kernels.
#[derive(Debug, Clone, Default)]
pub struct UpperBoundKernel(MemoryKernel);

impl UpperBoundKernel {
    /// Wraps a kernel known to be real and nonnegative.
    pub fn from_nonnegative(kernel: MemoryKernel) -> Result<Self> {
        if kernel.atoms.iter().any(|a| a.weight.im != 0.0 || a.weight.re < 0.0) {
            return Err(Error::InvalidArgument("upper-bound atoms must be nonnegative reals".into()));
        }
        Ok(Self(kernel))
    }

    pub fn kernel(&self) -> &MemoryKernel {
        &self.0
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0.atoms
    }

    /// `U_c(τ)`.
    pub fn eval_continuous(&self, t: f64) -> f64 {
        self.0.continuous.eval(t).re
    }

    pub fn total_variation(&self, interval: Option<(f64, f64)>) -> Result<f64> {
        self.0.total_variation(interval)
    }

    /// `U ⋆ η_δ ⋆ η_δ'`, still nonnegative.
    pub fn mollify(&self, delta: f64, delta_prime: f64) -> Result<Self> {
        Ok(Self(mollify(&self.0, delta, delta_prime)?))
    }

    /// Checks `|K_c| <= U_c` on `samples` points of `[a, b]` and `|k_j| <= u_j`.
    pub fn dominates(&self, k: &MemoryKernel, a: f64, b: f64, samples: usize, slack: f64) -> bool {
        let n = samples.max(1);
        let continuous_ok = (0..=n).all(|i| {
            let t = a + (b - a) * i as f64 / n as f64;
            k.continuous.eval(t).norm() <= self.eval_continuous(t) + slack
        });
        let atoms_ok = k.atoms.iter().all(|ka| {
            let u = self
                .0
                .atoms
                .iter()
                .find(|ua| (ua.location - ka.location).abs() < ATOM_MERGE_TOL)
                .map_or(0.0, |ua| ua.weight.re);
            ka.weight.norm() <= u + slack
        });
        continuous_ok && atoms_ok
    }
}

/// `TV(K; I)`.
pub fn total_variation(kernel: &MemoryKernel, interval: Option<(f64, f64)>) -> Result<f64> {
    kernel.total_variation(interval)
}

/// Pointwise supremum of `|K_c|` and atom-wise supremum of `|k_j|`.
pub fn build_upper_bound(kernels: &[MemoryKernel]) -> Result<UpperBoundKernel> {
    if kernels.is_empty() {
        return Err(Error::Empty("kernel list for the upper bound"));
    }
    let parts: Vec<ContinuousPart> =
        kernels.iter().map(|k| k.continuous.clone()).filter(|c| !c.is_zero()).collect();
    let continuous = if parts.is_empty() {
        ContinuousPart::Zero
    } else {
        ContinuousPart::Envelope(Arc::new(parts))
    };
    let mut atoms: Vec<Atom> = Vec::new();
    for a in kernels.iter().flat_map(|k| k.atoms.iter()) {
        match atoms.iter_mut().find(|u| (u.location - a.location).abs() < ATOM_MERGE_TOL) {
            Some(u) => u.weight = C64::new(u.weight.re.max(a.weight.norm()), 0.0),
            None => atoms.push(Atom::new(C64::new(a.weight.norm(), 0.0), a.location)),
        }
    }
    Ok(UpperBoundKernel(MemoryKernel::new(continuous, atoms)?))
}

/// `K ⋆ η_δ ⋆ η_δ'`, a purely continuous kernel. The sup-norm bound
/// `‖K ⋆ η_{δ,δ'}‖_∞ <= min(1/δ, 1/δ') TV(K)` is checked on the result.
pub fn mollify(kernel: &MemoryKernel, delta: f64, delta_prime: f64) -> Result<MemoryKernel> {
    let bump = Arc::new(BumpConvolution::new(delta, delta_prime)?);
    if kernel.is_zero() {
        return Ok(MemoryKernel::zero());
    }
    let part = MollifiedPart::new(kernel.continuous.clone(), kernel.atoms.clone(), bump);
    let out = MemoryKernel { continuous: ContinuousPart::Mollified(Arc::new(part)), atoms: Vec::new() };
    let tv = kernel.total_variation(None)?;
    let bound = (1.0 / delta).min(1.0 / delta_prime) * tv;
    let sup = out.continuous.sup_estimate(2048);
    if sup > bound * (1.0 + 1e-9) + 1e-8 {
        return Err(Error::Precondition(format!(
            "mollified kernel sup-norm {sup} exceeds min(1/δ, 1/δ')·TV = {bound}"
        )));
    }
    Ok(out)
}

/// `μ_{[a,b]}(s) = ∫_a^b U(s - s') ds'`, atoms with boundary half-weights.
pub fn mu_window(u: &UpperBoundKernel, a: f64, b: f64, s: f64) -> Result<f64> {
    if a.is_nan() || b.is_nan() || a > b {
        return Err(Error::InvalidArgument(format!("invalid window [{a}, {b}]")));
    }
    u.total_variation(Some((s - b, s - a)))
}
