//! Empirical kernel distance: `|∫(K - K')f|` over families of piecewise-C¹
//! test functions, fitted against `λ₀‖f‖_∞ + λ₁‖f'‖_∞`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::{MemoryKernel, ATOM_MERGE_TOL};
use crate::error::{Error, Result};

type Piece = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A bounded piecewise-C¹ function with declared sup-norms. Each piece is
/// evaluated on its own closed interval; at a breakpoint the value is the
/// average of the two one-sided limits.
#[derive(Clone)]
pub struct TestFunction {
    label: String,
    breakpoints: Vec<f64>,
    pieces: Vec<Piece>,
    sup_norm: f64,
    derivative_sup_norm: f64,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("breakpoints", &self.breakpoints)
            .field("sup_norm", &self.sup_norm)
            .field("derivative_sup_norm", &self.derivative_sup_norm)
            .finish()
    }
}

impl TestFunction {
    pub fn smooth<F>(label: impl Into<String>, f: F, sup_norm: f64, derivative_sup_norm: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            breakpoints: Vec::new(),
            pieces: vec![Arc::new(f)],
            sup_norm,
            derivative_sup_norm,
        }
    }

    /// `pieces[i]` is used on `[breakpoints[i-1], breakpoints[i]]`.
    pub fn piecewise(
        label: impl Into<String>,
        breakpoints: Vec<f64>,
        pieces: Vec<Piece>,
        sup_norm: f64,
        derivative_sup_norm: f64,
    ) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                pieces.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("breakpoints must be strictly increasing".into()));
        }
        Ok(Self { label: label.into(), breakpoints, pieces, sup_norm, derivative_sup_norm })
    }

    /// Step function `lo` left of `at`, `hi` right of it.
    pub fn step(label: impl Into<String>, at: f64, lo: f64, hi: f64) -> Self {
        Self::piecewise(
            label,
            vec![at],
            vec![Arc::new(move |_| lo), Arc::new(move |_| hi)],
            lo.abs().max(hi.abs()),
            0.0,
        )
        .expect("one breakpoint, two pieces")
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn derivative_sup_norm(&self) -> f64 {
        self.derivative_sup_norm
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.breakpoints.partition_point(|&b| b < x);
        if i < self.breakpoints.len() && self.breakpoints[i] == x {
            return 0.5 * ((self.pieces[i])(x) + (self.pieces[i + 1])(x));
        }
        (self.pieces[i])(x)
    }

    /// Breakpoints where the one-sided limits differ.
    pub fn discontinuities(&self) -> Vec<f64> {
        self.breakpoints
            .iter()
            .enumerate()
            .filter(|&(i, &b)| ((self.pieces[i])(b) - (self.pieces[i + 1])(b)).abs() > 1e-12)
            .map(|(_, &b)| b)
            .collect()
    }
}

/// `∫ K f` with atoms acting on the averaged value.
fn pair(kernel: &MemoryKernel, f: &TestFunction) -> Result<C64> {
    let continuous = kernel.continuous().integrate_against(
        |t| f.eval(t),
        f64::NEG_INFINITY,
        f64::INFINITY,
        &f.breakpoints,
        1e-11,
    )?;
    let atoms: C64 = kernel.atoms().iter().map(|a| a.weight * f.eval(a.location)).sum();
    Ok(continuous + atoms)
}

/// Observed pairing errors and the tightest `(λ₀, λ₁)` consistent with them.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosenessReport {
    pub lambda0: f64,
    pub lambda1: f64,
    /// `|∫(K - K')f|` per test function.
    pub errors: Vec<f64>,
    pub sup_norms: Vec<f64>,
    pub derivative_sup_norms: Vec<f64>,
}

impl ClosenessReport {
    /// Indices of test functions whose error exceeds `λ₀‖f‖ + λ₁‖f'‖`.
    pub fn violations(&self, lambda0: f64, lambda1: f64, slack: f64) -> Vec<usize> {
        (0..self.errors.len())
            .filter(|&i| self.errors[i] > lambda0 * self.sup_norms[i] + lambda1 * self.derivative_sup_norms[i] + slack)
            .collect()
    }
}

/// Minimizes `λ₀ + λ₁` subject to `λ₀a_i + λ₁b_i >= e_i`, `λ >= 0`, by
/// enumerating the vertices of the feasible region.
fn smallest_fit(e: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    if e.iter().all(|&x| x <= 0.0) {
        return (0.0, 0.0);
    }
    let feasible = |l0: f64, l1: f64| {
        l0 >= 0.0
            && l1 >= 0.0
            && (0..e.len()).all(|i| l0 * a[i] + l1 * b[i] >= e[i] * (1.0 - 1e-12) - 1e-300)
    };
    let mut candidates = Vec::new();
    let only = |w: &[f64]| {
        e.iter().zip(w).map(|(&ei, &wi)| if ei <= 0.0 { 0.0 } else if wi > 0.0 { ei / wi } else { f64::INFINITY }).fold(0.0, f64::max)
    };
    candidates.push((only(a), 0.0));
    candidates.push((0.0, only(b)));
    for i in 0..e.len() {
        // single constraint tight with one multiplier zero
        if a[i] > 0.0 {
            candidates.push((e[i] / a[i], 0.0));
        }
        if b[i] > 0.0 {
            candidates.push((0.0, e[i] / b[i]));
        }
        for j in i + 1..e.len() {
            let det = a[i] * b[j] - a[j] * b[i];
            if det.abs() < 1e-300 {
                continue;
            }
            let l0 = (e[i] * b[j] - e[j] * b[i]) / det;
            let l1 = (a[i] * e[j] - a[j] * e[i]) / det;
            candidates.push((l0, l1));
        }
    }
    candidates
        .into_iter()
        .filter(|&(l0, l1)| l0.is_finite() && l1.is_finite() && feasible(l0, l1))
        .min_by(|x, y| (x.0 + x.1).total_cmp(&(y.0 + y.1)))
        .unwrap_or((f64::INFINITY, f64::INFINITY))
}

/// Measures `|∫(K - K')f|` for each test function. Discontinuities of the
/// test functions must lie in `breakpoints`.
pub fn closeness_test(
    k: &MemoryKernel,
    k_prime: &MemoryKernel,
    breakpoints: &[f64],
    test_functions: &[TestFunction],
) -> Result<ClosenessReport> {
    for f in test_functions {
        for d in f.discontinuities() {
            if !breakpoints.iter().any(|&t| (t - d).abs() <= ATOM_MERGE_TOL) {
                return Err(Error::StrayDiscontinuity(d));
            }
        }
    }
    let mut errors = Vec::with_capacity(test_functions.len());
    for f in test_functions {
        let diff = pair(k, f)? - pair(k_prime, f)?;
        errors.push(diff.norm());
    }
    let sup_norms: Vec<f64> = test_functions.iter().map(|f| f.sup_norm).collect();
    let derivative_sup_norms: Vec<f64> = test_functions.iter().map(|f| f.derivative_sup_norm).collect();
    let (lambda0, lambda1) = smallest_fit(&errors, &sup_norms, &derivative_sup_norms);
    Ok(ClosenessReport { lambda0, lambda1, errors, sup_norms, derivative_sup_norms })
}

/// `(λ₀, λ₁)` for a kernel against its mollification of total half-width
/// `width`: `λ₀ = 2 Σ_{t∈t*} TV(K_c; [t - w, t + w])`, `λ₁ = w·TV(K)`.
pub fn lemma_lambdas(k: &MemoryKernel, breakpoints: &[f64], width: f64) -> Result<(f64, f64)> {
    let mut l0 = 0.0;
    for &t in breakpoints {
        l0 += 2.0 * k.continuous().abs_integral(t - width, t + width)?;
    }
    Ok((l0, width * k.total_variation(None)?))
}
