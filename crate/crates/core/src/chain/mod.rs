//! Discrete-mode dilation of vacuum baths: spectral densities, the Stieltjes
//! recursion for chain coefficients, the dilated Hamiltonian and the
//! associated error estimates.

mod bounds;
mod dilate;

use std::f64::consts::{E, PI};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{bump_fourier, MemoryKernel};
use crate::numeric::fmt12;
use crate::numeric::quad::composite_nodes;

pub use bounds::{
    chain_truncation_error_bound, freq_cutoff_error_bound, gamma0, kappa0_solve, m0, prop2_mode_count,
    regularization_error_bound, regularization_error_bound_for_kernel, ModeCountEstimate,
};
pub use dilate::{build_dilated_hamiltonian, DilationLayout};

/// Negative transform values above this are rounded to zero.
pub const NEGATIVITY_TOL: f64 = 1e-8;

/// Closed-form spectral densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityPreset {
    /// `height · sqrt(1 - (ω/radius)²)` on `[-radius, radius]`.
    Semicircle { radius: f64, height: f64 },
    /// `height` on `[-half_width, half_width]`.
    Flat { half_width: f64, height: f64 },
    /// `α ω e^{-ω/ω_c}` for `ω > 0`.
    Ohmic { alpha: f64, cutoff: f64 },
}

impl DensityPreset {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            DensityPreset::Semicircle { radius, height } => radius > 0.0 && height > 0.0,
            DensityPreset::Flat { half_width, height } => half_width > 0.0 && height > 0.0,
            DensityPreset::Ohmic { alpha, cutoff } => alpha > 0.0 && cutoff > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid spectral density preset {self:?}")))
        }
    }

    fn eval(&self, w: f64) -> f64 {
        match *self {
            DensityPreset::Semicircle { radius, height } => height * (1.0 - (w / radius).powi(2)).max(0.0).sqrt(),
            DensityPreset::Flat { half_width, height } => {
                if w.abs() <= half_width {
                    height
                } else {
                    0.0
                }
            }
            DensityPreset::Ohmic { alpha, cutoff } => {
                if w > 0.0 {
                    alpha * w * (-w / cutoff).exp()
                } else {
                    0.0
                }
            }
        }
    }

    fn support(&self) -> (f64, f64) {
        match *self {
            DensityPreset::Semicircle { radius, .. } => (-radius, radius),
            DensityPreset::Flat { half_width, .. } => (-half_width, half_width),
            DensityPreset::Ohmic { .. } => (0.0, f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone)]
enum Source {
    /// `V̂(ω)|η̂(ωδ)|²`.
    Kernel { kernel: MemoryKernel, delta: f64 },
    Preset(DensityPreset),
}

/// A nonnegative spectral density together with its values on a grid.
#[derive(Debug, Clone)]
pub struct SpectralDensity {
    source: Source,
    omegas: Vec<f64>,
    values: Vec<f64>,
}

/// `V̂^δ(ω) = V̂(ω)|η̂(ωδ)|²` sampled on `grid`; `δ = 0` leaves `V̂` unmollified.
pub fn spectral_density(v: &MemoryKernel, delta: f64, grid: &[f64]) -> Result<SpectralDensity> {
    SpectralDensity::from_kernel(v.clone(), delta, grid)
}

impl SpectralDensity {
    pub fn from_kernel(kernel: MemoryKernel, delta: f64, grid: &[f64]) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("mollifier width must be nonnegative, got {delta}")));
        }
        Self::with_grid(Source::Kernel { kernel, delta }, grid)
    }

    pub fn preset(preset: DensityPreset, grid: &[f64]) -> Result<Self> {
        preset.validate()?;
        Self::with_grid(Source::Preset(preset), grid)
    }

    fn with_grid(source: Source, grid: &[f64]) -> Result<Self> {
        let mut sd = Self { source, omegas: grid.to_vec(), values: Vec::new() };
        sd.values = grid.iter().map(|&w| sd.eval(w)).collect::<Result<_>>()?;
        Ok(sd)
    }

    /// Density at `ω`; small negative quadrature noise is clipped to zero.
    pub fn eval(&self, omega: f64) -> Result<f64> {
        let raw = match &self.source {
            Source::Preset(p) => p.eval(omega),
            Source::Kernel { kernel, delta } => {
                let eta = if *delta == 0.0 { 1.0 } else { bump_fourier(omega * delta) };
                kernel.fourier(omega)?.re * eta * eta
            }
        };
        if raw < -NEGATIVITY_TOL {
            return Err(Error::NegativeSpectralDensity { omega, value: raw });
        }
        Ok(raw.max(0.0))
    }

    /// Interval outside of which the density vanishes.
    pub fn support(&self) -> (f64, f64) {
        match &self.source {
            Source::Preset(p) => p.support(),
            Source::Kernel { .. } => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Coupling, on-site frequencies and hoppings of a bath chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainCoefficients {
    pub g: f64,
    pub omegas: Vec<f64>,
    pub hoppings: Vec<f64>,
}

impl ChainCoefficients {
    pub fn new(g: f64, omegas: Vec<f64>, hoppings: Vec<f64>) -> Result<Self> {
        let c = Self { g, omegas, hoppings };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.omegas.is_empty() {
            return Err(Error::InvalidArgument("a chain needs at least one mode".into()));
        }
        if self.hoppings.len() + 1 != self.omegas.len() {
            return Err(Error::InvalidArgument(format!(
                "{} modes need {} hoppings, got {}",
                self.omegas.len(),
                self.omegas.len() - 1,
                self.hoppings.len()
            )));
        }
        if !(self.g >= 0.0) || self.omegas.iter().chain(&self.hoppings).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("chain coefficients must be finite with g >= 0".into()));
        }
        Ok(())
    }

    pub fn modes(&self) -> usize {
        self.omegas.len()
    }

    /// First `n` modes of the chain.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.modes() {
            return Err(Error::InvalidArgument(format!("cannot keep {n} of {} modes", self.modes())));
        }
        Ok(Self { g: self.g, omegas: self.omegas[..n].to_vec(), hoppings: self.hoppings[..n - 1].to_vec() })
    }

    pub fn jacobi_matrix(&self) -> DMatrix<f64> {
        let n = self.modes();
        let mut j = DMatrix::zeros(n, n);
        for k in 0..n {
            j[(k, k)] = self.omegas[k];
        }
        for (k, &t) in self.hoppings.iter().enumerate() {
            j[(k, k + 1)] = t;
            j[(k + 1, k)] = t;
        }
        j
    }

    /// Gauss rule of the chain: Jacobi eigenvalues with weights
    /// `2π g² |first eigenvector component|²`.
    pub fn spectral_measure(&self) -> (Vec<f64>, Vec<f64>) {
        let eig = SymmetricEigen::new(self.jacobi_matrix());
        let mass = 2.0 * PI * self.g * self.g;
        let weights = (0..self.modes()).map(|k| mass * eig.eigenvectors[(0, k)].powi(2)).collect();
        (eig.eigenvalues.iter().copied().collect(), weights)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    /// Columns `j, omega, hopping`; `hopping` couples modes `j` and `j+1` and
    /// is empty on the last row. The coupling `g` is written as row `j = 0`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,omega,hopping\n");
        out.push_str(&format!("0,,{}\n", fmt12(self.g)));
        for (k, w) in self.omegas.iter().enumerate() {
            let hop = self.hoppings.get(k).map(|&t| fmt12(t)).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", k + 1, fmt12(*w), hop));
        }
        out
    }
}

/// Output of the three-term recursion on a discrete measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Recurrence {
    /// `A_0 .. A_{n-1}`.
    pub a: Vec<f64>,
    /// `B_1 .. B_{n-1}`.
    pub b: Vec<f64>,
    pub mass: f64,
}

impl Recurrence {
    /// Monic polynomials `p_0 .. p_{n-1}` evaluated at `x`.
    pub fn monic_values(&self, x: f64) -> Vec<f64> {
        let n = self.a.len();
        let mut p = Vec::with_capacity(n);
        p.push(1.0);
        for k in 1..n {
            let prev2 = if k >= 2 { self.b[k - 2] * p[k - 2] } else { 0.0 };
            p.push((x - self.a[k - 1]) * p[k - 1] - prev2);
        }
        p
    }

    pub fn into_chain(self) -> ChainCoefficients {
        ChainCoefficients {
            g: (self.mass / (2.0 * PI)).sqrt(),
            omegas: self.a,
            hoppings: self.b.into_iter().map(f64::sqrt).collect(),
        }
    }
}

/// Stieltjes recursion on `Σ w_i δ(ω - ω_i)`, run in orthonormal form to
/// avoid overflow of the monic polynomials.
pub fn stieltjes(nodes: &[f64], weights: &[f64], n: usize, reorthogonalize: bool) -> Result<Recurrence> {
    if n == 0 {
        return Err(Error::InvalidArgument("mode count must be at least 1".into()));
    }
    if nodes.len() != weights.len() || weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::InvalidArgument("measure needs one nonnegative weight per node".into()));
    }
    let mass: f64 = weights.iter().sum();
    if !(mass > 0.0) {
        return Err(Error::InvalidArgument("measure has no mass on the cutoff window".into()));
    }
    let atoms = weights.iter().filter(|&&w| w > 0.0).count();
    if n > atoms {
        return Err(Error::RankDeficient { requested: n, max_valid: atoms });
    }
    let scale = nodes.iter().zip(weights).filter(|(_, &w)| w > 0.0).map(|(x, _)| x.abs()).fold(0.0, f64::max).max(1e-300);
    let threshold = 1e-12 * scale * scale;

    let mut basis: Vec<Vec<f64>> = vec![weights.iter().map(|w| (w / mass).sqrt()).collect()];
    let mut a = Vec::with_capacity(n);
    let mut b: Vec<f64> = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n {
        let q = &basis[k];
        let ak: f64 = q.iter().zip(nodes).map(|(qi, x)| qi * qi * x).sum();
        a.push(ak);
        if k + 1 == n {
            break;
        }
        let mut r: Vec<f64> = q.iter().zip(nodes).map(|(qi, x)| (x - ak) * qi).collect();
        if k > 0 {
            let beta = b[k - 1].sqrt();
            r.iter_mut().zip(&basis[k - 1]).for_each(|(ri, pi)| *ri -= beta * pi);
        }
        if reorthogonalize {
            for _ in 0..2 {
                for prev in &basis {
                    let c: f64 = prev.iter().zip(&r).map(|(x, y)| x * y).sum();
                    r.iter_mut().zip(prev).for_each(|(ri, pi)| *ri -= c * pi);
                }
            }
        }
        let bk: f64 = r.iter().map(|x| x * x).sum();
        if !(bk > threshold) {
            return Err(Error::RankDeficient { requested: n, max_valid: k + 1 });
        }
        let inv = 1.0 / bk.sqrt();
        basis.push(r.into_iter().map(|x| x * inv).collect());
        b.push(bk);
    }
    Ok(Recurrence { a, b, mass })
}

/// Quadrature settings for discretizing a spectral density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    pub panels: usize,
    pub per_panel: usize,
    /// Geometrically graded panels against each end of the window.
    pub grading: usize,
    pub reorthogonalize: bool,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { panels: 64, per_panel: 32, grading: 12, reorthogonalize: false }
    }
}

/// Nodes and weights of `V̂^δ(ω)dω` on `[-ω_c, ω_c]`.
pub fn discretize(sd: &SpectralDensity, omega_c: f64, opts: &LanczosOptions) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(omega_c > 0.0 && omega_c.is_finite()) {
        return Err(Error::InvalidArgument(format!("cutoff must be positive, got {omega_c}")));
    }
    let (lo, hi) = sd.support();
    let (a, b) = (lo.max(-omega_c), hi.min(omega_c));
    if !(a < b) {
        return Err(Error::InvalidArgument("spectral density vanishes on the cutoff window".into()));
    }
    let (nodes, w) = composite_nodes(a, b, opts.panels, opts.per_panel, opts.grading);
    let weights = nodes.iter().zip(&w).map(|(&x, &wi)| Ok(sd.eval(x)? * wi)).collect::<Result<Vec<_>>>()?;
    Ok((nodes, weights))
}

/// Chain coefficients of the cutoff measure with `N_m` modes.
pub fn lanczos_chain(sd: &SpectralDensity, omega_c: f64, n_m: usize) -> Result<ChainCoefficients> {
    lanczos_chain_with(sd, omega_c, n_m, &LanczosOptions::default())
}

pub fn lanczos_chain_with(sd: &SpectralDensity, omega_c: f64, n_m: usize, opts: &LanczosOptions) -> Result<ChainCoefficients> {
    let (nodes, weights) = discretize(sd, omega_c, opts)?;
    Ok(stieltjes(&nodes, &weights, n_m, opts.reorthogonalize)?.into_chain())
}

/// Mollifier width, frequency cutoff and mode count of a dilation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilationParams {
    pub delta: f64,
    pub omega_c: f64,
    pub modes: usize,
}

impl DilationParams {
    pub fn new(delta: f64, omega_c: f64, modes: usize) -> Result<Self> {
        let p = Self { delta, omega_c, modes };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite() && self.omega_c > 0.0 && self.omega_c.is_finite() && self.modes >= 1) {
            return Err(Error::InvalidArgument(format!("invalid dilation parameters {self:?}")));
        }
        Ok(())
    }

    /// `ω_c = N_m/(2e²t)` and `δ = 2e²t N_m^{-ε̃}`.
    pub fn from_mode_count(modes: usize, t: f64, eps_tilde: f64) -> Result<Self> {
        if !(t > 0.0) || !(eps_tilde > 0.0 && eps_tilde < 1.0) {
            return Err(Error::InvalidArgument(format!("need t > 0 and 0 < ε̃ < 1, got t = {t}, ε̃ = {eps_tilde}")));
        }
        let n = modes as f64;
        Self::new(2.0 * E * E * t * n.powf(-eps_tilde), n / (2.0 * E * E * t), modes)
    }

    /// Chain for the commutator kernel `v` under these parameters.
    pub fn chain_for(&self, v: &MemoryKernel) -> Result<ChainCoefficients> {
        let sd = SpectralDensity::from_kernel(v.clone(), self.delta, &[])?;
        lanczos_chain(&sd, self.omega_c, self.modes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, w: f64) -> Vec<f64> {
        (0..=n).map(|k| -w + 2.0 * w * k as f64 / n as f64).collect()
    }

    #[test]
    fn lorentzian_from_exponential_kernel() {
        let v = MemoryKernel::exponential(2.0).unwrap();
        let sd = spectral_density(&v, 0.0, &grid(40, 10.0)).unwrap();
        for (&w, &x) in sd.omegas().iter().zip(sd.values()) {
            assert!((x - 4.0 / (4.0 + w * w)).abs() < 1e-12);
        }
    }

    #[test]
    fn mollified_density_is_bounded_by_total_variation() {
        let v = MemoryKernel::exponential(1.0).unwrap().with_atom(num_complex::Complex64::new(0.5, 0.0), 0.0).unwrap();
        let sd = spectral_density(&v, 0.1, &grid(200, 50.0)).unwrap();
        let tv = v.total_variation(None).unwrap();
        assert!(sd.values().iter().all(|&x| x >= 0.0 && x <= tv + 1e-8));
    }

    #[test]
    fn flat_bath_limit() {
        let v = MemoryKernel::dirac(num_complex::Complex64::new(1.0, 0.0), 0.0).unwrap();
        let sd = spectral_density(&v, 0.0, &grid(10, 5.0)).unwrap();
        assert!(sd.values().iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn rejects_negative_transforms() {
        let v = MemoryKernel::boxcar(1.0, 1.0).unwrap();
        let err = spectral_density(&v, 0.0, &[4.0]).unwrap_err();
        assert!(matches!(err, Error::NegativeSpectralDensity { .. }));
    }

    #[test]
    fn semicircle_recursion() {
        let sd = SpectralDensity::preset(DensityPreset::Semicircle { radius: 1.0, height: 1.0 }, &[]).unwrap();
        let c = lanczos_chain(&sd, 2.0, 20).unwrap();
        assert!(c.omegas.iter().all(|w| w.abs() < 1e-10));
        assert!(c.hoppings.iter().all(|t| (t - 0.5).abs() < 1e-10));
        assert!((c.g * c.g * 2.0 * PI - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn rank_deficiency_names_largest_valid_count() {
        let err = stieltjes(&[-1.0, 0.0, 1.0], &[1.0, 1.0, 1.0], 5, false).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { requested: 5, max_valid: 3 }));
        let err = stieltjes(&[-1.0, 0.0, 1.0, 2.0], &[1.0, 1.0, 1.0, 0.0], 4, false).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { max_valid: 3, .. }));
    }

    #[test]
    fn dilation_helper_scaling() {
        let p = DilationParams::from_mode_count(16, 1.0, 0.5).unwrap();
        assert!((p.omega_c - 16.0 / (2.0 * E * E)).abs() < 1e-12);
        assert!((p.delta - 2.0 * E * E / 4.0).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let c = ChainCoefficients::new(0.5, vec![1.0, 2.0], vec![0.25]).unwrap();
        assert_eq!(c.to_csv(), "j,omega,hopping\n0,,0.5\n1,1,0.25\n2,2,\n");
        assert!(ChainCoefficients::from_json(r#"{"g":1,"omegas":[0,0],"hoppings":[]}"#).is_err());
    }
}
