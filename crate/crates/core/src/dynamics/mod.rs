//! Pure-state evolution under dilated Hamiltonians.

mod lightcone;
mod oracle;

use log::warn;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{dimension_cap, HamiltonianAssembly};
use crate::lattice::Coefficient;
use crate::numeric::krylov::{expm_adaptive, expm_step, norm};
use crate::numeric::sparse::TensorSpace;
use crate::ops::{check_hermitian, CMatrix};

pub use lightcone::{
    fock_convergence_check, lightcone_experiment, random_product_state, FockRow, LightconeMetadata, LightconeResult,
    LightconeRow, LightconeSetup, Observable,
};
pub use oracle::{dense_evolve, dense_propagator, magnus4_step};

pub const NORM_DRIFT_TOL: f64 = 1e-9;

/// Amplitudes over a tensor-product basis, first factor most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    dims: Vec<usize>,
    amplitudes: Vec<C64>,
}

impl QuantumState {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        let dim = TensorSpace::checked_dimension(&dims);
        if dim != amplitudes.len() as u128 {
            return Err(Error::DimensionMismatch { expected: dim as usize, got: amplitudes.len() });
        }
        let n = norm(&amplitudes);
        if (n - 1.0).abs() > NORM_DRIFT_TOL {
            return Err(Error::InvalidArgument(format!("state norm {n} differs from 1")));
        }
        Ok(Self { dims, amplitudes })
    }

    /// Product of normalized local vectors, one per factor.
    pub fn product(locals: &[Vec<C64>]) -> Result<Self> {
        let dims: Vec<usize> = locals.iter().map(Vec::len).collect();
        let mut amps = vec![C64::new(1.0, 0.0)];
        for v in locals {
            let n = norm(v);
            if !(n > 0.0) {
                return Err(Error::InvalidArgument("local state is zero".into()));
            }
            amps = amps.iter().flat_map(|a| v.iter().map(move |x| a * x / n)).collect();
        }
        Self::new(dims, amps)
    }

    /// Basis state with the given digit on every factor.
    pub fn basis(dims: Vec<usize>, digits: &[usize]) -> Result<Self> {
        let locals: Vec<Vec<C64>> = dims
            .iter()
            .zip(digits)
            .map(|(&d, &k)| {
                let mut v = vec![C64::new(0.0, 0.0); d];
                if k < d {
                    v[k] = C64::new(1.0, 0.0);
                }
                v
            })
            .collect();
        if digits.len() != dims.len() || digits.iter().zip(&dims).any(|(k, d)| k >= d) {
            return Err(Error::InvalidArgument(format!("digits {digits:?} do not fit dims {dims:?}")));
        }
        Self::product(&locals)
    }

    /// Site states followed by the vacuum on every remaining factor.
    pub fn with_vacuum(dims: Vec<usize>, sites: &[Vec<C64>]) -> Result<Self> {
        let mut locals = sites.to_vec();
        for &d in &dims[sites.len().min(dims.len())..] {
            let mut v = vec![C64::new(0.0, 0.0); d];
            v[0] = C64::new(1.0, 0.0);
            locals.push(v);
        }
        let state = Self::product(&locals)?;
        if state.dims != dims {
            return Err(Error::DimensionMismatch { expected: dims.iter().product(), got: state.dim() });
        }
        Ok(state)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// Probability of finding `factor` at `level`.
    pub fn level_population(&self, factor: usize, level: usize) -> f64 {
        let space = TensorSpace::new(self.dims.clone());
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| space.digit(*i, factor) == level)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// `Σ_k k · P(factor = k)`.
    pub fn mean_level(&self, factor: usize) -> f64 {
        let space = TensorSpace::new(self.dims.clone());
        self.amplitudes.iter().enumerate().map(|(i, a)| space.digit(i, factor) as f64 * a.norm_sqr()).sum()
    }

    /// Reduced density matrix of one factor.
    pub fn reduced(&self, factor: usize) -> CMatrix {
        let space = TensorSpace::new(self.dims.clone());
        let d = self.dims[factor];
        let stride = space.stride(factor);
        let mut rho = CMatrix::zeros(d, d);
        for i in (0..self.amplitudes.len()).filter(|&i| space.digit(i, factor) == 0) {
            for r in 0..d {
                for c in 0..d {
                    rho[(r, c)] += self.amplitudes[i + r * stride] * self.amplitudes[i + c * stride].conj();
                }
            }
        }
        rho
    }

    pub fn overlap(&self, other: &QuantumState) -> C64 {
        crate::numeric::krylov::inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn distance(&self, other: &QuantumState) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn from_raw(dims: Vec<usize>, amplitudes: Vec<C64>) -> Self {
        Self { dims, amplitudes }
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }
}

/// `⟨ψ| O ⊗ I |ψ⟩` for `O` acting on `factors` (first most significant).
pub fn expectation(psi: &QuantumState, o: &CMatrix, factors: &[usize]) -> Result<f64> {
    check_hermitian(o)?;
    let local: usize = factors.iter().map(|&f| psi.dims.get(f).copied().unwrap_or(0)).product();
    if local != o.nrows() || factors.iter().any(|&f| f >= psi.dims.len()) {
        return Err(Error::DimensionMismatch { expected: local, got: o.nrows() });
    }
    let op = TensorSpace::new(psi.dims.clone()).embed(o, factors);
    let v = crate::numeric::krylov::inner(&psi.amplitudes, &op.mul_vec(&psi.amplitudes));
    let scale = crate::ops::hermitian_norm(o).max(1.0);
    if v.im.abs() > 1e-10 * scale {
        return Err(Error::NotHermitian(v.im.abs()));
    }
    Ok(v.re)
}

/// What to do when the top Fock level of a mode is populated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakagePolicy {
    #[default]
    Error,
    Warn,
    Ignore,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionConfig {
    /// Largest step for time-dependent segments.
    pub dt: f64,
    pub krylov_dim: usize,
    /// Local error target per accepted step.
    pub tolerance: f64,
    pub n_max: usize,
    pub dim_cap: usize,
    pub leakage: LeakagePolicy,
    pub leakage_threshold: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            krylov_dim: 30,
            tolerance: 1e-9,
            n_max: 3,
            dim_cap: dimension_cap(),
            leakage: LeakagePolicy::Error,
            leakage_threshold: 1e-6,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) || self.n_max < 2 || self.krylov_dim == 0 || !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!("invalid evolution configuration {self:?}")));
        }
        Ok(())
    }

    fn min_step(&self) -> f64 {
        self.dt * 2f64.powi(-20)
    }
}

/// Diagnostics of one evolution.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EvolutionReport {
    pub steps: usize,
    pub rejected: usize,
    /// Sum of accepted local error estimates.
    pub error_estimate: f64,
    /// Largest top-level Fock population seen at segment ends.
    pub leakage: f64,
}

pub fn evolve(h: &HamiltonianAssembly, psi0: &QuantumState, t0: f64, t1: f64, cfg: &EvolutionConfig) -> Result<QuantumState> {
    evolve_with_report(h, psi0, t0, t1, cfg).map(|(s, _)| s)
}

/// Time-ordered evolution from `t0` to `t1`: segments between schedule
/// breakpoints, adaptive Krylov steps where `H` is constant and
/// step-halving midpoint steps where it is pulsed.
pub fn evolve_with_report(
    h: &HamiltonianAssembly,
    psi0: &QuantumState,
    t0: f64,
    t1: f64,
    cfg: &EvolutionConfig,
) -> Result<(QuantumState, EvolutionReport)> {
    cfg.validate()?;
    if psi0.dim() != h.dim() || psi0.dims() != h.space().dims() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: psi0.dim() });
    }
    if !(t1 >= t0) {
        return Err(Error::InvalidArgument(format!("evolution must run forward, got [{t0}, {t1}]")));
    }
    let mut report = EvolutionReport::default();
    let mut state = psi0.amplitudes.clone();
    let mut cuts = vec![t0];
    cuts.extend(h.breakpoints().into_iter().filter(|&b| b > t0 && b < t1));
    cuts.push(t1);
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        if segment_is_constant(h, a, b) {
            let frozen = h.at(0.5 * (a + b));
            let tol = cfg.tolerance * ((b - a) / cfg.dt).max(1.0);
            let (next, err) = expm_adaptive(&frozen, &state, b - a, tol, cfg.krylov_dim, cfg.min_step())
                .ok_or(Error::Stiffness { t: a, min_step: cfg.min_step() })?;
            state = next;
            report.steps += 1;
            report.error_estimate += err;
            renormalize(&mut state, a)?;
        } else {
            pulsed_segment(h, &mut state, a, b, cfg, &mut report)?;
        }
        let leak = top_level_population(h, &state);
        report.leakage = report.leakage.max(leak);
    }
    if report.leakage > cfg.leakage_threshold {
        match cfg.leakage {
            LeakagePolicy::Error => {
                return Err(Error::CutoffLeakage { population: report.leakage, threshold: cfg.leakage_threshold })
            }
            LeakagePolicy::Warn => warn!(
                "top Fock level population {:.3e} exceeds {:.1e}; raise the cutoff",
                report.leakage, cfg.leakage_threshold
            ),
            LeakagePolicy::Ignore => {}
        }
    }
    Ok((QuantumState::from_raw(psi0.dims.clone(), state), report))
}

fn segment_is_constant(h: &HamiltonianAssembly, a: f64, b: f64) -> bool {
    h.driven().iter().all(|(c, _)| match c {
        Coefficient::Pulse(p) => p.end() <= a || p.start >= b,
        _ => true,
    })
}

fn renormalize(state: &mut [C64], t: f64) -> Result<()> {
    let n = norm(state);
    if (n - 1.0).abs() >= NORM_DRIFT_TOL {
        return Err(Error::Stiffness { t, min_step: 0.0 });
    }
    state.iter_mut().for_each(|z| *z /= n);
    Ok(())
}

fn pulsed_segment(
    h: &HamiltonianAssembly,
    state: &mut Vec<C64>,
    a: f64,
    b: f64,
    cfg: &EvolutionConfig,
    report: &mut EvolutionReport,
) -> Result<()> {
    let mut t = a;
    let mut step = cfg.dt.min(b - a);
    while t < b - 1e-15 * b.abs().max(1.0) {
        step = step.min(b - t);
        let k = cfg.krylov_dim;
        let full = expm_step(&h.at(t + 0.5 * step), state, step, k);
        let first = expm_step(&h.at(t + 0.25 * step), state, 0.5 * step, k);
        let second = expm_step(&h.at(t + 0.75 * step), &first.state, 0.5 * step, k);
        let diff = full.state.iter().zip(&second.state).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        let krylov = full.error_estimate + first.error_estimate + second.error_estimate;
        // Richardson extrapolation cancels the leading local error term.
        let extrapolated: Vec<C64> = second.state.iter().zip(&full.state).map(|(s, f)| (s * 4.0 - f) / 3.0).collect();
        let n = norm(&extrapolated);
        if diff + krylov <= cfg.tolerance && (n - 1.0).abs() < NORM_DRIFT_TOL {
            *state = extrapolated.into_iter().map(|z| z / n).collect();
            t += step;
            report.steps += 1;
            report.error_estimate += diff / 3.0 + krylov;
            step = (step * 1.5).min(cfg.dt);
        } else {
            report.rejected += 1;
            step *= 0.5;
            if step < cfg.min_step() {
                return Err(Error::Stiffness { t, min_step: cfg.min_step() });
            }
        }
    }
    Ok(())
}

/// Largest population of the top level over the Fock factors.
pub fn top_level_population(h: &HamiltonianAssembly, state: &[C64]) -> f64 {
    let space = h.space();
    let factors = h.fock_factors();
    if factors.is_empty() {
        return 0.0;
    }
    let mut pops = vec![0.0; factors.len()];
    for (i, a) in state.iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        for (slot, &f) in pops.iter_mut().zip(factors) {
            if space.digit(i, f) + 1 == space.dims()[f] {
                *slot += p;
            }
        }
    }
    pops.into_iter().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{identity, number, qubit_number, sigma_x};
    use std::f64::consts::PI;

    #[test]
    fn zero_hamiltonian_is_identity() {
        let h = HamiltonianAssembly::new(vec![2, 3], 1 << 10).unwrap();
        let psi = QuantumState::basis(vec![2, 3], &[1, 2]).unwrap();
        let out = evolve(&h, &psi, 0.0, 5.0, &EvolutionConfig::default()).unwrap();
        assert!(out.distance(&psi) < 1e-15);
    }

    #[test]
    fn rabi_pi_pulse() {
        let mut h = HamiltonianAssembly::new(vec![2], 1 << 10).unwrap();
        h.add(Coefficient::One, &(sigma_x() * C64::new(PI / 2.0, 0.0)), &[0]);
        let psi = QuantumState::basis(vec![2], &[0]).unwrap();
        let out = evolve(&h, &psi, 0.0, 1.0, &EvolutionConfig::default()).unwrap();
        assert!((out.amplitudes()[1] - C64::new(0.0, -1.0)).norm() < 1e-8);
        assert!((expectation(&out, &qubit_number(), &[0]).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn expectation_basics() {
        let psi = QuantumState::basis(vec![2, 4], &[1, 3]).unwrap();
        assert!((expectation(&psi, &identity(2), &[0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((expectation(&psi, &qubit_number(), &[0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((expectation(&psi, &number(4), &[1]).unwrap() - 3.0).abs() < 1e-15);
        assert!(expectation(&psi, &crate::ops::sigma_plus(), &[0]).is_err());
        assert!((psi.mean_level(1) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn leakage_policy() {
        let mut h = HamiltonianAssembly::new(vec![3], 1 << 10).unwrap();
        h.mark_fock(0);
        let x = crate::ops::position(3);
        h.add(Coefficient::One, &x, &[0]);
        let psi = QuantumState::basis(vec![3], &[0]).unwrap();
        let cfg = EvolutionConfig::default();
        assert!(matches!(evolve(&h, &psi, 0.0, 2.0, &cfg), Err(Error::CutoffLeakage { .. })));
        let cfg = EvolutionConfig { leakage: LeakagePolicy::Ignore, ..cfg };
        assert!(evolve(&h, &psi, 0.0, 2.0, &cfg).is_ok());
    }

    #[test]
    fn reduced_state_of_product() {
        let s = QuantumState::product(&[
            vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ])
        .unwrap();
        let rho = s.reduced(0);
        assert!((rho[(0, 1)].re - 0.5).abs() < 1e-15);
        let rho = s.reduced(1);
        assert!((rho[(1, 1)].re - 1.0).abs() < 1e-15);
    }
}
