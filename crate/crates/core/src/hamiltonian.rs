//! Sparse time-dependent Hamiltonians `H(t) = H₀ + Σ_k c_k(t) H_k` on a
//! tensor-product space.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lattice::Coefficient;
use crate::numeric::krylov::HermitianOperator;
use crate::numeric::sparse::{CsrMatrix, TensorSpace};
use crate::ops::CMatrix;

pub const DEFAULT_DIM_CAP: usize = 1 << 24;
pub const DIM_CAP_ENV: &str = "LIEBSIM_DIM_CAP";

/// Largest composite dimension accepted, overridable through `LIEBSIM_DIM_CAP`.
pub fn dimension_cap() -> usize {
    std::env::var(DIM_CAP_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_DIM_CAP)
}

pub fn check_dimension(dims: &[usize], cap: usize) -> Result<usize> {
    let dim = TensorSpace::checked_dimension(dims);
    if dim > cap as u128 {
        return Err(Error::DimensionCap { dim, cap });
    }
    Ok(dim as usize)
}

#[derive(Debug, Clone)]
pub struct HamiltonianAssembly {
    space: TensorSpace,
    constant: CsrMatrix,
    driven: Vec<(Coefficient, CsrMatrix)>,
    /// Factors holding truncated bosonic modes, watched for cutoff leakage.
    fock_factors: Vec<usize>,
}

impl HamiltonianAssembly {
    pub fn new(dims: Vec<usize>, cap: usize) -> Result<Self> {
        let dim = check_dimension(&dims, cap)?;
        Ok(Self { space: TensorSpace::new(dims), constant: CsrMatrix::zeros(dim), driven: Vec::new(), fock_factors: Vec::new() })
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn constant(&self) -> &CsrMatrix {
        &self.constant
    }

    pub fn driven(&self) -> &[(Coefficient, CsrMatrix)] {
        &self.driven
    }

    pub fn fock_factors(&self) -> &[usize] {
        &self.fock_factors
    }

    pub fn mark_fock(&mut self, factor: usize) {
        if !self.fock_factors.contains(&factor) {
            self.fock_factors.push(factor);
        }
    }

    /// Adds `c(t) · local` acting on `factors`.
    pub fn add(&mut self, coefficient: Coefficient, local: &CMatrix, factors: &[usize]) {
        if local.iter().all(|z| z.norm() == 0.0) {
            return;
        }
        let m = self.space.embed(local, factors);
        self.add_embedded(coefficient, m);
    }

    pub fn add_embedded(&mut self, coefficient: Coefficient, m: CsrMatrix) {
        let one = C64::new(1.0, 0.0);
        let dim = self.dim();
        if coefficient.is_constant() {
            self.constant = CsrMatrix::linear_combination(dim, &[(one, &self.constant), (one, &m)]);
        } else if let Some(slot) = self.driven.iter_mut().find(|(c, _)| *c == coefficient) {
            slot.1 = CsrMatrix::linear_combination(dim, &[(one, &slot.1), (one, &m)]);
        } else {
            self.driven.push((coefficient, m));
        }
    }

    pub fn is_time_independent(&self) -> bool {
        self.driven.is_empty()
    }

    /// Sorted times where some coefficient is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.driven.iter().flat_map(|(c, _)| c.breakpoints()).collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// `H(t)` as an operator without assembling the sum.
    pub fn at(&self, t: f64) -> FrozenHamiltonian<'_> {
        let weights = self
            .driven
            .iter()
            .enumerate()
            .filter_map(|(k, (c, _))| {
                let v = c.value(t);
                (v != 0.0).then_some((k, v))
            })
            .collect();
        FrozenHamiltonian { assembly: self, weights }
    }

    pub fn eval(&self, t: f64) -> CsrMatrix {
        let frozen = self.at(t);
        let mut parts = vec![(C64::new(1.0, 0.0), &self.constant)];
        parts.extend(frozen.weights.iter().map(|&(k, v)| (C64::new(v, 0.0), &self.driven[k].1)));
        CsrMatrix::linear_combination(self.dim(), &parts)
    }

    /// Largest Hermiticity defect over all components.
    pub fn hermiticity_error(&self) -> f64 {
        self.driven.iter().map(|(_, m)| m.hermiticity_error()).fold(self.constant.hermiticity_error(), f64::max)
    }

    pub fn assert_hermitian(&self, tol: f64) -> Result<()> {
        let e = self.hermiticity_error();
        if e > tol {
            return Err(Error::NotHermitian(e));
        }
        Ok(())
    }
}

/// `H(t)` at a fixed time.
pub struct FrozenHamiltonian<'a> {
    assembly: &'a HamiltonianAssembly,
    weights: Vec<(usize, f64)>,
}

impl HermitianOperator for FrozenHamiltonian<'_> {
    fn dim(&self) -> usize {
        self.assembly.dim()
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        self.assembly.constant.mul_add(x, C64::new(1.0, 0.0), out);
        for &(k, v) in &self.weights {
            self.assembly.driven[k].1.mul_add(x, C64::new(v, 0.0), out);
        }
    }
}
