//! The dilated Hamiltonian: lattice terms plus one bosonic chain per coupled
//! term, each truncated at `n_max` Fock levels.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use super::ChainCoefficients;
use crate::error::{Error, Result};
use crate::hamiltonian::{check_dimension, dimension_cap, HamiltonianAssembly};
use crate::lattice::{Coefficient, LatticeModel};
use crate::ops::{annihilation, kron_all, momentum, number, position};

/// Factor layout of the composite space: sites first, then the modes of each
/// coupled term in term order, chain index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationLayout {
    sites: usize,
    qudit_dim: usize,
    n_max: usize,
    /// Term index of the full model ↦ (first mode factor, mode count).
    chains: BTreeMap<usize, (usize, usize)>,
    dims: Vec<usize>,
}

impl DilationLayout {
    /// Layout for `model` with one chain per coupled term. `chains` is keyed by
    /// term index.
    pub fn new(model: &LatticeModel, chains: &BTreeMap<usize, ChainCoefficients>, n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::InvalidArgument(format!("Fock cutoff must be at least 2, got {n_max}")));
        }
        let sites = model.lattice().num_sites();
        let mut dims = vec![model.qudit_dim(); sites];
        let mut map = BTreeMap::new();
        for (alpha, _, _) in model.coupled_terms() {
            let full = model.origin()[alpha];
            let chain = chains
                .get(&full)
                .ok_or_else(|| Error::InvalidModel(format!("no chain coefficients for coupled term {full}")))?;
            chain.validate()?;
            map.insert(full, (dims.len(), chain.modes()));
            dims.extend(std::iter::repeat_n(n_max, chain.modes()));
        }
        Ok(Self { sites, qudit_dim: model.qudit_dim(), n_max, chains: map, dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Composite dimension, saturating instead of overflowing.
    pub fn planned_dimension(&self) -> u128 {
        crate::numeric::sparse::TensorSpace::checked_dimension(&self.dims)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Mode factors of the chain attached to term `alpha` of the full model.
    pub fn chain_factors(&self, alpha: usize) -> Option<std::ops::Range<usize>> {
        self.chains.get(&alpha).map(|&(first, n)| first..first + n)
    }

    /// Assembles the dilated Hamiltonian of `model`, which must be the model
    /// the layout was built for or a restriction of it. Terms of the full
    /// model missing from `model` leave their chains idle.
    pub fn assemble(
        &self,
        model: &LatticeModel,
        chains: &BTreeMap<usize, ChainCoefficients>,
        cap: usize,
    ) -> Result<HamiltonianAssembly> {
        check_dimension(&self.dims, cap)?;
        if model.lattice().num_sites() != self.sites || model.qudit_dim() != self.qudit_dim {
            return Err(Error::InvalidModel("model does not match the dilation layout".into()));
        }
        let mut h = HamiltonianAssembly::new(self.dims.clone(), cap)?;
        for f in self.sites..self.dims.len() {
            h.mark_fock(f);
        }
        let x = position(self.n_max);
        let p = momentum(self.n_max);
        let n_op = number(self.n_max);
        let b = annihilation(self.n_max);
        let hop = kron_all(&[b.adjoint(), b.clone()]);
        let hop = &hop + hop.adjoint();
        for (alpha, term) in model.terms().iter().enumerate() {
            for (c, m) in term.h.components() {
                h.add(c, m, &term.support);
            }
            let Some(coupling) = &term.coupling else { continue };
            let full = model.origin()[alpha];
            let (first, modes) = self.chains[&full];
            let chain = &chains[&full];
            if chain.modes() != modes {
                return Err(Error::InvalidModel(format!("chain of term {full} changed length")));
            }
            let mut factors = term.support.clone();
            factors.push(first);
            let g = C64::new(chain.g, 0.0);
            for (schedule, quad) in [(&coupling.rx, &x), (&coupling.rp, &p)] {
                for (c, r) in schedule.components() {
                    h.add(c, &(kron_all(&[r.clone(), quad.clone()]) * g), &factors);
                }
            }
            for (j, &w) in chain.omegas.iter().enumerate() {
                h.add(Coefficient::One, &(&n_op * C64::new(w, 0.0)), &[first + j]);
            }
            for (j, &t) in chain.hoppings.iter().enumerate() {
                h.add(Coefficient::One, &(&hop * C64::new(t, 0.0)), &[first + j, first + j + 1]);
            }
        }
        h.assert_hermitian(1e-12)?;
        Ok(h)
    }
}

/// `Σ h_α + Σ_α g_α (x_{α,1} R^x_α + p_{α,1} R^p_α) + Σ_α H_{α,E}` with chains
/// keyed by term index, under the configured dimension cap.
pub fn build_dilated_hamiltonian(
    model: &LatticeModel,
    chains: &BTreeMap<usize, ChainCoefficients>,
    n_max: usize,
) -> Result<HamiltonianAssembly> {
    DilationLayout::new(model, chains, n_max)?.assemble(model, chains, dimension_cap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::MemoryKernel;
    use crate::lattice::{Bath, Coupling, InteractionTerm, Lattice, Schedule};
    use crate::ops::{identity, sigma_minus, sigma_plus, sigma_x, sigma_y, sigma_z};

    fn one_qubit(coupled: bool) -> LatticeModel {
        let coupling = coupled.then(|| Coupling {
            rx: Schedule::Constant(sigma_x()),
            rp: Schedule::Constant(sigma_y()),
            bath: "b".into(),
        });
        let term = InteractionTerm { support: vec![0], h: Schedule::Constant(sigma_z() * C64::new(0.5, 0.0)), coupling };
        let baths = BTreeMap::from([("b".to_string(), Bath::Vacuum { kernel: MemoryKernel::exponential(1.0).unwrap() })]);
        LatticeModel::new(Lattice::chain(1).unwrap(), 2, vec![term], baths).unwrap()
    }

    #[test]
    fn decoupled_model_is_the_system_hamiltonian() {
        let h = build_dilated_hamiltonian(&one_qubit(false), &BTreeMap::new(), 3).unwrap();
        assert_eq!(h.dim(), 2);
        assert!((h.eval(0.0).to_dense() - sigma_z() * C64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn quadrature_coupling_is_jaynes_cummings() {
        let chain = ChainCoefficients::new(0.3, vec![0.7], vec![]).unwrap();
        let chains = BTreeMap::from([(0, chain)]);
        let h = build_dilated_hamiltonian(&one_qubit(true), &chains, 4).unwrap().eval(0.0).to_dense();
        let b = annihilation(4);
        let want = kron_all(&[sigma_z() * C64::new(0.5, 0.0), identity(4)])
            + kron_all(&[identity(2), number(4) * C64::new(0.7, 0.0)])
            + (kron_all(&[sigma_plus(), b.clone()]) + kron_all(&[sigma_minus(), b.adjoint()]))
                * C64::new(0.3 * std::f64::consts::SQRT_2, 0.0);
        assert!((h - want).norm() < 1e-14);
    }

    #[test]
    fn missing_chain_is_reported() {
        assert!(build_dilated_hamiltonian(&one_qubit(true), &BTreeMap::new(), 3).is_err());
    }
}
