//! Qudit lattices with local terms coupled to baths: geometry, spatial
//! restriction and the light-cone bound.

mod bounds;
mod io;
mod schedule;

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

pub use bounds::{lr_velocity, prop1_bound, prop1_log_bound, Prop1Inputs};
pub use io::{BathSpec, ModelSpec, TermSpec, MODEL_SCHEMA};
pub use schedule::{Coefficient, Pulse, PulseShape, PulsedMatrix, Schedule, SchedulePiece};

use crate::error::{Error, Result};
use crate::kernels::{build_upper_bound, MemoryKernel, UpperBoundKernel};

/// Hypercubic lattice with integer coordinates, row-major site indices and
/// Chebyshev distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    extents: Vec<usize>,
    periodic: Vec<bool>,
}

impl Lattice {
    pub fn new(extents: Vec<usize>, periodic: Vec<bool>) -> Result<Self> {
        if extents.is_empty() || extents.contains(&0) {
            return Err(Error::InvalidModel(format!("extents must be positive, got {extents:?}")));
        }
        let periodic = if periodic.is_empty() { vec![false; extents.len()] } else { periodic };
        if periodic.len() != extents.len() {
            return Err(Error::InvalidModel("one periodicity flag per axis".into()));
        }
        Ok(Self { extents, periodic })
    }

    /// Open chain of `n` sites.
    pub fn chain(n: usize) -> Result<Self> {
        Self::new(vec![n], vec![false])
    }

    pub fn dimension(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    pub fn num_sites(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn index(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.extents.len() || coords.iter().zip(&self.extents).any(|(c, e)| c >= e) {
            return Err(Error::SiteOutOfLattice(coords.to_vec()));
        }
        Ok(coords.iter().zip(&self.extents).fold(0, |acc, (c, e)| acc * e + c))
    }

    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.extents.len()];
        for k in (0..self.extents.len()).rev() {
            out[k] = index % self.extents[k];
            index /= self.extents[k];
        }
        out
    }

    /// Chebyshev distance, wrapping along periodic axes.
    pub fn distance(&self, i: usize, j: usize) -> usize {
        let (a, b) = (self.coords(i), self.coords(j));
        (0..a.len())
            .map(|k| {
                let d = a[k].abs_diff(b[k]);
                if self.periodic[k] {
                    d.min(self.extents[k] - d)
                } else {
                    d
                }
            })
            .max()
            .unwrap_or(0)
    }

    /// Largest pairwise distance within `sites`.
    pub fn diameter(&self, sites: &[usize]) -> usize {
        let mut d = 0;
        for (k, &i) in sites.iter().enumerate() {
            for &j in &sites[k + 1..] {
                d = d.max(self.distance(i, j));
            }
        }
        d
    }

    /// `X[l] = {x : d(x, X) <= l}` as a membership mask.
    pub fn neighbourhood(&self, x: &[usize], l: usize) -> Vec<bool> {
        (0..self.num_sites()).map(|s| x.iter().any(|&y| self.distance(s, y) <= l)).collect()
    }
}

/// Bath two-point functions for one coupled term.
#[derive(Debug, Clone)]
pub enum Bath {
    /// Vacuum bath with commutator kernel `V`; `K^{νν'} = c_{νν'} V` with
    /// `c = ½[[1, i], [-i, 1]]` for the `(x, p)` quadratures.
    Vacuum { kernel: MemoryKernel },
    /// Explicit `K^{νν'}`, indexed `[ν][ν']` with `0 = x`, `1 = p`.
    Full { kernels: Box<[[MemoryKernel; 2]; 2]> },
}

impl Bath {
    pub fn vacuum_coefficients() -> [[C64; 2]; 2] {
        let h = 0.5;
        [[C64::new(h, 0.0), C64::new(0.0, h)], [C64::new(0.0, -h), C64::new(h, 0.0)]]
    }

    /// `K^{νν'}(τ)` and the reflected `K^{ν'ν}(-τ)` for all quadrature pairs.
    pub fn kernels_for_bound(&self) -> Vec<MemoryKernel> {
        let mut out = Vec::with_capacity(8);
        match self {
            Bath::Vacuum { kernel } => {
                let c = Self::vacuum_coefficients();
                for row in c {
                    for coeff in row {
                        out.push(kernel.transformed(coeff, false));
                        out.push(kernel.transformed(coeff, true));
                    }
                }
            }
            Bath::Full { kernels } => {
                for (nu, row) in kernels.iter().enumerate() {
                    for (nup, k) in row.iter().enumerate() {
                        out.push(k.clone());
                        out.push(kernels[nup][nu].transformed(C64::new(1.0, 0.0), true));
                    }
                }
            }
        }
        out
    }

    /// The commutator kernel `V` of a vacuum bath.
    pub fn commutator_kernel(&self) -> Option<&MemoryKernel> {
        match self {
            Bath::Vacuum { kernel } => Some(kernel),
            Bath::Full { .. } => None,
        }
    }
}

/// System-bath coupling `B^x R^x + B^p R^p` of one term.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coupling {
    pub rx: Schedule,
    pub rp: Schedule,
    pub bath: String,
}

/// A local term `h_α` on the sites `S_α`, optionally coupled to a bath.
/// Operators act on `⊗_{x∈S_α} C^q` with the first listed site most
/// significant.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionTerm {
    pub support: Vec<usize>,
    pub h: Schedule,
    pub coupling: Option<Coupling>,
}

/// Geometric constants: largest support diameter and coordination number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct GeometryStats {
    pub a0: usize,
    pub z: usize,
}

/// A qudit lattice with local terms and bath assignments.
#[derive(Debug, Clone)]
pub struct LatticeModel {
    lattice: Lattice,
    qudit_dim: usize,
    terms: Vec<InteractionTerm>,
    baths: BTreeMap<String, Bath>,
    /// Index of each term in the unrestricted model.
    origin: Vec<usize>,
}

impl LatticeModel {
    pub fn new(lattice: Lattice, qudit_dim: usize, terms: Vec<InteractionTerm>, baths: BTreeMap<String, Bath>) -> Result<Self> {
        let origin = (0..terms.len()).collect();
        let model = Self { lattice, qudit_dim, terms, baths, origin };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        if self.qudit_dim < 2 {
            return Err(Error::InvalidModel(format!("qudit dimension must be at least 2, got {}", self.qudit_dim)));
        }
        let n = self.lattice.num_sites();
        for (alpha, term) in self.terms.iter().enumerate() {
            if term.support.is_empty() {
                return Err(Error::InvalidModel(format!("term {alpha} has an empty support")));
            }
            if let Some(&bad) = term.support.iter().find(|&&s| s >= n) {
                return Err(Error::SiteOutOfLattice(vec![bad]));
            }
            let mut sorted = term.support.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != term.support.len() {
                return Err(Error::InvalidModel(format!("term {alpha} lists a site twice")));
            }
            let dim = self.local_dim(term);
            term.h.validate(dim, &format!("h of term {alpha}"))?;
            if let Some(c) = &term.coupling {
                c.rx.validate(dim, &format!("R^x of term {alpha}"))?;
                c.rp.validate(dim, &format!("R^p of term {alpha}"))?;
                if !self.baths.contains_key(&c.bath) {
                    return Err(Error::InvalidModel(format!("term {alpha} refers to unknown bath '{}'", c.bath)));
                }
            }
        }
        Ok(())
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn qudit_dim(&self) -> usize {
        self.qudit_dim
    }

    pub fn terms(&self) -> &[InteractionTerm] {
        &self.terms
    }

    pub fn baths(&self) -> &BTreeMap<String, Bath> {
        &self.baths
    }

    pub fn bath(&self, id: &str) -> Option<&Bath> {
        self.baths.get(id)
    }

    /// Indices of the terms in the unrestricted model.
    pub fn origin(&self) -> &[usize] {
        &self.origin
    }

    pub fn local_dim(&self, term: &InteractionTerm) -> usize {
        self.qudit_dim.pow(term.support.len() as u32)
    }

    /// Terms carrying a bath coupling, in order.
    pub fn coupled_terms(&self) -> impl Iterator<Item = (usize, &InteractionTerm, &Coupling)> {
        self.terms.iter().enumerate().filter_map(|(a, t)| t.coupling.as_ref().map(|c| (a, t, c)))
    }

    /// Upper-bound kernel over every `K^{νν'}_α` in use, including reflections.
    pub fn upper_bound(&self) -> Result<UpperBoundKernel> {
        let kernels: Vec<MemoryKernel> = self
            .coupled_terms()
            .flat_map(|(_, _, c)| self.baths[&c.bath].kernels_for_bound())
            .collect();
        if kernels.is_empty() {
            return build_upper_bound(&[MemoryKernel::zero()]);
        }
        build_upper_bound(&kernels)
    }

    pub fn geometry_stats(&self) -> GeometryStats {
        geometry_stats(self)
    }

    pub fn restrict(&self, x: &[usize], l: usize) -> Result<LatticeModel> {
        restrict(self, x, l)
    }

    /// Schedule breakpoints of every operator in the model.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for t in &self.terms {
            out.extend(t.h.breakpoints());
            if let Some(c) = &t.coupling {
                out.extend(c.rx.breakpoints());
                out.extend(c.rp.breakpoints());
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// `a0 = max_α diam(S_α)`, `Z = max_α #{α' : S_α' ∩ S_α ≠ ∅}`.
pub fn geometry_stats(model: &LatticeModel) -> GeometryStats {
    let lattice = &model.lattice;
    let a0 = model.terms.iter().map(|t| lattice.diameter(&t.support)).max().unwrap_or(0);
    let z = model
        .terms
        .iter()
        .map(|t| model.terms.iter().filter(|u| u.support.iter().any(|s| t.support.contains(s))).count())
        .max()
        .unwrap_or(0);
    GeometryStats { a0, z }
}

/// Keeps the terms whose support meets `X[l]`.
pub fn restrict(model: &LatticeModel, x: &[usize], l: usize) -> Result<LatticeModel> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("restriction set X is empty".into()));
    }
    let n = model.lattice.num_sites();
    if let Some(&bad) = x.iter().find(|&&s| s >= n) {
        return Err(Error::SiteOutOfLattice(vec![bad]));
    }
    let mask = model.lattice.neighbourhood(x, l);
    let mut terms = Vec::new();
    let mut origin = Vec::new();
    for (k, t) in model.terms.iter().enumerate() {
        if t.support.iter().any(|&s| mask[s]) {
            terms.push(t.clone());
            origin.push(model.origin[k]);
        }
    }
    let baths = model
        .baths
        .iter()
        .filter(|(id, _)| terms.iter().any(|t| t.coupling.as_ref().is_some_and(|c| &c.bath == *id)))
        .map(|(id, b)| (id.clone(), b.clone()))
        .collect();
    Ok(LatticeModel { lattice: model.lattice.clone(), qudit_dim: model.qudit_dim, terms, baths, origin })
}
