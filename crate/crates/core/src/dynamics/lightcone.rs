//! The light-cone experiment: observable deviation between full and
//! restricted dilated dynamics, against the restriction-error bound.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{evolve, expectation, EvolutionConfig, LeakagePolicy, QuantumState};
use crate::chain::{ChainCoefficients, DilationLayout};
use crate::error::{Error, Result};
use crate::lattice::{prop1_bound, LatticeModel, Prop1Inputs};
use crate::numeric::fmt12;
use crate::ops::{hermitian_norm, matrix_serde, CMatrix};

/// A Hermitian operator on the listed sites, first site most significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observable {
    pub sites: Vec<usize>,
    #[serde(with = "matrix_serde")]
    pub matrix: CMatrix,
}

impl Observable {
    pub fn new(sites: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        crate::ops::check_hermitian(&matrix)?;
        Ok(Self { sites, matrix })
    }

    fn validate(&self, model: &LatticeModel) -> Result<()> {
        let n = model.lattice().num_sites();
        if self.sites.is_empty() {
            return Err(Error::InvalidArgument("observable has no sites".into()));
        }
        if let Some(&s) = self.sites.iter().find(|&&s| s >= n) {
            return Err(Error::SiteOutOfLattice(vec![s]));
        }
        let dim = model.qudit_dim().pow(self.sites.len() as u32);
        if self.matrix.nrows() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.matrix.nrows() });
        }
        crate::ops::check_hermitian(&self.matrix)
    }
}

/// Everything one light-cone sweep needs.
#[derive(Debug, Clone)]
pub struct LightconeSetup {
    pub model: LatticeModel,
    /// Chains keyed by term index.
    pub chains: BTreeMap<usize, ChainCoefficients>,
    pub observable: Observable,
    pub l_values: Vec<usize>,
    /// Nondecreasing, starting at or after 0.
    pub t_values: Vec<f64>,
    /// Initial state of every site; the chains start in the vacuum.
    pub initial: Vec<Vec<C64>>,
    pub config: EvolutionConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LightconeRow {
    pub l: usize,
    pub t: f64,
    pub delta: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LightconeMetadata {
    pub model_hash: String,
    pub dimension: usize,
    pub n_max: usize,
    pub modes: BTreeMap<usize, usize>,
    pub tv_u: f64,
    pub a0: usize,
    pub z: usize,
    pub lattice_dimension: u32,
    pub o_norm: f64,
    pub diam_x: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LightconeResult {
    pub rows: Vec<LightconeRow>,
    pub metadata: LightconeMetadata,
}

impl LightconeResult {
    /// Columns `l, t, delta, bound`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("l,t,delta,bound\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.l, fmt12(r.t), fmt12(r.delta), fmt12(r.bound)));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn delta(&self, l: usize, t: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.l == l && r.t == t).map(|r| r.delta)
    }
}

/// SHA-256 of the model and chain JSON.
pub fn model_hash(model: &LatticeModel, chains: &BTreeMap<usize, ChainCoefficients>) -> Result<String> {
    let mut hasher = Sha256::new();
    hasher.update(model.to_json()?.as_bytes());
    hasher.update(serde_json::to_string(chains)?.as_bytes());
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Expectation of the observable at each time, evolving forward through the
/// list.
fn trace(
    layout: &DilationLayout,
    model: &LatticeModel,
    setup: &LightconeSetup,
    psi0: &QuantumState,
) -> Result<Vec<f64>> {
    let h = layout.assemble(model, &setup.chains, setup.config.dim_cap)?;
    let mut psi = psi0.clone();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(setup.t_values.len());
    for &t in &setup.t_values {
        psi = evolve(&h, &psi, now, t, &setup.config)?;
        now = t;
        out.push(expectation(&psi, &setup.observable.matrix, &setup.observable.sites)?);
    }
    Ok(out)
}

/// Runs the sweep. Restrictions are evolved on the full composite space with
/// the chains of dropped terms left idle; each `l` is an independent job.
pub fn lightcone_experiment(setup: &LightconeSetup) -> Result<LightconeResult> {
    let model = &setup.model;
    setup.config.validate()?;
    setup.observable.validate(model)?;
    if setup.t_values.iter().any(|&t| !(t >= 0.0)) || setup.t_values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("times must be nonnegative and nondecreasing".into()));
    }
    let layout = DilationLayout::new(model, &setup.chains, setup.config.n_max)?;
    let dim = layout.planned_dimension();
    if dim > setup.config.dim_cap as u128 {
        let l = setup.l_values.iter().copied().max().unwrap_or(0);
        return Err(Error::LightconeCap { l, dim, cap: setup.config.dim_cap });
    }
    let psi0 = QuantumState::with_vacuum(layout.dims().to_vec(), &setup.initial)?;

    let stats = model.geometry_stats();
    let tv_u = model.upper_bound()?.total_variation(None)?;
    let o_norm = hermitian_norm(&setup.observable.matrix);
    let diam_x = model.lattice().diameter(&setup.observable.sites);
    let d = model.lattice().dimension() as u32;

    let restricted: Vec<LatticeModel> =
        setup.l_values.iter().map(|&l| model.restrict(&setup.observable.sites, l)).collect::<Result<_>>()?;
    let mut jobs: Vec<Option<usize>> = vec![None];
    for (k, r) in restricted.iter().enumerate() {
        if r.terms().len() != model.terms().len() {
            jobs.push(Some(k));
        }
    }
    let traces: Vec<(Option<usize>, Vec<f64>)> = jobs
        .par_iter()
        .map(|job| {
            let m = job.map_or(model, |k| &restricted[k]);
            trace(&layout, m, setup, &psi0).map(|v| (*job, v))
        })
        .collect::<Result<_>>()?;
    let full = &traces[0].1;

    let mut rows = Vec::with_capacity(setup.l_values.len() * setup.t_values.len());
    for (k, &l) in setup.l_values.iter().enumerate() {
        let values = traces.iter().find(|(j, _)| *j == Some(k)).map_or(full, |(_, v)| v);
        for (i, &t) in setup.t_values.iter().enumerate() {
            let bound = prop1_bound(&Prop1Inputs {
                o_norm,
                diam_x: diam_x as f64,
                l: l as f64,
                dt: t,
                a0: stats.a0 as f64,
                z: stats.z as f64,
                tv_u,
                d,
            })?;
            rows.push(LightconeRow { l, t, delta: (full[i] - values[i]).abs(), bound });
        }
    }
    let modes = setup.chains.iter().map(|(&k, c)| (k, c.modes())).collect();
    Ok(LightconeResult {
        rows,
        metadata: LightconeMetadata {
            model_hash: model_hash(model, &setup.chains)?,
            dimension: dim as usize,
            n_max: setup.config.n_max,
            modes,
            tv_u,
            a0: stats.a0,
            z: stats.z,
            lattice_dimension: d,
            o_norm,
            diam_x,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockRow {
    pub n_max: usize,
    pub value: f64,
    /// Change from the previous cutoff.
    pub difference: Option<f64>,
    pub converged: bool,
}

/// Observable at time `t` for each cutoff; converged once successive values
/// differ by less than 1e-6. Leakage is tolerated since it is what is being
/// measured.
pub fn fock_convergence_check(
    model: &LatticeModel,
    chains: &BTreeMap<usize, ChainCoefficients>,
    observable: &Observable,
    initial: &[Vec<C64>],
    t: f64,
    n_max_list: &[usize],
    config: &EvolutionConfig,
) -> Result<Vec<FockRow>> {
    observable.validate(model)?;
    if n_max_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("cutoffs must be increasing".into()));
    }
    let mut rows: Vec<FockRow> = Vec::with_capacity(n_max_list.len());
    for &n_max in n_max_list {
        let cfg = EvolutionConfig { n_max, leakage: LeakagePolicy::Ignore, ..*config };
        let layout = DilationLayout::new(model, chains, n_max)?;
        let h = layout.assemble(model, chains, cfg.dim_cap)?;
        let psi0 = QuantumState::with_vacuum(layout.dims().to_vec(), initial)?;
        let psi = evolve(&h, &psi0, 0.0, t, &cfg)?;
        let value = expectation(&psi, &observable.matrix, &observable.sites)?;
        let difference = rows.last().map(|r| (value - r.value).abs());
        rows.push(FockRow { n_max, value, difference, converged: difference.is_some_and(|d| d < 1e-6) });
    }
    Ok(rows)
}

/// Independent random pure states, one per site, with Gaussian amplitudes.
pub fn random_product_state<R: Rng>(q: usize, sites: usize, rng: &mut R) -> Vec<Vec<C64>> {
    let mut gauss = || {
        let u: f64 = rng.gen_range(f64::EPSILON..1.0);
        let v: f64 = rng.gen();
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    };
    (0..sites)
        .map(|_| {
            let v: Vec<C64> = (0..q).map(|_| C64::new(gauss(), gauss())).collect();
            let n = crate::numeric::krylov::norm(&v);
            v.into_iter().map(|z| z / n).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::MemoryKernel;
    use crate::lattice::{Bath, Coupling, InteractionTerm, Lattice, Schedule};
    use crate::ops::{kron_all, qubit_number, sigma_x, sigma_y, sigma_z};
    use rand::SeedableRng;

    fn chain_model(n: usize) -> LatticeModel {
        let half = C64::new(0.5, 0.0);
        let xy = (kron_all(&[sigma_x(), sigma_x()]) + kron_all(&[sigma_y(), sigma_y()])) * half;
        let mut terms = Vec::new();
        for i in 0..n - 1 {
            terms.push(InteractionTerm { support: vec![i, i + 1], h: Schedule::Constant(xy.clone()), coupling: None });
        }
        terms.push(InteractionTerm {
            support: vec![n - 1],
            h: Schedule::Constant(sigma_z() * half),
            coupling: Some(Coupling { rx: Schedule::Constant(sigma_x()), rp: Schedule::Constant(sigma_y()), bath: "b".into() }),
        });
        let baths = BTreeMap::from([("b".to_string(), Bath::Vacuum { kernel: MemoryKernel::exponential(1.0).unwrap() })]);
        LatticeModel::new(Lattice::chain(n).unwrap(), 2, terms, baths).unwrap()
    }

    fn setup(l_values: Vec<usize>) -> LightconeSetup {
        let model = chain_model(3);
        let chains = BTreeMap::from([(2, ChainCoefficients::new(0.4, vec![0.5], vec![]).unwrap())]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        LightconeSetup {
            initial: random_product_state(2, 3, &mut rng),
            model,
            chains,
            observable: Observable::new(vec![0], qubit_number()).unwrap(),
            l_values,
            t_values: vec![0.0, 0.2, 0.5],
            config: EvolutionConfig { n_max: 4, leakage: LeakagePolicy::Ignore, ..EvolutionConfig::default() },
        }
    }

    #[test]
    fn whole_lattice_and_time_zero_give_no_deviation() {
        let r = lightcone_experiment(&setup(vec![0, 1, 2])).unwrap();
        for row in &r.rows {
            if row.l == 2 || row.t == 0.0 {
                assert!(row.delta < 1e-9, "{row:?}");
            }
            assert!(row.delta <= row.bound, "{row:?}");
        }
        assert!(r.delta(0, 0.5).unwrap() > 0.0);
        assert_eq!(r.metadata.model_hash.len(), 64);
        assert!(r.to_csv().starts_with("l,t,delta,bound\n0,0,0,0\n"));
    }

    #[test]
    fn cap_names_the_largest_l() {
        let mut s = setup(vec![0, 1]);
        s.config.dim_cap = 16;
        assert!(matches!(lightcone_experiment(&s), Err(Error::LightconeCap { l: 1, .. })));
    }

    #[test]
    fn decoupled_bath_converges_exactly() {
        let model = chain_model(2);
        let chains = BTreeMap::from([(1, ChainCoefficients::new(0.0, vec![0.5], vec![]).unwrap())]);
        let obs = Observable::new(vec![1], qubit_number()).unwrap();
        let init = vec![vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)], vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
        let rows = fock_convergence_check(&model, &chains, &obs, &init, 1.0, &[2, 3, 4], &EvolutionConfig::default()).unwrap();
        assert!(rows.iter().skip(1).all(|r| r.difference == Some(0.0) && r.converged));
    }
}
