//! Supersonic transport: a pulse protocol that moves one excitation across
//! `T√T` qubits in time `3T + 1` by spending photons stored in local
//! oscillators, simulated block by block.
//!
//! Qubits are indexed `0..n`, oscillator `i` sits next to qubit `i` for
//! `i < n - 1`. Output tables are 1-based.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{dense_evolve, evolve_with_report, EvolutionConfig, LeakagePolicy, QuantumState};
use crate::error::{Error, Result};
use crate::hamiltonian::{dimension_cap, HamiltonianAssembly};
use crate::lattice::{prop1_log_bound, Coefficient, GeometryStats, Prop1Inputs, Pulse, PulseShape};
use crate::numeric::fmt12;
use crate::numeric::krylov::norm;
use crate::ops::{annihilation, kron_all, sigma_minus, sigma_plus, sigma_x, CMatrix};

pub const LEAKAGE_THRESHOLD: f64 = 1e-6;
/// Largest purity defect tolerated when a block is split back into factors.
pub const PURITY_TOL: f64 = 1e-6;
/// Largest qubit population allowed in a restricted run.
pub const RESTRICTED_TOL: f64 = 1e-9;

/// One local term of the protocol Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolTerm {
    /// `Ω(t) σ_x` on qubit `i`.
    Drive(usize),
    /// `g(t) (a_i† σ_i + h.c.)`.
    Exchange(usize),
    /// `ξ(t - 2T) σ_x` on qubit 0.
    Excitation,
    /// `g_i(t) (|0_i 1_{i+1}⟩⟨1_i 0_{i+1}| a_i + h.c.)`.
    Hop(usize),
}

impl ProtocolTerm {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            ProtocolTerm::Drive(i) | ProtocolTerm::Exchange(i) => vec![i],
            ProtocolTerm::Excitation => vec![0],
            ProtocolTerm::Hop(i) => vec![i, i + 1],
        }
    }

    pub fn oscillator(&self) -> Option<usize> {
        match *self {
            ProtocolTerm::Exchange(i) | ProtocolTerm::Hop(i) => Some(i),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Protocol {
    m: usize,
    qubits: usize,
    shape: PulseShape,
}

/// The protocol for `T = m²` on `T√T + 2` qubits, so that at least one
/// oscillator keeps all `T` photons.
pub fn build_protocol(m: usize) -> Result<Protocol> {
    Protocol::new(m, m.pow(3) + 2, PulseShape::Bump)
}

impl Protocol {
    pub fn new(m: usize, qubits: usize, shape: PulseShape) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("m must be at least 1".into()));
        }
        if m > 1000 {
            return Err(Error::InvalidArgument(format!("m = {m} is far beyond simulation scale")));
        }
        if qubits < m.pow(3) + 1 {
            return Err(Error::InvalidArgument(format!("{qubits} qubits cannot carry the excitation over {} sites", m.pow(3))));
        }
        Ok(Self { m, qubits, shape })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Photons stored per oscillator, `T = m²`.
    pub fn photons(&self) -> usize {
        self.m * self.m
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn oscillators(&self) -> usize {
        self.qubits - 1
    }

    pub fn shape(&self) -> PulseShape {
        self.shape
    }

    /// Number of hops, `T√T`.
    pub fn hops(&self) -> usize {
        self.m.pow(3)
    }

    /// 0-based index of the qubit that ends up excited.
    pub fn target(&self) -> usize {
        self.hops()
    }

    pub fn duration(&self) -> f64 {
        3.0 * self.photons() as f64 + 1.0
    }

    fn pulse(&self, start: f64, duration: f64, amplitude: f64) -> Pulse {
        Pulse { shape: self.shape, start, duration, amplitude }
    }

    /// Pulses of `Ω(t) = Σ_j ξ(t - 2j)`, `j < T`.
    pub fn drive_pulses(&self) -> Vec<Pulse> {
        (0..self.photons()).map(|j| self.pulse(2.0 * j as f64, 1.0, 1.0)).collect()
    }

    /// Pulses of `g(t) = Σ_j ξ(t - 2j - 1)/√(j+1)`, `j < T`.
    pub fn exchange_pulses(&self) -> Vec<Pulse> {
        (0..self.photons()).map(|j| self.pulse(2.0 * j as f64 + 1.0, 1.0, 1.0 / ((j + 1) as f64).sqrt())).collect()
    }

    pub fn excitation_pulse(&self) -> Pulse {
        self.pulse(2.0 * self.photons() as f64, 1.0, 1.0)
    }

    /// Hop `i` lasts `1/√T` and transfers the excitation with one photon.
    pub fn hop_pulse(&self, i: usize) -> Pulse {
        let w = 1.0 / self.m as f64;
        self.pulse(2.0 * self.photons() as f64 + 1.0 + i as f64 * w, w, w)
    }

    pub fn omega(&self, t: f64) -> f64 {
        self.drive_pulses().iter().map(|p| p.value(t)).sum()
    }

    pub fn g(&self, t: f64) -> f64 {
        self.exchange_pulses().iter().map(|p| p.value(t)).sum()
    }

    pub fn terms(&self) -> Vec<ProtocolTerm> {
        let mut out: Vec<ProtocolTerm> =
            (0..self.oscillators()).flat_map(|i| [ProtocolTerm::Drive(i), ProtocolTerm::Exchange(i)]).collect();
        out.push(ProtocolTerm::Excitation);
        out.extend((0..self.hops()).map(ProtocolTerm::Hop));
        out
    }

    /// Terms whose support meets the qubits within distance `l` of the
    /// target. Needs `l < T√T` so that the excitation pulse stays out.
    pub fn restricted_terms(&self, l: usize) -> Result<Vec<ProtocolTerm>> {
        if l >= self.hops() {
            return Err(Error::Precondition(format!(
                "l = {l} reaches qubit 1 and would include the excitation pulse; need l < {}",
                self.hops()
            )));
        }
        let target = self.target();
        Ok(self.terms().into_iter().filter(|t| t.qubits().iter().any(|&q| q.abs_diff(target) <= l)).collect())
    }

    /// `a0` and `Z` of the term supports on the qubit chain.
    pub fn geometry_stats(&self) -> GeometryStats {
        let terms = self.terms();
        let z = terms
            .iter()
            .map(|t| {
                let s = t.qubits();
                terms.iter().filter(|u| u.qubits().iter().any(|q| s.contains(q))).count()
            })
            .max()
            .unwrap_or(0);
        GeometryStats { a0: 1, z }
    }

    /// Pulse-weighted local matrices of `term`, with factors ordered as its
    /// qubits followed by its oscillator.
    fn local_parts(&self, term: ProtocolTerm, n_max: usize) -> Vec<(Pulse, CMatrix)> {
        let a = annihilation(n_max);
        match term {
            ProtocolTerm::Drive(_) => self.drive_pulses().into_iter().map(|p| (p, sigma_x())).collect(),
            ProtocolTerm::Exchange(_) => {
                let jc = kron_all(&[sigma_minus(), a.adjoint()]) + kron_all(&[sigma_plus(), a.clone()]);
                self.exchange_pulses().into_iter().map(|p| (p, jc.clone())).collect()
            }
            ProtocolTerm::Excitation => vec![(self.excitation_pulse(), sigma_x())],
            ProtocolTerm::Hop(i) => {
                let forward = kron_all(&[sigma_minus(), sigma_plus(), a]);
                let hop = &forward + forward.adjoint();
                vec![(self.hop_pulse(i), hop)]
            }
        }
    }

    /// Factor dimensions of the full space: qubits, then oscillators.
    pub fn full_dims(&self, n_max: usize) -> Vec<usize> {
        let mut dims = vec![2; self.qubits];
        dims.extend(std::iter::repeat_n(n_max, self.oscillators()));
        dims
    }

    /// The protocol Hamiltonian over `terms` on the full space.
    pub fn full_space_hamiltonian(&self, terms: &[ProtocolTerm], n_max: usize, cap: usize) -> Result<HamiltonianAssembly> {
        let mut h = HamiltonianAssembly::new(self.full_dims(n_max), cap)?;
        for f in self.qubits..self.qubits + self.oscillators() {
            h.mark_fock(f);
        }
        for &term in terms {
            let mut factors = term.qubits();
            factors.extend(term.oscillator().map(|i| self.qubits + i));
            for (p, m) in self.local_parts(term, n_max) {
                h.add(Coefficient::Pulse(p), &m, &factors);
            }
        }
        h.assert_hermitian(1e-12)?;
        Ok(h)
    }

    fn check_cutoff(&self, n_max: usize) -> Result<()> {
        if n_max < self.photons() + 2 {
            return Err(Error::Precondition(format!(
                "Fock cutoff {n_max} is below T + 2 = {}",
                self.photons() + 2
            )));
        }
        Ok(())
    }

    /// Evolution settings: steps no longer than `1/(64√T)`.
    pub fn evolution_config(&self, n_max: usize, tolerance: f64) -> EvolutionConfig {
        EvolutionConfig {
            dt: 1.0 / (64.0 * self.m as f64),
            tolerance,
            n_max,
            leakage: LeakagePolicy::Error,
            leakage_threshold: LEAKAGE_THRESHOLD,
            ..EvolutionConfig::default()
        }
    }
}

/// Where the block simulation stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Pump,
    Excitation,
    Propagation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockOptions {
    pub n_max: usize,
    pub through: Stage,
    /// Re-run every block with the dense Magnus propagator.
    pub oracle: bool,
    pub tolerance: f64,
}

impl BlockOptions {
    pub fn new(n_max: usize) -> Self {
        Self { n_max, through: Stage::Propagation, oracle: true, tolerance: 1e-12 }
    }
}

/// Diagnostics of one block evolution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockCheck {
    pub label: String,
    pub t0: f64,
    pub t1: f64,
    pub dim: usize,
    /// Distance to the dense Magnus result from the same input.
    pub oracle_error: Option<f64>,
    /// `|‖U ψ‖ - 1|` of the dense propagation.
    pub norm_error: Option<f64>,
    pub min_purity: f64,
    /// `1 - |⟨φ_1 ⊗ ... ⊗ φ_k|ψ⟩|²` of the product kept after the block.
    pub split_loss: f64,
    pub leakage: f64,
}

/// Final occupations, 0-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profile {
    pub qubit_populations: Vec<f64>,
    pub oscillator_photons: Vec<f64>,
    pub blocks: Vec<BlockCheck>,
}

impl Profile {
    /// Columns `site,qubit_population,oscillator_photons`, 1-based sites; the
    /// last qubit has no oscillator.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("site,qubit_population,oscillator_photons\n");
        for (k, p) in self.qubit_populations.iter().enumerate() {
            let photons = self.oscillator_photons.get(k).map(|&n| fmt12(n)).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", k + 1, fmt12(*p), photons));
        }
        out
    }

    pub fn total_photons(&self) -> f64 {
        self.oscillator_photons.iter().sum()
    }

    pub fn max_oracle_error(&self) -> Option<f64> {
        self.blocks.iter().filter_map(|b| b.oracle_error).reduce(f64::max)
    }

    pub fn max_norm_error(&self) -> Option<f64> {
        self.blocks.iter().filter_map(|b| b.norm_error).reduce(f64::max)
    }

    pub fn min_purity(&self) -> f64 {
        self.blocks.iter().map(|b| b.min_purity).fold(1.0, f64::min)
    }

    pub fn max_leakage(&self) -> f64 {
        self.blocks.iter().map(|b| b.leakage).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Factor {
    Qubit(usize),
    Oscillator(usize),
}

/// A set of terms evolved together on a few factors over `[t0, t1]`.
struct Block {
    label: String,
    factors: Vec<Factor>,
    terms: Vec<ProtocolTerm>,
    t0: f64,
    t1: f64,
}

/// Product state with one vector per qubit and per oscillator.
struct ProductState {
    qubits: Vec<Vec<C64>>,
    oscillators: Vec<Vec<C64>>,
}

impl ProductState {
    fn vacuum(p: &Protocol, n_max: usize) -> Self {
        let basis = |d: usize| {
            let mut v = vec![C64::new(0.0, 0.0); d];
            v[0] = C64::new(1.0, 0.0);
            v
        };
        Self { qubits: vec![basis(2); p.qubits()], oscillators: vec![basis(n_max); p.oscillators()] }
    }

    fn get(&self, f: Factor) -> &Vec<C64> {
        match f {
            Factor::Qubit(i) => &self.qubits[i],
            Factor::Oscillator(i) => &self.oscillators[i],
        }
    }

    fn set(&mut self, f: Factor, v: Vec<C64>) {
        match f {
            Factor::Qubit(i) => self.qubits[i] = v,
            Factor::Oscillator(i) => self.oscillators[i] = v,
        }
    }

    fn profile(&self, blocks: Vec<BlockCheck>) -> Profile {
        Profile {
            qubit_populations: self.qubits.iter().map(|q| q[1].norm_sqr()).collect(),
            oscillator_photons: self
                .oscillators
                .iter()
                .map(|o| o.iter().enumerate().map(|(k, z)| k as f64 * z.norm_sqr()).sum())
                .collect(),
            blocks,
        }
    }
}

fn stage_blocks(p: &Protocol, terms: &[ProtocolTerm], stage: Stage) -> Vec<Block> {
    let has = |t: ProtocolTerm| terms.contains(&t);
    let two_t = 2.0 * p.photons() as f64;
    match stage {
        Stage::Pump => (0..p.oscillators())
            .filter_map(|i| {
                let active: Vec<_> =
                    [ProtocolTerm::Drive(i), ProtocolTerm::Exchange(i)].into_iter().filter(|&t| has(t)).collect();
                (!active.is_empty()).then(|| Block {
                    label: format!("pump {}", i + 1),
                    factors: vec![Factor::Qubit(i), Factor::Oscillator(i)],
                    terms: active,
                    t0: 0.0,
                    t1: two_t,
                })
            })
            .collect(),
        Stage::Excitation => has(ProtocolTerm::Excitation)
            .then(|| Block {
                label: "excitation".into(),
                factors: vec![Factor::Qubit(0)],
                terms: vec![ProtocolTerm::Excitation],
                t0: two_t,
                t1: two_t + 1.0,
            })
            .into_iter()
            .collect(),
        Stage::Propagation => (0..p.hops())
            .filter(|&i| has(ProtocolTerm::Hop(i)))
            .map(|i| {
                let pulse = p.hop_pulse(i);
                Block {
                    label: format!("hop {}", i + 1),
                    factors: vec![Factor::Qubit(i), Factor::Qubit(i + 1), Factor::Oscillator(i)],
                    terms: vec![ProtocolTerm::Hop(i)],
                    t0: pulse.start,
                    t1: pulse.end(),
                }
            })
            .collect(),
    }
}

fn block_hamiltonian(p: &Protocol, block: &Block, n_max: usize) -> Result<HamiltonianAssembly> {
    let dims: Vec<usize> = block
        .factors
        .iter()
        .map(|f| match f {
            Factor::Qubit(_) => 2,
            Factor::Oscillator(_) => n_max,
        })
        .collect();
    let mut h = HamiltonianAssembly::new(dims, dimension_cap())?;
    let position = |f: Factor| block.factors.iter().position(|&g| g == f).expect("term factor inside its block");
    for (k, f) in block.factors.iter().enumerate() {
        if matches!(f, Factor::Oscillator(_)) {
            h.mark_fock(k);
        }
    }
    for &term in &block.terms {
        let mut local: Vec<usize> = term.qubits().into_iter().map(|q| position(Factor::Qubit(q))).collect();
        local.extend(term.oscillator().map(|i| position(Factor::Oscillator(i))));
        for (pulse, m) in p.local_parts(term, n_max) {
            h.add(Coefficient::Pulse(pulse), &m, &local);
        }
    }
    h.assert_hermitian(1e-12)?;
    Ok(h)
}

/// Dominant eigenvector of a nearly pure density matrix by power iteration.
fn dominant_vector(rho: &CMatrix) -> Vec<C64> {
    let n = rho.nrows();
    let start = (0..n).max_by(|&a, &b| rho[(a, a)].re.total_cmp(&rho[(b, b)].re)).unwrap_or(0);
    let mut v = nalgebra::DVector::from_fn(n, |k, _| if k == start { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    for _ in 0..200 {
        let next = rho * &v;
        let nn = next.norm();
        if nn == 0.0 {
            break;
        }
        let next = next / C64::new(nn, 0.0);
        let moved = (&next - &v).norm();
        v = next;
        if moved < 1e-15 {
            break;
        }
    }
    v.iter().copied().collect()
}

/// Evolves one block from the current product state and splits the result
/// back into single-factor vectors.
fn run_block(
    p: &Protocol,
    block: &Block,
    state: &ProductState,
    opts: &BlockOptions,
) -> Result<(Vec<(Factor, Vec<C64>)>, BlockCheck)> {
    let h = block_hamiltonian(p, block, opts.n_max)?;
    let locals: Vec<Vec<C64>> = block.factors.iter().map(|&f| state.get(f).clone()).collect();
    let psi0 = QuantumState::product(&locals)?;
    let cfg = p.evolution_config(opts.n_max, opts.tolerance);
    let (psi, report) = evolve_with_report(&h, &psi0, block.t0, block.t1, &cfg)?;
    let (oracle_error, norm_error) = if opts.oracle {
        let shortest = block.terms.iter().map(|&t| if matches!(t, ProtocolTerm::Hop(_)) { 1.0 / p.m as f64 } else { 1.0 }).fold(1.0, f64::min);
        let dense = dense_evolve(&h, &psi0, block.t0, block.t1, shortest / 512.0)?;
        (Some(psi.distance(&dense)), Some((norm(dense.amplitudes()) - 1.0).abs()))
    } else {
        (None, None)
    };
    let mut min_purity = 1.0f64;
    let mut parts = Vec::with_capacity(block.factors.len());
    for (k, &f) in block.factors.iter().enumerate() {
        let rho = psi.reduced(k);
        let purity = (&rho * &rho).trace().re;
        min_purity = min_purity.min(purity);
        parts.push((f, dominant_vector(&rho)));
    }
    let product = QuantumState::product(&parts.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>())?;
    let split_loss = (1.0 - product.overlap(&psi).norm_sqr()).max(0.0);
    if split_loss > PURITY_TOL || min_purity < 1.0 - PURITY_TOL {
        return Err(Error::BlockEntangled { block: block.label.clone(), purity: min_purity });
    }
    let check = BlockCheck {
        label: block.label.clone(),
        t0: block.t0,
        t1: block.t1,
        dim: h.dim(),
        oracle_error,
        norm_error,
        min_purity,
        split_loss,
        leakage: report.leakage,
    };
    Ok((parts, check))
}

fn simulate_terms(p: &Protocol, terms: &[ProtocolTerm], opts: &BlockOptions) -> Result<Profile> {
    p.check_cutoff(opts.n_max)?;
    let mut state = ProductState::vacuum(p, opts.n_max);
    let mut checks = Vec::new();
    let pump = stage_blocks(p, terms, Stage::Pump);
    let results: Vec<_> = pump.par_iter().map(|b| run_block(p, b, &state, opts)).collect::<Result<_>>()?;
    for (parts, check) in results {
        parts.into_iter().for_each(|(f, v)| state.set(f, v));
        checks.push(check);
    }
    for stage in [Stage::Excitation, Stage::Propagation] {
        if opts.through == Stage::Pump || (opts.through == Stage::Excitation && stage == Stage::Propagation) {
            break;
        }
        for block in stage_blocks(p, terms, stage) {
            let (parts, check) = run_block(p, &block, &state, opts)?;
            parts.into_iter().for_each(|(f, v)| state.set(f, v));
            checks.push(check);
        }
    }
    Ok(state.profile(checks))
}

/// Block-product simulation of the whole protocol with per-block dense
/// oracle checks.
pub fn simulate_protocol(p: &Protocol, n_max: usize) -> Result<Profile> {
    simulate_protocol_with(p, &BlockOptions::new(n_max))
}

pub fn simulate_protocol_with(p: &Protocol, opts: &BlockOptions) -> Result<Profile> {
    simulate_terms(p, &p.terms(), opts)
}

/// The protocol restricted to terms touching `X[l]`, `X = {target}`. Fails
/// if any qubit ends up populated above `1e-9`.
pub fn simulate_restricted(p: &Protocol, l: usize, n_max: usize) -> Result<Profile> {
    simulate_restricted_with(p, l, &BlockOptions::new(n_max))
}

pub fn simulate_restricted_with(p: &Protocol, l: usize, opts: &BlockOptions) -> Result<Profile> {
    let terms = p.restricted_terms(l)?;
    let profile = simulate_terms(p, &terms, opts)?;
    check_unexcited(&profile)?;
    Ok(profile)
}

fn check_unexcited(profile: &Profile) -> Result<()> {
    let worst = profile.qubit_populations.iter().copied().fold(0.0, f64::max);
    if worst > RESTRICTED_TOL {
        return Err(Error::Postcondition(format!("restricted dynamics excited a qubit to population {worst:e}")));
    }
    Ok(())
}

/// Reference evolution on the full tensor space, feasible for `m = 1`.
/// `l = Some(_)` keeps only the terms touching `X[l]`.
pub fn simulate_full_space(p: &Protocol, l: Option<usize>, n_max: usize) -> Result<Profile> {
    p.check_cutoff(n_max)?;
    let terms = match l {
        Some(l) => p.restricted_terms(l)?,
        None => p.terms(),
    };
    let h = p.full_space_hamiltonian(&terms, n_max, dimension_cap())?;
    let dims = p.full_dims(n_max);
    let psi0 = QuantumState::basis(dims.clone(), &vec![0; dims.len()])?;
    let cfg = p.evolution_config(n_max, 1e-12);
    let (psi, report) = evolve_with_report(&h, &psi0, 0.0, p.duration(), &cfg)?;
    let profile = Profile {
        qubit_populations: (0..p.qubits()).map(|q| psi.level_population(q, 1)).collect(),
        oscillator_photons: (0..p.oscillators()).map(|i| psi.mean_level(p.qubits() + i)).collect(),
        blocks: vec![BlockCheck {
            label: "full space".into(),
            t0: 0.0,
            t1: p.duration(),
            dim: h.dim(),
            oracle_error: None,
            norm_error: None,
            min_purity: 1.0,
            split_loss: 0.0,
            leakage: report.leakage,
        }],
    };
    if l.is_some() {
        check_unexcited(&profile)?;
    }
    Ok(profile)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationRow {
    pub tv_surrogate: f64,
    pub velocity: f64,
    pub log10_bound: f64,
    /// Whether the bound at this `(l, t)` is at least the observed deviation.
    pub holds: bool,
    /// Smallest `m` at which the bound for `l = T√T - 1`, `t = 3T + 1` drops
    /// below 1, the deviation the protocol always produces.
    pub first_violating_m: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationReport {
    pub m: usize,
    pub l: usize,
    pub t: f64,
    /// 1-based target qubit.
    pub target: usize,
    pub full_population: f64,
    pub restricted_population: f64,
    pub delta_observed: f64,
    pub a0: usize,
    pub z: usize,
    pub rows: Vec<ViolationRow>,
}

impl ViolationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn log_bound(a0: usize, z: usize, tv: f64, l: f64, t: f64) -> Result<f64> {
    prop1_log_bound(&Prop1Inputs { o_norm: 1.0, diam_x: 0.0, l, dt: t, a0: a0 as f64, z: z as f64, tv_u: tv, d: 1 })
}

/// Smallest `m ≥ from` whose protocol would contradict the bound with total
/// variation `tv`; searched up to `m = 2⁴⁰`.
pub fn first_violating_m(a0: usize, z: usize, tv: f64, from: usize) -> Result<Option<usize>> {
    let violated = |m: usize| -> Result<bool> {
        let mf = m as f64;
        Ok(log_bound(a0, z, tv, mf.powi(3) - 1.0, 3.0 * mf * mf + 1.0)? < 0.0)
    };
    let from = from.max(1);
    if violated(from)? {
        return Ok(Some(from));
    }
    let mut lo = from;
    let mut hi = from.max(2);
    while !violated(hi)? {
        lo = hi;
        hi *= 2;
        if hi > 1 << 40 {
            return Ok(None);
        }
    }
    // the log-bound behaves like 3v m² - m³ here, so the violation persists
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if violated(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Observed deviation at the target against the restriction-error bound
/// evaluated with finite total-variation surrogates.
pub fn bound_violation_report(
    p: &Protocol,
    l: usize,
    full: &Profile,
    restricted: &Profile,
    surrogates: &[f64],
) -> Result<ViolationReport> {
    p.restricted_terms(l)?;
    let target = p.target();
    let population = |prof: &Profile| {
        prof.qubit_populations
            .get(target)
            .copied()
            .ok_or_else(|| Error::InvalidArgument("profile does not belong to this protocol".into()))
    };
    let full_population = population(full)?;
    let restricted_population = population(restricted)?;
    let delta = (full_population - restricted_population).abs();
    let GeometryStats { a0, z } = p.geometry_stats();
    let t = p.duration();
    let rows = surrogates
        .iter()
        .map(|&tv| {
            let lb = log_bound(a0, z, tv, l as f64, t)?;
            Ok(ViolationRow {
                tv_surrogate: tv,
                velocity: crate::lattice::lr_velocity(a0 as f64, z as f64, tv)?,
                log10_bound: lb / std::f64::consts::LN_10,
                holds: lb >= delta.ln(),
                first_violating_m: first_violating_m(a0, z, tv, p.m)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ViolationReport {
        m: p.m,
        l,
        t,
        target: target + 1,
        full_population,
        restricted_population,
        delta_observed: delta,
        a0,
        z,
        rows,
    })
}
