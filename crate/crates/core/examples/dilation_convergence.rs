//! Observable convergence as the chain gains modes.

use std::collections::BTreeMap;

use liebsim::chain::{DilationLayout, DilationParams};
use liebsim::dynamics::{evolve, expectation, EvolutionConfig, LeakagePolicy, QuantumState};
use liebsim::kernels::MemoryKernel;
use liebsim::lattice::{Bath, Coupling, InteractionTerm, Lattice, LatticeModel, Schedule};
use liebsim::ops::{kron_all, qubit_number, sigma_minus, sigma_plus, sigma_x, sigma_y, sigma_z};
use num_complex::Complex64 as C64;

fn main() -> liebsim::Result<()> {
    let pair = (kron_all(&[sigma_plus(), sigma_minus()]) + kron_all(&[sigma_minus(), sigma_plus()])) * C64::new(0.6, 0.0);
    let coupling = Coupling { rx: Schedule::Constant(sigma_x()), rp: Schedule::Constant(sigma_y()), bath: "b".into() };
    let terms = vec![
        InteractionTerm { support: vec![0, 1], h: Schedule::Constant(pair), coupling: None },
        InteractionTerm { support: vec![1], h: Schedule::Constant(sigma_z() * C64::new(0.25, 0.0)), coupling: Some(coupling) },
    ];
    let v = MemoryKernel::exponential(1.0)?;
    let baths = BTreeMap::from([("b".to_string(), Bath::Vacuum { kernel: v.clone() })]);
    let model = LatticeModel::new(Lattice::chain(2)?, 2, terms, baths)?;
    let cfg = EvolutionConfig { n_max: 3, leakage: LeakagePolicy::Ignore, ..EvolutionConfig::default() };
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);

    let mut previous: Option<f64> = None;
    for modes in [1, 2, 4, 6, 8, 10] {
        let chains = BTreeMap::from([(1, DilationParams::new(0.1, 8.0, modes)?.chain_for(&v)?)]);
        let layout = DilationLayout::new(&model, &chains, cfg.n_max)?;
        let h = layout.assemble(&model, &chains, cfg.dim_cap)?;
        let psi0 = QuantumState::with_vacuum(layout.dims().to_vec(), &[vec![zero, one], vec![zero, one]])?;
        let value = expectation(&evolve(&h, &psi0, 0.0, 1.0, &cfg)?, &qubit_number(), &[0])?;
        let change = previous.map(|p| format!("{:.3e}", (value - p).abs())).unwrap_or_default();
        println!("N_m = {modes:>2}  dim {:>6}  <n_1>(1) = {value:.9}  {change}", h.dim());
        previous = Some(value);
    }
    Ok(())
}
