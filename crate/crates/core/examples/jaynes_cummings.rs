//! A qubit coupled to a single chain mode: vacuum Rabi oscillations.

use std::collections::BTreeMap;

use liebsim::chain::{ChainCoefficients, DilationLayout};
use liebsim::dynamics::{evolve, expectation, EvolutionConfig, QuantumState};
use liebsim::kernels::MemoryKernel;
use liebsim::lattice::{Bath, Coupling, InteractionTerm, Lattice, LatticeModel, Schedule};
use liebsim::ops::{qubit_number, sigma_x, sigma_y};
use num_complex::Complex64 as C64;

fn main() -> liebsim::Result<()> {
    let coupling = Coupling { rx: Schedule::Constant(sigma_x()), rp: Schedule::Constant(sigma_y()), bath: "b".into() };
    let term = InteractionTerm { support: vec![0], h: Schedule::zero(2), coupling: Some(coupling) };
    let baths = BTreeMap::from([("b".to_string(), Bath::Vacuum { kernel: MemoryKernel::exponential(1.0)? })]);
    let model = LatticeModel::new(Lattice::chain(1)?, 2, vec![term], baths)?;
    let g_chain = 0.5;
    let chains = BTreeMap::from([(0, ChainCoefficients::new(g_chain, vec![0.0], vec![])?)]);

    let layout = DilationLayout::new(&model, &chains, 3)?;
    let h = layout.assemble(&model, &chains, 1 << 20)?;
    let mut psi = QuantumState::with_vacuum(layout.dims().to_vec(), &[vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]])?;
    let g = std::f64::consts::SQRT_2 * g_chain;
    let cfg = EvolutionConfig::default();
    println!("{:>6} {:>10} {:>10}", "t", "P_e", "cos^2 gt");
    let mut t = 0.0;
    while t < 2.0 * std::f64::consts::PI / g {
        let next = t + 0.25;
        psi = evolve(&h, &psi, t, next, &cfg)?;
        t = next;
        println!("{t:>6.2} {:>10.6} {:>10.6}", expectation(&psi, &qubit_number(), &[0])?, (g * t).cos().powi(2));
    }
    Ok(())
}
