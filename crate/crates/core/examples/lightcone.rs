//! Light-cone experiment on a four-qubit chain with a bath on every site.

use std::collections::BTreeMap;

use liebsim::chain::DilationParams;
use liebsim::dynamics::{lightcone_experiment, random_product_state, EvolutionConfig, LeakagePolicy, LightconeSetup, Observable};
use liebsim::kernels::MemoryKernel;
use liebsim::lattice::{Bath, Coupling, InteractionTerm, Lattice, LatticeModel, Schedule};
use liebsim::ops::{kron_all, qubit_number, sigma_x, sigma_y, sigma_z};
use num_complex::Complex64 as C64;
use rand::SeedableRng;

fn main() -> liebsim::Result<()> {
    let n = 4;
    let half = C64::new(0.5, 0.0);
    let pair = (kron_all(&[sigma_x(), sigma_x()]) + kron_all(&[sigma_y(), sigma_y()])) * half;
    let mut terms: Vec<InteractionTerm> = (0..n - 1)
        .map(|i| InteractionTerm { support: vec![i, i + 1], h: Schedule::Constant(pair.clone()), coupling: None })
        .collect();
    for i in 0..n {
        let coupling = Coupling { rx: Schedule::Constant(sigma_x()), rp: Schedule::Constant(sigma_y()), bath: "b".into() };
        terms.push(InteractionTerm { support: vec![i], h: Schedule::Constant(sigma_z() * half), coupling: Some(coupling) });
    }
    let v = MemoryKernel::exponential(1.0)?;
    let baths = BTreeMap::from([("b".to_string(), Bath::Vacuum { kernel: v.clone() })]);
    let model = LatticeModel::new(Lattice::chain(n)?, 2, terms, baths)?;
    let chain = DilationParams::new(0.1, 10.0, 1)?.chain_for(&v)?;
    let chains = model.coupled_terms().map(|(alpha, _, _)| (model.origin()[alpha], chain.clone())).collect();

    let setup = LightconeSetup {
        initial: random_product_state(2, n, &mut rand_chacha::ChaCha8Rng::seed_from_u64(1)),
        model,
        chains,
        observable: Observable::new(vec![0], qubit_number())?,
        l_values: vec![0, 1, 2],
        t_values: vec![0.0, 0.1, 0.2, 0.4],
        config: EvolutionConfig { n_max: 3, leakage: LeakagePolicy::Warn, ..EvolutionConfig::default() },
    };
    let result = lightcone_experiment(&setup)?;
    print!("{}", result.to_csv());
    println!("dimension {}, TV(U) = {}", result.metadata.dimension, liebsim::numeric::fmt12(result.metadata.tv_u));
    Ok(())
}
