#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Acceptance suite: one line per criterion, then a single assertion.
//!
//! Run with `cargo test --test acceptance --release -- --nocapture` to watch
//! the lines appear; they are written straight to stdout either way.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use liebsim::chain::{
    chain_truncation_error_bound, discretize, freq_cutoff_error_bound, lanczos_chain_with, regularization_error_bound,
    regularization_error_bound_for_kernel, ChainCoefficients, DensityPreset, DilationLayout, DilationParams,
    LanczosOptions, SpectralDensity,
};
use liebsim::dynamics::{
    dense_evolve, evolve, expectation, lightcone_experiment, random_product_state, EvolutionConfig, LeakagePolicy,
    LightconeSetup, Observable, QuantumState,
};
use liebsim::hamiltonian::HamiltonianAssembly;
use liebsim::kernels::{closeness_test, lemma_lambdas, mollify, MemoryKernel, TestFunction};
use liebsim::lattice::{Bath, Coefficient, Coupling, InteractionTerm, Lattice, LatticeModel, Schedule};
use liebsim::ops::{kron_all, qubit_number, sigma_minus, sigma_plus, sigma_x, sigma_y, sigma_z, CMatrix};
use liebsim::supersonic::{build_protocol, simulate_full_space, simulate_protocol, simulate_restricted};

type Outcome = Result<String, String>;

fn fail(msg: impl Into<String>) -> Outcome {
    Err(msg.into())
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn run(id: usize, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
        .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
    let took = start.elapsed();
    let (pass, detail) = match outcome {
        Ok(d) if took <= limit => (true, d),
        Ok(d) => (false, format!("{d}; over the time limit")),
        Err(d) => (false, d),
    };
    let line = format!(
        "criterion {id} {name}: {} ({detail}) [{:.2} s of {} s]\n",
        if pass { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        limit.as_secs()
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    pass
}

fn kernel_calculus() -> Outcome {
    let k = MemoryKernel::exponential(1.0).map_err(err)?;
    let tv = k.total_variation(None).map_err(err)?;
    if (tv - 1.0).abs() > 1e-8 {
        return fail(format!("TV = {tv}"));
    }
    let atom = MemoryKernel::dirac(c(3.0), 1.0).map_err(err)?;
    let left = atom.total_variation(Some((1.0, 4.0))).map_err(err)?;
    let right = atom.total_variation(Some((-2.0, 1.0))).map_err(err)?;
    let inside = atom.total_variation(Some((0.0, 2.0))).map_err(err)?;
    if left != 1.5 || right != 1.5 || inside != 3.0 {
        return fail(format!("edge atom weights {left}, {right}, interior {inside}"));
    }
    Ok(format!("|TV - 1| = {:.1e}, edge atom counts 1.5 of 3", (tv - 1.0).abs()))
}

fn piece(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
    Arc::new(f)
}

/// Twenty piecewise-C¹ functions with exact sup-norms of `f` and `f'`.
fn test_functions() -> Vec<TestFunction> {
    let g = |x: f64| (-x * x).exp();
    let gd = (2.0f64).sqrt() * (-0.5f64).exp();
    let mut fs = vec![
        TestFunction::smooth("sin", f64::sin, 1.0, 1.0),
        TestFunction::smooth("cos", f64::cos, 1.0, 1.0),
        TestFunction::smooth("sin 2x", |x: f64| (2.0 * x).sin(), 1.0, 2.0),
        TestFunction::smooth("cos 3x", |x: f64| (3.0 * x).cos(), 1.0, 3.0),
        TestFunction::smooth("tanh", f64::tanh, 1.0, 1.0),
        TestFunction::smooth("tanh x/2", |x: f64| (0.5 * x).tanh(), 1.0, 0.5),
        TestFunction::smooth("gauss", g, 1.0, gd),
        TestFunction::smooth("x gauss", |x: f64| x * (-0.5 * x * x).exp(), (-0.5f64).exp(), 1.0),
        TestFunction::smooth("lorentz", |x: f64| 1.0 / (1.0 + x * x), 1.0, 3.0 * 3f64.sqrt() / 8.0),
        TestFunction::smooth("cos x/2", |x: f64| (0.5 * x).cos(), 1.0, 0.5),
        TestFunction::step("step 0", 0.0, -1.0, 1.0),
        TestFunction::step("step 1", 1.0, 0.0, 1.0),
        TestFunction::step("step -1/2", -0.5, 2.0, -1.0),
        TestFunction::step("step 2", 2.0, 0.5, -0.5),
    ];
    let pw = |label: &str, bps: Vec<f64>, pieces, s, d| TestFunction::piecewise(label, bps, pieces, s, d).unwrap();
    fs.push(pw("box [0,1]", vec![0.0, 1.0], vec![piece(|_| 0.0), piece(|_| 1.0), piece(|_| 0.0)], 1.0, 0.0));
    fs.push(pw("signed decay", vec![0.0], vec![piece(|x| -x.exp()), piece(|x| (-x).exp())], 1.0, 1.0));
    fs.push(pw("cos cut at 1", vec![1.0], vec![piece(f64::cos), piece(|_| 0.0)], 1.0, 1.0));
    fs.push(pw(
        "clamp",
        vec![-1.0, 1.0],
        vec![piece(|_| -1.0), piece(|x| x), piece(|_| 1.0)],
        1.0,
        1.0,
    ));
    fs.push(pw("half cos", vec![0.0], vec![piece(|_| 0.0), piece(f64::cos)], 1.0, 1.0));
    fs.push(pw(
        "split gauss",
        vec![1.0],
        vec![piece(move |x| g(x - 1.0)), piece(move |x| -0.5 * g(x - 1.0))],
        1.0,
        gd,
    ));
    fs
}

fn mollifier_lemma() -> Outcome {
    let k = MemoryKernel::exponential(1.0).and_then(|k| k.with_atom(c(1.0), 1.0)).map_err(err)?;
    let fs = test_functions();
    if fs.len() != 20 {
        return fail(format!("{} test functions", fs.len()));
    }
    let breakpoints = [-0.5, 0.0, 1.0, 2.0];
    let mut worst: f64 = 0.0;
    for delta in [0.2, 0.1, 0.05] {
        let m = mollify(&k, delta, delta).map_err(err)?;
        let report = closeness_test(&k, &m, &breakpoints, &fs).map_err(err)?;
        let (l0, l1) = lemma_lambdas(&k, &breakpoints, 2.0 * delta).map_err(err)?;
        let bad = report.violations(l0, l1, 0.0);
        if !bad.is_empty() {
            let names: Vec<&str> = bad.iter().map(|&i| fs[i].label()).collect();
            return fail(format!("δ = {delta}: {} violations ({names:?})", bad.len()));
        }
        for i in 0..fs.len() {
            let cap = l0 * report.sup_norms[i] + l1 * report.derivative_sup_norms[i];
            if cap > 0.0 {
                worst = worst.max(report.errors[i] / cap);
            }
        }
    }
    Ok(format!("0 violations over 60 pairings, largest error/bound {worst:.3}"))
}

fn lanczos_oracle() -> Outcome {
    let opts = LanczosOptions { panels: 96, per_panel: 32, grading: 16, reorthogonalize: true };
    let semi = SpectralDensity::preset(DensityPreset::Semicircle { radius: 1.0, height: 1.0 }, &[]).map_err(err)?;
    let chain = lanczos_chain_with(&semi, 2.0, 42, &opts).map_err(err)?;
    let semi_err = chain.omegas[..41]
        .iter()
        .map(|w| w.abs())
        .chain(chain.hoppings[..41].iter().map(|t| (t - 0.5).abs()))
        .fold(0.0, f64::max);
    if semi_err > 1e-8 {
        return fail(format!("semicircle recursion off by {semi_err:.2e}"));
    }

    let flat = SpectralDensity::preset(DensityPreset::Flat { half_width: 1.0, height: 1.0 }, &[]).map_err(err)?;
    let chain = lanczos_chain_with(&flat, 2.0, 41, &opts).map_err(err)?;
    let legendre_err = chain
        .hoppings
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let j = (k + 1) as f64;
            (t * t - j * j / (4.0 * j * j - 1.0)).abs()
        })
        .fold(0.0, f64::max);
    if legendre_err > 1e-8 {
        return fail(format!("Legendre recursion off by {legendre_err:.2e}"));
    }

    let ohmic = SpectralDensity::preset(DensityPreset::Ohmic { alpha: 1.0, cutoff: 1.0 }, &[]).map_err(err)?;
    let n_m = 10;
    let (nodes, weights) = discretize(&ohmic, 6.0, &opts).map_err(err)?;
    let chain = lanczos_chain_with(&ohmic, 6.0, n_m, &opts).map_err(err)?;
    let (gx, gw) = chain.spectral_measure();
    let moment = |x: &[f64], w: &[f64], k: i32| x.iter().zip(w).map(|(x, w)| w * x.powi(k)).sum::<f64>();
    let mut moment_err: f64 = 0.0;
    for k in 0..(2 * n_m - 1) as i32 {
        let exact = moment(&nodes, &weights, k);
        moment_err = moment_err.max((moment(&gx, &gw, k) - exact).abs() / exact.abs());
    }
    if moment_err > 1e-6 {
        return fail(format!("moments off by {moment_err:.2e} relative"));
    }
    Ok(format!(
        "semicircle {semi_err:.1e}, Legendre {legendre_err:.1e}, {} moments {moment_err:.1e} relative",
        2 * n_m - 1
    ))
}

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&a + a.adjoint()) * c(0.5)
}

fn random_state(dims: Vec<usize>, rng: &mut ChaCha8Rng) -> QuantumState {
    let n: usize = dims.iter().product();
    let v: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    QuantumState::new(dims, v.into_iter().map(|z| z / norm).collect()).unwrap()
}

fn single_qubit_bath(g_chain: f64) -> (LatticeModel, BTreeMap<usize, ChainCoefficients>) {
    let coupling = Coupling { rx: Schedule::Constant(sigma_x()), rp: Schedule::Constant(sigma_y()), bath: "b".into() };
    let term = InteractionTerm { support: vec![0], h: Schedule::zero(2), coupling: Some(coupling) };
    let baths = BTreeMap::from([("b".to_string(), Bath::Vacuum { kernel: MemoryKernel::exponential(1.0).unwrap() })]);
    let model = LatticeModel::new(Lattice::chain(1).unwrap(), 2, vec![term], baths).unwrap();
    (model, BTreeMap::from([(0, ChainCoefficients::new(g_chain, vec![0.0], vec![]).unwrap())]))
}

fn dynamics_oracle() -> Outcome {
    // The dilated coupling is √2 g_chain (σ⁺b + σ⁻b†), so g = √2 g_chain.
    let g_chain = 0.5;
    let g = std::f64::consts::SQRT_2 * g_chain;
    let (model, chains) = single_qubit_bath(g_chain);
    let layout = DilationLayout::new(&model, &chains, 3).map_err(err)?;
    let h = layout.assemble(&model, &chains, 1 << 20).map_err(err)?;
    let excited = vec![vec![c(0.0), c(1.0)]];
    let mut psi = QuantumState::with_vacuum(layout.dims().to_vec(), &excited).map_err(err)?;
    let cfg = EvolutionConfig { tolerance: 1e-12, ..EvolutionConfig::default() };
    let steps = 200;
    let t_end = 2.0 * PI / g;
    let mut jc_err: f64 = 0.0;
    for k in 1..=steps {
        let (t0, t1) = ((k - 1) as f64 * t_end / steps as f64, k as f64 * t_end / steps as f64);
        psi = evolve(&h, &psi, t0, t1, &cfg).map_err(err)?;
        let p = expectation(&psi, &qubit_number(), &[0]).map_err(err)?;
        jc_err = jc_err.max((p - (g * t1).cos().powi(2)).abs());
    }
    if jc_err > 1e-6 {
        return fail(format!("JC population off by {jc_err:.2e}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut krylov_err: f64 = 0.0;
    let cases: [Vec<usize>; 3] = [vec![2; 9], vec![3, 4, 5, 2], vec![4, 4, 4, 2, 2]];
    for dims in cases {
        let mut h = HamiltonianAssembly::new(dims.clone(), 1 << 20).map_err(err)?;
        for i in 0..dims.len() {
            h.add(Coefficient::One, &random_hermitian(dims[i], &mut rng), &[i]);
            if i + 1 < dims.len() {
                h.add(Coefficient::One, &random_hermitian(dims[i] * dims[i + 1], &mut rng), &[i, i + 1]);
            }
        }
        let psi0 = random_state(dims, &mut rng);
        let fast = evolve(&h, &psi0, 0.0, 1.5, &cfg).map_err(err)?;
        let slow = dense_evolve(&h, &psi0, 0.0, 1.5, 1.5).map_err(err)?;
        krylov_err = krylov_err.max(fast.distance(&slow));
    }
    if krylov_err > 1e-8 {
        return fail(format!("Krylov vs dense distance {krylov_err:.2e}"));
    }
    Ok(format!("JC max error {jc_err:.1e}, Krylov vs dense {krylov_err:.1e} (dims 512, 120, 256)"))
}

/// Six qubits with hopping pairs and a bath on every site.
fn coupled_chain(n: usize) -> LatticeModel {
    let pair = (kron_all(&[sigma_x(), sigma_x()]) + kron_all(&[sigma_y(), sigma_y()])) * c(0.5);
    let mut terms = Vec::new();
    for i in 0..n - 1 {
        terms.push(InteractionTerm { support: vec![i, i + 1], h: Schedule::Constant(pair.clone()), coupling: None });
    }
    for i in 0..n {
        let coupling = Coupling { rx: Schedule::Constant(sigma_x()), rp: Schedule::Constant(sigma_y()), bath: "b".into() };
        terms.push(InteractionTerm { support: vec![i], h: Schedule::Constant(sigma_z() * c(0.5)), coupling: Some(coupling) });
    }
    let baths = BTreeMap::from([("b".to_string(), Bath::Vacuum { kernel: MemoryKernel::exponential(1.0).unwrap() })]);
    LatticeModel::new(Lattice::chain(n).unwrap(), 2, terms, baths).unwrap()
}

fn light_cone() -> Outcome {
    let model = coupled_chain(6);
    let v = MemoryKernel::exponential(1.0).map_err(err)?;
    let chain = DilationParams::new(0.1, 10.0, 1).and_then(|p| p.chain_for(&v)).map_err(err)?;
    let chains: BTreeMap<usize, ChainCoefficients> =
        model.coupled_terms().map(|(alpha, _, _)| (model.origin()[alpha], chain.clone())).collect();
    let l_values = vec![0, 1, 2, 3];
    let t_values: Vec<f64> = (0..=6).map(|k| 0.05 * k as f64).collect();
    let mut mean = vec![vec![0.0; t_values.len()]; l_values.len()];
    let mut dim = 0;
    for seed in 1..=3u64 {
        let setup = LightconeSetup {
            initial: random_product_state(2, 6, &mut ChaCha8Rng::seed_from_u64(seed)),
            model: model.clone(),
            chains: chains.clone(),
            observable: Observable::new(vec![0], qubit_number()).map_err(err)?,
            l_values: l_values.clone(),
            t_values: t_values.clone(),
            config: EvolutionConfig { n_max: 3, leakage: LeakagePolicy::Warn, ..EvolutionConfig::default() },
        };
        let r = lightcone_experiment(&setup).map_err(err)?;
        dim = r.metadata.dimension;
        for row in &r.rows {
            if !(row.delta <= row.bound) {
                return fail(format!("seed {seed}: Δ = {} above bound {} at l = {}, t = {}", row.delta, row.bound, row.l, row.t));
            }
            let i = l_values.iter().position(|&l| l == row.l).unwrap();
            let j = t_values.iter().position(|&t| t == row.t).unwrap();
            mean[i][j] += row.delta / 3.0;
        }
    }
    for j in 0..t_values.len() {
        for i in 1..l_values.len() {
            if mean[i][j] > mean[i - 1][j] + 1e-10 {
                return fail(format!(
                    "mean Δ grows from l = {} to {} at t = {}: {:.3e} -> {:.3e}",
                    l_values[i - 1],
                    l_values[i],
                    t_values[j],
                    mean[i - 1][j],
                    mean[i][j]
                ));
            }
        }
    }
    let last = t_values.len() - 1;
    Ok(format!(
        "dimension {dim}, mean Δ at t = 0.3 by l: {}",
        mean.iter().map(|row| format!("{:.2e}", row[last])).collect::<Vec<_>>().join(", ")
    ))
}

fn supersonic() -> Outcome {
    let p1 = build_protocol(1).map_err(err)?;
    let full = simulate_full_space(&p1, None, 3).map_err(err)?;
    let restricted = simulate_full_space(&p1, Some(0), 3).map_err(err)?;
    let n2 = full.qubit_populations[1];
    if n2 < 0.999 {
        return fail(format!("m = 1 full-space ⟨n₂⟩ = {n2}"));
    }
    let worst = restricted.qubit_populations.iter().copied().fold(0.0, f64::max);
    if worst > 1e-9 {
        return fail(format!("m = 1 restricted population {worst:.2e}"));
    }
    let delta = (n2 - restricted.qubit_populations[1]).abs();
    if (delta - 1.0).abs() > 1e-3 {
        return fail(format!("m = 1 Δ = {delta}"));
    }
    let blocks_restricted = simulate_restricted(&p1, 0, 3).map_err(err)?;
    if blocks_restricted.qubit_populations.iter().any(|&x| x > 1e-9) {
        return fail("m = 1 restricted block run excites a qubit");
    }

    let p2 = build_protocol(2).map_err(err)?;
    let prof = simulate_protocol(&p2, 6).map_err(err)?;
    let n9 = prof.qubit_populations[8];
    if n9 < 0.99 {
        return fail(format!("m = 2 ⟨n₉⟩ = {n9}"));
    }
    for (i, &n) in prof.oscillator_photons.iter().enumerate() {
        let want = if i < 8 { 3.0 } else { 4.0 };
        if (n - want).abs() > 1e-3 {
            return fail(format!("oscillator {} holds {n} photons, expected {want}", i + 1));
        }
    }
    let oracle = prof.max_oracle_error().unwrap_or(f64::INFINITY);
    if oracle > 1e-9 {
        return fail(format!("block vs dense oracle {oracle:.2e}"));
    }
    Ok(format!("m = 1: ⟨n₂⟩ = {n2:.6}, Δ = {delta:.6}; m = 2: ⟨n₉⟩ = {n9:.6}, oracle {oracle:.1e}"))
}

fn sweep(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// `f` evaluated along `xs` is monotone in direction `sign`.
fn monotone(label: &str, xs: &[f64], sign: f64, f: impl Fn(f64) -> liebsim::Result<f64>) -> Result<(), String> {
    let ys = xs.iter().map(|&x| f(x)).collect::<liebsim::Result<Vec<_>>>().map_err(err)?;
    for (k, w) in ys.windows(2).enumerate() {
        if sign * (w[1] - w[0]) < 0.0 || !w[1].is_finite() {
            return Err(format!("{label} not monotone near x = {}: {} -> {}", xs[k + 1], w[0], w[1]));
        }
    }
    Ok(())
}

fn error_bounds() -> Outcome {
    let k = MemoryKernel::exponential(1.0).map_err(err)?.with_atom(c(0.5), 0.7).map_err(err)?;
    let xs = |lo, hi| sweep(100, lo, hi);
    let mut checked = 0;
    let mut check = |r: Result<(), String>| r.map(|_| checked += 1);
    check(monotone("regularization in t", &xs(0.1, 10.0), 1.0, |t| regularization_error_bound(t, 3.0, 1.0, 0.2, 0.1)))?;
    check(monotone("regularization in n", &xs(1.0, 50.0), 1.0, |n| regularization_error_bound(1.0, n, 1.0, 0.2, 0.1)))?;
    check(monotone("regularization in TV", &xs(0.0, 20.0), 1.0, |v| regularization_error_bound(1.0, 3.0, v, 0.2, 0.1)))?;
    check(monotone("regularization in δ", &xs(1e-3, 1.0), 1.0, |d| regularization_error_bound_for_kernel(&k, 2.0, 3.0, d)))?;
    check(monotone("cutoff in t", &xs(0.1, 10.0), 1.0, |t| freq_cutoff_error_bound(t, 3.0, 1.0, 1.0, 0.1, 50.0)))?;
    check(monotone("cutoff in ω_c", &xs(1.0, 1e4), -1.0, |w| freq_cutoff_error_bound(1.0, 3.0, 1.0, 1.0, 0.1, w)))?;
    check(monotone("cutoff in δ", &xs(1e-3, 10.0), -1.0, |d| freq_cutoff_error_bound(1.0, 3.0, 1.0, 1.0, d, 50.0)))?;
    check(monotone("cutoff in TV", &xs(0.0, 20.0), 1.0, |v| freq_cutoff_error_bound(1.0, 3.0, 1.0, v, 0.1, 50.0)))?;
    let chain = |t: f64, n_m: usize, d: f64, w: f64| chain_truncation_error_bound(t, 3.0, 1.0, 1.0, n_m, d, w);
    check(monotone("chain in t", &xs(0.01, 2.0), 1.0, |t| chain(t, 20, 0.1, 1.0)))?;
    check(monotone("chain in δ", &xs(1e-3, 10.0), -1.0, |d| chain(1.0, 20, d, 1.0)))?;
    check(monotone("chain in ω_c", &xs(0.01, 3.0), 1.0, |w| chain(1.0, 20, 0.1, w)))?;
    // N_m from 100 to 199 with ω_c t = 5 < N_m/(2e).
    let modes: Vec<f64> = (100..200).map(|n| n as f64).collect();
    check(monotone("chain in N_m", &modes, -1.0, |n| chain(1.0, n as usize, 0.1, 5.0)))?;

    let (t, w) = (1.0, 5.0);
    let vals: Vec<f64> = [60, 80, 100].iter().map(|&n| chain(t, n, 0.1, w)).collect::<liebsim::Result<_>>().map_err(err)?;
    if [60.0, 80.0, 100.0].iter().any(|&n| w * t >= n / (2.0 * E)) {
        return fail("sweep left the ω_c t < N_m/(2e) regime");
    }
    let (r1, r2) = (vals[1] / vals[0], vals[2] / vals[1]);
    if !(r1 < 0.1 && r2 < 0.1 && r2 < r1) {
        return fail(format!("chain bound ratios {r1:.2e}, {r2:.2e}"));
    }
    Ok(format!("{checked} sweeps of 100 points monotone; N_m 60→80→100 ratios {r1:.1e}, {r2:.1e}"))
}

fn two_qubit_observable(n_m: usize, t: f64) -> liebsim::Result<f64> {
    let pair = (kron_all(&[sigma_plus(), sigma_minus()]) + kron_all(&[sigma_minus(), sigma_plus()])) * c(0.6);
    let coupling = Coupling { rx: Schedule::Constant(sigma_x()), rp: Schedule::Constant(sigma_y()), bath: "b".into() };
    let terms = vec![
        InteractionTerm { support: vec![0, 1], h: Schedule::Constant(pair), coupling: None },
        InteractionTerm { support: vec![1], h: Schedule::Constant(sigma_z() * c(0.25)), coupling: Some(coupling) },
    ];
    let v = MemoryKernel::exponential(1.0)?;
    let baths = BTreeMap::from([("b".to_string(), Bath::Vacuum { kernel: v.clone() })]);
    let model = LatticeModel::new(Lattice::chain(2)?, 2, terms, baths)?;
    let chains = BTreeMap::from([(1, DilationParams::new(0.1, 8.0, n_m)?.chain_for(&v)?)]);
    // Two excitations at most, so three Fock levels are exact.
    let cfg = EvolutionConfig { n_max: 3, leakage: LeakagePolicy::Ignore, tolerance: 1e-12, ..EvolutionConfig::default() };
    let layout = DilationLayout::new(&model, &chains, cfg.n_max)?;
    let h = layout.assemble(&model, &chains, cfg.dim_cap)?;
    let initial = vec![vec![c(0.0), c(1.0)], vec![c(0.0), c(1.0)]];
    let psi0 = QuantumState::with_vacuum(layout.dims().to_vec(), &initial)?;
    let psi = evolve(&h, &psi0, 0.0, t, &cfg)?;
    expectation(&psi, &qubit_number(), &[0])
}

fn dilation_convergence() -> Outcome {
    let values: Vec<f64> = [2, 4, 6, 8].iter().map(|&n| two_qubit_observable(n, 1.0)).collect::<liebsim::Result<_>>().map_err(err)?;
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    if !diffs.windows(2).all(|w| w[1] < w[0]) {
        return fail(format!("differences {diffs:?} do not decrease"));
    }
    Ok(format!(
        "|⟨n₁⟩(N_m) - ⟨n₁⟩(N_m + 2)| for N_m = 2, 4, 6: {}",
        diffs.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>().join(", ")
    ))
}

#[test]
fn acceptance_criteria() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "kernel calculus", secs(1), kernel_calculus),
        run(2, "mollifier closeness", secs(30), mollifier_lemma),
        run(3, "Lanczos oracle", secs(10), lanczos_oracle),
        run(4, "dynamics oracle", secs(60), dynamics_oracle),
        run(5, "light-cone bound", secs(600), light_cone),
        run(6, "supersonic transport", secs(300), supersonic),
        run(7, "error-bound calculators", secs(1), error_bounds),
        run(8, "dilation convergence", secs(600), dilation_convergence),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, &ok)| !ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
