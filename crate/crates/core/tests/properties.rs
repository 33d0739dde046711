use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use liebsim::chain::stieltjes;
use liebsim::dynamics::random_product_state;
use liebsim::kernels::MemoryKernel;
use liebsim::lattice::{lr_velocity, prop1_bound, prop1_log_bound, Prop1Inputs};

fn kernel() -> impl Strategy<Value = MemoryKernel> {
    (0.2f64..5.0, prop::collection::vec((-3.0f64..3.0, -2.0f64..2.0, -2.0f64..2.0), 0..4)).prop_map(|(gamma, atoms)| {
        atoms.into_iter().fold(MemoryKernel::exponential(gamma).unwrap(), |k, (x, re, im)| {
            k.with_atom(C64::new(re, im), x).unwrap()
        })
    })
}

fn inputs() -> impl Strategy<Value = Prop1Inputs> {
    (0.1f64..3.0, 0.0f64..4.0, 0.0f64..40.0, 0.0f64..2.0, 1.0f64..3.0, 1.0f64..8.0, 0.0f64..5.0, 1u32..4).prop_map(
        |(o_norm, diam_x, l, dt, a0, z, tv_u, d)| Prop1Inputs { o_norm, diam_x, l, dt, a0, z, tv_u, d },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn total_variation_is_additive_over_adjacent_intervals(k in kernel(), a in -4.0f64..0.0, m in -1.0f64..1.0, b in 0.0f64..4.0) {
        prop_assume!(a < m && m < b);
        let whole = k.total_variation(Some((a, b))).unwrap();
        let parts = k.total_variation(Some((a, m))).unwrap() + k.total_variation(Some((m, b))).unwrap();
        prop_assert!((whole - parts).abs() < 1e-9 * whole.max(1.0));
    }

    #[test]
    fn total_variation_scales_and_ignores_reflection(k in kernel(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let tv = k.total_variation(None).unwrap();
        let factor = C64::new(re, im);
        let scaled = k.transformed(factor, true).total_variation(None).unwrap();
        prop_assert!((scaled - factor.norm() * tv).abs() < 1e-9 * (1.0 + scaled));
        let window = k.total_variation(Some((-1.0, 2.0))).unwrap();
        prop_assert!(window <= tv + 1e-12);
    }

    #[test]
    fn velocity_grows_with_memory(a0 in 0.5f64..4.0, z in 1.0f64..10.0, tv in 0.0f64..10.0, extra in 0.0f64..10.0) {
        let v = lr_velocity(a0, z, tv).unwrap();
        prop_assert!(lr_velocity(a0, z, tv + extra).unwrap() >= v);
        prop_assert!((lr_velocity(2.0 * a0, z, tv).unwrap() - 2.0 * v).abs() < 1e-9 * v);
    }

    #[test]
    fn log_bound_is_the_log_of_the_bound(p in inputs()) {
        let bound = prop1_bound(&p).unwrap();
        let log = prop1_log_bound(&p).unwrap();
        if bound == 0.0 {
            prop_assert_eq!(log, f64::NEG_INFINITY);
        } else if bound.is_finite() && bound > 1e-300 {
            prop_assert!((bound.ln() - log).abs() < 1e-9 * log.abs().max(1.0));
        }
    }

    #[test]
    fn bound_decays_outside_the_shell_growth(p in inputs(), extra in 0.5f64..20.0) {
        // The shell volume grows polynomially in l; past l ~ d a0 the exponential wins.
        prop_assume!(p.dt > 0.0 && p.l >= 2.0 * p.d as f64 * p.a0);
        let near = prop1_log_bound(&p).unwrap();
        let far = prop1_log_bound(&Prop1Inputs { l: p.l + extra, ..p }).unwrap();
        prop_assert!(far < near);
    }

    #[test]
    fn gauss_rule_of_a_random_measure_matches_its_moments(
        points in prop::collection::vec((-2.0f64..2.0, 0.05f64..1.0), 12..40),
        n in 1usize..6,
    ) {
        let (nodes, weights): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        let mut distinct = nodes.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        prop_assume!(distinct.len() >= n + 2);
        let c = stieltjes(&nodes, &weights, n, true).unwrap().into_chain();
        let (x, w) = c.spectral_measure();
        let mass: f64 = weights.iter().sum();
        for k in 0..(2 * n) as i32 {
            let exact: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x.powi(k)).sum();
            let gauss: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            prop_assert!((exact - gauss).abs() < 1e-8 * mass * 2f64.powi(k), "moment {}: {} vs {}", k, exact, gauss);
        }
    }

    #[test]
    fn random_product_states_are_normalized(seed in any::<u64>(), q in 2usize..5, sites in 1usize..6) {
        let state = random_product_state(q, sites, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(state.len(), sites);
        for s in &state {
            prop_assert_eq!(s.len(), q);
            prop_assert!((s.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
