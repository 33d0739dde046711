use std::f64::consts::PI;

use liebsim::chain::{
    discretize, lanczos_chain, lanczos_chain_with, stieltjes, DensityPreset, LanczosOptions, SpectralDensity,
};
use liebsim::kernels::MemoryKernel;

fn fine() -> LanczosOptions {
    LanczosOptions { panels: 96, per_panel: 32, grading: 16, reorthogonalize: true }
}

fn semicircle() -> SpectralDensity {
    SpectralDensity::preset(DensityPreset::Semicircle { radius: 1.0, height: 1.0 }, &[]).unwrap()
}

/// Catalan numbers by the product formula.
fn catalan(k: u64) -> f64 {
    (2..=k).fold(1.0, |acc, j| acc * (k + j) as f64 / j as f64)
}

#[test]
fn semicircle_chain_is_uniform_up_to_forty_modes() {
    let c = lanczos_chain_with(&semicircle(), 2.0, 41, &fine()).unwrap();
    for j in 0..41 {
        assert!(c.omegas[j].abs() < 1e-8, "ω_{j} = {}", c.omegas[j]);
    }
    for j in 0..40 {
        assert!((c.hoppings[j] - 0.5).abs() < 1e-8, "t_{j} = {}", c.hoppings[j]);
    }
}

#[test]
fn semicircle_gauss_rule_reproduces_catalan_moments() {
    // ∫ x^{2k} sqrt(1 - x²) dx = (π/2) C_k / 4^k, odd moments vanish.
    let n = 12;
    let c = lanczos_chain(&semicircle(), 2.0, n).unwrap();
    let (x, w) = c.spectral_measure();
    for k in 0..n as i32 {
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(2 * k)).sum();
        let want = 0.5 * PI * catalan(k as u64) / 4f64.powi(k);
        assert!((m - want).abs() < 1e-9 * want, "moment {}: {m} vs {want}", 2 * k);
        let odd: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(2 * k + 1)).sum();
        assert!(odd.abs() < 1e-10);
    }
}

#[test]
fn flat_measure_gives_legendre_recursion() {
    let flat = SpectralDensity::preset(DensityPreset::Flat { half_width: 1.0, height: 1.0 }, &[]).unwrap();
    let c = lanczos_chain_with(&flat, 3.0, 30, &fine()).unwrap();
    assert!((2.0 * PI * c.g * c.g - 2.0).abs() < 1e-10);
    for (k, t) in c.hoppings.iter().enumerate() {
        let j = (k + 1) as f64;
        assert!((t * t - j * j / (4.0 * j * j - 1.0)).abs() < 1e-8);
    }
}

#[test]
fn monic_polynomials_are_orthogonal() {
    let ohmic = SpectralDensity::preset(DensityPreset::Ohmic { alpha: 0.5, cutoff: 2.0 }, &[]).unwrap();
    let (nodes, weights) = discretize(&ohmic, 10.0, &LanczosOptions::default()).unwrap();
    let rec = stieltjes(&nodes, &weights, 8, true).unwrap();
    let values: Vec<Vec<f64>> = nodes.iter().map(|&x| rec.monic_values(x)).collect();
    let gram = |i: usize, j: usize| -> f64 { values.iter().zip(&weights).map(|(p, w)| w * p[i] * p[j]).sum() };
    for i in 0..8 {
        for j in 0..i {
            let scale = (gram(i, i) * gram(j, j)).sqrt();
            assert!(gram(i, j).abs() < 1e-10 * scale, "<p{i}, p{j}> = {}", gram(i, j));
        }
    }
    // ‖p_k‖² = mass · B_1 ⋯ B_k
    let mut norm = rec.mass;
    for k in 1..8 {
        norm *= rec.b[k - 1];
        assert!((gram(k, k) - norm).abs() < 1e-9 * norm);
    }
}

#[test]
fn chain_transforms_covariantly() {
    // A shifted measure shifts every frequency; a scaled one scales g² only.
    let nodes: Vec<f64> = (0..200).map(|k| -1.0 + 2.0 * k as f64 / 199.0).collect();
    let weights: Vec<f64> = nodes.iter().map(|x| (1.0 + x) * (2.0 - x)).collect();
    let base = stieltjes(&nodes, &weights, 10, true).unwrap().into_chain();
    let shifted_nodes: Vec<f64> = nodes.iter().map(|x| x + 0.75).collect();
    let shifted = stieltjes(&shifted_nodes, &weights, 10, true).unwrap().into_chain();
    let scaled_weights: Vec<f64> = weights.iter().map(|w| 3.0 * w).collect();
    let scaled = stieltjes(&nodes, &scaled_weights, 10, true).unwrap().into_chain();
    for j in 0..10 {
        assert!((shifted.omegas[j] - base.omegas[j] - 0.75).abs() < 1e-12);
        assert!((scaled.omegas[j] - base.omegas[j]).abs() < 1e-12);
    }
    for j in 0..9 {
        assert!((shifted.hoppings[j] - base.hoppings[j]).abs() < 1e-12);
        assert!((scaled.hoppings[j] - base.hoppings[j]).abs() < 1e-12);
    }
    assert!((scaled.g * scaled.g - 3.0 * base.g * base.g).abs() < 1e-12);
}

#[test]
fn lorentzian_bath_chain_matches_its_moments() {
    // V = ½e^{-|τ|} has V̂(ω) = 1/(1 + ω²); mollification damps it further.
    let v = MemoryKernel::exponential(1.0).unwrap();
    let sd = SpectralDensity::from_kernel(v, 0.05, &[]).unwrap();
    let (nodes, weights) = discretize(&sd, 8.0, &LanczosOptions::default()).unwrap();
    let c = lanczos_chain(&sd, 8.0, 6).unwrap();
    let (x, w) = c.spectral_measure();
    for k in 0..11 {
        let exact: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x.powi(k)).sum();
        let gauss: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
        let scale = weights.iter().sum::<f64>() * 8f64.powi(k);
        assert!((gauss - exact).abs() < 1e-10 * scale, "moment {k}");
    }
    // Mass against the undamped Lorentzian: 2 arctan 8 minus a small mollifier loss.
    let mass = 2.0 * PI * c.g * c.g;
    assert!(mass < 2.0 * 8f64.atan() && mass > 0.95 * 2.0 * 8f64.atan());
}
