//! Dense reference propagation for small spaces.

use num_complex::Complex64 as C64;

use super::{segment_is_constant, QuantumState};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianAssembly;
use crate::ops::{unitary_exp, CMatrix};

const DENSE_LIMIT: usize = 4096;

/// Fourth-order Magnus step `exp(-i[h/2 (H₁ + H₂) - i(√3/12) h² [H₂, H₁]])`
/// with `H₁, H₂` at the two Gauss points of `[t, t + h]`.
pub fn magnus4_step<F: Fn(f64) -> CMatrix>(h_of_t: F, t: f64, step: f64) -> CMatrix {
    let s = 3f64.sqrt() / 6.0;
    let h1 = h_of_t(t + (0.5 - s) * step);
    let h2 = h_of_t(t + (0.5 + s) * step);
    let comm = &h2 * &h1 - &h1 * &h2;
    let m = (&h1 + &h2) * C64::new(0.5 * step, 0.0) - comm * C64::new(0.0, 3f64.sqrt() / 12.0 * step * step);
    unitary_exp(&m, 1.0)
}

/// Dense propagator `U(t1, t0)`; pulsed segments use Magnus steps no longer
/// than `max_step`.
pub fn dense_propagator(h: &HamiltonianAssembly, t0: f64, t1: f64, max_step: f64) -> Result<CMatrix> {
    if h.dim() > DENSE_LIMIT {
        return Err(Error::DimensionCap { dim: h.dim() as u128, cap: DENSE_LIMIT });
    }
    if !(max_step > 0.0) || !(t1 >= t0) {
        return Err(Error::InvalidArgument("dense propagation needs t1 >= t0 and a positive step".into()));
    }
    let dense = |t: f64| h.eval(t).to_dense();
    let mut u = CMatrix::identity(h.dim(), h.dim());
    let mut cuts = vec![t0];
    cuts.extend(h.breakpoints().into_iter().filter(|&b| b > t0 && b < t1));
    cuts.push(t1);
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        if segment_is_constant(h, a, b) {
            u = unitary_exp(&dense(0.5 * (a + b)), b - a) * u;
        } else {
            let n = ((b - a) / max_step).ceil().max(1.0) as usize;
            let step = (b - a) / n as f64;
            for k in 0..n {
                u = magnus4_step(dense, a + k as f64 * step, step) * u;
            }
        }
    }
    Ok(u)
}

pub fn dense_evolve(h: &HamiltonianAssembly, psi: &QuantumState, t0: f64, t1: f64, max_step: f64) -> Result<QuantumState> {
    if psi.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: psi.dim() });
    }
    let u = dense_propagator(h, t0, t1, max_step)?;
    let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
    let out = u * v;
    Ok(QuantumState::from_raw(psi.dims().to_vec(), out.iter().copied().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, EvolutionConfig};
    use crate::lattice::{Coefficient, Pulse, PulseShape};
    use crate::ops::{sigma_x, sigma_z};

    #[test]
    fn pulsed_evolution_matches_magnus() {
        let mut h = HamiltonianAssembly::new(vec![2, 2], 1 << 10).unwrap();
        h.add(Coefficient::One, &(sigma_z() * C64::new(0.3, 0.0)), &[0]);
        let p = Pulse::new(PulseShape::Bump, 0.2, 1.0, 1.0).unwrap();
        h.add(Coefficient::Pulse(p), &crate::ops::kron_all(&[sigma_x(), sigma_x()]), &[0, 1]);
        h.add(Coefficient::Window { start: 0.5, end: 0.9 }, &sigma_x(), &[1]);
        let psi = QuantumState::basis(vec![2, 2], &[0, 0]).unwrap();
        let cfg = EvolutionConfig { dt: 0.02, tolerance: 1e-11, ..EvolutionConfig::default() };
        let krylov = evolve(&h, &psi, 0.0, 1.5, &cfg).unwrap();
        let dense = dense_evolve(&h, &psi, 0.0, 1.5, 1e-3).unwrap();
        assert!(krylov.distance(&dense) < 1e-8, "{}", krylov.distance(&dense));
    }
}
