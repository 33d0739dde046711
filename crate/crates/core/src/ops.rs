//! Small dense operators: Pauli matrices, truncated bosonic ladders and
//! matrix utilities.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;

const HERMITIAN_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

/// `diag(1, -1)` in the basis `(|0⟩, |1⟩)`.
pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// Raising operator `σ† = |1⟩⟨0|`.
pub fn sigma_plus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

/// Lowering operator `σ = |0⟩⟨1|`.
pub fn sigma_minus() -> CMatrix {
    sigma_plus().adjoint()
}

/// Qubit excitation `|1⟩⟨1|`.
pub fn qubit_number() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
}

/// Annihilation operator on Fock levels `0..n`.
pub fn annihilation(n: usize) -> CMatrix {
    let mut a = CMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = c((k as f64).sqrt(), 0.0);
    }
    a
}

pub fn number(n: usize) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, (0..n).map(|k| c(k as f64, 0.0))))
}

/// `x = (b + b†)/√2`.
pub fn position(n: usize) -> CMatrix {
    let a = annihilation(n);
    (&a + a.adjoint()) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

/// `p = (b - b†)/(√2 i)`.
pub fn momentum(n: usize) -> CMatrix {
    let a = annihilation(n);
    (&a - a.adjoint()) * c(0.0, -std::f64::consts::FRAC_1_SQRT_2)
}

/// Kronecker product of a list, first factor most significant.
pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    factors.iter().skip(1).fold(factors[0].clone(), |acc, m| acc.kronecker(m))
}

/// `max |A - A†|`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn check_hermitian(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let e = hermiticity_error(m);
    if e > HERMITIAN_TOL {
        return Err(Error::NotHermitian(e));
    }
    Ok(())
}

/// `[[Re H, -Im H], [Im H, Re H]]`, the real symmetric form of a Hermitian
/// matrix. Its spectrum is that of `H` with every eigenvalue doubled.
fn real_embedding(h: &CMatrix) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = h[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    real_embedding(m).symmetric_eigenvalues().iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// `exp(-i θ H) = cos(θH) - i sin(θH)` for Hermitian `H`, with both
/// functions evaluated on the real embedding.
pub fn unitary_exp(h: &CMatrix, theta: f64) -> CMatrix {
    let n = h.nrows();
    let eig = nalgebra::SymmetricEigen::new(real_embedding(h));
    let v = &eig.eigenvectors;
    let apply = |f: fn(f64) -> f64| {
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| f(theta * l)));
        v * d * v.transpose()
    };
    let cos = apply(f64::cos);
    let sin = apply(f64::sin);
    CMatrix::from_fn(n, n, |r, c| {
        let cz = C64::new(cos[(r, c)], cos[(r + n, c)]);
        let sz = C64::new(sin[(r, c)], sin[(r + n, c)]);
        cz - C64::new(0.0, 1.0) * sz
    })
}

/// Serde adapter for complex matrices as nested `[[[re, im], ...], ...]` rows.
pub mod matrix_serde {
    use super::*;

    pub fn to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
        (0..m.nrows()).map(|r| (0..m.ncols()).map(|k| [m[(r, k)].re, m[(r, k)].im]).collect()).collect()
    }

    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> std::result::Result<CMatrix, String> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(format!("matrix must be square, got {n} rows of unequal length"));
        }
        Ok(CMatrix::from_fn(n, n, |r, k| C64::new(rows[r][k][0], rows[r][k][1])))
    }

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
