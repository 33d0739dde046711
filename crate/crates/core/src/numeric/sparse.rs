//! Compressed-sparse-row complex matrices and tensor-product embedding of
//! local operators.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Square complex CSR matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            debug_assert!(r < dim && c < dim);
            if last == Some((r, c)) {
                *vals.last_mut().expect("entry exists") += v;
                continue;
            }
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut m = Self { dim, row_ptr, cols, vals };
        m.prune(0.0);
        m
    }

    pub fn from_dense(dense: &DMatrix<C64>) -> Self {
        assert_eq!(dense.nrows(), dense.ncols(), "square matrix expected");
        let n = dense.nrows();
        let mut t = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let v = dense[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    t.push((r, c, v));
                }
            }
        }
        Self::from_triplets(n, t)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Drops entries with modulus `<= threshold`.
    fn prune(&mut self, threshold: f64) {
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.vals[k].norm() > threshold {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    /// `out += scale * self * x`.
    pub fn mul_add(&self, x: &[C64], scale: C64, out: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *o += scale * acc;
        }
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        self.mul_add(x, C64::new(1.0, 0.0), &mut out);
        out
    }

    /// Linear combination `sum_k c_k M_k` of equally sized matrices.
    pub fn linear_combination(dim: usize, parts: &[(C64, &CsrMatrix)]) -> Self {
        let mut t = Vec::with_capacity(parts.iter().map(|(_, m)| m.nnz()).sum());
        for (c, m) in parts {
            assert_eq!(m.dim, dim, "dimension mismatch in linear combination");
            t.extend(m.triplets().map(|(r, col, v)| (r, col, *c * v)));
        }
        Self::from_triplets(dim, t)
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut m = self.clone();
        m.vals.iter_mut().for_each(|v| *v *= c);
        m
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let dense_like: std::collections::HashMap<(usize, usize), C64> =
            self.triplets().map(|(r, c, v)| ((r, c), v)).collect();
        let mut worst = 0.0f64;
        for (&(r, c), &v) in &dense_like {
            let w = dense_like.get(&(c, r)).copied().unwrap_or_default();
            worst = worst.max((v - w.conj()).norm());
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut d = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            d[(r, c)] += v;
        }
        d
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CsrMatrix) -> CsrMatrix {
        let dim = self.dim * other.dim;
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, v1) in self.triplets() {
            for (r2, c2, v2) in other.triplets() {
                t.push((r1 * other.dim + r2, c1 * other.dim + c2, v1 * v2));
            }
        }
        CsrMatrix::from_triplets(dim, t)
    }
}

/// Ordered tensor product of factor spaces; factor 0 is the most significant
/// digit of the flat index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSpace {
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl TensorSpace {
    pub fn new(dims: Vec<usize>) -> Self {
        let mut strides = vec![1usize; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let total = dims.iter().product();
        Self { dims, strides, total }
    }

    /// Dimension without allocating; saturates instead of overflowing.
    pub fn checked_dimension(dims: &[usize]) -> u128 {
        dims.iter().fold(1u128, |acc, &d| acc.saturating_mul(d as u128))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.total
    }

    pub fn digit(&self, index: usize, factor: usize) -> usize {
        (index / self.strides[factor]) % self.dims[factor]
    }

    pub fn stride(&self, factor: usize) -> usize {
        self.strides[factor]
    }

    /// Embeds a dense operator acting on `factors` (in the given order, first
    /// most significant) into the full space, identity elsewhere.
    pub fn embed(&self, local: &DMatrix<C64>, factors: &[usize]) -> CsrMatrix {
        let local_dims: Vec<usize> = factors.iter().map(|&f| self.dims[f]).collect();
        let local_dim: usize = local_dims.iter().product();
        assert_eq!(local.nrows(), local_dim, "local operator dimension mismatch");
        // Column-wise nonzeros of the local operator: for a local input state c,
        // the list of (r, value) with local[(r, c)] != 0.
        let mut by_col: Vec<Vec<(usize, C64)>> = vec![Vec::new(); local_dim];
        for c in 0..local_dim {
            for r in 0..local_dim {
                let v = local[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    by_col[c].push((r, v));
                }
            }
        }
        let local_strides: Vec<usize> = {
            let mut s = vec![1usize; factors.len()];
            for k in (0..factors.len().saturating_sub(1)).rev() {
                s[k] = s[k + 1] * local_dims[k + 1];
            }
            s
        };
        let mut triplets = Vec::new();
        for j in 0..self.total {
            let mut c = 0;
            let mut base = j;
            for (k, &f) in factors.iter().enumerate() {
                let d = self.digit(j, f);
                c += d * local_strides[k];
                base -= d * self.strides[f];
            }
            for &(r, v) in &by_col[c] {
                let mut i = base;
                let mut rem = r;
                for (k, &f) in factors.iter().enumerate() {
                    let d = rem / local_strides[k];
                    rem %= local_strides[k];
                    i += d * self.strides[f];
                }
                triplets.push((i, j, v));
            }
        }
        CsrMatrix::from_triplets(self.total, triplets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let m = CsrMatrix::from_triplets(2, vec![(0, 1, c(1.0, 0.0)), (0, 1, c(2.0, 0.0)), (1, 0, c(0.0, 0.0))]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.mul_vec(&[c(0.0, 0.0), c(1.0, 0.0)]), vec![c(3.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn embedding_matches_kronecker_product() {
        let space = TensorSpace::new(vec![2, 3, 2]);
        let sx = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let sy = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let local = sx.kronecker(&sy);
        let embedded = space.embed(&local, &[0, 2]);
        let i3 = CsrMatrix::identity(3);
        let expected = CsrMatrix::from_dense(&sx).kron(&i3).kron(&CsrMatrix::from_dense(&sy));
        assert_eq!(embedded.to_dense(), expected.to_dense());
        // reversed factor order swaps the roles of the two local factors
        let swapped = space.embed(&sy.kronecker(&sx), &[2, 0]);
        assert_eq!(swapped.to_dense(), expected.to_dense());
        assert!(embedded.hermiticity_error() < 1e-15);
    }

    #[test]
    fn hermiticity_error_detects_asymmetry() {
        let m = CsrMatrix::from_triplets(2, vec![(0, 1, c(1.0, 0.0))]);
        assert!((m.hermiticity_error() - 1.0).abs() < 1e-15);
    }
}
