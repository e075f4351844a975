//! Compressed sparse row matrices over complex doubles.
//!
//! Generators and Hermitian pairs are held in this format throughout; dense
//! views are materialized only where an eigensolve needs them.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMat {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl CsrMat {
    /// Builds from (row, col, value) triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trips: Vec<(usize, usize, C64)>) -> Self {
        trips.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices: Vec<usize> = Vec::with_capacity(trips.len());
        let mut data: Vec<C64> = Vec::with_capacity(trips.len());
        let mut k = 0;
        while k < trips.len() {
            let (r, c, mut v) = trips[k];
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds");
            k += 1;
            while k < trips.len() && trips[k].0 == r && trips[k].1 == c {
                v += trips[k].2;
                k += 1;
            }
            if v != C64::new(0.0, 0.0) {
                indices.push(c);
                data.push(v);
                indptr[r + 1] = indices.len();
            }
        }
        // forward-fill row pointers for empty rows
        for r in 1..=nrows {
            if indptr[r] < indptr[r - 1] {
                indptr[r] = indptr[r - 1];
            }
        }
        CsrMat {
            nrows,
            ncols,
            indptr,
            indices,
            data,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMat {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMat {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        let mut trips = Vec::with_capacity(n);
        for (i, &v) in values.iter().enumerate() {
            if v != C64::new(0.0, 0.0) {
                trips.push((i, i, v));
            }
        }
        CsrMat::from_triplets(n, n, trips)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let lo = self.indptr[r];
        let hi = self.indptr[r + 1];
        self.indices[lo..hi]
            .iter()
            .copied()
            .zip(self.data[lo..hi].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let lo = self.indptr[r];
        let hi = self.indptr[r + 1];
        match self.indices[lo..hi].binary_search(&c) {
            Ok(k) => self.data[lo + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            y[r] = acc;
        }
    }

    pub fn apply(&self, x: &Array1<C64>) -> Array1<C64> {
        let mut y = Array1::zeros(self.nrows);
        self.matvec_into(x.as_slice().unwrap(), y.as_slice_mut().unwrap());
        y
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CsrMat {
        let mut trips = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                trips.push((c, r, v.conj()));
            }
        }
        CsrMat::from_triplets(self.ncols, self.nrows, trips)
    }

    pub fn scale(&self, alpha: C64) -> CsrMat {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= alpha;
        }
        out
    }

    /// alpha * A + beta * B with merged sparsity patterns.
    pub fn combine(a: &CsrMat, alpha: C64, b: &CsrMat, beta: C64) -> CsrMat {
        assert_eq!(a.nrows, b.nrows);
        assert_eq!(a.ncols, b.ncols);
        let mut indptr = vec![0usize; a.nrows + 1];
        let mut indices = Vec::with_capacity(a.nnz() + b.nnz());
        let mut data = Vec::with_capacity(a.nnz() + b.nnz());
        for r in 0..a.nrows {
            for (c, va, vb) in merged_row(a, b, r) {
                let v = alpha * va + beta * vb;
                if v != C64::new(0.0, 0.0) {
                    indices.push(c);
                    data.push(v);
                }
            }
            indptr[r + 1] = indices.len();
        }
        CsrMat {
            nrows: a.nrows,
            ncols: a.ncols,
            indptr,
            indices,
            data,
        }
    }

    /// Sparse-sparse product A * B (row-wise accumulation).
    pub fn matmul(&self, b: &CsrMat) -> CsrMat {
        assert_eq!(self.ncols, b.nrows);
        let mut trips = Vec::new();
        let mut acc: Vec<C64> = vec![C64::new(0.0, 0.0); b.ncols];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.nrows {
            for (k, va) in self.row(r) {
                for (c, vb) in b.row(k) {
                    if acc[c] == C64::new(0.0, 0.0) {
                        touched.push(c);
                    }
                    acc[c] += va * vb;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c] != C64::new(0.0, 0.0) {
                    trips.push((r, c, acc[c]));
                }
                acc[c] = C64::new(0.0, 0.0);
            }
            touched.clear();
        }
        CsrMat::from_triplets(self.nrows, b.ncols, trips)
    }

    /// Kronecker product: `kron(A, B)[(i1*bn + i2, j1*bm + j2)] = A[i1,j1] B[i2,j2]`.
    pub fn kron(a: &CsrMat, b: &CsrMat) -> CsrMat {
        let mut trips = Vec::with_capacity(a.nnz() * b.nnz());
        for i1 in 0..a.nrows {
            for (j1, va) in a.row(i1) {
                for i2 in 0..b.nrows {
                    for (j2, vb) in b.row(i2) {
                        trips.push((i1 * b.nrows + i2, j1 * b.ncols + j2, va * vb));
                    }
                }
            }
        }
        CsrMat::from_triplets(a.nrows * b.nrows, a.ncols * b.ncols, trips)
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let mut out = Array2::zeros((self.nrows, self.ncols));
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                out[(r, c)] = v;
            }
        }
        out
    }

    pub fn from_dense(m: &Array2<C64>, drop_tol: f64) -> CsrMat {
        let mut trips = Vec::new();
        for ((r, c), &v) in m.indexed_iter() {
            if v.norm() > drop_tol {
                trips.push((r, c, v));
            }
        }
        CsrMat::from_triplets(m.nrows(), m.ncols(), trips)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum (the induced 1-norm).
    pub fn max_col_abs_sum(&self) -> f64 {
        let mut sums = vec![0.0f64; self.ncols];
        for (k, &c) in self.indices.iter().enumerate() {
            sums[c] += self.data[k].norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Maximum number of entries per row with magnitude above `threshold`.
    pub fn max_row_count_above(&self, threshold: f64) -> usize {
        (0..self.nrows)
            .map(|r| self.row(r).filter(|(_, v)| v.norm() > threshold).count())
            .max()
            .unwrap_or(0)
    }

    /// max |A - A†| over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.adjoint();
        let mut defect = 0.0f64;
        for r in 0..self.nrows {
            for (_, va, vb) in merged_row(self, &adj, r) {
                defect = defect.max((va - vb).norm());
            }
        }
        defect
    }
}

/// Iterates the union of the sparsity patterns of row `r` of `a` and `b`,
/// yielding `(col, a_val, b_val)` in ascending column order.
pub fn merged_row<'a>(
    a: &'a CsrMat,
    b: &'a CsrMat,
    r: usize,
) -> impl Iterator<Item = (usize, C64, C64)> + 'a {
    let mut ia = a.indptr[r];
    let ea = a.indptr[r + 1];
    let mut ib = b.indptr[r];
    let eb = b.indptr[r + 1];
    std::iter::from_fn(move || {
        let zero = C64::new(0.0, 0.0);
        match (ia < ea, ib < eb) {
            (true, true) => {
                let (ca, cb) = (a.indices[ia], b.indices[ib]);
                if ca < cb {
                    let out = (ca, a.data[ia], zero);
                    ia += 1;
                    Some(out)
                } else if cb < ca {
                    let out = (cb, zero, b.data[ib]);
                    ib += 1;
                    Some(out)
                } else {
                    let out = (ca, a.data[ia], b.data[ib]);
                    ia += 1;
                    ib += 1;
                    Some(out)
                }
            }
            (true, false) => {
                let out = (a.indices[ia], a.data[ia], zero);
                ia += 1;
                Some(out)
            }
            (false, true) => {
                let out = (b.indices[ib], zero, b.data[ib]);
                ib += 1;
                Some(out)
            }
            (false, false) => None,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn triplets_merge_and_sort() {
        let m = CsrMat::from_triplets(
            2,
            2,
            vec![(1, 1, c(1.0, 0.0)), (0, 0, c(2.0, 0.0)), (1, 1, c(3.0, 0.0))],
        );
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 1), c(4.0, 0.0));
        assert_eq!(m.get(0, 0), c(2.0, 0.0));
        assert_eq!(m.get(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn matvec_matches_dense() {
        let m = CsrMat::from_triplets(
            3,
            3,
            vec![
                (0, 0, c(1.0, 2.0)),
                (0, 2, c(0.0, -1.0)),
                (1, 1, c(3.0, 0.0)),
                (2, 0, c(-1.0, 0.0)),
            ],
        );
        let x = Array1::from(vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0)]);
        let y = m.apply(&x);
        let d = m.to_dense();
        for i in 0..3 {
            let mut acc = c(0.0, 0.0);
            for j in 0..3 {
                acc += d[(i, j)] * x[j];
            }
            assert!((acc - y[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn adjoint_involution() {
        let m = CsrMat::from_triplets(
            2,
            3,
            vec![(0, 1, c(1.0, 2.0)), (1, 2, c(-3.0, 0.5))],
        );
        let back = m.adjoint().adjoint();
        assert_eq!(m, back);
    }

    #[test]
    fn combine_patterns() {
        let a = CsrMat::from_triplets(2, 2, vec![(0, 0, c(1.0, 0.0)), (1, 0, c(2.0, 0.0))]);
        let b = CsrMat::from_triplets(2, 2, vec![(0, 1, c(1.0, 0.0)), (1, 0, c(-1.0, 0.0))]);
        let s = CsrMat::combine(&a, c(1.0, 0.0), &b, c(2.0, 0.0));
        assert_eq!(s.get(0, 0), c(1.0, 0.0));
        assert_eq!(s.get(0, 1), c(2.0, 0.0));
        assert_eq!(s.get(1, 0), c(0.0, 0.0));
        // cancelled entry dropped from the pattern
        assert_eq!(s.nnz(), 2);
    }

    #[test]
    fn kron_against_dense() {
        let a = CsrMat::from_triplets(2, 2, vec![(0, 0, c(1.0, 0.0)), (0, 1, c(2.0, 0.0))]);
        let b = CsrMat::identity(2);
        let k = CsrMat::kron(&a, &b);
        let (da, db, dk) = (a.to_dense(), b.to_dense(), k.to_dense());
        for i1 in 0..2 {
            for j1 in 0..2 {
                for i2 in 0..2 {
                    for j2 in 0..2 {
                        let want = da[(i1, j1)] * db[(i2, j2)];
                        assert_eq!(dk[(i1 * 2 + i2, j1 * 2 + j2)], want);
                    }
                }
            }
        }
    }

    #[test]
    fn matmul_small() {
        let a = CsrMat::from_triplets(2, 2, vec![(0, 0, c(1.0, 0.0)), (0, 1, c(1.0, 0.0))]);
        let b = CsrMat::from_triplets(2, 2, vec![(0, 0, c(2.0, 0.0)), (1, 0, c(3.0, 0.0))]);
        let p = a.matmul(&b);
        assert_eq!(p.get(0, 0), c(5.0, 0.0));
        assert_eq!(p.nnz(), 1);
    }
}
