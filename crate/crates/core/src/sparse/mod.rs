//! Sparse matrix/vector types and the structural queries used by the
//! pattern-growing preconditioner drivers.
//!
//! [`SparseMatrix`] is an immutable compressed-sparse-column matrix with a
//! secondary row-structure index, so that both "nonzero rows of a column
//! set" and "nonzero columns of a row set" are cheap. Matrices are
//! compacted at construction: duplicates summed, exact zeros dropped.

mod matching;
mod matrix_market;

pub use matching::ensure_nonzero_diagonal;
pub use matrix_market::{load_matrix_market, write_matrix_market};

use crate::dense::DenseMat;
use crate::error::{Error, Result};

/// Immutable compressed sparse column matrix.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    /// Maximum absolute column sum.
    norm_1: f64,
    /// Stored entries per row.
    row_nnz: Vec<usize>,
    /// Row-major structure index (no values): columns touched by each row.
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
}

impl SparseMatrix {
    /// Builds a compacted matrix from coordinate triplets.
    ///
    /// Duplicate positions are summed and entries that end up exactly zero
    /// are removed.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(i, j, _) in &triplets {
            if i >= n_rows {
                return Err(Error::IndexOutOfRange { index: i, dim: n_rows });
            }
            if j >= n_cols {
                return Err(Error::IndexOutOfRange { index: j, dim: n_cols });
            }
        }
        triplets.sort_unstable_by_key(|&(i, j, _)| (j, i));

        let mut col_ptr = vec![0usize; n_cols + 1];
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut it = triplets.into_iter().peekable();
        while let Some((i, j, mut v)) = it.next() {
            while let Some(&(i2, j2, v2)) = it.peek() {
                if i2 == i && j2 == j {
                    v += v2;
                    it.next();
                } else {
                    break;
                }
            }
            if v != 0.0 {
                row_idx.push(i);
                values.push(v);
                col_ptr[j + 1] += 1;
            }
        }
        for j in 0..n_cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        Ok(Self::from_parts(n_rows, n_cols, col_ptr, row_idx, values))
    }

    /// Assembles caches and the row-structure index. `col_ptr`/`row_idx`
    /// must already be canonical (sorted, deduplicated, zero-free).
    fn from_parts(
        n_rows: usize,
        n_cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        let mut norm_1 = 0.0f64;
        for j in 0..n_cols {
            let sum: f64 = values[col_ptr[j]..col_ptr[j + 1]].iter().map(|v| v.abs()).sum();
            norm_1 = norm_1.max(sum);
        }
        let mut row_nnz = vec![0usize; n_rows];
        for &i in &row_idx {
            row_nnz[i] += 1;
        }
        let mut row_ptr = vec![0usize; n_rows + 1];
        for i in 0..n_rows {
            row_ptr[i + 1] = row_ptr[i] + row_nnz[i];
        }
        let mut row_cols = vec![0usize; row_idx.len()];
        let mut cursor = row_ptr.clone();
        for j in 0..n_cols {
            for &i in &row_idx[col_ptr[j]..col_ptr[j + 1]] {
                row_cols[cursor[i]] = j;
                cursor[i] += 1;
            }
        }
        Self { n_rows, n_cols, col_ptr, row_idx, values, norm_1, row_nnz, row_ptr, row_cols }
    }

    pub fn identity(n: usize) -> Self {
        let triplets = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, triplets).expect("identity triplets are in range")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        self.norm_1
    }

    /// Number of stored entries in row `i`.
    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_nnz[i]
    }

    /// Maximum stored entries over all rows.
    pub fn max_row_nnz(&self) -> usize {
        self.row_nnz.iter().copied().max().unwrap_or(0)
    }

    /// Row indices and values of column `j`.
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    pub fn col_nnz(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    /// Column indices of the stored entries in row `i` (structure only).
    pub fn row_structure(&self, i: usize) -> &[usize] {
        &self.row_cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Stored value at `(i, j)`, or 0 when the position is not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (rows, vals) = self.col(j);
        match rows.binary_search(&i) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_cols).flat_map(move |j| {
            let (rows, vals) = self.col(j);
            rows.iter().zip(vals).map(move |(&i, &v)| (i, j, v))
        })
    }

    /// y = A·x with a fixed column-major accumulation order.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch { expected: self.n_cols, got: x.len() });
        }
        let mut y = vec![0.0; self.n_rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let (rows, vals) = self.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                y[i] += v * xj;
            }
        }
        Ok(y)
    }

    /// Dense copy of `A(rows, cols)`, entry `(a, b) = A(rows[a], cols[b])`.
    /// Both index sets must be strictly increasing.
    pub fn extract_submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<DenseMat> {
        check_sorted_in_range(rows, self.n_rows)?;
        check_sorted_in_range(cols, self.n_cols)?;
        let mut out = DenseMat::zeros(rows.len(), cols.len());
        for (b, &j) in cols.iter().enumerate() {
            let (ridx, vals) = self.col(j);
            let dst = out.col_mut(b);
            // both `ridx` and `rows` ascend; advance them together
            let mut a = 0;
            for (&i, &v) in ridx.iter().zip(vals) {
                while a < rows.len() && rows[a] < i {
                    a += 1;
                }
                if a == rows.len() {
                    break;
                }
                if rows[a] == i {
                    dst[a] = v;
                }
            }
        }
        Ok(out)
    }

    /// Sorted union of the row indices stored in the listed columns.
    pub fn nonzero_rows_of_columns(&self, cols: &[usize]) -> Result<Vec<usize>> {
        check_sorted_in_range(cols, self.n_cols)?;
        let mut rows: Vec<usize> = cols.iter().flat_map(|&j| self.col(j).0.iter().copied()).collect();
        rows.sort_unstable();
        rows.dedup();
        Ok(rows)
    }

    /// Sorted union of the column indices stored in the listed rows.
    pub fn nonzero_cols_of_rows(&self, rows: &[usize]) -> Result<Vec<usize>> {
        check_sorted_in_range(rows, self.n_rows)?;
        let mut cols: Vec<usize> =
            rows.iter().flat_map(|&i| self.row_structure(i).iter().copied()).collect();
        cols.sort_unstable();
        cols.dedup();
        Ok(cols)
    }

    /// Applies a row permutation: entry `(i, j)` moves to `(perm[i], j)`.
    pub fn permute_rows(&self, perm: &Permutation) -> Result<SparseMatrix> {
        if perm.len() != self.n_rows {
            return Err(Error::DimensionMismatch { expected: self.n_rows, got: perm.len() });
        }
        let triplets = self.iter().map(|(i, j, v)| (perm.apply(i), j, v)).collect();
        Self::from_triplets(self.n_rows, self.n_cols, triplets)
    }

    pub fn to_dense(&self) -> DenseMat {
        let mut out = DenseMat::zeros(self.n_rows, self.n_cols);
        for (i, j, v) in self.iter() {
            out.set(i, j, v);
        }
        out
    }
}

fn check_sorted_in_range(set: &[usize], dim: usize) -> Result<()> {
    for (p, &i) in set.iter().enumerate() {
        if i >= dim {
            return Err(Error::IndexOutOfRange { index: i, dim });
        }
        if p > 0 && set[p - 1] >= i {
            return Err(Error::ContractViolation(format!(
                "index set not strictly increasing at position {p}"
            )));
        }
    }
    Ok(())
}

/// Sparse vector with strictly increasing indices and no explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn new(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        for (p, &(i, v)) in entries.iter().enumerate() {
            if i >= dim {
                return Err(Error::IndexOutOfRange { index: i, dim });
            }
            if p > 0 && entries[p - 1].0 >= i {
                return Err(Error::ContractViolation(format!(
                    "sparse vector indices not strictly increasing at position {p}"
                )));
            }
            if v == 0.0 {
                return Err(Error::ContractViolation(format!("explicit zero at index {i}")));
            }
        }
        Ok(Self { dim, entries })
    }

    /// Collects the nonzero entries of `(index, value)` pairs that may be
    /// unsorted; exact zeros are dropped.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut entries: Vec<(usize, f64)> = pairs.into_iter().filter(|&(_, v)| v != 0.0).collect();
        entries.sort_unstable_by_key(|&(i, _)| i);
        Self::new(dim, entries)
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn unit(dim: usize, k: usize) -> Self {
        Self { dim, entries: vec![(k, 1.0)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> f64 {
        match self.entries.binary_search_by_key(&i, |&(j, _)| j) {
            Ok(p) => self.entries[p].1,
            Err(_) => 0.0,
        }
    }

    /// Euclidean norm of the stored values.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(i, _)| i)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }
}

/// A bijection on `{0, …, n−1}`; `forward[old] = new`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
}

impl Permutation {
    pub fn new(forward: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        let mut seen = vec![false; n];
        for &t in &forward {
            if t >= n {
                return Err(Error::IndexOutOfRange { index: t, dim: n });
            }
            if seen[t] {
                return Err(Error::ContractViolation(format!("permutation maps {t} twice")));
            }
            seen[t] = true;
        }
        Ok(Self { forward })
    }

    pub fn identity(n: usize) -> Self {
        Self { forward: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &t)| i == t)
    }

    pub fn apply(&self, old: usize) -> usize {
        self.forward[old]
    }

    /// Permutes a dense vector the same way the rows move: `out[forward[i]] = x[i]`.
    pub fn permute_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.forward.len() {
            return Err(Error::DimensionMismatch { expected: self.forward.len(), got: x.len() });
        }
        let mut out = vec![0.0; x.len()];
        for (i, &v) in x.iter().enumerate() {
            out[self.forward[i]] = v;
        }
        Ok(out)
    }
}
