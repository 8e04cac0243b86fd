//! Shared per-column machinery for the adaptive pattern-growing drivers:
//! reduced-operand gathering, factor bookkeeping and residual recomputation.

use std::collections::HashMap;

use crate::dense::DenseMat;
use crate::error::{Error, Result};
use crate::ls::{qr_append_columns, qr_solve, QrFactor};
use crate::sparse::{SparseMatrix, SparseVector};

/// Scratch reused across column builds; avoids an O(n) allocation per
/// column when assembling the full residual.
pub(crate) struct Workspace {
    acc: Vec<f64>,
    seen: Vec<bool>,
    touched: Vec<usize>,
}

impl Workspace {
    pub fn new(n: usize) -> Self {
        Self { acc: vec![0.0; n], seen: vec![false; n], touched: Vec::new() }
    }
}

/// State of one column's growing reduced LS problem.
pub(crate) struct ColumnBuild<'a> {
    a: &'a SparseMatrix,
    k: usize,
    /// Row ids in the factor's insertion order.
    pub rows_order: Vec<usize>,
    row_pos: HashMap<usize, usize>,
    /// Pattern ids aligned with the factor's accepted columns.
    pub pattern_order: Vec<usize>,
    pub factor: QrFactor,
    rhs: Vec<f64>,
    /// Reduced solution aligned with `pattern_order`.
    pub solution: Vec<f64>,
    /// Pattern ids rejected as rank-deficient; excluded from candidates.
    pub banned: Vec<usize>,
}

impl<'a> ColumnBuild<'a> {
    /// Starts from the unit pattern `{k}`.
    pub fn init(a: &'a SparseMatrix, k: usize) -> Result<Self> {
        if a.col_nnz(k) == 0 {
            return Err(Error::ZeroColumn(k));
        }
        let mut rows_order: Vec<usize> = a.col(k).0.to_vec();
        if !rows_order.contains(&k) {
            rows_order.push(k);
            rows_order.sort_unstable();
        }
        let row_pos: HashMap<usize, usize> =
            rows_order.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let operand = a.extract_submatrix(&rows_order, &[k])?;
        let rhs: Vec<f64> = rows_order.iter().map(|&i| if i == k { 1.0 } else { 0.0 }).collect();
        let (solve, factor) = qr_solve(&operand, &rhs)?;
        let mut build = Self {
            a,
            k,
            rows_order,
            row_pos,
            pattern_order: Vec::new(),
            factor,
            rhs,
            solution: solve.solution,
            banned: Vec::new(),
        };
        if solve.rejected.is_empty() {
            build.pattern_order.push(k);
        } else {
            build.banned.push(k);
        }
        Ok(build)
    }

    /// Grows the pattern by `candidates` (sorted, disjoint from the current
    /// pattern and ban list) and re-solves incrementally.
    pub fn append(&mut self, candidates: &[usize]) -> Result<()> {
        let m_old = self.rows_order.len();
        let mut new_rows: Vec<usize> = Vec::new();
        for &j in candidates {
            for &i in self.a.col(j).0 {
                // placeholder position, fixed after the sort below
                if let std::collections::hash_map::Entry::Vacant(slot) = self.row_pos.entry(i) {
                    slot.insert(usize::MAX);
                    new_rows.push(i);
                }
            }
        }
        new_rows.sort_unstable();
        for (offset, &i) in new_rows.iter().enumerate() {
            self.row_pos.insert(i, m_old + offset);
        }
        self.rows_order.extend_from_slice(&new_rows);
        self.rhs.extend(new_rows.iter().map(|&i| if i == self.k { 1.0 } else { 0.0 }));

        let m_new = self.rows_order.len();
        let mut operand = DenseMat::zeros(m_new, candidates.len());
        for (b, &j) in candidates.iter().enumerate() {
            let dst = operand.col_mut(b);
            let (rows, vals) = self.a.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                dst[self.row_pos[&i]] = v;
            }
        }
        let solve = qr_append_columns(&mut self.factor, &operand, new_rows.len(), &self.rhs)?;
        let mut reject_iter = solve.rejected.iter().peekable();
        for (local, &j) in candidates.iter().enumerate() {
            if reject_iter.peek() == Some(&&local) {
                reject_iter.next();
                self.banned.push(j);
            } else {
                self.pattern_order.push(j);
            }
        }
        self.solution = solve.solution;
        Ok(())
    }

    /// Re-solves from scratch on `pattern` (sorted); used after dropping
    /// shrinks the pattern.
    pub fn rebuild(&mut self, pattern: &[usize]) -> Result<()> {
        let mut rows_order = self.a.nonzero_rows_of_columns(pattern)?;
        if let Err(p) = rows_order.binary_search(&self.k) {
            rows_order.insert(p, self.k);
        }
        let operand = self.a.extract_submatrix(&rows_order, pattern)?;
        let rhs: Vec<f64> =
            rows_order.iter().map(|&i| if i == self.k { 1.0 } else { 0.0 }).collect();
        let (solve, factor) = qr_solve(&operand, &rhs)?;

        self.row_pos = rows_order.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        self.rows_order = rows_order;
        self.rhs = rhs;
        self.factor = factor;
        self.pattern_order.clear();
        let mut reject_iter = solve.rejected.iter().peekable();
        for (local, &j) in pattern.iter().enumerate() {
            if reject_iter.peek() == Some(&&local) {
                reject_iter.next();
                self.banned.push(j);
            } else {
                self.pattern_order.push(j);
            }
        }
        self.solution = solve.solution;
        Ok(())
    }

    /// The column in full-length sparse form.
    pub fn scatter(&self) -> SparseVector {
        SparseVector::from_pairs(
            self.a.n_rows(),
            self.pattern_order.iter().copied().zip(self.solution.iter().copied()),
        )
        .expect("pattern indices are valid and unique")
    }

    /// Recomputes `r = A·m − e_k` from the stored columns of `A`.
    pub fn residual(&self, ws: &mut Workspace, m: &SparseVector) -> SparseVector {
        for &(j, x) in m.entries() {
            let (rows, vals) = self.a.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                if !ws.seen[i] {
                    ws.seen[i] = true;
                    ws.touched.push(i);
                }
                ws.acc[i] += v * x;
            }
        }
        if !ws.seen[self.k] {
            ws.seen[self.k] = true;
            ws.touched.push(self.k);
        }
        ws.acc[self.k] -= 1.0;

        ws.touched.sort_unstable();
        let entries: Vec<(usize, f64)> =
            ws.touched.iter().filter(|&&i| ws.acc[i] != 0.0).map(|&i| (i, ws.acc[i])).collect();
        for &i in &ws.touched {
            ws.seen[i] = false;
            ws.acc[i] = 0.0;
        }
        ws.touched.clear();
        SparseVector::new(self.a.n_rows(), entries).expect("residual entries are canonical")
    }

    pub fn sorted_pattern(&self) -> Vec<usize> {
        let mut p = self.pattern_order.clone();
        p.sort_unstable();
        p
    }

    pub fn sorted_rows(&self) -> Vec<usize> {
        let mut r = self.rows_order.clone();
        r.sort_unstable();
        r
    }
}
