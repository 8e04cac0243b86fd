//! Reduced least-squares solves via Householder QR, with incremental
//! column appends.
//!
//! The pattern-growing drivers enlarge a reduced problem in two ways at
//! once: new columns are appended on the right and new rows at the bottom.
//! The new rows are structurally zero in the old columns (they are exactly
//! the rows introduced by the new columns), so the old reflectors stay
//! valid when padded with zeros and only the new columns need work. This
//! keeps the update cost proportional to the update size.

use crate::dense::DenseMat;
use crate::error::{Error, Result};

/// Relative threshold under which a new R diagonal marks the incoming
/// column as rank-deficient against the current operand.
const RANK_TOL: f64 = 1e-12;

/// One Householder reflector `H = I − tau·v·vᵀ` acting on rows
/// `start..start+v.len()` of the rows that existed when it was formed.
/// Rows appended later are untouched, which is the zero-padding semantics.
#[derive(Debug, Clone)]
struct Reflector {
    start: usize,
    v: Vec<f64>,
    tau: f64,
}

impl Reflector {
    fn apply(&self, x: &mut [f64]) {
        let end = (self.start + self.v.len()).min(x.len());
        if end <= self.start || self.tau == 0.0 {
            return;
        }
        let seg = &mut x[self.start..end];
        let dot: f64 = seg.iter().zip(&self.v).map(|(a, b)| a * b).sum();
        let scale = self.tau * dot;
        for (xi, vi) in seg.iter_mut().zip(&self.v) {
            *xi -= scale * vi;
        }
    }
}

/// Result of a reduced LS solve.
#[derive(Debug, Clone)]
pub struct LsSolve {
    /// Coefficients aligned with the factor's accepted column order.
    pub solution: Vec<f64>,
    /// `‖A_k x − rhs‖` over the reduced rows.
    pub residual_norm: f64,
    /// Columns rejected as rank-deficient by this call, as positions into
    /// the operand it was given (`a` or `new_cols`).
    pub rejected: Vec<usize>,
}

/// Householder QR factorization of a growing reduced matrix.
///
/// `R` carries a nonnegative diagonal; the sign flips live in `signs` and
/// are folded back in whenever Q is applied.
#[derive(Debug, Clone)]
pub struct QrFactor {
    m: usize,
    reflectors: Vec<Reflector>,
    /// Column `t` holds the flipped entries `R[0..=t, t]`.
    r_cols: Vec<Vec<f64>>,
    signs: Vec<f64>,
    /// Reflections (without signs) applied to the right-hand side.
    qt_rhs: Vec<f64>,
    /// Accepted input column positions, in insertion order.
    col_ids: Vec<usize>,
    /// All rejected input column positions so far.
    rejected: Vec<usize>,
    offered: usize,
    fro_sq: f64,
}

impl QrFactor {
    fn empty(rhs: &[f64]) -> Self {
        Self {
            m: rhs.len(),
            reflectors: Vec::new(),
            r_cols: Vec::new(),
            signs: Vec::new(),
            qt_rhs: rhs.to_vec(),
            col_ids: Vec::new(),
            rejected: Vec::new(),
            offered: 0,
            fro_sq: 0.0,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of accepted columns.
    pub fn k(&self) -> usize {
        self.col_ids.len()
    }

    pub fn col_ids(&self) -> &[usize] {
        &self.col_ids
    }

    pub fn rejected(&self) -> &[usize] {
        &self.rejected
    }

    /// Entry of the upper-triangular factor, `i ≤ j < k`.
    pub fn r_entry(&self, i: usize, j: usize) -> f64 {
        if i > j {
            0.0
        } else {
            self.r_cols[j][i]
        }
    }

    /// Offers one column; returns false when it was rejected.
    fn push_column(&mut self, col: &[f64]) -> bool {
        debug_assert_eq!(col.len(), self.m);
        let id = self.offered;
        self.offered += 1;

        let mut w = col.to_vec();
        for refl in &self.reflectors {
            refl.apply(&mut w);
        }
        let t = self.k();
        let tail_norm = if t < self.m { norm2(&w[t..]) } else { 0.0 };
        let col_sq: f64 = col.iter().map(|v| v * v).sum();
        if tail_norm <= RANK_TOL * (self.fro_sq + col_sq).sqrt() {
            self.rejected.push(id);
            return false;
        }
        self.fro_sq += col_sq;

        let alpha = w[t];
        let below = norm2(&w[t + 1..]);
        let (raw_diag, reflector) = if below == 0.0 {
            (alpha, Reflector { start: t, v: vec![1.0], tau: 0.0 })
        } else {
            let beta = -alpha.signum() * (alpha * alpha + below * below).sqrt();
            let mut v = w[t..].to_vec();
            v[0] = alpha - beta;
            let vtv: f64 = v.iter().map(|x| x * x).sum();
            (beta, Reflector { start: t, v, tau: 2.0 / vtv })
        };
        reflector.apply(&mut self.qt_rhs);

        let sign = if raw_diag < 0.0 { -1.0 } else { 1.0 };
        let mut r_col = Vec::with_capacity(t + 1);
        for i in 0..t {
            r_col.push(self.signs[i] * w[i]);
        }
        r_col.push(sign * raw_diag);
        self.r_cols.push(r_col);
        self.signs.push(sign);
        self.reflectors.push(reflector);
        self.col_ids.push(id);
        true
    }

    fn extend_rows(&mut self, rhs_tail: &[f64]) {
        self.m += rhs_tail.len();
        self.qt_rhs.extend_from_slice(rhs_tail);
    }

    /// Solves the current LS problem from the maintained factors.
    pub fn solve(&self) -> LsSolve {
        let k = self.k();
        let mut x = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = self.signs[i] * self.qt_rhs[i];
            for j in i + 1..k {
                s -= self.r_cols[j][i] * x[j];
            }
            x[i] = s / self.r_cols[i][i];
        }
        let residual_norm = norm2(&self.qt_rhs[k..]);
        LsSolve { solution: x, residual_norm, rejected: Vec::new() }
    }

    /// `‖A_k x − rhs‖` for the current factor state.
    pub fn residual_norm(&self) -> f64 {
        norm2(&self.qt_rhs[self.k()..])
    }

    /// Applies the orthogonal factor: `y ← Q·y`.
    pub fn apply_q(&self, y: &mut [f64]) {
        assert_eq!(y.len(), self.m);
        for (i, s) in self.signs.iter().enumerate() {
            y[i] *= s;
        }
        for refl in self.reflectors.iter().rev() {
            refl.apply(y);
        }
    }

    /// Applies the transpose: `y ← Qᵀ·y`.
    pub fn apply_qt(&self, y: &mut [f64]) {
        assert_eq!(y.len(), self.m);
        for refl in &self.reflectors {
            refl.apply(y);
        }
        for (i, s) in self.signs.iter().enumerate() {
            y[i] *= s;
        }
    }

    /// Dense `Q·R`, which must reproduce the accepted columns of the
    /// operand in insertion order.
    pub fn reconstruct(&self) -> DenseMat {
        let k = self.k();
        let mut out = DenseMat::zeros(self.m, k);
        for t in 0..k {
            let mut y = vec![0.0; self.m];
            y[..=t].copy_from_slice(&self.r_cols[t]);
            self.apply_q(&mut y);
            out.col_mut(t).copy_from_slice(&y);
        }
        out
    }
}

/// Factorizes `a` and minimizes `‖a·x − rhs‖`.
///
/// A column whose R diagonal falls below `1e-12·‖A_k‖_F` is rejected and
/// reported in [`LsSolve::rejected`] by its position in `a`.
pub fn qr_solve(a: &DenseMat, rhs: &[f64]) -> Result<(LsSolve, QrFactor)> {
    if a.n_rows() != rhs.len() {
        return Err(Error::DimensionMismatch { expected: a.n_rows(), got: rhs.len() });
    }
    let mut factor = QrFactor::empty(rhs);
    for j in 0..a.n_cols() {
        factor.push_column(a.col(j));
    }
    let mut solve = factor.solve();
    solve.rejected = factor.rejected.clone();
    Ok((solve, factor))
}

/// Appends `new_rows` rows and the columns of `new_cols` to an existing
/// factorization, then re-solves.
///
/// `new_cols` spans the enlarged row set: the first `factor.m()` rows in
/// the factor's row order, then the appended rows. `rhs` is the enlarged
/// right-hand side; its head must be the rhs the factor was built with.
/// The appended rows must be structurally absent from the old columns.
pub fn qr_append_columns(
    factor: &mut QrFactor,
    new_cols: &DenseMat,
    new_rows: usize,
    rhs: &[f64],
) -> Result<LsSolve> {
    let m_new = factor.m() + new_rows;
    if new_cols.n_rows() != m_new {
        return Err(Error::ContractViolation(format!(
            "new columns have {} rows, factor extends to {}",
            new_cols.n_rows(),
            m_new
        )));
    }
    if rhs.len() != m_new {
        return Err(Error::DimensionMismatch { expected: m_new, got: rhs.len() });
    }
    factor.extend_rows(&rhs[factor.m()..]);
    let before = factor.rejected.len();
    let offered_before = factor.offered;
    for j in 0..new_cols.n_cols() {
        factor.push_column(new_cols.col(j));
    }
    let mut solve = factor.solve();
    solve.rejected = factor.rejected[before..].iter().map(|id| id - offered_before).collect();
    Ok(solve)
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
