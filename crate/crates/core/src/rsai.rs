//! Residual-based adaptive sparse approximate inverse construction.
//!
//! Each column of the preconditioner solves `min ‖A·m_k − e_k‖` over a
//! sparsity pattern that starts at `{k}` and grows loop by loop. The
//! pattern is driven by the *dominant* residual entries: the `c` largest
//! entries in magnitude (outside an exclusion set of indices already used)
//! select rows of `A`, and the nonzero columns of those rows join the
//! pattern. With dropping enabled, entries falling under an adaptive
//! threshold are removed as the loops proceed, which keeps the
//! preconditioner sparse at comparable quality.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::column::{ColumnBuild, Workspace};
use crate::error::{Error, Result};
use crate::ls::QrFactor;
use crate::sparse::{SparseMatrix, SparseVector};

/// Parameters shared by the adaptive construction algorithms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaiConfig {
    /// Per-column residual tolerance, typically 0.1–0.4.
    pub epsilon: f64,
    /// Dominant residual indices exploited per loop.
    pub dominant_per_loop: usize,
    /// Maximum number of pattern-growing loops.
    pub max_loops: usize,
    /// Adaptive dropping of small entries (RSAI only).
    pub dropping: bool,
    /// Most profitable indices added per loop by the SPAI baseline.
    pub profitable_per_loop: usize,
    /// Fill ratio `nnz(M)/nnz(A)` used to derive the SPAI loop cap in
    /// benchmark mode.
    pub spai_nnz_cap_ratio: f64,
}

impl Default for SaiConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.3,
            dominant_per_loop: 3,
            max_loops: 10,
            dropping: true,
            profitable_per_loop: 3,
            spai_nnz_cap_ratio: 10.0,
        }
    }
}

impl SaiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if self.dominant_per_loop < 1 {
            return Err(Error::InvalidParameter("dominant index count must be >= 1".into()));
        }
        if self.max_loops < 1 {
            return Err(Error::InvalidParameter("loop cap must be >= 1".into()));
        }
        if self.profitable_per_loop < 1 {
            return Err(Error::InvalidParameter("profitable index count must be >= 1".into()));
        }
        if self.spai_nnz_cap_ratio.is_nan() || self.spai_nnz_cap_ratio <= 0.0 {
            return Err(Error::InvalidParameter("fill cap ratio must be > 0".into()));
        }
        Ok(())
    }

    /// Loop cap for the SPAI baseline that keeps `nnz(M)/nnz(A)` near
    /// `spai_nnz_cap_ratio`: `⌊ratio·nnz(A)/(l_a·n)⌋`, at least 1.
    pub fn spai_loop_cap(&self, a: &SparseMatrix) -> usize {
        let cap = (self.spai_nnz_cap_ratio * a.nnz() as f64
            / (self.profitable_per_loop as f64 * a.n_cols() as f64))
            .floor() as usize;
        cap.max(1)
    }
}

/// Which construction algorithm to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Rsai,
    Spai,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algorithm::Rsai => write!(f, "rsai"),
            Algorithm::Spai => write!(f, "spai"),
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rsai" => Ok(Algorithm::Rsai),
            "spai" => Ok(Algorithm::Spai),
            other => Err(Error::InvalidParameter(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// Final state of one column build.
#[derive(Debug, Clone)]
pub struct ColumnState {
    pub col: usize,
    /// Pattern at loop exit, sorted.
    pub pattern: Vec<usize>,
    /// Reduced row set at loop exit, sorted.
    pub rows: Vec<usize>,
    /// Union of all dominant index sets used so far, sorted.
    pub excluded: Vec<usize>,
    /// `A·m_k − e_k` at loop exit.
    pub residual: SparseVector,
    pub residual_norm: f64,
    pub loops: usize,
    /// True iff `residual_norm <= epsilon` at loop exit.
    pub converged: bool,
    pub factor: QrFactor,
    /// The column written into the preconditioner. With dropping on this
    /// is the result of a final drop pass and may be a sub-support of
    /// `pattern`.
    pub column: SparseVector,
    /// Residual norm after the initial solve and after each loop.
    pub residual_history: Vec<f64>,
    /// Pattern size after the initial solve and after each loop.
    pub pattern_history: Vec<usize>,
    /// Dominant index sets chosen per pattern-growing loop.
    pub dominant_history: Vec<Vec<usize>>,
    /// Threshold used by the final drop pass, when dropping ran.
    pub last_drop_tol: Option<f64>,
}

/// The assembled sparse approximate inverse.
#[derive(Debug, Clone)]
pub struct Preconditioner {
    pub matrix: SparseMatrix,
    /// Columns whose residual norm never dropped below epsilon.
    pub n_unconverged: usize,
    pub residual_norms: Vec<f64>,
    pub total_loops: usize,
    /// Columns that failed outright, with the reason.
    pub failed_columns: Vec<(usize, String)>,
}

/// Picks up to `c` indices maximizing `|r(i)|` over the support of `r`
/// minus `exclusion` (sorted). Ties break toward the smaller index.
pub fn select_dominant(residual: &SparseVector, exclusion: &[usize], c: usize) -> Vec<usize> {
    let mut eligible: Vec<(usize, f64)> = residual
        .entries()
        .iter()
        .filter(|&&(i, _)| exclusion.binary_search(&i).is_err())
        .map(|&(i, v)| (i, v.abs()))
        .collect();
    eligible.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    eligible.truncate(c);
    let mut out: Vec<usize> = eligible.into_iter().map(|(i, _)| i).collect();
    out.sort_unstable();
    out
}

/// New candidate columns reached from the dominant rows: the nonzero
/// columns of `A(dominant, ·)` that are not already in `pattern` (sorted).
pub fn candidate_columns(
    a: &SparseMatrix,
    dominant: &[usize],
    pattern: &[usize],
) -> Result<Vec<usize>> {
    let cols = a.nonzero_cols_of_rows(dominant)?;
    Ok(sorted_difference(&cols, pattern))
}

/// Removes every entry with `|m_j| <= epsilon / (nnz(m)·‖A‖₁)`, where
/// `nnz(m)` is the count before this pass. The entry of largest magnitude
/// is never removed, so the column cannot empty out.
pub fn drop_small(m: &SparseVector, epsilon: f64, norm1_a: f64) -> SparseVector {
    if m.nnz() == 0 {
        return m.clone();
    }
    let tol = epsilon / (m.nnz() as f64 * norm1_a);
    let max_abs =
        m.entries().iter().map(|&(_, v)| v.abs()).fold(0.0f64, f64::max);
    let entries: Vec<(usize, f64)> = m
        .entries()
        .iter()
        .filter(|&&(_, v)| v.abs() > tol || v.abs() == max_abs)
        .copied()
        .collect();
    SparseVector::new(m.dim(), entries).expect("filtering preserves canonical form")
}

/// `min{(g·c·l_max + 1)·n, n²}`: the pattern-size bound the basic
/// algorithm cannot exceed.
pub fn theorem1_bound(a: &SparseMatrix, cfg: &SaiConfig) -> usize {
    let n = a.n_cols();
    let per_col = a
        .max_row_nnz()
        .saturating_mul(cfg.dominant_per_loop)
        .saturating_mul(cfg.max_loops)
        .saturating_add(1);
    per_col.saturating_mul(n).min(n.saturating_mul(n))
}

/// Builds one column of the approximate inverse by the residual-driven
/// loop. `A` must be square with a zero-free diagonal.
pub fn rsai_build_column(a: &SparseMatrix, k: usize, cfg: &SaiConfig) -> Result<ColumnState> {
    let mut ws = Workspace::new(a.n_rows());
    rsai_build_column_ws(a, k, cfg, &mut ws)
}

pub(crate) fn rsai_build_column_ws(
    a: &SparseMatrix,
    k: usize,
    cfg: &SaiConfig,
    ws: &mut Workspace,
) -> Result<ColumnState> {
    cfg.validate()?;
    let mut build = ColumnBuild::init(a, k)?;
    let mut m = build.scatter();
    let mut residual = build.residual(ws, &m);
    let mut residual_norm = residual.norm();

    let mut excluded: Vec<usize> = Vec::new();
    let mut loops = 0usize;
    let mut residual_history = vec![residual_norm];
    let mut pattern_history = vec![build.pattern_order.len()];
    let mut dominant_history: Vec<Vec<usize>> = Vec::new();
    let growth_cap = a.max_row_nnz() * cfg.dominant_per_loop;

    while residual_norm > cfg.epsilon && loops < cfg.max_loops {
        let dominant = select_dominant(&residual, &excluded, cfg.dominant_per_loop);
        if dominant.is_empty() {
            // every residual index has been used; the optimality argument
            // says the residual is (numerically) zero, so stop here
            break;
        }
        merge_sorted(&mut excluded, &dominant);
        dominant_history.push(dominant.clone());

        let pattern = build.sorted_pattern();
        let mut candidates = candidate_columns(a, &dominant, &pattern)?;
        if !build.banned.is_empty() {
            let mut banned = build.banned.clone();
            banned.sort_unstable();
            candidates = sorted_difference(&candidates, &banned);
        }
        loops += 1;
        if candidates.is_empty() {
            // the loop counter still advances; nothing to solve
            residual_history.push(residual_norm);
            pattern_history.push(build.pattern_order.len());
            continue;
        }

        build.append(&candidates)?;
        m = build.scatter();
        if cfg.dropping {
            let before = m.nnz();
            let kept = drop_small(&m, cfg.epsilon, a.norm_1());
            if kept.nnz() < before {
                let surviving: Vec<usize> = kept.support().collect();
                build.rebuild(&surviving)?;
                m = build.scatter();
            }
        }
        residual = build.residual(ws, &m);
        residual_norm = residual.norm();
        residual_history.push(residual_norm);
        pattern_history.push(build.pattern_order.len());
        if !cfg.dropping {
            debug_assert!(
                build.pattern_order.len() <= (growth_cap * loops + 1).min(a.n_cols()),
                "pattern bound violated for column {k} at loop {loops}"
            );
        }
    }

    let converged = residual_norm <= cfg.epsilon;
    let mut last_drop_tol = None;
    if cfg.dropping && m.nnz() > 0 {
        last_drop_tol = Some(cfg.epsilon / (m.nnz() as f64 * a.norm_1()));
        m = drop_small(&m, cfg.epsilon, a.norm_1());
    }
    Ok(ColumnState {
        col: k,
        pattern: build.sorted_pattern(),
        rows: build.sorted_rows(),
        excluded,
        residual,
        residual_norm,
        loops,
        converged,
        factor: build.factor,
        column: m,
        residual_history,
        pattern_history,
        dominant_history,
        last_drop_tol,
    })
}

/// Runs the per-column builder over every column and assembles the
/// preconditioner. Columns are independent; the merge is by column index,
/// so the result does not depend on scheduling.
pub fn build_preconditioner(
    a: &SparseMatrix,
    cfg: &SaiConfig,
    algorithm: Algorithm,
) -> Result<Preconditioner> {
    cfg.validate()?;
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.n_cols() });
    }
    let states: Vec<Result<ColumnState>> = (0..n)
        .into_par_iter()
        .map_init(
            || Workspace::new(n),
            |ws, k| match algorithm {
                Algorithm::Rsai => rsai_build_column_ws(a, k, cfg, ws),
                Algorithm::Spai => crate::spai::spai_build_column_ws(a, k, cfg, ws),
            },
        )
        .collect();

    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut residual_norms = vec![1.0; n];
    let mut n_unconverged = 0usize;
    let mut total_loops = 0usize;
    let mut failed_columns: Vec<(usize, String)> = Vec::new();
    for (k, state) in states.into_iter().enumerate() {
        match state {
            Ok(st) => {
                triplets.extend(st.column.entries().iter().map(|&(i, v)| (i, k, v)));
                residual_norms[k] = st.residual_norm;
                total_loops += st.loops;
                if !st.converged {
                    n_unconverged += 1;
                }
            }
            Err(e) => {
                // the column contributes nothing; its residual is e_k
                failed_columns.push((k, e.to_string()));
                n_unconverged += 1;
            }
        }
    }
    if failed_columns.len() == n {
        return Err(Error::AllColumnsFailed(n));
    }
    let matrix = SparseMatrix::from_triplets(n, n, triplets)?;
    Ok(Preconditioner { matrix, n_unconverged, residual_norms, total_loops, failed_columns })
}

/// Set union of two sorted lists, in place on the left.
fn merge_sorted(base: &mut Vec<usize>, add: &[usize]) {
    let mut merged = Vec::with_capacity(base.len() + add.len());
    let (mut i, mut j) = (0, 0);
    while i < base.len() || j < add.len() {
        match (base.get(i), add.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                merged.push(x);
                i += 1;
                j += 1;
            }
            (Some(&x), Some(&y)) if x < y => {
                merged.push(x);
                i += 1;
            }
            (Some(_), Some(&y)) => {
                merged.push(y);
                j += 1;
            }
            (Some(&x), None) => {
                merged.push(x);
                i += 1;
            }
            (None, Some(&y)) => {
                merged.push(y);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    *base = merged;
}

/// Elements of sorted `a` not present in sorted `b`.
fn sorted_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len());
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            out.push(x);
        }
    }
    out
}
