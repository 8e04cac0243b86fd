//! The SPAI baseline: candidate columns are scored by the one-dimensional
//! residual-reduction each would achieve, and the few most profitable ones
//! join the pattern each loop.

use crate::column::{ColumnBuild, Workspace};
use crate::error::{Error, Result};
use crate::rsai::{ColumnState, SaiConfig};
use crate::sparse::{SparseMatrix, SparseVector};

/// Score of one candidate column `j`: `rho` is the residual norm left by
/// the best one-dimensional update `r + mu_j·A·e_j`.
#[derive(Debug, Clone)]
pub struct CandidateScore {
    pub j: usize,
    pub rho: f64,
    /// `rᵀ·A·e_j`; the optimal step is `mu_j = -numerator/denom`.
    pub numerator: f64,
    /// `‖A·e_j‖²`.
    pub denom: f64,
}

/// Candidate columns for the next loop: nonzero columns of the rows where
/// the residual lives, minus the current pattern.
pub fn spai_candidates(a: &SparseMatrix, state: &ColumnState) -> Result<Vec<usize>> {
    candidates_from(a, &state.residual, &state.pattern)
}

fn candidates_from(
    a: &SparseMatrix,
    residual: &SparseVector,
    pattern: &[usize],
) -> Result<Vec<usize>> {
    let support: Vec<usize> = residual.support().collect();
    crate::rsai::candidate_columns(a, &support, pattern)
}

/// Evaluates `rho_j² = ‖r‖² − (rᵀAe_j)²/‖Ae_j‖²`, clamped at zero.
pub fn score_candidate(a: &SparseMatrix, r: &SparseVector, j: usize) -> Result<CandidateScore> {
    let (rows, vals) = a.col(j);
    if rows.is_empty() {
        return Err(Error::ZeroColumn(j));
    }
    let mut numerator = 0.0;
    let mut denom = 0.0;
    let entries = r.entries();
    let mut p = 0;
    for (&i, &v) in rows.iter().zip(vals) {
        denom += v * v;
        while p < entries.len() && entries[p].0 < i {
            p += 1;
        }
        if p < entries.len() && entries[p].0 == i {
            numerator += entries[p].1 * v;
        }
    }
    let r_sq = r.entries().iter().map(|&(_, v)| v * v).sum::<f64>();
    let rho_sq = (r_sq - numerator * numerator / denom).max(0.0);
    Ok(CandidateScore { j, rho: rho_sq.sqrt(), numerator, denom })
}

/// Builds one column by the profitable-index loop. `A` must be square
/// with a zero-free diagonal.
pub fn spai_build_column(a: &SparseMatrix, k: usize, cfg: &SaiConfig) -> Result<ColumnState> {
    let mut ws = Workspace::new(a.n_rows());
    spai_build_column_ws(a, k, cfg, &mut ws)
}

pub(crate) fn spai_build_column_ws(
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

    let mut loops = 0usize;
    let mut residual_history = vec![residual_norm];
    let mut pattern_history = vec![build.pattern_order.len()];

    while residual_norm > cfg.epsilon && loops < cfg.max_loops {
        let pattern = build.sorted_pattern();
        let mut candidates = candidates_from(a, &residual, &pattern)?;
        if !build.banned.is_empty() {
            let mut banned = build.banned.clone();
            banned.sort_unstable();
            candidates.retain(|j| banned.binary_search(j).is_err());
        }
        if candidates.is_empty() {
            break;
        }
        let mut scores = Vec::with_capacity(candidates.len());
        for j in candidates {
            scores.push(score_candidate(a, &residual, j)?);
        }
        scores.sort_unstable_by(|x, y| x.rho.total_cmp(&y.rho).then(x.j.cmp(&y.j)));
        scores.truncate(cfg.profitable_per_loop);
        let mut selected: Vec<usize> = scores.iter().map(|s| s.j).collect();
        selected.sort_unstable();

        loops += 1;
        build.append(&selected)?;
        m = build.scatter();
        residual = build.residual(ws, &m);
        residual_norm = residual.norm();
        residual_history.push(residual_norm);
        pattern_history.push(build.pattern_order.len());
        debug_assert!(
            build.pattern_order.len() <= 1 + cfg.profitable_per_loop * loops,
            "fixed per-loop growth exceeded for column {k}"
        );
    }

    let converged = residual_norm <= cfg.epsilon;
    Ok(ColumnState {
        col: k,
        pattern: build.sorted_pattern(),
        rows: build.sorted_rows(),
        excluded: Vec::new(),
        residual,
        residual_norm,
        loops,
        converged,
        factor: build.factor,
        column: m,
        residual_history,
        pattern_history,
        dominant_history: Vec::new(),
        last_drop_tol: None,
    })
}
