//! Right-preconditioned BiCGStab.
//!
//! The recurrences run on the operator `v ↦ A·(M·v)` with zero initial
//! guess; the returned solution is mapped back through `M`. Convergence is
//! only declared after the *true* residual `‖b − A·x‖/‖b‖` confirms the
//! recurrence residual, so drift cannot produce a false positive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

const BREAKDOWN_FLOOR: f64 = 1e-300;
/// Iterations without relative improvement before declaring stagnation.
const STAGNATION_WINDOW: usize = 50;
const STAGNATION_IMPROVEMENT: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIters,
    Stagnated,
    Breakdown,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Half-iterations count as 0.5; reports round up.
    pub iterations: f64,
    /// True residual `‖b − A·x‖/‖b‖` at exit.
    pub final_relative_residual: f64,
    /// `x = M·y` in the original variables.
    pub solution: Vec<f64>,
    /// Recurrence relative residual after each half-step.
    pub history: Vec<f64>,
}

/// Solves `A·x = b` with `M` applied as a right preconditioner
/// (`M = None` runs unpreconditioned). The initial guess is zero.
pub fn bicgstab(
    a: &SparseMatrix,
    m: Option<&SparseMatrix>,
    b: &[f64],
    rtol: f64,
    max_iters: usize,
) -> Result<SolveOutcome> {
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.n_cols() });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    if let Some(m) = m {
        if m.n_rows() != n || m.n_cols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.n_rows() });
        }
    }

    let apply = |v: &[f64]| -> Result<Vec<f64>> {
        match m {
            Some(m) => a.matvec(&m.matvec(v)?),
            None => a.matvec(v),
        }
    };
    let recover = |y: &[f64]| -> Result<Vec<f64>> {
        match m {
            Some(m) => m.matvec(y),
            None => Ok(y.to_vec()),
        }
    };
    let true_rel = |y: &[f64], b_norm: f64| -> Result<(Vec<f64>, f64)> {
        let x = recover(y)?;
        let ax = a.matvec(&x)?;
        let res = norm2_diff(b, &ax);
        Ok((x, res / b_norm))
    };

    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(SolveOutcome {
            status: SolveStatus::Converged,
            iterations: 0.0,
            final_relative_residual: 0.0,
            solution: vec![0.0; n],
            history: Vec::new(),
        });
    }

    let mut y = vec![0.0; n];
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut rho = 1.0f64;
    let mut alpha = 1.0f64;
    let mut omega = 1.0f64;

    let mut history = Vec::new();
    let mut best_rel = 1.0f64;
    let mut flat_iters = 0usize;

    let finish = |status: SolveStatus, iterations: f64, y: &[f64], history: Vec<f64>| {
        let (solution, rel) = true_rel(y, b_norm)?;
        Ok(SolveOutcome {
            status,
            iterations,
            final_relative_residual: rel,
            solution,
            history,
        })
    };

    for it in 1..=max_iters {
        let rho_new = dot(&r_hat, &r);
        if !rho_new.is_finite() || rho_new.abs() < BREAKDOWN_FLOOR {
            return finish(SolveStatus::Breakdown, it as f64 - 1.0, &y, history);
        }
        if it == 1 {
            p.copy_from_slice(&r);
        } else {
            let beta = (rho_new / rho) * (alpha / omega);
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
        }
        rho = rho_new;
        v = apply(&p)?;
        let rhv = dot(&r_hat, &v);
        alpha = rho / rhv;
        if !alpha.is_finite() {
            return finish(SolveStatus::Breakdown, it as f64 - 1.0, &y, history);
        }

        // first half-step: s = r − alpha·v
        let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        let rel_s = norm2(&s) / b_norm;
        history.push(rel_s);
        if !rel_s.is_finite() {
            return finish(SolveStatus::Breakdown, it as f64 - 0.5, &y, history);
        }
        if rel_s < rtol {
            let y_half: Vec<f64> = y.iter().zip(&p).map(|(yi, pi)| yi + alpha * pi).collect();
            let (solution, rel) = true_rel(&y_half, b_norm)?;
            if rel < rtol {
                return Ok(SolveOutcome {
                    status: SolveStatus::Converged,
                    iterations: it as f64 - 0.5,
                    final_relative_residual: rel,
                    solution,
                    history,
                });
            }
        }

        let t = apply(&s)?;
        let tt = dot(&t, &t);
        omega = dot(&t, &s) / tt;
        if !omega.is_finite() || omega.abs() < BREAKDOWN_FLOOR {
            return finish(SolveStatus::Breakdown, it as f64 - 0.5, &y, history);
        }
        for i in 0..n {
            y[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        let rel = norm2(&r) / b_norm;
        history.push(rel);
        if !rel.is_finite() {
            return finish(SolveStatus::Breakdown, it as f64, &y, history);
        }
        if rel < rtol {
            let (solution, true_res) = true_rel(&y, b_norm)?;
            if true_res < rtol {
                return Ok(SolveOutcome {
                    status: SolveStatus::Converged,
                    iterations: it as f64,
                    final_relative_residual: true_res,
                    solution,
                    history,
                });
            }
        }

        if rel < best_rel * (1.0 - STAGNATION_IMPROVEMENT) {
            best_rel = rel;
            flat_iters = 0;
        } else {
            flat_iters += 1;
            if flat_iters >= STAGNATION_WINDOW {
                return finish(SolveStatus::Stagnated, it as f64, &y, history);
            }
        }
    }
    finish(SolveStatus::MaxIters, max_iters as f64, &y, history)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn norm2_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
