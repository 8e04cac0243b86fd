//! Zero-free diagonal preprocessing via maximum bipartite matching.
//!
//! Columns are matched to rows through structural nonzeros (the transversal
//! a Dulmage-Mendelsohn decomposition would produce). The resulting row
//! permutation moves the matched row of each column onto the diagonal.

use std::collections::VecDeque;

use super::{Permutation, SparseMatrix};
use crate::error::{Error, Result};

/// Returns a row permutation `P` and `P·A` such that every diagonal entry
/// of `P·A` is structurally nonzero. `P` is the identity when `A` already
/// has a zero-free diagonal.
pub fn ensure_nonzero_diagonal(matrix: &SparseMatrix) -> Result<(Permutation, SparseMatrix)> {
    let n = matrix.n_rows();
    if matrix.n_cols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: matrix.n_cols() });
    }
    if (0..n).all(|k| matrix.get(k, k) != 0.0) {
        return Ok((Permutation::identity(n), matrix.clone()));
    }

    let matching = max_matching(matrix);
    let matched = matching.iter().filter(|m| m.is_some()).count();
    if matched < n {
        return Err(Error::StructurallySingular { matched, dim: n });
    }

    // col c is matched to row r: send r to position c so that (c,c) is stored
    let mut forward = vec![0usize; n];
    for (c, r) in matching.iter().enumerate() {
        forward[r.unwrap()] = c;
    }
    let perm = Permutation::new(forward)?;
    let permuted = matrix.permute_rows(&perm)?;
    Ok((perm, permuted))
}

/// Hopcroft–Karp over columns (left) and rows (right), seeded with the
/// diagonal so an already zero-free matrix keeps its row order.
fn max_matching(matrix: &SparseMatrix) -> Vec<Option<usize>> {
    let n = matrix.n_rows();
    let mut col_to_row: Vec<Option<usize>> = vec![None; n];
    let mut row_to_col: Vec<Option<usize>> = vec![None; n];

    for c in 0..n {
        if matrix.get(c, c) != 0.0 {
            col_to_row[c] = Some(c);
            row_to_col[c] = Some(c);
        }
    }

    const INF: u32 = u32::MAX;
    let mut dist = vec![INF; n];
    loop {
        // BFS layers from unmatched columns
        let mut queue = VecDeque::new();
        for c in 0..n {
            if col_to_row[c].is_none() {
                dist[c] = 0;
                queue.push_back(c);
            } else {
                dist[c] = INF;
            }
        }
        let mut reachable_free_row = false;
        while let Some(c) = queue.pop_front() {
            for &r in matrix.col(c).0 {
                match row_to_col[r] {
                    Some(c2) => {
                        if dist[c2] == INF {
                            dist[c2] = dist[c] + 1;
                            queue.push_back(c2);
                        }
                    }
                    None => reachable_free_row = true,
                }
            }
        }
        if !reachable_free_row {
            break;
        }
        for c in 0..n {
            if col_to_row[c].is_none() {
                augment(matrix, c, &mut col_to_row, &mut row_to_col, &mut dist);
            }
        }
    }
    col_to_row
}

fn augment(
    matrix: &SparseMatrix,
    c: usize,
    col_to_row: &mut [Option<usize>],
    row_to_col: &mut [Option<usize>],
    dist: &mut [u32],
) -> bool {
    for &r in matrix.col(c).0 {
        let ok = match row_to_col[r] {
            None => true,
            Some(c2) => {
                dist[c2] == dist[c] + 1 && augment(matrix, c2, col_to_row, row_to_col, dist)
            }
        };
        if ok {
            col_to_row[c] = Some(r);
            row_to_col[r] = Some(c);
            return true;
        }
    }
    dist[c] = u32::MAX;
    false
}
