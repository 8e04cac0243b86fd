//! Deterministic synthetic test matrices.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::sparse::SparseMatrix;

/// Random sparse matrix with a dominant diagonal: nonsingular,
/// zero-free diagonal, well conditioned. `extra_per_col` off-diagonal
/// entries are placed per column.
pub fn diag_dominant_sparse(n: usize, extra_per_col: usize, seed: u64) -> SparseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for j in 0..n {
        for _ in 0..extra_per_col {
            let i = rng.gen_range(0..n);
            if i != j {
                triplets.push((i, j, rng.gen_range(-1.0..1.0)));
            }
        }
    }
    // diagonal dominance over both the row and the column sums
    let mut slack = vec![1.0f64; n];
    for &(i, j, v) in &triplets {
        slack[i] += v.abs();
        slack[j] += v.abs();
    }
    for (i, s) in slack.into_iter().enumerate() {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        triplets.push((i, i, sign * s));
    }
    SparseMatrix::from_triplets(n, n, triplets).expect("generated triplets are in range")
}

/// Unit diagonal with a `-1` superdiagonal; its inverse is the full upper
/// triangle of ones.
pub fn bidiagonal_ones(n: usize) -> SparseMatrix {
    let mut triplets = Vec::with_capacity(2 * n);
    for i in 0..n {
        triplets.push((i, i, 1.0));
        if i + 1 < n {
            triplets.push((i, i + 1, -1.0));
        }
    }
    SparseMatrix::from_triplets(n, n, triplets).expect("bidiagonal triplets are in range")
}

/// Random sparse matrix shifted to be strongly diagonally dominant, the
/// kind of well-conditioned operator iterative-solver sanity tests want.
pub fn shifted_random(n: usize, extra_per_col: usize, shift: f64, seed: u64) -> SparseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for j in 0..n {
        triplets.push((j, j, shift + rng.gen_range(0.0..1.0)));
        for _ in 0..extra_per_col {
            let i = rng.gen_range(0..n);
            if i != j {
                triplets.push((i, j, rng.gen_range(-0.5..0.5)));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, triplets).expect("generated triplets are in range")
}

/// Five-point convection-diffusion stencil on a `p × p` grid; `gamma`
/// skews the east/west couplings, making the operator nonsymmetric.
pub fn convection_diffusion(p: usize, gamma: f64) -> SparseMatrix {
    let n = p * p;
    let mut triplets = Vec::with_capacity(5 * n);
    let id = |r: usize, c: usize| r * p + c;
    for r in 0..p {
        for c in 0..p {
            let k = id(r, c);
            triplets.push((k, k, 4.0));
            if c > 0 {
                triplets.push((k, id(r, c - 1), -1.0 - gamma));
            }
            if c + 1 < p {
                triplets.push((k, id(r, c + 1), -1.0 + gamma));
            }
            if r > 0 {
                triplets.push((k, id(r - 1, c), -1.0));
            }
            if r + 1 < p {
                triplets.push((k, id(r + 1, c), -1.0));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, triplets).expect("stencil triplets are in range")
}

/// Random sparse matrix with `extra` entries scattered anywhere and the
/// diagonal left to chance; may need a row permutation before use.
pub fn scattered_sparse(n: usize, extra: usize, seed: u64) -> SparseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    // one entry per column keeps it structurally nonsingular-ish; tests
    // that need a guarantee check and reseed
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut rng);
    for (j, &i) in rows.iter().enumerate() {
        triplets.push((i, j, rng.gen_range(0.5..1.5)));
    }
    for _ in 0..extra {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        triplets.push((i, j, rng.gen_range(-1.0..1.0)));
    }
    SparseMatrix::from_triplets(n, n, triplets).expect("generated triplets are in range")
}
