//! Shared fixtures for the criterion benches.

use sai_core::SparseMatrix;

/// Nonsymmetric five-point stencil, n = 900.
pub fn stencil() -> SparseMatrix {
    sai_core::synth::convection_diffusion(30, 0.4)
}

/// Random diagonally dominant matrix, n = 500.
pub fn random_dominant() -> SparseMatrix {
    sai_core::synth::diag_dominant_sparse(500, 5, 12)
}
