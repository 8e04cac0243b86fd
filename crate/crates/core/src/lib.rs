//! Adaptive F-norm-minimization sparse approximate inverse
//! preconditioning.
//!
//! The crate builds a sparse `M ≈ A⁻¹` by minimizing `‖AM − I‖_F` column
//! by column over adaptively grown sparsity patterns. Two pattern-growth
//! strategies are provided: the residual-driven construction in [`rsai`]
//! (optionally with adaptive dropping of small entries) and the
//! profitable-index baseline in [`spai`]. [`krylov`] supplies a
//! right-preconditioned BiCGStab, and [`harness`] ties everything into
//! benchmark sweeps over Matrix Market files.

mod column;
pub mod dense;
pub mod error;
pub mod harness;
pub mod krylov;
pub mod ls;
pub mod rsai;
pub mod spai;
pub mod sparse;
pub mod synth;

pub use dense::DenseMat;
pub use error::{Error, Result};
pub use harness::{
    emit_report, pattern_dump, run_experiment, ExperimentSpec, IterationCell, ReportFormat,
    RunReport,
};
pub use krylov::{bicgstab, SolveOutcome, SolveStatus};
pub use ls::{qr_append_columns, qr_solve, LsSolve, QrFactor};
pub use rsai::{
    build_preconditioner, candidate_columns, drop_small, rsai_build_column, select_dominant,
    theorem1_bound, Algorithm, ColumnState, Preconditioner, SaiConfig,
};
pub use spai::{score_candidate, spai_build_column, spai_candidates, CandidateScore};
pub use sparse::{
    ensure_nonzero_diagonal, load_matrix_market, write_matrix_market, Permutation, SparseMatrix,
    SparseVector,
};
