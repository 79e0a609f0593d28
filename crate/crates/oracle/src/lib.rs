//! Direct discretization of the magnetic ring chain, used to check the
//! spectral solver without sharing any of its machinery.
//!
//! The chain is cut to finitely many rings with Dirichlet ends, every edge
//! is resolved by a uniform grid and the quadratic form of the operator is
//! discretized with Peierls link phases and a lumped mass matrix. The
//! resulting generalized problem K u = E B u is Hermitian and banded, and
//! its eigenvalues are located by Sturm counts.

mod banded;
mod chain;
mod eigen;
mod study;

pub use banded::BandedHermitian;
pub use chain::{assemble, DiscreteOperator, NodeKind, TruncatedChain};
pub use eigen::{dense_eigenvalues, eigenvalues_in_window, eigenvector, low_spectrum, sturm_count};
pub use study::{
    convergence_study, gap_states, richardson, ring_masses, sized_chain, ConvergenceRow, OracleState,
    END_FRACTION_LIMIT,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("operator dimension {dim} exceeds the cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },
    #[error("eigensolver did not converge: {0}")]
    SolverNoConvergence(String),
    #[error("convergence study failed: {0}")]
    FitFailed(String),
}

pub type Result<T> = std::result::Result<T, OracleError>;
