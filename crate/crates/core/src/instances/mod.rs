//! Concrete fluid algebras.

mod lie;
mod random;
pub mod torus;

use thiserror::Error;

use crate::algebra::AlgebraError;

pub use lie::{abelian, from_lie_algebra, rigid_body, so3, so3_direct_sum, so3_direct_sum_input, so3_input, LieAlgebraInput};
pub use random::{random_algebra, random_state, RANDOM_LINKING_MIN_EIGENVALUE, RANDOM_RETRY_BUDGET};
pub use torus::{build_torus_algebra, build_torus_algebra_with_cap, Phase, TorusBasis, TorusMode, DEFAULT_TORUS_DIM_CAP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("invalid instance input: {0}")]
    Invalid(String),
    #[error("pairing is not invariant: worst triple ({i},{j},{k}) has defect {defect:e}")]
    NotInvariant { i: usize, j: usize, k: usize, defect: f64 },
    #[error("torus algebra with cutoff {cutoff} has dimension {dim}, above the cap {cap}")]
    TooLarge { cutoff: usize, dim: usize, cap: usize },
    #[error("no admissible linking matrix after {0} retries")]
    RetriesExhausted(usize),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}
