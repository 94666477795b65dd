//! Competitor constructions for a strain field: the Dirichlet solver, the
//! Hodge split A = ∇u + F, the harmonic competitor with its determinant
//! check, and the mollified competitor with bounded curl.

mod harmonic;
mod hodge;
mod mask;
mod mollify;
mod solver;

pub use harmonic::{
    harmonic_competitor, max_entry_laplacian, null_lagrangian_check, HarmonicCompetitor,
};
pub use hodge::{divergence_backward, gradient_forward, hodge_split, recompose, HodgeSplit};
pub use mask::RegionMask;
pub use mollify::{
    mollified_competitor, mollified_curl_report, quartic_weights, MollifiedCurlReport,
    MOLLIFIER_MIN_CELLS,
};
pub use solver::{solve_dirichlet, solve_dirichlet_with, solve_poisson, SolveStats, SolverOptions};

use thiserror::Error;

use crate::field_core::FieldError;

/// Failures of the competitor constructions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompetitorError {
    #[error("region mask is empty")]
    EmptyMask,
    #[error("region mask has {components} 4-connected components, expected 1")]
    Disconnected { components: usize },
    #[error("region mask has no node off the grid boundary")]
    EmptyInterior,
    #[error("grids differ: {got} nodes per side, expected {expected}")]
    GridMismatch { got: usize, expected: usize },
    #[error(
        "solver stopped after {iterations} iterations with residual {residual:e} above {target:e}"
    )]
    NoConvergence {
        iterations: usize,
        residual: f64,
        target: f64,
    },
    #[error("grid spacing {h} exceeds the mollifier requirement {required}")]
    GridTooCoarse { h: f64, required: f64 },
    #[error("mollifier support around core {index} leaves the grid")]
    SupportOutsideGrid { index: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}
