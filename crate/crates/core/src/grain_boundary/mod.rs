//! Explicit grain-boundary competitor: a vertical array of edge
//! dislocations joining the rotations R_α (left) and R_{−α} (right), built
//! as an exact piecewise-affine map with one core per tile.

mod construction;
mod energy;
mod frame;
mod pa_map;

pub use construction::{
    build_v1, build_v2, compose_tile, opening_field, tile_mesh, Side, TileMesh,
};
pub use energy::{gb_elastic_energy, gb_scan, ScanRow};
pub use frame::{compatible_epsilon, DyadicFrame, DEFAULT_EPSILON_MAX_EXPONENT};
pub use pa_map::{GradientField, PiecewiseAffineMap, Triangle};

use thiserror::Error;

use crate::field_core::FieldError;

/// Failures of the grain-boundary construction.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrainBoundaryError {
    #[error(
        "epsilon = {epsilon} is not compatible: 4 L sin(alpha)/(tau epsilon) = {tiles} is not an even integer >= 2"
    )]
    IncompatibleEpsilon { epsilon: f64, tiles: f64 },
    #[error("core square half-diagonal {half_diagonal} exceeds the core radius {core_radius}; lower tau/lambda")]
    CoreSquareTooLarge {
        half_diagonal: f64,
        core_radius: f64,
    },
    #[error("dislocation strip half-width {half_width} reaches the boundary band (limit {limit})")]
    StripTooWide { half_width: f64, limit: f64 },
    #[error("triangle {index} has zero area")]
    DegenerateTriangle { index: usize },
    #[error("alpha list is empty")]
    EmptyAlphaList,
    #[error(transparent)]
    Field(#[from] FieldError),
}
