//! Rotations, distance to SO(2), uniform grids, finite-difference curl,
//! polygonal line integrals and Burgers vectors.

mod burgers;
mod curve;
mod grid;
mod linalg;
mod params;

pub use burgers::{
    classify_burgers, line_integral, repr_burgers_residual, repr_harmonic_form, segment_integral,
    BurgersClass, MatrixSampler, DEFAULT_BURGERS_TOL_FACTOR,
};
pub use curve::{CoreSet, PolyCurve};
pub use grid::{curl_fd, Grid2, MatrixField, ScalarField};
pub use linalg::{dist_so2, dist_so2_sq, rotation, Mat2, Vec2};
pub use params::Params;

use thiserror::Error;

/// Failures of field and curve operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("parameter {name} = {value} violates: {rule}")]
    InvalidParams {
        name: &'static str,
        value: f64,
        rule: &'static str,
    },
    #[error("grid with {n} nodes per side is too small (need at least {min})")]
    GridTooSmall { n: usize, min: usize },
    #[error("field has {got} values but the grid needs {expected}")]
    FieldSizeMismatch { got: usize, expected: usize },
    #[error("curve vertex {index} at ({x}, {y}) lies outside the field domain")]
    CurveOutsideDomain { index: usize, x: f64, y: f64 },
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("core centre {index} at ({x}, {y}) lies outside the admissible core strip")]
    CoreOutsideStrip { index: usize, x: f64, y: f64 },
}
