//! Covering algorithms: Vitali selection, the growth radius ρ̄, degree-two
//! disjointification, mass-fraction ball selection, one step of the ball
//! construction, and the density trace built on top of them.

mod ball;
mod construction;
mod deg2;
mod density;
mod nice_balls;
mod rho_bar;
mod vitali;

pub use ball::{Ball, BallFamily, DISJOINT_SLACK};
pub use construction::{
    ball_construction_step, merge_overlapping, perimeter_measure, verify_construction_step,
    StepResult, CONSTRUCTION_VITALI_FACTOR, DILATION_FACTOR,
};
pub use deg2::{make_deg2_disjoint, verify_deg2, Deg2Selection};
pub use density::{density_trace, DensityRecord};
pub use nice_balls::{find_nice_balls, verify_nice_balls, SelectionResult, MASS_FRACTION_BOUND};
pub use rho_bar::rho_bar;
pub use vitali::{verify_vitali_cover, vitali_select};

use thiserror::Error;

/// Default δ₀.
pub const DEFAULT_DELTA0: f64 = 1.0 / 64.0;
/// Default M.
pub const DEFAULT_M: f64 = 40.0;

/// Failures of the covering algorithms.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoveringError {
    #[error("ball radius {0} must be finite and positive")]
    InvalidRadius(f64),
    #[error("dilation factor {0} must be at least 3")]
    InvalidDilation(f64),
    #[error("parameter {name} = {value} is outside its admissible range {range}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("point {index} admits no empty annulus among the first {tried} dyadic radii")]
    NoQualifyingAnnulus { index: usize, tried: usize },
    #[error("precondition violated at index {index}: {reason}")]
    Precondition { index: usize, reason: String },
    #[error("input balls {first} and {second} are not disjoint")]
    NonDisjointInput { first: usize, second: usize },
    #[error("density trace needs at least one step")]
    NoSteps,
    #[error(transparent)]
    Field(#[from] crate::field_core::FieldError),
}
