//! Lipschitz foliations of annuli around disjoint balls: the δ₁/δ₂ margins,
//! the cover hierarchy with its degree-two pruning, the blended and cut
//! level function, its weighted energy, and the level-set flux identity.

mod deltas;
mod energy;
mod flux;
mod function;
mod hierarchy;

pub use deltas::{arc_length_in_annulus, compute_deltas, perimeter_in_annulus, Deltas};
pub use energy::{foliation_energy, sampled_lipschitz, MIN_ENERGY_GRID};
pub use flux::{contour_segments, flux_identity_check, ContourSegment, FluxReport};
pub use function::{foliate, foliate_scaled, BlendSite, CutMap, FoliationFn};
pub use hierarchy::{build_hierarchy, verify_hierarchy, CoverHierarchy, Vertex};

use thiserror::Error;

/// Failures of the foliation construction and its checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FoliationError {
    #[error("boundary length {perimeter} inside the annulus exceeds δ₀ = {delta0}")]
    PerimeterTooLarge { perimeter: f64, delta0: f64 },
    #[error("margin {value} exceeds 3δ₀/2 = {bound}")]
    MarginTooLarge { value: f64, bound: f64 },
    #[error("parameter {name} = {value} is outside its admissible range {range}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("excluded level set has measure {measure} > 1/2")]
    ExcludedSetTooLarge { measure: f64 },
    #[error("level set at h = {h} leaves the sampling grid")]
    ContourLeavesDomain { h: f64 },
    #[error("curl {magnitude} exceeds {tol} at ({x}, {y}) where the foliation varies")]
    CurlOnSupport {
        x: f64,
        y: f64,
        magnitude: f64,
        tol: f64,
    },
    #[error("energy grid {n} is below the minimum {min}")]
    GridTooCoarse { n: usize, min: usize },
    #[error(transparent)]
    Covering(#[from] crate::coverings::CoveringError),
    #[error(transparent)]
    Field(#[from] crate::field_core::FieldError),
}
