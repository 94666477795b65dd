//! Numerical laboratory for a two-dimensional dislocation energy: an explicit
//! grain-boundary competitor with logarithmic energy scaling, Burgers-vector
//! quantization, covering and ball-construction algorithms, Lipschitz
//! foliations of annuli, and harmonic and mollified competitor fields.

pub mod competitors;
pub mod coverings;
pub mod energies;
pub mod experiments;
pub mod field_core;
pub mod foliation;
pub mod geometry;
pub mod grain_boundary;
pub mod numeric;

pub use field_core::{Mat2, Params, Vec2};
