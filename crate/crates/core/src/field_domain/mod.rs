//! Scalar fields, bounded domains and their grid-backed carriers.
//!
//! Suprema are always taken over deterministic dyadic sample lattices, so a
//! reported norm is a lower bound of the true supremum that increases
//! monotonically as the sampling density is refined.

mod domain;
mod field;
mod grid;

pub use domain::{
    bounding_radius, pullback_field, pushforward_field, rescale_to_half_ball, sup_norm, Domain,
    DomainKind, Similarity, HALF_BALL_SAFETY,
};
pub(crate) use domain::check_same_dim;
pub use domain::advance;
pub use field::{dist, norm, ScalarField, Smoothness, MAX_DIM};
pub use grid::{GridField, Interp};
