//! Constructive approximation by polyharmonic functions.
//!
//! The crate provides the harmonicity modulus and K-functional of a
//! continuous function, the Pizzetti integral operator and the associated
//! smoothing family, polyharmonic Jackson kernels, a finite-difference solver
//! for iterated Dirichlet problems and the recursive convolution scheme that
//! builds polyharmonic approximants.

pub mod approximant;
pub mod dirichlet;
pub mod error;
pub mod field_domain;
pub mod jackson_kernels;
pub mod modulus;
pub mod pizzetti;
pub mod quadrature;
pub mod sphere_mean;

pub use error::{Error, Result};
pub use field_domain::{Domain, DomainKind, GridField, Interp, ScalarField, Smoothness};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
