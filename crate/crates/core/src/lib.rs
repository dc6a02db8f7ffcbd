//! Numerical deformation theory for polynomials: root continuity under
//! coefficient perturbation, truncated ε-jets as finite nonstandard numbers,
//! and bounded-window containment of perturbed zero sets.

pub mod alignment;
pub mod error;
pub mod jets;
pub mod metrics;
pub mod polycore;
pub mod uniroots;
pub mod varieties;

pub use error::{Error, Result};
pub use polycore::{Complex, MultiIndex, Point, PolySystem, SparsePoly};

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
