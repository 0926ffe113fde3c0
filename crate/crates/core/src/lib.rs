//! Exact solvers for transportation norms on free vector spaces over valued
//! fields.
//!
//! The non-archimedean side ([`na`]) computes max-cost Kantorovich norms over
//! ultrametric spaces with checkable certificates. The archimedean side
//! ([`classical`]) handles sum-cost norms over the reals (exact) and the
//! complex numbers (floating point). [`graev`] covers integer vectors.

pub mod classical;
pub mod gen;
pub mod graev;
pub mod instance;
pub mod levi_civita;
pub mod magnitude;
pub mod na;
pub mod rational;
pub mod scalar;
pub mod ultrametric;
pub mod vector;

pub use levi_civita::Series;
pub use magnitude::{Cost, CostError, CostJson, Magnitude};
pub use scalar::{FieldKind, FieldSpec, Scalar, ScalarError};
