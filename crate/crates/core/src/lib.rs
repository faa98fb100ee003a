//! Finite-dimensional models of partial *-algebras, unbounded C*-seminorms
//! on them, and the representations these seminorms induce.
//!
//! The pipeline runs algebra → seminorm → quotient C*-algebra → induced
//! quasi *-representation, with an audit at every stage. The `reverse`
//! module goes the other way: starting from a truncated unbounded
//! representation it extracts a seminorm and rebuilds a representation.

pub mod algebra;
pub mod completion;
pub mod error;
pub mod format;
pub mod instances;
pub mod linalg;
pub mod report;
pub mod representation;
pub mod reverse;
pub mod seminorm;

pub use algebra::{AlgebraBuilder, Element, PartialStarAlgebra, ProductTensor, SectorId};
pub use completion::QuotientCStarAlgebra;
pub use error::{Error, Result};
pub use report::Check;
pub use representation::{ConcreteRep, QuasiRep};
pub use reverse::TruncationTower;
pub use seminorm::WitnessedSeminorm;
