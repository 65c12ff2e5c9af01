//! Exact counting for lattice points on spheres and paraboloids in three and
//! four dimensions: enumeration, representation functions and additive
//! energies, incidence geometry, and the greedy slice decomposition.

pub mod arith;
pub mod decompose;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod lattice;

pub use error::{Error, Result};
pub use lattice::{Family, LatticePoint, OrthantPattern, PointSet, Sign};
