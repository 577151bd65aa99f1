//! Exact integer Caratheodory decompositions of polyhedra.
//!
//! Given a polyhedron `P` from a supported family, a positive integer `k`,
//! and an integer vector `w` in `kP`, the engine writes `w` as a nonnegative
//! integer combination of affinely independent integer points of `P` whose
//! multiplicities sum to `k`. All arithmetic is exact rational; every
//! decomposition is re-verified before it is reported.

pub mod caps;
pub mod certificate;
pub mod error;
pub mod gammoid;
pub mod icp;
pub mod instance;
pub mod linalg;
pub mod lp;
pub mod matroid;
pub mod ntu;
pub mod oracle;
pub mod polyhedron;
pub mod polymatroid;
pub mod tu;
pub mod rat;

mod par;

pub use error::{Error, Result};
pub use rat::Rat;
