//! Expander graphs from number theory, at desk scale.
//!
//! This crate builds three families of graphs and verifies their expansion
//! and mixing behaviour exactly:
//!
//! - Cayley graphs of unit groups `(Z/qZ)*` with small-prime generators
//!   ([`residue_graphs`]), whose spectra are computed in closed form as
//!   character sums ([`abelian`]);
//! - Cayley graphs of imaginary-quadratic class groups represented by
//!   reduced binary quadratic forms ([`classgroup`]);
//! - prime-degree isogeny graphs of ordinary elliptic curves over prime
//!   fields ([`curves`]), partitioned into levels by endomorphism-ring
//!   conductor and matched against the class-group Cayley graphs.
//!
//! The [`walks`] module drives random walks over these graphs (exact
//! distribution evolution and seeded simulation) and [`dlog`] implements the
//! discrete-logarithm reduction across a level: walk to a curve the oracle
//! covers, push the points through the composed isogeny, query, and verify.

pub mod abelian;
pub mod arith;
pub mod classgroup;
pub mod curves;
pub mod dlog;
pub mod error;
pub mod residue_graphs;
pub mod walks;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
