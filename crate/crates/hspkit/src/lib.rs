//! Deterministic hidden subgroup solvers over finite Abelian groups.
//!
//! The crate provides:
//!
//! - [`group`]: signatures `Z_{p1^k1} x ... x Z_{pl^kl}`, elements, subgroup
//!   closure, and representative sets;
//! - [`oracle`]: synthetic hiding functions with a query-counting wrapper
//!   that deduplicates repeated queries;
//! - [`solvers`]: the cyclic and general decision/identification procedures
//!   together with the generating-pair subroutine they share;
//! - [`verify`]: brute-force reference solvers, subgroup enumeration and
//!   counting, and query-bound auditing;
//! - [`bench`]: benchmark suites and the CSV/JSON records they emit.

pub mod bench;
pub mod error;
pub mod group;
pub mod oracle;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
