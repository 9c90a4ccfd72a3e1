//! Random subgraphs of Kneser graphs and the stability of the Erdős–Ko–Rado
//! theorem under edge percolation.
//!
//! `K_p(n, r)` keeps each edge of the Kneser graph `K(n, r)` independently
//! with probability `p`. The crate samples it reproducibly, computes exact
//! independence numbers, counts the near-extremal families that decide
//! whether stars stay the unique maximum intersecting families, and
//! evaluates the matching closed-form moments.

pub mod bitset;
pub mod combinatorics;
pub mod error;
pub mod harness;
pub mod kneser;
pub mod sampler;
pub mod solver;
pub mod theory;

pub use error::{Error, Result};

/// Version string echoed in experiment metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
