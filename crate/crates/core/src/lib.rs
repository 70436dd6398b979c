//! Quadratic twists of elliptic curves over Q and their 2-Selmer ranks.
//!
//! The crate computes local norm indices and Kramer's parity congruence for
//! twists, runs a complete 2-descent for curves with full rational
//! 2-torsion, sieves for twists with prescribed Selmer behaviour and
//! decomposes F_2[G]-modules for cyclic groups of odd prime order.

/// Version string recorded in batch output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod arith;
pub mod curve;
pub mod descent;
pub mod f2;
pub mod gmodule;
pub mod localdata;
pub mod parity;
pub mod twistsearch;
