//! Solvers for latency-resilient dual vertex-disjoint routing.
//!
//! Each secondary site of a network needs two paths, one to each terminal,
//! that share no vertex but the source. The objective trades the total
//! latency of both paths against the demand-weighted joint failure
//! probability of link pairs split across them.
//!
//! * [`topology`] holds the graph, failure model and built-in instances.
//! * [`oracle`] solves exactly by enumerating path pairs, plus a min-cost-flow
//!   baseline for the latency-only case.
//! * [`encoding`] maps paths to binary variables, checks validity and exports
//!   the linearized integer program.
//! * [`qubo`] builds the penalized quadratic model and minimizes it
//!   exhaustively or by annealing.
//! * [`qaoa`] simulates the variational circuit on a statevector.
//! * [`minprod`] implements the product-of-lengths disjoint path objective and
//!   its reduction onto the routing problem.

pub mod cli;
pub mod encoding;
pub mod error;
pub mod minprod;
pub mod oracle;
pub mod qaoa;
pub mod qubo;
pub mod topology;

pub use error::{Error, Result};
