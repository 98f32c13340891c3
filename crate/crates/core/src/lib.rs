//! Structured application-level benchmarks for gate-based quantum devices.
//!
//! The crate builds the benchmark circuits, runs them on a dense
//! statevector simulator (exact, sampled, or with trajectory noise),
//! compares the results with analytic oracles and turns the comparison into
//! scores with standard errors.

pub mod analysis;
pub mod backend;
pub mod bell;
pub mod circuit;
pub mod error;
pub mod harness;
pub mod gates;
pub mod linedraw;
pub mod matinv;
pub mod platonic;
pub mod qsp;
pub mod render;
pub mod riemann;
pub mod sim;
pub mod topology;

pub use circuit::{Circuit, Gate};
pub use error::{Error, Result};
pub use topology::Topology;
