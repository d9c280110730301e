//! QAOA for the traveling salesperson problem.
//!
//! This crate implements two qubit encodings of fixed-start TSP tours (the
//! conventional 1-hot sequence encoding, and an edge-selection encoding whose
//! phase separator is a tensor product of single-qubit phase gates) together
//! with an exact statevector simulator, Grover mixers applied as projector
//! exponentials, a derivative-free optimization loop, exact solvers for
//! ground truth, and a benchmark harness that emits plot-ready CSV records.
//!
//! The crate is organized as:
//!
//! - [`instance`]: weight-matrix instances, random generation, normalization,
//!   tour costs, and file I/O.
//! - [`exact`]: Held-Karp and brute-force solvers used as oracles.
//! - [`encoding`]: tour ↔ basis-state maps, feasibility predicates, per-qubit
//!   phase tables, and analytic gate/qubit counts.
//! - [`simulator`]: dense statevector, diagonal phase separators, and the
//!   Grover mixer.
//! - [`qaoa`]: the hybrid loop (expectation evaluation, COBYLA/Nelder-Mead
//!   optimization, solution extraction).
//! - [`bench`]: experiment batches, CSV records, histograms, and a
//!   per-instance diagnostic suite.

pub mod bench;
pub mod encoding;
mod error;
pub mod exact;
pub mod instance;
pub mod qaoa;
pub mod simulator;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
