//! Permutation problems (TSP, QAP) as penalized QUBOs: instance parsing,
//! two-way one-hot formulation, penalty weights, a first-generation Digital
//! Annealer, brute-force oracles and a benchmark harness.

pub mod annealer;
pub mod bench;
pub mod error;
pub mod instances;
pub mod oracle;
pub mod penalty;
pub mod qubo;

pub use error::{Error, Result};
