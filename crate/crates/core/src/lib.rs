//! Recursive linear-optical multiport circuits for the quantum Fourier
//! transform and Grover inversion on path-encoded qudits, with a
//! fabrication-noise Monte Carlo harness.

pub mod circuit;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod netlist;
pub mod noise;
pub mod oracles;
pub mod results;
pub mod verify;

pub use circuit::{apply, circuit_matrix, inverse, AmplitudeVector, Circuit, Element, Layer, TransferMatrix};
pub use error::{Error, Result};
