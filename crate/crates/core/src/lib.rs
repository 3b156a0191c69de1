//! Simulation of open quantum system dynamics and quantification of memory
//! effects: trace-distance backflow, Helstrom-matrix generalisation,
//! CP-divisibility violation, divisibility classification, Bloch volume,
//! classical Markov reduction and correlation witnesses.

pub mod channel;
pub mod classical;
pub mod cli;
pub mod config;
pub mod correlations;
pub mod error;
pub mod generator;
pub mod linalg;
pub mod measures;
pub mod models;
pub mod numerics;
pub mod state;

pub use channel::{apply_map, compose, intermediate_map, is_completely_positive, is_positive_map, BlochAffine, QuantumMap};
pub use config::Tolerances;
pub use error::{Error, Result};
pub use generator::{DecayChannel, TimeLocalGenerator};
pub use state::{helstrom_norm, trace_distance, DensityMatrix, HelstromMatrix};
