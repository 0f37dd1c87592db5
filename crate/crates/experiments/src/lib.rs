//! Experiment harness for the lattice spin simulator: spin-wave propagation,
//! squeezing on full and partially filled lattices, and the all-to-all
//! scaling limit.

pub mod cli;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod output;
pub mod runners;

pub use config::{Coupling, Experiment, ExperimentConfig, OutputFormat};
pub use error::{ExperimentError, Result};
pub use output::{write_output, ExperimentOutput, Metadata, Record};
pub use runners::run;
