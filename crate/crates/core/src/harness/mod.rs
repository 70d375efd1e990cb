//! Configuration, verification scenarios, reports and the command line.

pub mod cli;
pub mod config;
pub mod report;
pub mod suite;

pub use config::{parse_config, ExperimentConfig, DEFAULT_RNG_SEED};
pub use report::{Check, Comparison, Provenance, VerificationReport};
pub use suite::{preset, run_suite, SCENARIOS};
