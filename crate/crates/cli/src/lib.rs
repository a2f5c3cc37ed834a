//! Library surface of the experiment harness; the `convdiff` binary is a
//! thin argument parser over these pipelines.

pub mod config;
pub mod runner;

pub use config::ExperimentConfig;
