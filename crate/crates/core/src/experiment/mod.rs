//! Operator-facing experiment harness: run configuration, sweep commands
//! producing CSV/SVG artifacts, and the verification entry point.

pub mod commands;
pub mod config;
pub mod svg;

pub use commands::{cmd_gain, cmd_keyrate_sweep, cmd_noise_profile, cmd_verify, Artifact};
pub use config::{ExperimentConfig, Grid, PlanSelection, SweepAxis};
