//! Multi-channel subcarrier-multiplexed CV-QKD simulator.
//!
//! Models an `N`-channel continuous-variable QKD system in which every
//! channel rides a radio-frequency subcarrier of one optical carrier.
//! Second-order mixing between subcarriers injects a non-Gaussian extra
//! source noise into each channel; the crate computes that noise in closed
//! form, validates it by seeded Monte Carlo, and evaluates asymptotic secret
//! key rates against collective attacks, per channel and in aggregate.
//!
//! Module map:
//! - [`spectrum`] — channel plans and the pair-count combinatorics `M₂(N,k)`.
//! - [`intermod`] — source-noise closed form, product-Gaussian density, and
//!   the Monte Carlo sampler.
//! - [`security`] — channel/detector models, symplectic spectra, Holevo
//!   bound, per-channel and total key rates, multi-channel gain.
//! - [`verify`] — independent oracles (enumeration, quadrature, a
//!   constructive covariance-matrix reference) bundled as a runnable
//!   verification suite.
//! - [`experiment`] — sweep configuration, CSV/SVG artifact generation, and
//!   the command layer behind the `subcarrier-cvqkd` binary.

pub mod error;
pub mod experiment;
pub mod intermod;
pub mod security;
pub mod special;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
