//! Simulation laboratory for stochastic-approximation dynamics near degenerate
//! saddle points.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: drift families, noise schedules, time changes, the mean flow and
//!   the critical step-size exponent.
//! - [`continuous`]: Brownian paths, Euler–Maruyama integration, the exact
//!   Gaussian sampler for the linear drift, coupled pairs and closed-form
//!   quadratic variations.
//! - [`discrete`]: the step-size recursion driven by bounded martingale
//!   differences, its normalized diagnostics, and the urn process.
//! - [`analysis`]: finite-horizon classification, seeded Monte Carlo with
//!   Wilson intervals, closed-form probabilities and the phase sweep.
//! - [`experiment`], [`emit`] and [`validate`]: declarative experiment configs,
//!   machine-readable outputs and the acceptance checks behind the CLI.

pub mod analysis;
pub mod continuous;
pub mod discrete;
pub mod emit;
pub mod error;
pub mod experiment;
pub mod model;
pub mod rng;
pub mod validate;

pub use error::{Error, Result};

/// Version string recorded in run manifests.
pub const ARTIFACT_VERSION: &str = concat!("saddlelab ", env!("CARGO_PKG_VERSION"));
