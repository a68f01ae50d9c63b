//! Classification, Monte Carlo estimation, closed forms and the phase sweep.

pub mod classify;
pub mod closed_form;
pub mod dominance;
pub mod montecarlo;
pub mod phase;
pub mod stats;

pub use classify::{classify, classify_discrete, ClassifierConfig, OnlineClassifier, Outcome};
pub use closed_form::{never_return_alpha, remaining_variance};
pub use dominance::{verify_dominance, DominanceReport};
pub use montecarlo::{estimate_probability, ContinuousTrial, DiscreteTrial, MCResult, OutcomeCounts, TrialSource};
pub use phase::{build_trial, phase_sweep, run_cell, CellTrial, PhaseCell, Prediction, SweepModel};
pub use stats::{moment_compare, wilson_interval, Interval, MomentReport};
