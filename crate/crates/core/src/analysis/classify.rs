//! Finite-horizon outcome classification.

use serde::{Deserialize, Serialize};

use crate::continuous::Trajectory;
use crate::discrete::DiscreteTrajectory;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierConfig {
    /// Half-width of the band around zero that counts as converged.
    pub eps_conv: f64,
    /// Escape barrier `B`.
    pub barrier: f64,
    /// Fraction of the horizon, at its end, over which the band must hold.
    pub tail_fraction: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            eps_conv: 0.02,
            barrier: 3.0,
            tail_fraction: 0.2,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_conv > 0.0 && self.eps_conv < self.barrier && self.barrier.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < eps_conv < barrier, got eps_conv={}, barrier={}",
                self.eps_conv, self.barrier
            )));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tail_fraction must lie in (0, 1), got {}",
                self.tail_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    ConvergedToZero,
    Escaped,
    Undecided,
}

/// Classifies a path one point at a time, so simulations can stop as soon as
/// the barrier is crossed.
#[derive(Debug, Clone)]
pub struct OnlineClassifier {
    cfg: ClassifierConfig,
    tail_start: f64,
    escaped: bool,
    in_band: bool,
    seen_tail: bool,
}

impl OnlineClassifier {
    /// Classifier for a path observed on `[start, end]` (time or index).
    pub fn new(cfg: ClassifierConfig, start: f64, end: f64) -> Self {
        OnlineClassifier {
            cfg,
            tail_start: end - cfg.tail_fraction * (end - start),
            escaped: false,
            in_band: true,
            seen_tail: false,
        }
    }

    /// Feeds one point; returns `false` once the outcome is settled.
    #[inline]
    pub fn observe(&mut self, t: f64, x: f64) -> bool {
        if x > self.cfg.barrier {
            self.escaped = true;
            return false;
        }
        if t >= self.tail_start {
            self.seen_tail = true;
            if !(x.abs() < self.cfg.eps_conv) {
                self.in_band = false;
            }
        }
        true
    }

    pub fn outcome(&self) -> Outcome {
        if self.escaped {
            Outcome::Escaped
        } else if self.in_band && self.seen_tail {
            Outcome::ConvergedToZero
        } else {
            Outcome::Undecided
        }
    }
}

/// Barrier first, then the tail band, otherwise undecided.
pub fn classify_points<I>(points: I, start: f64, end: f64, cfg: &ClassifierConfig) -> Outcome
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mut c = OnlineClassifier::new(*cfg, start, end);
    for (t, x) in points {
        if !c.observe(t, x) {
            break;
        }
    }
    c.outcome()
}

pub fn classify(traj: &Trajectory, cfg: &ClassifierConfig) -> Outcome {
    let (Some(&start), Some(&end)) = (traj.times.first(), traj.times.last()) else {
        return Outcome::Undecided;
    };
    classify_points(traj.times.iter().copied().zip(traj.values.iter().copied()), start, end, cfg)
}

pub fn classify_discrete(traj: &DiscreteTrajectory, cfg: &ClassifierConfig) -> Outcome {
    if traj.values.is_empty() {
        return Outcome::Undecided;
    }
    let points = traj.indices().map(|n| n as f64).zip(traj.values.iter().copied());
    classify_points(points, traj.n0 as f64, traj.n_end() as f64, cfg)
}
