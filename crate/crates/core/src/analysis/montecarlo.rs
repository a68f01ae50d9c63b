//! Seeded Monte Carlo estimation of outcome probabilities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::classify::{ClassifierConfig, OnlineClassifier, Outcome};
use super::stats::{wilson_interval, Interval, Z95};
use crate::continuous::{run_em, TimeGrid};
use crate::discrete::{run_sgd, SgdSpec};
use crate::error::{Error, Result};
use crate::model::ProcessSpec;
use crate::rng::derive_seed;

/// One kind of randomized trial. Implementors must be deterministic in `seed`.
pub trait TrialSource: Sync {
    fn run_trial(&self, seed: u64) -> Result<Outcome>;

    /// Stable description of everything that determines the trial, hashed
    /// into the experiment fingerprint.
    fn describe(&self) -> serde_json::Value;
}

/// Euler–Maruyama trial classified on the fly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousTrial {
    pub spec: ProcessSpec,
    pub grid: TimeGrid,
    pub classifier: ClassifierConfig,
}

impl TrialSource for ContinuousTrial {
    fn run_trial(&self, seed: u64) -> Result<Outcome> {
        let mut c = OnlineClassifier::new(self.classifier, self.grid.t0, self.grid.t_end);
        run_em(&self.spec, &self.grid, seed, |_, t, x| c.observe(t, x))?;
        Ok(c.outcome())
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("trial serializes")
    }
}

/// Discrete-recursion trial classified on the fly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteTrial {
    pub spec: SgdSpec,
    pub classifier: ClassifierConfig,
}

impl TrialSource for DiscreteTrial {
    fn run_trial(&self, seed: u64) -> Result<Outcome> {
        let mut c = OnlineClassifier::new(self.classifier, self.spec.n0 as f64, self.spec.n_end as f64);
        run_sgd(&self.spec, seed, |n, x| c.observe(n as f64, x))?;
        Ok(c.outcome())
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("trial serializes")
    }
}

/// Adapts a closure; handy for synthetic sources in tests.
pub struct FnTrial<F> {
    pub name: String,
    pub f: F,
}

impl<F> TrialSource for FnTrial<F>
where
    F: Fn(u64) -> Outcome + Sync,
{
    fn run_trial(&self, seed: u64) -> Result<Outcome> {
        Ok((self.f)(seed))
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "fn": self.name })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub converged: u64,
    pub escaped: u64,
    pub undecided: u64,
}

impl OutcomeCounts {
    pub fn add(&mut self, o: Outcome) {
        match o {
            Outcome::ConvergedToZero => self.converged += 1,
            Outcome::Escaped => self.escaped += 1,
            Outcome::Undecided => self.undecided += 1,
        }
    }

    pub fn merge(mut self, other: OutcomeCounts) -> Self {
        self.converged += other.converged;
        self.escaped += other.escaped;
        self.undecided += other.undecided;
        self
    }

    pub fn total(&self) -> u64 {
        self.converged + self.escaped + self.undecided
    }

    pub fn get(&self, o: Outcome) -> u64 {
        match o {
            Outcome::ConvergedToZero => self.converged,
            Outcome::Escaped => self.escaped,
            Outcome::Undecided => self.undecided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub p: f64,
    pub ci: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCResult {
    pub n: u64,
    pub base_seed: u64,
    pub counts: OutcomeCounts,
    pub converged: Estimate,
    pub escaped: Estimate,
    pub undecided: Estimate,
    /// SHA-256 of the trial description, trial count and base seed.
    pub fingerprint: String,
}

impl MCResult {
    pub fn from_counts(counts: OutcomeCounts, base_seed: u64, fingerprint: String) -> Self {
        let n = counts.total();
        let est = |k: u64| Estimate {
            p: if n == 0 { 0.0 } else { k as f64 / n as f64 },
            ci: wilson_interval(k, n, Z95),
        };
        MCResult {
            n,
            base_seed,
            converged: est(counts.converged),
            escaped: est(counts.escaped),
            undecided: est(counts.undecided),
            counts,
            fingerprint,
        }
    }

    pub fn estimate(&self, o: Outcome) -> Estimate {
        match o {
            Outcome::ConvergedToZero => self.converged,
            Outcome::Escaped => self.escaped,
            Outcome::Undecided => self.undecided,
        }
    }
}

pub fn fingerprint(description: &serde_json::Value, n: u64, base_seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(description.to_string().as_bytes());
    h.update(n.to_le_bytes());
    h.update(base_seed.to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs `n` trials with seeds `derive_seed(base_seed, i)` on the current rayon
/// pool. Counts do not depend on scheduling.
pub fn estimate_probability<S: TrialSource + ?Sized>(source: &S, n: u64, base_seed: u64) -> Result<MCResult> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let counts = (0..n)
        .into_par_iter()
        .map(|i| source.run_trial(derive_seed(base_seed, i)))
        .try_fold(OutcomeCounts::default, |mut acc, o| {
            acc.add(o?);
            Ok::<_, Error>(acc)
        })
        .try_reduce(OutcomeCounts::default, |a, b| Ok(a.merge(b)))?;
    Ok(MCResult::from_counts(
        counts,
        base_seed,
        fingerprint(&source.describe(), n, base_seed),
    ))
}
