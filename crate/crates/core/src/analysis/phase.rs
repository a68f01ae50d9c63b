//! The `(k, gamma)` phase diagram.

use serde::{Deserialize, Serialize};

use super::classify::{ClassifierConfig, Outcome};
use super::montecarlo::{estimate_probability, ContinuousTrial, DiscreteTrial, MCResult, TrialSource};
use crate::continuous::TimeGrid;
use crate::discrete::{DriftMode, NoiseSpec, SgdSpec};
use crate::error::{Error, Result};
use crate::model::{check_gamma, gamma_threshold, DriftSpec, NoiseSchedule, ProcessSpec};
use crate::rng::derive_seed;

/// Half-width of the band around the critical exponent that never gates acceptance.
pub const BOUNDARY_BAND: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    NonConvergence,
    Convergence,
}

impl Prediction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Prediction::NonConvergence => "non_convergence",
            Prediction::Convergence => "convergence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SweepModel {
    /// `dX = k|X| dt + e^(-t/2) dB`, the `gamma = 1` model in the exponential frame.
    Linear { x0: f64, horizon: f64, dt: f64 },
    /// Untransformed SDE `dX = c min(|X|, cap)^k t^-gamma dt + t^-gamma dB`.
    Raw {
        c: f64,
        cap: f64,
        x0: f64,
        t0: f64,
        horizon: f64,
        dt: f64,
    },
    /// Power-frame SDE `dX = c min(|X|, cap)^k dt + t^(-gamma/(2(1-gamma))) dB`.
    Continuous {
        c: f64,
        cap: f64,
        x0: f64,
        t0: f64,
        horizon: f64,
        dt: f64,
    },
    /// The recursion with step `n^-gamma`.
    Discrete {
        c: f64,
        cap: f64,
        x0: f64,
        n0: u64,
        n_end: u64,
        noise: NoiseSpec,
        #[serde(default)]
        mode: DriftMode,
    },
}

impl SweepModel {
    pub fn is_discrete(&self) -> bool {
        matches!(self, SweepModel::Discrete { .. })
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, SweepModel::Linear { .. })
    }

    /// Regime predicted for `(k, gamma)` under this model.
    pub fn predict(&self, k: f64, gamma: f64) -> Result<Prediction> {
        if self.is_linear() {
            return Ok(predict_linear(k));
        }
        predict(k, gamma, self.is_discrete())
    }

    /// Whether the cell sits within [`BOUNDARY_BAND`] of the critical value.
    pub fn boundary(&self, k: f64, gamma: f64) -> Result<bool> {
        if self.is_linear() {
            return Ok((k - 0.5).abs() <= BOUNDARY_BAND + 1e-12);
        }
        in_boundary_band(k, gamma)
    }
}

/// Continuous results use `gamma <= threshold` for non-convergence, the
/// discrete ones `gamma < threshold`.
pub fn predict(k: f64, gamma: f64, discrete: bool) -> Result<Prediction> {
    let thr = gamma_threshold(k)?;
    let non = if discrete { gamma < thr } else { gamma <= thr };
    Ok(if non { Prediction::NonConvergence } else { Prediction::Convergence })
}

/// Linear drift `k|x|` with `gamma = 1`: zero is reached almost surely and
/// left for good when `k >= 1/2`; for `k < 1/2` both outcomes have positive
/// probability.
pub fn predict_linear(k: f64) -> Prediction {
    if k >= 0.5 {
        Prediction::NonConvergence
    } else {
        Prediction::Convergence
    }
}

pub fn in_boundary_band(k: f64, gamma: f64) -> Result<bool> {
    Ok((gamma - gamma_threshold(k)?).abs() <= BOUNDARY_BAND + 1e-12)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub k: f64,
    pub gamma: f64,
    pub prediction: Prediction,
    /// Within the boundary band; reported but excluded from acceptance.
    pub boundary: bool,
    pub seed: u64,
    pub result: MCResult,
}

/// The trial behind one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellTrial {
    Continuous(ContinuousTrial),
    Discrete(DiscreteTrial),
}

impl TrialSource for CellTrial {
    fn run_trial(&self, seed: u64) -> Result<Outcome> {
        match self {
            CellTrial::Continuous(t) => t.run_trial(seed),
            CellTrial::Discrete(t) => t.run_trial(seed),
        }
    }

    fn describe(&self) -> serde_json::Value {
        match self {
            CellTrial::Continuous(t) => t.describe(),
            CellTrial::Discrete(t) => t.describe(),
        }
    }
}

fn continuous(spec: ProcessSpec, t0: f64, horizon: f64, dt: f64, cfg: &ClassifierConfig) -> Result<CellTrial> {
    Ok(CellTrial::Continuous(ContinuousTrial {
        spec,
        grid: TimeGrid::new(t0, horizon, dt)?,
        classifier: *cfg,
    }))
}

/// Builds and validates the trial for `(k, gamma)` without running it.
pub fn build_trial(k: f64, gamma: f64, model: &SweepModel, cfg: &ClassifierConfig) -> Result<CellTrial> {
    cfg.validate()?;
    match *model {
        SweepModel::Linear { x0, horizon, dt } => {
            if gamma != 1.0 {
                return Err(Error::Hypothesis {
                    param: "gamma",
                    value: gamma,
                    hypothesis: "gamma = 1 for the exponential-frame linear model",
                });
            }
            let spec = ProcessSpec::new(DriftSpec::linear(k)?, NoiseSchedule::ExpHalf, 0.0, x0)?;
            continuous(spec, 0.0, horizon, dt, cfg)
        }
        SweepModel::Raw { c, cap, x0, t0, horizon, dt } => {
            let spec = ProcessSpec::new(DriftSpec::monomial(k, c, cap)?, NoiseSchedule::PowerGamma { gamma }, t0, x0)?;
            continuous(spec, t0, horizon, dt, cfg)
        }
        SweepModel::Continuous { c, cap, x0, t0, horizon, dt } => {
            check_gamma(gamma, false)?;
            let spec = ProcessSpec::new(
                DriftSpec::monomial(k, c, cap)?,
                NoiseSchedule::PowerTransformed { gamma },
                t0,
                x0,
            )?;
            continuous(spec, t0, horizon, dt, cfg)
        }
        SweepModel::Discrete { c, cap, x0, n0, n_end, noise, mode } => {
            let spec = SgdSpec {
                drift: DriftSpec::monomial(k, c, cap)?,
                gamma,
                noise,
                x0,
                n0,
                n_end,
                mode,
            };
            spec.validate()?;
            Ok(CellTrial::Discrete(DiscreteTrial { spec, classifier: *cfg }))
        }
    }
}

/// Runs one cell; `seed` is the cell's own base seed.
pub fn run_cell(k: f64, gamma: f64, model: &SweepModel, cfg: &ClassifierConfig, n: u64, seed: u64) -> Result<PhaseCell> {
    let trial = build_trial(k, gamma, model, cfg)?;
    Ok(PhaseCell {
        k,
        gamma,
        prediction: model.predict(k, gamma)?,
        boundary: model.boundary(k, gamma)?,
        seed,
        result: estimate_probability(&trial, n, seed)?,
    })
}

/// One cell per `(k, gamma)` pair, row-major in `k`. Cell `i` uses base seed
/// `derive_seed(base_seed, i)`.
pub fn phase_sweep(
    ks: &[f64],
    gammas: &[f64],
    model: &SweepModel,
    cfg: &ClassifierConfig,
    n: u64,
    base_seed: u64,
) -> Result<Vec<PhaseCell>> {
    let mut cells = Vec::with_capacity(ks.len() * gammas.len());
    for &k in ks {
        for &gamma in gammas {
            let seed = derive_seed(base_seed, cells.len() as u64);
            cells.push(run_cell(k, gamma, model, cfg, n, seed)?);
        }
    }
    Ok(cells)
}
