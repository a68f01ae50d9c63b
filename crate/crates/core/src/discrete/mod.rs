//! The step-size recursion `X_{n+1} = X_n + (f(X_n) + Y_{n+1}) / n^gamma`
//! with bounded martingale-difference noise, and its normalized diagnostics.

pub mod urn;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_gamma, DriftSpec, MeanFlowFrame};
use crate::rng::{path_rng, PathRng};

pub use urn::{simulate_urn, urn_as_sgd_check, UrnFeedback, UrnPath, UrnSpec, UrnSgdReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    /// `+-M` with probability 1/2 each.
    Rademacher,
    /// Uniform on `[-M, M]`.
    UniformCentered,
    /// No noise at all; for deterministic reference runs.
    Off,
}

/// Bounded, centred noise `Y` with `|Y| <= bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    pub bound: f64,
}

impl NoiseSpec {
    pub fn rademacher(bound: f64) -> Result<Self> {
        Self::new(NoiseFamily::Rademacher, bound)
    }

    pub fn uniform(bound: f64) -> Result<Self> {
        Self::new(NoiseFamily::UniformCentered, bound)
    }

    pub fn off() -> Self {
        NoiseSpec {
            family: NoiseFamily::Off,
            bound: 0.0,
        }
    }

    pub fn new(family: NoiseFamily, bound: f64) -> Result<Self> {
        let spec = NoiseSpec { family, bound };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.family != NoiseFamily::Off && !(self.bound > 0.0 && self.bound.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise bound M must be positive, got {}",
                self.bound
            )));
        }
        Ok(())
    }

    /// Lower bound `l` on the conditional second moment.
    pub fn variance_floor(&self) -> f64 {
        match self.family {
            NoiseFamily::Rademacher => self.bound * self.bound,
            NoiseFamily::UniformCentered => self.bound * self.bound / 3.0,
            NoiseFamily::Off => 0.0,
        }
    }

    #[inline]
    pub fn draw(&self, rng: &mut PathRng) -> f64 {
        match self.family {
            NoiseFamily::Rademacher => {
                if rng.random::<bool>() {
                    self.bound
                } else {
                    -self.bound
                }
            }
            NoiseFamily::UniformCentered => self.bound * (2.0 * rng.random::<f64>() - 1.0),
            NoiseFamily::Off => 0.0,
        }
    }
}

/// Whether the recursion uses `f` itself or `min(f(x), |x|^k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftMode {
    #[default]
    Equal,
    Shrunk,
}

/// Everything needed to run the recursion from index `n0` to `n_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdSpec {
    pub drift: DriftSpec,
    pub gamma: f64,
    pub noise: NoiseSpec,
    pub x0: f64,
    pub n0: u64,
    pub n_end: u64,
    #[serde(default)]
    pub mode: DriftMode,
}

impl SgdSpec {
    pub fn validate(&self) -> Result<()> {
        self.drift.validate()?;
        check_gamma(self.gamma, false)?;
        self.noise.validate()?;
        if self.n0 < 1 || self.n_end <= self.n0 {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= n0 < N, got n0={}, N={}",
                self.n0, self.n_end
            )));
        }
        if !self.x0.is_finite() {
            return Err(Error::InvalidParameter(format!("x0 must be finite, got {}", self.x0)));
        }
        Ok(())
    }

    #[inline]
    fn drift_at(&self, x: f64) -> f64 {
        match self.mode {
            DriftMode::Equal => self.drift.eval(x),
            DriftMode::Shrunk => self.drift.eval_shrunk(x),
        }
    }
}

/// `X_{n0}, ..., X_N` for one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteTrajectory {
    pub n0: u64,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl DiscreteTrajectory {
    pub fn n_end(&self) -> u64 {
        self.n0 + self.values.len() as u64 - 1
    }

    pub fn indices(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.values.len() as u64).map(move |i| self.n0 + i)
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

/// Streams the recursion, handing `(n, X_n)` to `visit` for every index
/// from `n0` on. Stops early when `visit` returns `false`.
pub fn run_sgd<V>(spec: &SgdSpec, seed: u64, mut visit: V) -> Result<()>
where
    V: FnMut(u64, f64) -> bool,
{
    spec.validate()?;
    let mut rng = path_rng(seed);
    let mut x = spec.x0;
    if !visit(spec.n0, x) {
        return Ok(());
    }
    for n in spec.n0..spec.n_end {
        let a = (n as f64).powf(-spec.gamma);
        let y = spec.noise.draw(&mut rng);
        x = x + spec.drift_at(x) * a + y * a;
        if !x.is_finite() {
            return Err(Error::NonFinite {
                step: (n + 1 - spec.n0) as usize,
                value: x,
            });
        }
        if !visit(n + 1, x) {
            break;
        }
    }
    Ok(())
}

pub fn simulate_sgd(spec: &SgdSpec, seed: u64) -> Result<DiscreteTrajectory> {
    let mut values = Vec::with_capacity((spec.n_end.saturating_sub(spec.n0) + 1) as usize);
    run_sgd(spec, seed, |_, x| {
        values.push(x);
        true
    })?;
    Ok(DiscreteTrajectory {
        n0: spec.n0,
        values,
        seed,
    })
}

/// Normalized coordinate `Z_n = -X_n / h(n)` and the step correction `a_n`
/// (which tends to 1) along a discrete trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZDiagnostics {
    pub z: Vec<f64>,
    /// `a_n` for every index except the last.
    pub a: Vec<f64>,
}

/// `a_n = (1/h(n+1) - 1/h(n)) (k-1)/(1-gamma) h(n+1) n^gamma / |h(n)|^(k-1)`.
pub fn step_correction(frame: &MeanFlowFrame, n: u64) -> Result<f64> {
    let MeanFlowFrame::DiscreteH { k, gamma } = *frame else {
        return Err(Error::InvalidParameter("step correction needs the discrete mean flow".into()));
    };
    frame.validate()?;
    if n < 1 {
        return Err(Error::InvalidParameter("step correction is defined for n >= 1".into()));
    }
    let p = frame.exponent();
    let nf = n as f64;
    // 1/h(n) = -n^-p; the difference is computed without cancellation
    let inv_diff = -nf.powf(-p) * (-p * (1.0 / nf).ln_1p()).exp_m1();
    let h_next = frame.h(nf + 1.0);
    let h_n = frame.h(nf);
    Ok(inv_diff * (k - 1.0) / (1.0 - gamma) * h_next * nf.powf(gamma) / h_n.abs().powf(k - 1.0))
}

pub fn z_diagnostics(traj: &DiscreteTrajectory, frame: &MeanFlowFrame) -> Result<ZDiagnostics> {
    if !matches!(frame, MeanFlowFrame::DiscreteH { .. }) {
        return Err(Error::InvalidParameter("z diagnostics need the discrete mean flow".into()));
    }
    frame.validate()?;
    let z = traj.indices().zip(&traj.values).map(|(n, &x)| frame.z(x, n as f64)).collect();
    let a = traj
        .indices()
        .take(traj.values.len().saturating_sub(1))
        .map(|n| step_correction(frame, n))
        .collect::<Result<_>>()?;
    Ok(ZDiagnostics { z, a })
}
