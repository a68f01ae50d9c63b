//! Drift families, noise schedules, time changes and the mean flow.
//!
//! The one-dimensional dynamics studied here all have the shape
//!
//! ```text
//! dX_t = f(X_t) w(t) dt + g(t) dB_t
//! ```
//!
//! with `f >= 0`, `f(0) = 0`, a drift weight `w` and a noise amplitude `g`
//! fixed by the [`NoiseSchedule`]. The untransformed model uses
//! `w(t) = g(t) = t^-gamma`; the time-changed frames make the drift autonomous
//! (`w = 1`) and move all time dependence into the noise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Drift cap used for monomial drifts unless overridden.
pub const DEFAULT_CAP: f64 = 10.0;

/// The two drift families: `k|x|` and `c min(|x|, cap)^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DriftSpec {
    Linear { k: f64 },
    Monomial { k: f64, c: f64, cap: f64 },
}

impl DriftSpec {
    pub fn linear(k: f64) -> Result<Self> {
        let spec = DriftSpec::Linear { k };
        spec.validate()?;
        Ok(spec)
    }

    pub fn monomial(k: f64, c: f64, cap: f64) -> Result<Self> {
        let spec = DriftSpec::Monomial { k, c, cap };
        spec.validate()?;
        Ok(spec)
    }

    /// `|x|^k` with unit scale and the default cap.
    pub fn unit_monomial(k: f64) -> Result<Self> {
        Self::monomial(k, 1.0, DEFAULT_CAP)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DriftSpec::Linear { k } => {
                if !(k > 0.0 && k.is_finite()) {
                    return Err(Error::Hypothesis {
                        param: "k",
                        value: k,
                        hypothesis: "k > 0 for the linear drift k|x|",
                    });
                }
            }
            DriftSpec::Monomial { k, c, cap } => {
                if !(k > 1.0 && k.is_finite()) {
                    return Err(Error::Hypothesis {
                        param: "k",
                        value: k,
                        hypothesis: "k > 1 for the degenerate monomial drift |x|^k",
                    });
                }
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "drift scale c must be positive, got {c}"
                    )));
                }
                if !(cap > 0.0 && cap.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "drift cap must be positive, got {cap}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Evaluates the drift. Even in `x`, zero at the origin, frozen beyond the cap.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            DriftSpec::Linear { k } => k * x.abs(),
            DriftSpec::Monomial { k, c, cap } => c * pow_abs(x.abs().min(cap), k),
        }
    }

    /// The drift replaced by `min(f(x), |x|^p)` where `p` is the family's
    /// exponent (1 for the linear family). Realizes the reversed inequality
    /// form of the recursion.
    #[inline]
    pub fn eval_shrunk(&self, x: f64) -> f64 {
        self.eval(x).min(pow_abs(x.abs(), self.exponent()))
    }

    /// Growth exponent of the family: 1 for linear, `k` for monomial.
    pub fn exponent(&self) -> f64 {
        match *self {
            DriftSpec::Linear { .. } => 1.0,
            DriftSpec::Monomial { k, .. } => k,
        }
    }

    /// Lipschitz constant of the drift on `[-max_abs, max_abs]`.
    pub fn lipschitz_on(&self, max_abs: f64) -> f64 {
        match *self {
            DriftSpec::Linear { k } => k,
            DriftSpec::Monomial { k, c, cap } => c * k * max_abs.min(cap).powf(k - 1.0),
        }
    }
}

/// `a^k` for `a >= 0`, using repeated multiplication for small integral exponents.
#[inline]
fn pow_abs(a: f64, k: f64) -> f64 {
    if k == 2.0 {
        a * a
    } else if k == 3.0 {
        a * a * a
    } else if k == 1.0 {
        a
    } else {
        a.powf(k)
    }
}

/// Which clock the simulated values live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// Original time of the untransformed model.
    Raw,
    /// `t -> e^t`, used for the critical exponent `gamma = 1`.
    Exponential,
    /// `t -> t^(1/(1-gamma))`.
    Power,
}

/// Noise amplitude `g(t)` together with the drift weight of its frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSchedule {
    /// `g(t) = t^-gamma`, drift weighted by `t^-gamma` (untransformed model).
    PowerGamma { gamma: f64 },
    /// `g(t) = e^(-t/2)`: the `gamma = 1` model after the exponential time change.
    ExpHalf,
    /// `g(t) = t^(-gamma / (2(1-gamma)))`: the model after the power time change.
    PowerTransformed { gamma: f64 },
}

impl NoiseSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSchedule::PowerGamma { gamma } => check_gamma(gamma, true),
            NoiseSchedule::ExpHalf => Ok(()),
            NoiseSchedule::PowerTransformed { gamma } => check_gamma(gamma, false),
        }
    }

    #[inline]
    pub fn amplitude(&self, t: f64) -> f64 {
        match *self {
            NoiseSchedule::PowerGamma { gamma } => t.powf(-gamma),
            NoiseSchedule::ExpHalf => (-0.5 * t).exp(),
            NoiseSchedule::PowerTransformed { gamma } => t.powf(-gamma / (2.0 * (1.0 - gamma))),
        }
    }

    #[inline]
    pub fn drift_weight(&self, t: f64) -> f64 {
        match *self {
            NoiseSchedule::PowerGamma { gamma } => t.powf(-gamma),
            NoiseSchedule::ExpHalf | NoiseSchedule::PowerTransformed { .. } => 1.0,
        }
    }

    /// Largest drift weight on `[t0, inf)`; the weights are nonincreasing.
    pub fn max_drift_weight(&self, t0: f64) -> f64 {
        self.drift_weight(t0)
    }

    pub fn frame(&self) -> Frame {
        match self {
            NoiseSchedule::PowerGamma { .. } => Frame::Raw,
            NoiseSchedule::ExpHalf => Frame::Exponential,
            NoiseSchedule::PowerTransformed { .. } => Frame::Power,
        }
    }

    pub fn gamma(&self) -> f64 {
        match *self {
            NoiseSchedule::PowerGamma { gamma } | NoiseSchedule::PowerTransformed { gamma } => gamma,
            NoiseSchedule::ExpHalf => 1.0,
        }
    }
}

/// Checks `gamma` in `(1/2, 1]`, or `(1/2, 1)` when `allow_one` is false.
pub fn check_gamma(gamma: f64, allow_one: bool) -> Result<()> {
    let ok = gamma > 0.5 && if allow_one { gamma <= 1.0 } else { gamma < 1.0 };
    if ok {
        Ok(())
    } else if allow_one {
        Err(Error::Hypothesis {
            param: "gamma",
            value: gamma,
            hypothesis: "gamma in (1/2, 1] on the step-size exponent",
        })
    } else {
        Err(Error::Hypothesis {
            param: "gamma",
            value: gamma,
            hypothesis: "gamma in (1/2, 1) required by the power time change and the discrete recursion",
        })
    }
}

/// A fully specified one-dimensional SDE with its initial condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub drift: DriftSpec,
    pub noise: NoiseSchedule,
    pub t0: f64,
    pub x0: f64,
    /// Drops the noise term entirely (the mean-flow ODE).
    #[serde(default)]
    pub noiseless: bool,
}

impl ProcessSpec {
    pub fn new(drift: DriftSpec, noise: NoiseSchedule, t0: f64, x0: f64) -> Result<Self> {
        let spec = ProcessSpec {
            drift,
            noise,
            t0,
            x0,
            noiseless: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn without_noise(mut self) -> Result<Self> {
        self.noiseless = true;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.drift.validate()?;
        self.noise.validate()?;
        if !self.x0.is_finite() {
            return Err(Error::InvalidParameter(format!("x0 must be finite, got {}", self.x0)));
        }
        let min_t0 = match self.noise {
            NoiseSchedule::PowerGamma { .. } => 1.0,
            NoiseSchedule::PowerTransformed { .. } if !self.noiseless => 1.0,
            _ => 0.0,
        };
        if !(self.t0 >= min_t0 && self.t0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t0 = {} must be >= {min_t0} for the {:?} frame (the schedule is singular at 0)",
                self.t0,
                self.noise.frame()
            )));
        }
        Ok(())
    }

    pub fn frame(&self) -> Frame {
        self.noise.frame()
    }
}

/// Canonical solution of the mean-flow ODE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum MeanFlowFrame {
    /// `h(t) = -t^(1/(1-k))`, solving `h' = |h|^k / (k-1)`.
    ContinuousH { k: f64 },
    /// `h(n) = -n^((1-gamma)/(1-k))`.
    DiscreteH { k: f64, gamma: f64 },
}

impl MeanFlowFrame {
    pub fn continuous(k: f64) -> Result<Self> {
        let f = MeanFlowFrame::ContinuousH { k };
        f.validate()?;
        Ok(f)
    }

    pub fn discrete(k: f64, gamma: f64) -> Result<Self> {
        let f = MeanFlowFrame::DiscreteH { k, gamma };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if !(k > 1.0 && k.is_finite()) {
            return Err(Error::Hypothesis {
                param: "k",
                value: k,
                hypothesis: "k > 1 for the degenerate monomial drift |x|^k",
            });
        }
        if let MeanFlowFrame::DiscreteH { gamma, .. } = *self {
            check_gamma(gamma, false)?;
        }
        Ok(())
    }

    pub fn k(&self) -> f64 {
        match *self {
            MeanFlowFrame::ContinuousH { k } | MeanFlowFrame::DiscreteH { k, .. } => k,
        }
    }

    /// Exponent `p` with `h(t) = -t^p`.
    pub fn exponent(&self) -> f64 {
        match *self {
            MeanFlowFrame::ContinuousH { k } => 1.0 / (1.0 - k),
            MeanFlowFrame::DiscreteH { k, gamma } => (1.0 - gamma) / (1.0 - k),
        }
    }

    #[inline]
    pub fn h(&self, t: f64) -> f64 {
        -t.powf(self.exponent())
    }

    /// Normalized coordinate `Z = -x / h(t)`; same sign as `x`.
    #[inline]
    pub fn z(&self, x: f64, t: f64) -> f64 {
        -x / self.h(t)
    }
}

/// Checked `h(t)`; `t >= 1`.
pub fn mean_flow_h(frame: &MeanFlowFrame, t: f64) -> Result<f64> {
    frame.validate()?;
    if !(t >= 1.0) {
        return Err(Error::InvalidParameter(format!("mean flow is evaluated on t >= 1, got {t}")));
    }
    Ok(frame.h(t))
}

pub fn z_coordinate(x: f64, frame: &MeanFlowFrame, t: f64) -> Result<f64> {
    Ok(-x / mean_flow_h(frame, t)?)
}

/// Critical step-size exponent `1/2 + 1/(2k)`.
pub fn gamma_threshold(k: f64) -> Result<f64> {
    if !(k >= 1.0) {
        return Err(Error::Hypothesis {
            param: "k",
            value: k,
            hypothesis: "k >= 1 for the critical exponent 1/2 + 1/(2k)",
        });
    }
    Ok(0.5 + 0.5 / k)
}

/// Original time `t^(1/(1-gamma))` for transformed time `t`.
pub fn time_change_power(t: f64, gamma: f64) -> Result<f64> {
    if gamma == 1.0 {
        return Err(Error::InvalidParameter(
            "gamma = 1 has no power time change; use the exponential time change".into(),
        ));
    }
    check_gamma(gamma, false)?;
    if !(t >= 1.0) {
        return Err(Error::InvalidParameter(format!("power time change needs t >= 1, got {t}")));
    }
    Ok(t.powf(1.0 / (1.0 - gamma)))
}

pub fn inverse_time_change_power(s: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma, false)?;
    if !(s >= 1.0) {
        return Err(Error::InvalidParameter(format!("inverse power time change needs s >= 1, got {s}")));
    }
    Ok(s.powf(1.0 - gamma))
}

/// Original time `e^t` for transformed time `t >= 0`.
pub fn time_change_exp(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("exponential time change needs t >= 0, got {t}")));
    }
    Ok(t.exp())
}

pub fn inverse_time_change_exp(s: f64) -> Result<f64> {
    if !(s >= 1.0) {
        return Err(Error::InvalidParameter(format!("inverse exponential time change needs s >= 1, got {s}")));
    }
    Ok(s.ln())
}

/// Drift scale `c` of the power-time-changed model after dividing out the noise
/// constant: `L_{theta(t)} = X_t / sqrt(1-gamma)` where `X` solves
/// `dX = c |X|^k dt + t^(-gamma/(2(1-gamma))) dB` with `c = (1-gamma)^(-(k+1)/2)`.
pub fn transformed_drift_scale(k: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma, false)?;
    Ok((1.0 - gamma).powf(-(k + 1.0) / 2.0))
}

/// Factor mapping the rescaled power-frame state back to the original process.
pub fn transformed_state_factor(gamma: f64) -> Result<f64> {
    check_gamma(gamma, false)?;
    Ok((1.0 - gamma).powf(-0.5))
}
