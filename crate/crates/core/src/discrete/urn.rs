//! Generalized urn: at total count `n` a red ball is added with probability
//! `f(X_n)`, where `X_n` is the red fraction. Ball counts are kept as integers.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DiscreteTrajectory;
use crate::error::{Error, Result};
use crate::rng::path_rng;

/// Feedback function `f: [0, 1] -> [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UrnFeedback {
    Constant { value: f64 },
    /// `f(x) = x`, the Pólya urn.
    Identity,
    Power { exponent: f64 },
    /// Piecewise-linear interpolation of `values` on a uniform grid of `[0, 1]`.
    Table { values: Vec<f64> },
}

impl UrnFeedback {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        match self {
            UrnFeedback::Constant { value } if !in_unit(*value) => {
                Err(Error::InvalidParameter(format!("constant feedback {value} is outside [0, 1]")))
            }
            UrnFeedback::Power { exponent } if !(*exponent > 0.0 && exponent.is_finite()) => {
                Err(Error::InvalidParameter(format!("power feedback needs exponent > 0, got {exponent}")))
            }
            UrnFeedback::Table { values } if values.len() < 2 || !values.iter().all(|&v| in_unit(v)) => Err(
                Error::InvalidParameter("feedback table needs at least 2 entries, all in [0, 1]".into()),
            ),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            UrnFeedback::Constant { value } => *value,
            UrnFeedback::Identity => x,
            UrnFeedback::Power { exponent } => x.powf(*exponent),
            UrnFeedback::Table { values } => {
                let m = (values.len() - 1) as f64;
                let pos = x.clamp(0.0, 1.0) * m;
                let i = (pos.floor() as usize).min(values.len() - 2);
                let w = pos - i as f64;
                values[i] + w * (values[i + 1] - values[i])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrnSpec {
    pub f: UrnFeedback,
    pub red: u64,
    pub total: u64,
}

impl UrnSpec {
    pub fn validate(&self) -> Result<()> {
        self.f.validate()?;
        if !(self.red > 0 && self.red < self.total) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < red < total so the fraction starts in (0, 1), got {}/{}",
                self.red, self.total
            )));
        }
        Ok(())
    }
}

/// An urn run together with its stochastic-approximation decomposition
/// `X_{n+1} = X_n + A_n + g_n / (n+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrnPath {
    /// Red fractions, indexed by total ball count starting at the initial total.
    pub trajectory: DiscreteTrajectory,
    /// `A_n = (f(X_n) - X_n) / (n+1)`.
    pub drift: Vec<f64>,
    /// `g_n = 1{red added} - f(X_n)`.
    pub noise: Vec<f64>,
}

fn check_horizon(spec: &UrnSpec, n_end: u64) -> Result<()> {
    spec.validate()?;
    if n_end <= spec.total {
        return Err(Error::InvalidParameter(format!(
            "horizon {n_end} must exceed the initial total {}",
            spec.total
        )));
    }
    Ok(())
}

/// Streams the urn until the total reaches `n_end`, handing `(red, total)` to
/// `visit` before each draw and once at the end.
pub fn run_urn<V>(spec: &UrnSpec, n_end: u64, seed: u64, mut visit: V) -> Result<(u64, u64)>
where
    V: FnMut(u64, u64),
{
    check_horizon(spec, n_end)?;
    let mut rng = path_rng(seed);
    let (mut red, mut total) = (spec.red, spec.total);
    while total < n_end {
        visit(red, total);
        let x = red as f64 / total as f64;
        if rng.random::<f64>() < spec.f.eval(x) {
            red += 1;
        }
        total += 1;
    }
    visit(red, total);
    Ok((red, total))
}

pub fn simulate_urn(spec: &UrnSpec, n_end: u64, seed: u64) -> Result<UrnPath> {
    check_horizon(spec, n_end)?;
    let len = (n_end - spec.total) as usize;
    let mut values = Vec::with_capacity(len + 1);
    let mut drift = Vec::with_capacity(len);
    let mut noise = Vec::with_capacity(len);
    let mut prev: Option<(u64, u64)> = None;
    run_urn(spec, n_end, seed, |red, total| {
        let x = red as f64 / total as f64;
        if let Some((pred, ptotal)) = prev {
            let px = pred as f64 / ptotal as f64;
            let fx = spec.f.eval(px);
            drift.push((fx - px) / total as f64);
            noise.push((red - pred) as f64 - fx);
        }
        values.push(x);
        prev = Some((red, total));
    })?;
    Ok(UrnPath {
        trajectory: DiscreteTrajectory {
            n0: spec.total,
            values,
            seed,
        },
        drift,
        noise,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrnSgdReport {
    pub steps: u64,
    pub max_abs_diff: f64,
    /// Total count at which the two paths first differ by more than `1e-12`.
    pub first_divergence: Option<u64>,
}

impl UrnSgdReport {
    pub fn passed(&self) -> bool {
        self.first_divergence.is_none()
    }
}

/// Runs the urn with exact counts and, on the same uniforms, the floating
/// recursion `x <- x + (f(x) - x)/(n+1) + (xi - f(x))/(n+1)`, comparing the two
/// paths at every step.
pub fn urn_as_sgd_check(spec: &UrnSpec, n_end: u64, seed: u64) -> Result<UrnSgdReport> {
    check_horizon(spec, n_end)?;
    let mut rng = path_rng(seed);
    let (mut red, mut total) = (spec.red, spec.total);
    let mut x = red as f64 / total as f64;
    let mut report = UrnSgdReport {
        steps: 0,
        max_abs_diff: 0.0,
        first_divergence: None,
    };
    while total < n_end {
        let u: f64 = rng.random();
        let exact = red as f64 / total as f64;
        if u < spec.f.eval(exact) {
            red += 1;
        }
        let fx = spec.f.eval(x);
        let xi = if u < fx { 1.0 } else { 0.0 };
        let step = 1.0 / (total + 1) as f64;
        x = x + (fx - x) * step + (xi - fx) * step;
        total += 1;
        report.steps += 1;
        let diff = (x - red as f64 / total as f64).abs();
        report.max_abs_diff = report.max_abs_diff.max(diff);
        if diff > 1e-12 && report.first_divergence.is_none() {
            report.first_divergence = Some(total);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn always_red_tends_to_one() {
        let spec = UrnSpec {
            f: UrnFeedback::Constant { value: 1.0 },
            red: 1,
            total: 2,
        };
        let p = simulate_urn(&spec, 200, 0).unwrap();
        for (n, x) in p.trajectory.indices().zip(&p.trajectory.values) {
            assert_eq!(*x, (n - 1) as f64 / n as f64);
        }
        assert!(p.trajectory.values.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn decomposition_reconstructs_path() {
        let spec = UrnSpec {
            f: UrnFeedback::Power { exponent: 2.0 },
            red: 3,
            total: 7,
        };
        let p = simulate_urn(&spec, 500, 9).unwrap();
        let v = &p.trajectory.values;
        for i in 0..p.drift.len() {
            let n1 = (spec.total + i as u64 + 1) as f64;
            let rebuilt = v[i] + p.drift[i] + p.noise[i] / n1;
            assert!((rebuilt - v[i + 1]).abs() < 1e-14);
        }
        assert!(v.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn sgd_form_is_pathwise_equal() {
        let mut table_rng = path_rng(123);
        let specs = [
            UrnFeedback::Identity,
            UrnFeedback::Constant { value: 0.5 },
            UrnFeedback::Table {
                values: (0..9).map(|_| table_rng.random::<f64>()).collect(),
            },
        ];
        for f in specs {
            let spec = UrnSpec { f, red: 1, total: 2 };
            for seed in 0..5 {
                let r = urn_as_sgd_check(&spec, 1000, seed).unwrap();
                assert!(r.passed(), "{r:?}");
                assert_eq!(r.steps, 998);
            }
        }
    }

    #[test]
    fn table_interpolates() {
        let f = UrnFeedback::Table { values: vec![0.0, 1.0, 0.5] };
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(0.25), 0.5);
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval(1.0), 0.5);
    }

    #[test]
    fn invalid_specs_rejected() {
        let bad = |f, red, total| UrnSpec { f, red, total }.validate().is_err();
        assert!(bad(UrnFeedback::Identity, 0, 2));
        assert!(bad(UrnFeedback::Identity, 2, 2));
        assert!(bad(UrnFeedback::Constant { value: 1.5 }, 1, 2));
        assert!(bad(UrnFeedback::Table { values: vec![0.5] }, 1, 2));
        let ok = UrnSpec { f: UrnFeedback::Identity, red: 1, total: 2 };
        assert!(simulate_urn(&ok, 2, 0).is_err());
    }
}
