//! Declarative experiment configs, run manifests and the experiment runner.
//!
//! A config is resolved from three layers: the preset for the experiment kind,
//! then an optional JSON file, then explicit overrides (command-line flags).

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::{build_trial, phase_sweep, CellTrial, ClassifierConfig, OutcomeCounts, PhaseCell, SweepModel};
use crate::continuous::{simulate_em_seeded, Trajectory};
use crate::discrete::urn::run_urn;
use crate::discrete::{simulate_sgd, DiscreteTrajectory, DriftMode, NoiseFamily, NoiseSpec, UrnFeedback, UrnSpec};
use crate::emit::{self, ResultsDocument};
use crate::error::{Error, Result};
use crate::model::DEFAULT_CAP;
use crate::rng::derive_seed;
use crate::validate::{self, CheckResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    #[default]
    Simulate,
    Sweep,
    LinearDichotomy,
    MonomialDichotomy,
    DiscreteDichotomy,
    Urn,
    Validate,
}

/// Which dynamics a cell simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `k|x|` in the exponential frame (`gamma = 1`).
    Linear,
    /// `c min(|x|, cap)^k` in the power frame.
    #[default]
    Monomial,
    /// `c min(|x|, cap)^k` with `t^-gamma` weights, untransformed.
    Raw,
    /// The recursion with step `n^-gamma`.
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

macro_rules! serde_from_str {
    ($($t:ty),*) => {$(
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                serde_json::from_value(Value::String(s.to_string()))
                    .map_err(|_| Error::Config(format!("unrecognized value {s:?}")))
            }
        }
    )*};
}

serde_from_str!(ExperimentKind, ModelKind, OutputFormat, NoiseFamily);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UrnConfig {
    pub feedback: UrnFeedback,
    pub red: u64,
    pub total: u64,
}

impl Default for UrnConfig {
    fn default() -> Self {
        UrnConfig {
            feedback: UrnFeedback::Constant { value: 0.5 },
            red: 1,
            total: 2,
        }
    }
}

/// Everything that determines a run. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub model: ModelKind,
    pub k: Vec<f64>,
    pub gamma: Vec<f64>,
    pub c: f64,
    pub cap: f64,
    pub noise: NoiseFamily,
    pub noise_bound: f64,
    pub drift_mode: DriftMode,
    pub x0: f64,
    /// Start time of the continuous models that are singular at 0.
    pub t0: f64,
    /// First index of the recursion.
    pub n0: u64,
    pub dt: f64,
    /// End time (continuous) or last index (discrete, urn).
    pub horizon: f64,
    pub trials: u64,
    pub seed: u64,
    pub classifier: ClassifierConfig,
    pub urn: UrnConfig,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    /// Number of individual trajectories to store alongside the results.
    pub dump_trajectories: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::preset(ExperimentKind::Simulate)
    }
}

impl ExperimentConfig {
    pub fn preset(kind: ExperimentKind) -> Self {
        let base = ExperimentConfig {
            kind,
            model: ModelKind::Monomial,
            k: vec![2.0],
            gamma: vec![0.9],
            c: 1.0,
            cap: DEFAULT_CAP,
            noise: NoiseFamily::Rademacher,
            noise_bound: 1.0,
            drift_mode: DriftMode::Equal,
            x0: -0.2,
            t0: 1.0,
            n0: 10,
            dt: 1e-3,
            horizon: 200.0,
            trials: 100,
            seed: 20_240_601,
            classifier: ClassifierConfig::default(),
            urn: UrnConfig::default(),
            format: OutputFormat::Csv,
            out: None,
            dump_trajectories: 0,
        };
        match kind {
            ExperimentKind::Simulate | ExperimentKind::Validate => base,
            ExperimentKind::Sweep => ExperimentConfig {
                k: vec![1.5, 2.0, 3.0],
                gamma: vec![0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95],
                dt: 1e-2,
                trials: 500,
                ..base
            },
            ExperimentKind::LinearDichotomy => ExperimentConfig {
                model: ModelKind::Linear,
                k: vec![0.3, 0.8],
                gamma: vec![1.0],
                x0: -0.1,
                t0: 0.0,
                horizon: 15.0,
                trials: 2000,
                ..base
            },
            ExperimentKind::MonomialDichotomy => ExperimentConfig {
                k: vec![2.0, 3.0],
                gamma: vec![0.55, 0.6, 0.85, 0.9],
                trials: 1000,
                ..base
            },
            ExperimentKind::DiscreteDichotomy => ExperimentConfig {
                model: ModelKind::Discrete,
                gamma: vec![0.6, 0.9],
                horizon: 1e6,
                trials: 500,
                ..base
            },
            ExperimentKind::Urn => ExperimentConfig {
                horizon: 1e5,
                trials: 1000,
                ..base
            },
        }
    }

    /// The model every `(k, gamma)` cell runs, after the kind's constraints.
    pub fn effective_model(&self) -> Result<ModelKind> {
        let required = match self.kind {
            ExperimentKind::LinearDichotomy => Some(ModelKind::Linear),
            ExperimentKind::MonomialDichotomy => Some(ModelKind::Monomial),
            ExperimentKind::DiscreteDichotomy => Some(ModelKind::Discrete),
            _ => None,
        };
        match required {
            Some(m) if m != self.model => Err(Error::Config(format!(
                "experiment {:?} runs the {m:?} model, but model = {:?} was requested",
                self.kind, self.model
            ))),
            Some(m) => Ok(m),
            None => Ok(self.model),
        }
    }

    pub fn sweep_model(&self) -> Result<SweepModel> {
        Ok(match self.effective_model()? {
            ModelKind::Linear => SweepModel::Linear {
                x0: self.x0,
                horizon: self.horizon,
                dt: self.dt,
            },
            ModelKind::Monomial => SweepModel::Continuous {
                c: self.c,
                cap: self.cap,
                x0: self.x0,
                t0: self.t0,
                horizon: self.horizon,
                dt: self.dt,
            },
            ModelKind::Raw => SweepModel::Raw {
                c: self.c,
                cap: self.cap,
                x0: self.x0,
                t0: self.t0,
                horizon: self.horizon,
                dt: self.dt,
            },
            ModelKind::Discrete => {
                if self.horizon.fract() != 0.0 || !(self.horizon >= 1.0) || self.horizon > u64::MAX as f64 {
                    return Err(Error::InvalidParameter(format!(
                        "discrete horizon must be a positive integer index, got {}",
                        self.horizon
                    )));
                }
                let noise = match self.noise {
                    NoiseFamily::Off => NoiseSpec::off(),
                    family => NoiseSpec::new(family, self.noise_bound)?,
                };
                SweepModel::Discrete {
                    c: self.c,
                    cap: self.cap,
                    x0: self.x0,
                    n0: self.n0,
                    n_end: self.horizon as u64,
                    noise,
                    mode: self.drift_mode,
                }
            }
        })
    }

    pub fn urn_spec(&self) -> Result<UrnSpec> {
        let spec = UrnSpec {
            f: self.urn.feedback.clone(),
            red: self.urn.red,
            total: self.urn.total,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks every parameter the run will use, building each cell's trial
    /// without simulating it.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        self.classifier.validate()?;
        match self.kind {
            ExperimentKind::Validate => Ok(()),
            ExperimentKind::Urn => {
                self.urn_spec()?;
                if self.horizon.fract() != 0.0 || !(self.horizon > self.urn.total as f64) {
                    return Err(Error::InvalidParameter(format!(
                        "urn horizon must be an integer above the initial total {}, got {}",
                        self.urn.total, self.horizon
                    )));
                }
                Ok(())
            }
            _ => {
                if self.k.is_empty() || self.gamma.is_empty() {
                    return Err(Error::InvalidParameter("need at least one k and one gamma".into()));
                }
                let model = self.sweep_model()?;
                for &k in &self.k {
                    for &gamma in &self.gamma {
                        build_trial(k, gamma, &model, &self.classifier)?;
                    }
                }
                Ok(())
            }
        }
    }

    /// Resolves preset, file and overrides into a validated config.
    ///
    /// The base seed comes from, in order: the overrides, the file, `env_seed`,
    /// the preset.
    pub fn resolve(
        kind: Option<ExperimentKind>,
        file: Option<&Path>,
        overrides: &Overrides,
        env_seed: Option<u64>,
    ) -> Result<Self> {
        let file_value = match file {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let v: Value = serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                if !v.is_object() {
                    return Err(Error::Config(format!("{}: config must be a JSON object", path.display())));
                }
                Some(v)
            }
            None => None,
        };
        let file_kind = match file_value.as_ref().and_then(|v| v.get("kind")) {
            Some(k) => Some(serde_json::from_value::<ExperimentKind>(k.clone())?),
            None => None,
        };
        let kind = kind.or(file_kind).unwrap_or_default();
        let mut merged = serde_json::to_value(ExperimentConfig::preset(kind))?;
        let file_has_seed = file_value.as_ref().is_some_and(|v| v.get("seed").is_some());
        if let Some(v) = &file_value {
            let mut unknown = Vec::new();
            unknown_keys(&merged, v, "", &mut unknown);
            if !unknown.is_empty() {
                return Err(Error::UnknownKeys(unknown));
            }
            merge(&mut merged, v);
        }
        let mut cfg: ExperimentConfig = serde_json::from_value(merged)?;
        cfg.kind = kind;
        if !file_has_seed {
            if let Some(s) = env_seed {
                cfg.seed = s;
            }
        }
        overrides.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Keys in `given` (recursively through plain objects) that `known` lacks.
fn unknown_keys(known: &Value, given: &Value, prefix: &str, out: &mut Vec<String>) {
    let (Value::Object(k), Value::Object(g)) = (known, given) else {
        return;
    };
    for (key, val) in g {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        match k.get(key) {
            None => out.push(path),
            // tagged enums are checked by serde itself
            Some(kv) if kv.is_object() && kv.get("kind").is_none() => unknown_keys(kv, val, &path, out),
            _ => {}
        }
    }
}

/// Overlays `top` onto `base`, merging nested plain objects key by key.
fn merge(base: &mut Value, top: &Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (key, val) in t {
                match b.get_mut(key) {
                    Some(bv) if bv.is_object() && val.is_object() && bv.get("kind").is_none() => merge(bv, val),
                    _ => {
                        b.insert(key.clone(), val.clone());
                    }
                }
            }
        }
        (b, t) => *b = t.clone(),
    }
}

/// Command-line overrides; `None` leaves the lower layers in place.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub model: Option<ModelKind>,
    pub k: Option<Vec<f64>>,
    pub gamma: Option<Vec<f64>>,
    pub c: Option<f64>,
    pub cap: Option<f64>,
    pub noise: Option<NoiseFamily>,
    pub noise_bound: Option<f64>,
    pub x0: Option<f64>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub eps_conv: Option<f64>,
    pub barrier: Option<f64>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    pub dump_trajectories: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        set(&mut cfg.model, &self.model);
        set(&mut cfg.k, &self.k);
        set(&mut cfg.gamma, &self.gamma);
        set(&mut cfg.c, &self.c);
        set(&mut cfg.cap, &self.cap);
        set(&mut cfg.noise, &self.noise);
        set(&mut cfg.noise_bound, &self.noise_bound);
        set(&mut cfg.x0, &self.x0);
        set(&mut cfg.dt, &self.dt);
        set(&mut cfg.horizon, &self.horizon);
        set(&mut cfg.trials, &self.trials);
        set(&mut cfg.seed, &self.seed);
        set(&mut cfg.classifier.eps_conv, &self.eps_conv);
        set(&mut cfg.classifier.barrier, &self.barrier);
        set(&mut cfg.format, &self.format);
        set(&mut cfg.dump_trajectories, &self.dump_trajectories);
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
    }
}

/// Distribution of the final red fraction over independent urn runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrnSummary {
    pub trials: u64,
    pub horizon: u64,
    pub mean: f64,
    pub std_err: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
    /// Sum of the final red counts; a cheap exact reproducibility check.
    pub red_checksum: u64,
}

/// Everything needed to reproduce a run, plus what it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub base_seed: u64,
    /// Outcome counts per cell, in output order.
    pub counts: Vec<OutcomeCounts>,
    #[serde(default)]
    pub urn: Option<UrnSummary>,
    pub wall_clock_secs: f64,
    pub version: String,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DumpedTrajectory {
    Continuous(Trajectory),
    Discrete(DiscreteTrajectory),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunResults {
    Cells(Vec<PhaseCell>),
    Urn(UrnSummary),
    Checks(Vec<CheckResult>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub manifest: RunManifest,
    pub results: RunResults,
    pub trajectories: Vec<DumpedTrajectory>,
}

impl RunOutput {
    /// Human-readable lines: one per cell, per urn batch, or per check.
    pub fn summary_lines(&self) -> Vec<String> {
        match &self.results {
            RunResults::Cells(cells) => cells
                .iter()
                .map(|c| {
                    let r = &c.result;
                    format!(
                        "k={} gamma={} prediction={}{} converged={}/{} ({:.4}, 95% CI [{:.4}, {:.4}]) escaped={} undecided={}",
                        c.k,
                        c.gamma,
                        c.prediction.as_str(),
                        if c.boundary { " (boundary band, not gating)" } else { "" },
                        r.counts.converged,
                        r.n,
                        r.converged.p,
                        r.converged.ci.lo,
                        r.converged.ci.hi,
                        r.counts.escaped,
                        r.counts.undecided
                    )
                })
                .collect(),
            RunResults::Urn(s) => vec![format!(
                "urn: {} runs to N={}: mean X_N={:.5} (se {:.5}), quantiles 5/50/95% = {:.4}/{:.4}/{:.4}",
                s.trials, s.horizon, s.mean, s.std_err, s.q05, s.q50, s.q95
            )],
            RunResults::Checks(checks) => checks.iter().map(|c| c.line()).collect(),
        }
    }

    pub fn succeeded(&self) -> bool {
        match &self.results {
            RunResults::Checks(checks) => checks.iter().all(|c| c.passed),
            _ => true,
        }
    }

    pub fn rows(&self) -> Vec<emit::Row> {
        match &self.results {
            RunResults::Cells(cells) => emit::rows(cells),
            _ => Vec::new(),
        }
    }

    /// Writes results, manifest and any trajectory dumps into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let mut put = |name: &str, contents: String| -> Result<()> {
            let path = dir.join(name);
            emit::write_file(&path, &contents)?;
            written.push(path);
            Ok(())
        };
        match &self.results {
            RunResults::Cells(_) => match self.manifest.config.format {
                OutputFormat::Csv => put("results.csv", emit::to_csv(&self.rows()))?,
                OutputFormat::Json => put(
                    "results.json",
                    emit::to_json(&ResultsDocument {
                        manifest: self.manifest.clone(),
                        rows: self.rows(),
                    })?,
                )?,
            },
            RunResults::Urn(s) => put("urn.json", serde_json::to_string_pretty(s)?)?,
            RunResults::Checks(c) => put("validate.json", serde_json::to_string_pretty(c)?)?,
        }
        put("manifest.json", serde_json::to_string_pretty(&self.manifest)?)?;
        if !self.trajectories.is_empty() {
            put("trajectories.json", serde_json::to_string(&self.trajectories)?)?;
        }
        Ok(written)
    }
}

fn urn_summary(cfg: &ExperimentConfig) -> Result<UrnSummary> {
    use rayon::prelude::*;
    let spec = cfg.urn_spec()?;
    let horizon = cfg.horizon as u64;
    let finals: Vec<u64> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_urn(&spec, horizon, derive_seed(cfg.seed, i), |_, _| {}).map(|(red, _)| red))
        .collect::<Result<_>>()?;
    let mut xs: Vec<f64> = finals.iter().map(|&r| r as f64 / horizon as f64).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    xs.sort_by(f64::total_cmp);
    let q = |p: f64| xs[((p * (xs.len() - 1) as f64).round() as usize).min(xs.len() - 1)];
    Ok(UrnSummary {
        trials: cfg.trials,
        horizon,
        mean,
        std_err: (var / n).sqrt(),
        q05: q(0.05),
        q50: q(0.5),
        q95: q(0.95),
        red_checksum: finals.iter().sum(),
    })
}

fn dump(cfg: &ExperimentConfig) -> Result<Vec<DumpedTrajectory>> {
    if cfg.dump_trajectories == 0 || matches!(cfg.kind, ExperimentKind::Urn | ExperimentKind::Validate) {
        return Ok(Vec::new());
    }
    let model = cfg.sweep_model()?;
    let (k, gamma) = (cfg.k[0], cfg.gamma[0]);
    // same seeds as the first cell's first trials
    let cell_seed = derive_seed(cfg.seed, 0);
    (0..cfg.dump_trajectories)
        .map(|i| {
            let seed = derive_seed(cell_seed, i);
            Ok(match build_trial(k, gamma, &model, &cfg.classifier)? {
                CellTrial::Continuous(t) => DumpedTrajectory::Continuous(simulate_em_seeded(&t.spec, &t.grid, seed)?),
                CellTrial::Discrete(t) => DumpedTrajectory::Discrete(simulate_sgd(&t.spec, seed)?),
            })
        })
        .collect()
}

/// Runs a validated config on the current rayon pool.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let started = Instant::now();
    let (results, counts, urn) = match cfg.kind {
        ExperimentKind::Urn => {
            let s = urn_summary(cfg)?;
            (RunResults::Urn(s.clone()), Vec::new(), Some(s))
        }
        ExperimentKind::Validate => {
            let checks = validate::run_all(cfg.seed)?;
            (RunResults::Checks(checks), Vec::new(), None)
        }
        _ => {
            let cells = phase_sweep(&cfg.k, &cfg.gamma, &cfg.sweep_model()?, &cfg.classifier, cfg.trials, cfg.seed)?;
            let counts = cells.iter().map(|c| c.result.counts).collect();
            (RunResults::Cells(cells), counts, None)
        }
    };
    let trajectories = dump(cfg)?;
    Ok(RunOutput {
        manifest: RunManifest {
            config: cfg.clone(),
            base_seed: cfg.seed,
            counts,
            urn,
            wall_clock_secs: started.elapsed().as_secs_f64(),
            version: crate::ARTIFACT_VERSION.to_string(),
        },
        results,
        trajectories,
    })
}

/// Re-runs the config recorded in a manifest and checks that every count
/// comes out the same.
pub fn replay(manifest: &RunManifest) -> Result<RunOutput> {
    let out = run(&manifest.config)?;
    if out.manifest.counts != manifest.counts || out.manifest.urn != manifest.urn {
        return Err(Error::Mismatch(format!(
            "replay produced counts {:?}, manifest records {:?}",
            out.manifest.counts, manifest.counts
        )));
    }
    Ok(out)
}

/// Config keys accepted in files, for documentation and error messages.
pub fn known_keys() -> Vec<String> {
    match serde_json::to_value(ExperimentConfig::default()) {
        Ok(Value::Object(m)) => m.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn config_round_trips() {
        for kind in [
            ExperimentKind::Simulate,
            ExperimentKind::Sweep,
            ExperimentKind::LinearDichotomy,
            ExperimentKind::MonomialDichotomy,
            ExperimentKind::DiscreteDichotomy,
            ExperimentKind::Urn,
            ExperimentKind::Validate,
        ] {
            let cfg = ExperimentConfig::preset(kind);
            cfg.validate().unwrap();
            let text = serde_json::to_string(&cfg).unwrap();
            let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(serde_json::to_string(&back).unwrap(), text);
        }
        let empty: ExperimentConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(empty, ExperimentConfig::default());
    }

    #[test]
    fn layers_apply_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let f = write(dir.path(), "c.json", r#"{"kind": "sweep", "trials": 7, "seed": 3, "classifier": {"barrier": 4}}"#);
        let o = Overrides {
            trials: Some(9),
            ..Default::default()
        };
        let cfg = ExperimentConfig::resolve(None, Some(&f), &o, Some(11)).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Sweep);
        assert_eq!(cfg.trials, 9);
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.classifier.barrier, 4.0);
        assert_eq!(cfg.classifier.eps_conv, 0.02);
        assert_eq!(cfg.k, vec![1.5, 2.0, 3.0]);
    }

    #[test]
    fn env_seed_is_a_fallback() {
        let cfg = ExperimentConfig::resolve(Some(ExperimentKind::Simulate), None, &Overrides::default(), Some(11)).unwrap();
        assert_eq!(cfg.seed, 11);
        let o = Overrides {
            seed: Some(5),
            ..Default::default()
        };
        let cfg = ExperimentConfig::resolve(Some(ExperimentKind::Simulate), None, &o, Some(11)).unwrap();
        assert_eq!(cfg.seed, 5);
    }

    #[test]
    fn unknown_keys_are_listed() {
        let dir = tempfile::tempdir().unwrap();
        let f = write(dir.path(), "c.json", r#"{"trails": 7, "classifier": {"eps": 1}}"#);
        match ExperimentConfig::resolve(None, Some(&f), &Overrides::default(), None) {
            Err(Error::UnknownKeys(keys)) => {
                assert_eq!(keys, vec!["classifier.eps".to_string(), "trails".to_string()])
            }
            other => panic!("expected UnknownKeys, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_names_path() {
        let err = ExperimentConfig::resolve(None, Some(Path::new("/nonexistent/cfg.json")), &Overrides::default(), None)
            .unwrap_err();
        assert!(err.to_string().contains("/nonexistent/cfg.json"));
    }

    #[test]
    fn out_of_range_parameters_name_hypothesis() {
        let o = Overrides {
            gamma: Some(vec![0.4]),
            ..Default::default()
        };
        let err = ExperimentConfig::resolve(Some(ExperimentKind::MonomialDichotomy), None, &o, None).unwrap_err();
        assert!(matches!(err, Error::Hypothesis { param: "gamma", .. }), "{err}");
        let o = Overrides {
            k: Some(vec![0.5]),
            ..Default::default()
        };
        let err = ExperimentConfig::resolve(Some(ExperimentKind::Sweep), None, &o, None).unwrap_err();
        assert!(matches!(err, Error::Hypothesis { param: "k", .. }), "{err}");
        let o = Overrides {
            gamma: Some(vec![1.0]),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(Some(ExperimentKind::MonomialDichotomy), None, &o, None).is_err());
    }

    #[test]
    fn kind_fixes_model() {
        let o = Overrides {
            model: Some(ModelKind::Linear),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(Some(ExperimentKind::DiscreteDichotomy), None, &o, None).is_err());
    }

    #[test]
    fn small_run_replays() {
        let mut cfg = ExperimentConfig::preset(ExperimentKind::DiscreteDichotomy);
        cfg.horizon = 2000.0;
        cfg.trials = 50;
        cfg.dump_trajectories = 2;
        let out = run(&cfg).unwrap();
        assert_eq!(out.manifest.counts.len(), 2);
        assert_eq!(out.trajectories.len(), 2);
        let again = replay(&out.manifest).unwrap();
        assert_eq!(again.rows(), out.rows());

        let mut tampered = out.manifest.clone();
        tampered.counts[0].converged += 1;
        assert!(matches!(replay(&tampered), Err(Error::Mismatch(_))));
    }

    #[test]
    fn writes_only_into_out_dir() {
        let dir = tempfile::tempdir().unwrap();
        let out_dir = dir.path().join("run");
        let mut cfg = ExperimentConfig::preset(ExperimentKind::Urn);
        cfg.horizon = 100.0;
        cfg.trials = 20;
        let out = run(&cfg).unwrap();
        let written = out.write(&out_dir).unwrap();
        assert!(written.iter().all(|p| p.starts_with(&out_dir)));
        let entries: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(entries.len(), 1);
    }

    #[test]
    fn enums_parse_from_flags() {
        assert_eq!("linear-dichotomy".parse::<ExperimentKind>().unwrap(), ExperimentKind::LinearDichotomy);
        assert_eq!("uniform_centered".parse::<NoiseFamily>().unwrap(), NoiseFamily::UniformCentered);
        assert!("bogus".parse::<OutputFormat>().is_err());
    }
}
