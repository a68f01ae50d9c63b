//! Python bindings. Specs cross the boundary as plain dicts with the same
//! shape as the JSON configs and manifests.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::de::DeserializeOwned;
use serde::Serialize;

use saddlelab::analysis::stats::Z95;
use saddlelab::analysis::{self, phase, ClassifierConfig};
use saddlelab::continuous::{self, LinearBranch, TimeGrid};
use saddlelab::discrete::{self, UrnSpec as CoreUrnSpec};
use saddlelab::experiment::{self, ExperimentKind};
use saddlelab::model::{self, MeanFlowFrame, NoiseSchedule};
use saddlelab::{emit, validate, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::NonFinite { .. } | Error::Mismatch(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn from_dict<T: DeserializeOwned>(py: Python<'_>, obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = PyModule::import(py, "json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn to_dict<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(PyModule::import(py, "json")?.call_method1("loads", (text,))?.unbind())
}

fn classifier(py: Python<'_>, cfg: Option<&Bound<'_, PyAny>>) -> PyResult<ClassifierConfig> {
    let cfg: ClassifierConfig = match cfg {
        Some(c) => from_dict(py, c)?,
        None => ClassifierConfig::default(),
    };
    cfg.validate().map_err(to_py)?;
    Ok(cfg)
}

fn outcome_str(o: analysis::Outcome) -> &'static str {
    match o {
        analysis::Outcome::ConvergedToZero => "converged_to_zero",
        analysis::Outcome::Escaped => "escaped",
        analysis::Outcome::Undecided => "undecided",
    }
}

/// One-dimensional SDE `dX = f(X) w(t) dt + g(t) dB` with its start point.
#[pyclass(frozen, module = "saddlelab")]
struct ProcessSpec(model::ProcessSpec);

#[pymethods]
impl ProcessSpec {
    #[new]
    #[pyo3(signature = (drift, noise, t0, x0, noiseless = false))]
    fn new(py: Python<'_>, drift: &Bound<'_, PyAny>, noise: &Bound<'_, PyAny>, t0: f64, x0: f64, noiseless: bool) -> PyResult<Self> {
        let spec = model::ProcessSpec::new(from_dict(py, drift)?, from_dict(py, noise)?, t0, x0).map_err(to_py)?;
        Ok(Self(if noiseless { spec.without_noise().map_err(to_py)? } else { spec }))
    }

    #[staticmethod]
    fn from_dict(py: Python<'_>, d: &Bound<'_, PyAny>) -> PyResult<Self> {
        let spec: model::ProcessSpec = from_dict(py, d)?;
        spec.validate().map_err(to_py)?;
        Ok(Self(spec))
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_dict(py, &self.0)
    }

    /// Euler-Maruyama on a uniform grid from `t0` to `t_end`.
    fn simulate(&self, py: Python<'_>, t_end: f64, dt: f64, seed: u64) -> PyResult<Trajectory> {
        let grid = TimeGrid::new(self.0.t0, t_end, dt).map_err(to_py)?;
        let spec = self.0;
        py.detach(|| continuous::simulate_em_seeded(&spec, &grid, seed)).map(Trajectory).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("ProcessSpec({:?})", self.0)
    }
}

#[pyclass(frozen, module = "saddlelab")]
struct Trajectory(continuous::Trajectory);

#[pymethods]
impl Trajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.times.clone()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values.clone()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[pyo3(signature = (config = None))]
    fn classify(&self, py: Python<'_>, config: Option<&Bound<'_, PyAny>>) -> PyResult<&'static str> {
        Ok(outcome_str(analysis::classify(&self.0, &classifier(py, config)?)))
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_dict(py, &self.0)
    }
}

/// The recursion `x_{n+1} = x_n + a_n (f(x_n) + y_n)` with `a_n = n^-gamma`.
#[pyclass(frozen, module = "saddlelab")]
struct SgdSpec(discrete::SgdSpec);

#[pymethods]
impl SgdSpec {
    #[staticmethod]
    fn from_dict(py: Python<'_>, d: &Bound<'_, PyAny>) -> PyResult<Self> {
        let spec: discrete::SgdSpec = from_dict(py, d)?;
        spec.validate().map_err(to_py)?;
        Ok(Self(spec))
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_dict(py, &self.0)
    }

    /// Iterates `x_n0 .. x_n_end`.
    fn simulate(&self, py: Python<'_>, seed: u64) -> PyResult<Vec<f64>> {
        let spec = self.0;
        py.detach(|| discrete::simulate_sgd(&spec, seed)).map(|t| t.values).map_err(to_py)
    }

    #[pyo3(signature = (seed, config = None))]
    fn classify(&self, py: Python<'_>, seed: u64, config: Option<&Bound<'_, PyAny>>) -> PyResult<&'static str> {
        let cfg = classifier(py, config)?;
        let traj = discrete::simulate_sgd(&self.0, seed).map_err(to_py)?;
        Ok(outcome_str(analysis::classify_discrete(&traj, &cfg)))
    }
}

/// Generalized Pólya urn with feedback `f`.
#[pyclass(frozen, module = "saddlelab")]
struct UrnSpec(CoreUrnSpec);

#[pymethods]
impl UrnSpec {
    #[new]
    #[pyo3(signature = (feedback, red = 1, total = 2))]
    fn new(py: Python<'_>, feedback: &Bound<'_, PyAny>, red: u64, total: u64) -> PyResult<Self> {
        let spec = CoreUrnSpec {
            f: from_dict(py, feedback)?,
            red,
            total,
        };
        spec.validate().map_err(to_py)?;
        Ok(Self(spec))
    }

    /// Red fractions plus the drift and noise sequences of the SGD form.
    fn simulate(&self, py: Python<'_>, n_end: u64, seed: u64) -> PyResult<Py<PyAny>> {
        let spec = self.0.clone();
        let path = py.detach(|| discrete::simulate_urn(&spec, n_end, seed)).map_err(to_py)?;
        to_dict(py, &path)
    }

    fn as_sgd_check(&self, py: Python<'_>, n_end: u64, seed: u64) -> PyResult<Py<PyAny>> {
        let report = discrete::urn_as_sgd_check(&self.0, n_end, seed).map_err(to_py)?;
        to_dict(py, &report)
    }
}

/// A resolved experiment: preset, then file, then the given overrides.
#[pyclass(frozen, module = "saddlelab")]
struct ExperimentConfig(experiment::ExperimentConfig);

#[pymethods]
impl ExperimentConfig {
    #[staticmethod]
    fn preset(kind: &str) -> PyResult<Self> {
        let kind: ExperimentKind = kind.parse().map_err(to_py)?;
        Ok(Self(experiment::ExperimentConfig::preset(kind)))
    }

    #[staticmethod]
    #[pyo3(signature = (kind = None, path = None))]
    fn load(kind: Option<&str>, path: Option<PathBuf>) -> PyResult<Self> {
        let kind = kind.map(|k| k.parse::<ExperimentKind>()).transpose().map_err(to_py)?;
        let cfg =
            experiment::ExperimentConfig::resolve(kind, path.as_deref(), &Default::default(), None).map_err(to_py)?;
        Ok(Self(cfg))
    }

    /// Builds a config from a full dict; keys missing from it are an error.
    #[staticmethod]
    fn from_dict(py: Python<'_>, d: &Bound<'_, PyAny>) -> PyResult<Self> {
        let cfg: experiment::ExperimentConfig = from_dict(py, d)?;
        cfg.validate().map_err(to_py)?;
        Ok(Self(cfg))
    }

    /// Copy with some top-level keys replaced.
    fn with_values(&self, py: Python<'_>, values: &Bound<'_, PyAny>) -> PyResult<Self> {
        let mut base = serde_json::to_value(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let patch: serde_json::Map<String, serde_json::Value> = from_dict(py, values)?;
        for (k, v) in patch {
            base[k] = v;
        }
        let cfg: experiment::ExperimentConfig =
            serde_json::from_value(base).map_err(|e| PyValueError::new_err(e.to_string()))?;
        cfg.validate().map_err(to_py)?;
        Ok(Self(cfg))
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_dict(py, &self.0)
    }

    fn run(&self, py: Python<'_>) -> PyResult<RunOutput> {
        let cfg = self.0.clone();
        py.detach(|| experiment::run(&cfg)).map(RunOutput).map_err(to_py)
    }
}

#[pyclass(frozen, module = "saddlelab")]
struct RunOutput(experiment::RunOutput);

#[pymethods]
impl RunOutput {
    fn summary_lines(&self) -> Vec<String> {
        self.0.summary_lines()
    }

    fn succeeded(&self) -> bool {
        self.0.succeeded()
    }

    fn csv(&self) -> String {
        emit::to_csv(&self.0.rows())
    }

    fn rows(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_dict(py, &self.0.rows())
    }

    fn manifest(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_dict(py, &self.0.manifest)
    }

    fn results(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_dict(py, &self.0.results)
    }

    /// Writes results and manifest into `dir`; returns the written paths.
    fn write(&self, dir: PathBuf) -> PyResult<Vec<PathBuf>> {
        self.0.write(&dir).map_err(to_py)
    }
}

#[pyfunction]
fn gamma_threshold(k: f64) -> PyResult<f64> {
    model::gamma_threshold(k).map_err(to_py)
}

/// Mean-flow solution `h(t)`; pass `gamma` for the discrete frame.
#[pyfunction]
#[pyo3(signature = (k, t, gamma = None))]
fn mean_flow_h(k: f64, t: f64, gamma: Option<f64>) -> PyResult<f64> {
    let frame = match gamma {
        Some(g) => MeanFlowFrame::discrete(k, g),
        None => MeanFlowFrame::continuous(k),
    }
    .map_err(to_py)?;
    model::mean_flow_h(&frame, t).map_err(to_py)
}

#[pyfunction]
fn time_change_power(t: f64, gamma: f64) -> PyResult<f64> {
    model::time_change_power(t, gamma).map_err(to_py)
}

#[pyfunction]
fn inverse_time_change_power(s: f64, gamma: f64) -> PyResult<f64> {
    model::inverse_time_change_power(s, gamma).map_err(to_py)
}

#[pyfunction]
fn time_change_exp(t: f64) -> PyResult<f64> {
    model::time_change_exp(t).map_err(to_py)
}

#[pyfunction]
fn inverse_time_change_exp(s: f64) -> PyResult<f64> {
    model::inverse_time_change_exp(s).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (k, gamma, discrete = false))]
fn predict(k: f64, gamma: f64, discrete: bool) -> PyResult<&'static str> {
    phase::predict(k, gamma, discrete).map(|p| p.as_str()).map_err(to_py)
}

#[pyfunction]
fn in_boundary_band(k: f64, gamma: f64) -> PyResult<bool> {
    phase::in_boundary_band(k, gamma).map_err(to_py)
}

#[pyfunction]
fn never_return_alpha(k: f64, s: f64, x_s: f64) -> PyResult<f64> {
    analysis::never_return_alpha(k, s, x_s).map_err(to_py)
}

#[pyfunction]
fn remaining_variance(k: f64, s: f64) -> PyResult<f64> {
    analysis::remaining_variance(k, s).map_err(to_py)
}

/// `int_s^t g(u)^2 du` for a noise schedule dict; `t` may be `inf`.
#[pyfunction]
fn quadratic_variation(py: Python<'_>, schedule: &Bound<'_, PyAny>, s: f64, t: f64) -> PyResult<f64> {
    let schedule: NoiseSchedule = from_dict(py, schedule)?;
    continuous::quadratic_variation(&schedule, s, t).map_err(to_py)
}

#[pyfunction]
fn normalized_noise_variance(k: f64, gamma: f64, s: f64, t: f64) -> PyResult<f64> {
    continuous::normalized_noise_variance(k, gamma, s, t).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (successes, n, z = Z95))]
fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    let ci = analysis::wilson_interval(successes, n, z);
    (ci.lo, ci.hi)
}

/// Exact sample of the linear SDE at `times`; `branch` is "negative" or "positive".
/// Returns `(values, first_hit)`.
#[pyfunction]
fn simulate_linear_exact(
    k: f64,
    branch: &str,
    x_s: f64,
    s: f64,
    times: Vec<f64>,
    seed: u64,
) -> PyResult<(Vec<f64>, Option<usize>)> {
    let branch = match branch {
        "negative" => LinearBranch::Negative,
        "positive" => LinearBranch::Positive,
        other => return Err(PyValueError::new_err(format!("branch must be negative or positive, got {other:?}"))),
    };
    let sample = continuous::simulate_linear_exact(k, branch, x_s, s, &times, seed).map_err(to_py)?;
    Ok((sample.trajectory.values, sample.first_hit))
}

/// Monte Carlo estimate for one `(k, gamma)` cell of a sweep model dict.
#[pyfunction]
#[pyo3(signature = (k, gamma, model, trials, seed, classifier = None))]
fn run_cell(
    py: Python<'_>,
    k: f64,
    gamma: f64,
    model: &Bound<'_, PyAny>,
    trials: u64,
    seed: u64,
    classifier: Option<&Bound<'_, PyAny>>,
) -> PyResult<Py<PyAny>> {
    let sweep: phase::SweepModel = from_dict(py, model)?;
    let cfg = self::classifier(py, classifier)?;
    let cell = py.detach(|| phase::run_cell(k, gamma, &sweep, &cfg, trials, seed)).map_err(to_py)?;
    to_dict(py, &emit::Row::from(&cell))
}

/// Runs one acceptance check by id.
#[pyfunction]
fn run_check(py: Python<'_>, id: u32, seed: u64) -> PyResult<Py<PyAny>> {
    let result = py.detach(|| validate::run_check(id, seed)).map_err(to_py)?;
    to_dict(py, &result)
}

#[pymodule(name = "saddlelab")]
fn saddlelab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<ProcessSpec>()?;
    m.add_class::<Trajectory>()?;
    m.add_class::<SgdSpec>()?;
    m.add_class::<UrnSpec>()?;
    m.add_class::<ExperimentConfig>()?;
    m.add_class::<RunOutput>()?;
    m.add_function(wrap_pyfunction!(gamma_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(mean_flow_h, m)?)?;
    m.add_function(wrap_pyfunction!(time_change_power, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_time_change_power, m)?)?;
    m.add_function(wrap_pyfunction!(time_change_exp, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_time_change_exp, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(in_boundary_band, m)?)?;
    m.add_function(wrap_pyfunction!(never_return_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(remaining_variance, m)?)?;
    m.add_function(wrap_pyfunction!(quadratic_variation, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_noise_variance, m)?)?;
    m.add_function(wrap_pyfunction!(wilson_interval, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_linear_exact, m)?)?;
    m.add_function(wrap_pyfunction!(run_cell, m)?)?;
    m.add_function(wrap_pyfunction!(run_check, m)?)?;
    Ok(())
}
