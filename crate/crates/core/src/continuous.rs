//! Continuous-time simulation: Wiener increments, Euler–Maruyama, the exact
//! sampler for the linear drift, coupled pairs and closed-form quadratic
//! variations.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DriftSpec, Frame, NoiseSchedule, ProcessSpec};
use crate::rng::{derive_seed, path_rng, PathRng};

/// Uniform time grid on `[t0, t_end]`. When `dt` does not divide the span the
/// last step is shorter than `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, dt: f64) -> Result<Self> {
        let grid = TimeGrid { t0, t_end, dt };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t0.is_finite() && self.t_end.is_finite() && self.t_end > self.t0) {
            return Err(Error::InvalidGrid(format!(
                "need finite t_end > t0, got [{}, {}]",
                self.t0, self.t_end
            )));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        let ratio = (self.t_end - self.t0) / self.dt;
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
            nearest as usize
        } else {
            ratio.ceil() as usize
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_steps() + 1
    }

    /// Whether the final step is shorter than `dt`.
    pub fn has_short_last_step(&self) -> bool {
        let n = self.n_steps();
        self.t_end - (self.t0 + (n - 1) as f64 * self.dt) < self.dt * (1.0 - 1e-9)
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i >= self.n_steps() {
            self.t_end
        } else {
            self.t0 + i as f64 * self.dt
        }
    }

    #[inline]
    pub fn step_len(&self, i: usize) -> f64 {
        if i + 1 >= self.n_steps() {
            self.t_end - self.node(i)
        } else {
            self.dt
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.node(i)).collect()
    }
}

/// One simulated path: the times, the state at each time and the seed that
/// produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub seed: u64,
    pub frame: Frame,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Independent `N(0, h_i)` increments on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    pub grid: TimeGrid,
    pub increments: Vec<f64>,
    pub seed: u64,
}

impl BrownianPath {
    pub fn generate(grid: TimeGrid, seed: u64) -> Result<Self> {
        grid.validate()?;
        let mut rng = path_rng(seed);
        let increments = (0..grid.n_steps())
            .map(|i| draw_increment(&mut rng, grid.step_len(i)))
            .collect();
        Ok(BrownianPath { grid, increments, seed })
    }

    /// Sums consecutive blocks of `factor` increments, giving the same Brownian
    /// path observed on a grid with step `factor * dt`.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.increments.len() % factor != 0 || self.grid.has_short_last_step() {
            return Err(Error::InvalidGrid(format!(
                "cannot coarsen {} steps by {factor}",
                self.increments.len()
            )));
        }
        let grid = TimeGrid::new(self.grid.t0, self.grid.t_end, self.grid.dt * factor as f64)?;
        let increments = self.increments.chunks(factor).map(|c| c.iter().sum()).collect();
        Ok(BrownianPath {
            grid,
            increments,
            seed: self.seed,
        })
    }
}

/// Wiener increments for a grid, deterministic in the seed.
pub fn brownian_increments(grid: TimeGrid, seed: u64) -> Result<BrownianPath> {
    BrownianPath::generate(grid, seed)
}

#[inline]
fn draw_increment(rng: &mut PathRng, h: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    h.sqrt() * z
}

#[inline]
fn em_step(spec: &ProcessSpec, t: f64, h: f64, x: f64, db: f64) -> f64 {
    let drift = spec.drift.eval(x) * spec.noise.drift_weight(t) * h;
    if spec.noiseless {
        x + drift
    } else {
        x + drift + spec.noise.amplitude(t) * db
    }
}

fn check_grid_start(spec: &ProcessSpec, grid: &TimeGrid) -> Result<()> {
    spec.validate()?;
    grid.validate()?;
    if spec.t0 != grid.t0 {
        return Err(Error::Mismatch(format!(
            "process starts at t0 = {} but grid starts at {}",
            spec.t0, grid.t0
        )));
    }
    Ok(())
}

/// Euler–Maruyama integration driven by a stored Brownian path.
pub fn simulate_em(spec: &ProcessSpec, grid: &TimeGrid, path: &BrownianPath) -> Result<Trajectory> {
    check_grid_start(spec, grid)?;
    if path.grid != *grid {
        return Err(Error::Mismatch("Brownian path was generated on a different grid".into()));
    }
    let mut values = Vec::with_capacity(grid.n_nodes());
    let mut x = spec.x0;
    values.push(x);
    for (i, &db) in path.increments.iter().enumerate() {
        x = em_step(spec, grid.node(i), grid.step_len(i), x, db);
        if !x.is_finite() {
            return Err(Error::NonFinite { step: i + 1, value: x });
        }
        values.push(x);
    }
    Ok(Trajectory {
        times: grid.times(),
        values,
        seed: path.seed,
        frame: spec.frame(),
    })
}

/// Generates the Brownian path for `seed` and integrates along it.
pub fn simulate_em_seeded(spec: &ProcessSpec, grid: &TimeGrid, seed: u64) -> Result<Trajectory> {
    let path = BrownianPath::generate(*grid, seed)?;
    simulate_em(spec, grid, &path)
}

/// Streaming Euler–Maruyama: draws increments on the fly (in the same order as
/// [`BrownianPath::generate`]) and hands every node `(index, t, x)` to `visit`.
/// Integration stops early when `visit` returns `false`.
pub fn run_em<V>(spec: &ProcessSpec, grid: &TimeGrid, seed: u64, mut visit: V) -> Result<()>
where
    V: FnMut(usize, f64, f64) -> bool,
{
    check_grid_start(spec, grid)?;
    let mut rng = path_rng(seed);
    let mut x = spec.x0;
    if !visit(0, grid.t0, x) {
        return Ok(());
    }
    let n = grid.n_steps();
    for i in 0..n {
        let h = grid.step_len(i);
        let db = draw_increment(&mut rng, h);
        x = em_step(spec, grid.node(i), h, x, db);
        if !x.is_finite() {
            return Err(Error::NonFinite { step: i + 1, value: x });
        }
        if !visit(i + 1, grid.node(i + 1), x) {
            break;
        }
    }
    Ok(())
}

/// Two Euler–Maruyama paths driven by the same Brownian increments.
pub fn simulate_coupled(
    spec_a: &ProcessSpec,
    spec_b: &ProcessSpec,
    grid: &TimeGrid,
    path: &BrownianPath,
) -> Result<(Trajectory, Trajectory)> {
    if spec_a.noise != spec_b.noise || spec_a.noiseless != spec_b.noiseless {
        return Err(Error::Mismatch(format!(
            "coupled processes need one noise schedule, got {:?} and {:?}",
            spec_a.noise, spec_b.noise
        )));
    }
    Ok((simulate_em(spec_a, grid, path)?, simulate_em(spec_b, grid, path)?))
}

/// Branch of the linear drift `k|x|` on which the SDE is explicitly solvable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearBranch {
    /// `dX = -kX dt + e^(-t/2) dB`, the dynamics while `X < 0`:
    /// `X_t = e^(-kt) (e^(ks) x_s + int_s^t e^(u(k-1/2)) dB_u)`.
    Negative,
    /// `dK = kK dt + e^(-t/2) dB`:
    /// `K_t = e^(kt) (e^(-ks) x_s + int_s^t e^(-u(k+1/2)) dB_u)`.
    Positive,
}

impl LinearBranch {
    /// Rate `r` of the stochastic integrand `e^(r u)`.
    fn integrand_rate(self, k: f64) -> f64 {
        match self {
            LinearBranch::Negative => k - 0.5,
            LinearBranch::Positive => -(k + 0.5),
        }
    }

    /// Sign of the exponent of the deterministic factor `e^(+-kt)`.
    fn factor_sign(self) -> f64 {
        match self {
            LinearBranch::Negative => -1.0,
            LinearBranch::Positive => 1.0,
        }
    }
}

/// Output of the exact linear sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSample {
    /// State at every query time (the Gaussian solution, not stopped).
    pub trajectory: Trajectory,
    /// Index of the first query time at or before which the path has crossed
    /// zero. Crossings strictly between query times are detected with the
    /// Brownian-bridge crossing probability, so the hit is exact in law.
    pub first_hit: Option<usize>,
}

impl ExactSample {
    /// The trajectory cut at the first crossing, where the explicit solution
    /// stops describing the `k|x|` dynamics.
    pub fn truncated(&self) -> Trajectory {
        let end = self.first_hit.map_or(self.trajectory.len(), |i| i + 1);
        Trajectory {
            times: self.trajectory.times[..end].to_vec(),
            values: self.trajectory.values[..end].to_vec(),
            seed: self.trajectory.seed,
            frame: self.trajectory.frame,
        }
    }
}

/// `int_a^b e^(rate u) du`, with the `rate -> 0` limit `b - a`.
pub fn exp_integral(rate: f64, a: f64, b: f64) -> f64 {
    if b == a {
        return 0.0;
    }
    if rate == 0.0 {
        return b - a;
    }
    if b.is_infinite() {
        return if rate < 0.0 { -(rate * a).exp() / rate } else { f64::INFINITY };
    }
    (rate * a).exp() * (rate * (b - a)).exp_m1() / rate
}

/// Samples the explicitly solvable linear SDE exactly at `times`.
///
/// The stochastic integral is advanced between consecutive query times with an
/// independent Gaussian of the exact incremental variance. Crossing detection
/// draws from a separate stream, so `values` do not depend on it.
pub fn simulate_linear_exact(
    k: f64,
    branch: LinearBranch,
    x_s: f64,
    s: f64,
    times: &[f64],
    seed: u64,
) -> Result<ExactSample> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("linear coefficient must be >= 0, got {k}")));
    }
    if !(s >= 0.0 && s.is_finite() && x_s.is_finite()) {
        return Err(Error::InvalidParameter(format!("need s >= 0 and finite x_s, got s={s}, x_s={x_s}")));
    }
    if times.iter().any(|&t| !(t >= s)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("query times must be sorted and >= s".into()));
    }

    let rate = 2.0 * branch.integrand_rate(k);
    let sign = branch.factor_sign();
    // state = e^(sign k t) * (initial + G_t)
    let initial = (-sign * k * s).exp() * x_s;

    let mut rng = path_rng(seed);
    let mut bridge_rng = path_rng(derive_seed(seed, 1));
    let mut g = 0.0;
    let mut prev_t = s;
    let mut first_hit = if x_s == 0.0 { Some(0) } else { None };
    let mut values = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let var = exp_integral(rate, prev_t, t);
        let prev_dist = initial + g;
        let z: f64 = rng.sample(StandardNormal);
        g += var.sqrt() * z;
        let dist = initial + g;
        if first_hit.is_none() && var > 0.0 {
            let crossed_at_node = dist == 0.0 || dist.signum() != initial.signum();
            let crossed_between = !crossed_at_node && {
                let p = (-2.0 * prev_dist.abs() * dist.abs() / var).exp();
                bridge_rng.random::<f64>() < p
            };
            if crossed_at_node || crossed_between {
                first_hit = Some(i);
            }
        }
        values.push((sign * k * (t - s)).exp() * x_s + (sign * k * t).exp() * g);
        prev_t = t;
    }
    Ok(ExactSample {
        trajectory: Trajectory {
            times: times.to_vec(),
            values,
            seed,
            frame: Frame::Exponential,
        },
        first_hit,
    })
}

/// `int_s^t u^p du` for `1 <= s <= t <= inf`.
fn power_integral(p: f64, s: f64, t: f64, integrand: impl FnOnce() -> String) -> Result<f64> {
    if t == s {
        return Ok(0.0);
    }
    if t.is_infinite() {
        if p >= -1.0 {
            return Err(Error::InfiniteVariance {
                integrand: integrand(),
                start: s,
            });
        }
        return Ok(-s.powf(p + 1.0) / (p + 1.0));
    }
    if p == -1.0 {
        return Ok((t / s).ln());
    }
    Ok((t.powf(p + 1.0) - s.powf(p + 1.0)) / (p + 1.0))
}

fn check_interval(s: f64, t: f64, min_s: f64) -> Result<()> {
    if !(s >= min_s && s.is_finite()) || !(t >= s) {
        return Err(Error::InvalidParameter(format!(
            "need {min_s} <= s <= t, got s={s}, t={t}"
        )));
    }
    Ok(())
}

/// Closed-form `int_s^t g(u)^2 du` for a noise schedule; `t` may be infinite.
pub fn quadratic_variation(schedule: &NoiseSchedule, s: f64, t: f64) -> Result<f64> {
    schedule.validate()?;
    match *schedule {
        NoiseSchedule::ExpHalf => {
            check_interval(s, t, 0.0)?;
            Ok(exp_integral(-1.0, s, t))
        }
        NoiseSchedule::PowerGamma { gamma } => {
            check_interval(s, t, 1.0)?;
            power_integral(-2.0 * gamma, s, t, || format!("u^(-{})", 2.0 * gamma))
        }
        NoiseSchedule::PowerTransformed { gamma } => {
            check_interval(s, t, 1.0)?;
            let p = -gamma / (1.0 - gamma);
            power_integral(p, s, t, || format!("u^({p})"))
        }
    }
}

/// Quadratic variation of the noise seen by the normalized coordinate
/// `Z = -X/h(t)` in the power frame: `int_s^t u^(2/(k-1) - gamma/(1-gamma)) du`.
/// Diverges at `t = inf` exactly when `gamma <= 1/2 + 1/(2k)`.
pub fn normalized_noise_variance(k: f64, gamma: f64, s: f64, t: f64) -> Result<f64> {
    crate::model::MeanFlowFrame::continuous(k)?;
    crate::model::check_gamma(gamma, false)?;
    check_interval(s, t, 1.0)?;
    let p = 2.0 / (k - 1.0) - gamma / (1.0 - gamma);
    power_integral(p, s, t, || format!("u^({p}) (normalized noise, k={k}, gamma={gamma})"))
}

/// Lipschitz bound of `x -> x + f(x) w dt` style updates for a drift on the
/// range visited by a set of trajectories.
pub fn drift_lipschitz(drift: &DriftSpec, max_abs: f64, max_weight: f64) -> f64 {
    drift.lipschitz_on(max_abs) * max_weight
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DriftSpec, NoiseSchedule};
    use approx::assert_relative_eq;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn grid_counts_and_short_step() {
        let g = TimeGrid::new(0.0, 1.0, 0.1).unwrap();
        assert_eq!(g.n_steps(), 10);
        assert!(!g.has_short_last_step());
        assert_eq!(g.node(10), 1.0);
        let g = TimeGrid::new(1.0, 2.05, 0.1).unwrap();
        assert_eq!(g.n_steps(), 11);
        assert!(g.has_short_last_step());
        assert_relative_eq!(g.step_len(10), 0.05, epsilon = 1e-12);
        assert!(TimeGrid::new(0.0, 1.0, 0.0).is_err());
        assert!(TimeGrid::new(0.0, 1.0, -0.1).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn increments_have_unit_variance() {
        let g = TimeGrid::new(0.0, 1e6, 1.0).unwrap();
        let p = brownian_increments(g, 11).unwrap();
        let (m, v) = mean_var(&p.increments);
        assert!((0.99..=1.01).contains(&v), "variance {v}");
        // mean within 4 standard errors
        assert!(m.abs() < 4.0 / 1e3, "mean {m}");
    }

    #[test]
    fn increments_are_deterministic_and_seed_independent() {
        let g = TimeGrid::new(0.0, 1e5, 1.0).unwrap();
        let a = brownian_increments(g, 1).unwrap();
        assert_eq!(a, brownian_increments(g, 1).unwrap());
        let b = brownian_increments(g, 2).unwrap();
        let n = a.increments.len() as f64;
        let corr = a.increments.iter().zip(&b.increments).map(|(x, y)| x * y).sum::<f64>() / n;
        assert!(corr.abs() < 4.0 / n.sqrt(), "corr {corr}");
    }

    #[test]
    fn coarsen_sums_blocks() {
        let g = TimeGrid::new(0.0, 1.0, 0.25).unwrap();
        let p = brownian_increments(g, 3).unwrap();
        let c = p.coarsen(2).unwrap();
        assert_eq!(c.grid.n_steps(), 2);
        assert_eq!(c.increments[0], p.increments[0] + p.increments[1]);
        assert!(p.coarsen(3).is_err());
    }

    #[test]
    fn zero_noise_monomial_matches_ode() {
        // dx = x^2 dt from x(0) = -1: x(t) = -1/(1+t)
        let drift = DriftSpec::unit_monomial(2.0).unwrap();
        let spec = ProcessSpec {
            drift,
            noise: NoiseSchedule::PowerTransformed { gamma: 0.9 },
            t0: 0.0,
            x0: -1.0,
            noiseless: true,
        };
        let grid = TimeGrid::new(0.0, 1.0, 1e-4).unwrap();
        let traj = simulate_em_seeded(&spec, &grid, 5).unwrap();
        assert!((traj.last().unwrap() + 0.5).abs() < 1e-3);
    }

    #[test]
    fn zero_noise_linear_matches_ode() {
        // dx = 0.8|x| dt from -1: x(t) = -e^(-0.8 t)
        let spec = ProcessSpec::new(DriftSpec::linear(0.8).unwrap(), NoiseSchedule::ExpHalf, 0.0, -1.0)
            .unwrap()
            .without_noise()
            .unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 1e-4).unwrap();
        let traj = simulate_em_seeded(&spec, &grid, 5).unwrap();
        assert!((traj.last().unwrap() + (-0.8f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn em_error_halves_with_dt() {
        // strong order 1 on the noise-free reduction
        let spec = ProcessSpec {
            drift: DriftSpec::unit_monomial(2.0).unwrap(),
            noise: NoiseSchedule::PowerTransformed { gamma: 0.8 },
            t0: 0.0,
            x0: -1.0,
            noiseless: true,
        };
        let exact = -0.5;
        let mut prev = None;
        for dt in [1e-2, 5e-3, 2.5e-3, 1.25e-3] {
            let grid = TimeGrid::new(0.0, 1.0, dt).unwrap();
            let err = (simulate_em_seeded(&spec, &grid, 0).unwrap().last().unwrap() - exact).abs();
            if let Some(p) = prev {
                let ratio = err / p;
                assert!((0.4..=0.6).contains(&ratio), "ratio {ratio}");
            }
            prev = Some(err);
        }
    }

    #[test]
    fn streaming_matches_stored_path() {
        let spec = ProcessSpec::new(
            DriftSpec::unit_monomial(2.0).unwrap(),
            NoiseSchedule::PowerTransformed { gamma: 0.7 },
            1.0,
            -0.3,
        )
        .unwrap();
        let grid = TimeGrid::new(1.0, 5.0, 1e-3).unwrap();
        let traj = simulate_em_seeded(&spec, &grid, 99).unwrap();
        let mut streamed = Vec::new();
        run_em(&spec, &grid, 99, |_, _, x| {
            streamed.push(x);
            true
        })
        .unwrap();
        assert_eq!(traj.values, streamed);
    }

    #[test]
    fn em_rejects_mismatched_grid() {
        let spec = ProcessSpec::new(DriftSpec::linear(0.8).unwrap(), NoiseSchedule::ExpHalf, 0.0, -1.0).unwrap();
        let g1 = TimeGrid::new(0.0, 1.0, 0.01).unwrap();
        let g2 = TimeGrid::new(0.0, 1.0, 0.02).unwrap();
        let p = brownian_increments(g2, 0).unwrap();
        assert!(matches!(simulate_em(&spec, &g1, &p), Err(Error::Mismatch(_))));
        let g3 = TimeGrid::new(1.0, 2.0, 0.01).unwrap();
        assert!(simulate_em_seeded(&spec, &g3, 0).is_err());
    }

    #[test]
    fn non_finite_state_is_reported() {
        // an absurd cap lets the quadratic drift blow up
        let spec = ProcessSpec::new(
            DriftSpec::monomial(2.0, 1.0, 1e300).unwrap(),
            NoiseSchedule::PowerTransformed { gamma: 0.6 },
            1.0,
            10.0,
        )
        .unwrap();
        let grid = TimeGrid::new(1.0, 10.0, 0.5).unwrap();
        match simulate_em_seeded(&spec, &grid, 0) {
            Err(Error::NonFinite { step, .. }) => assert!(step >= 1),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn coupled_identical_specs_give_identical_paths() {
        let spec = ProcessSpec::new(DriftSpec::linear(0.8).unwrap(), NoiseSchedule::ExpHalf, 0.0, -0.5).unwrap();
        let grid = TimeGrid::new(0.0, 5.0, 1e-3).unwrap();
        let path = brownian_increments(grid, 17).unwrap();
        let (a, b) = simulate_coupled(&spec, &spec, &grid, &path).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn coupled_rejects_different_schedules() {
        let d = DriftSpec::unit_monomial(2.0).unwrap();
        let a = ProcessSpec::new(d, NoiseSchedule::PowerTransformed { gamma: 0.7 }, 1.0, -0.5).unwrap();
        let b = ProcessSpec::new(d, NoiseSchedule::PowerTransformed { gamma: 0.8 }, 1.0, -0.5).unwrap();
        let grid = TimeGrid::new(1.0, 2.0, 1e-2).unwrap();
        let path = brownian_increments(grid, 0).unwrap();
        assert!(simulate_coupled(&a, &b, &grid, &path).is_err());
    }

    #[test]
    fn coupled_offset_preserved_without_drift_difference() {
        // Identical drift, starts 1 apart. Linear drift contracts or expands the
        // gap, but never lets the paths cross.
        let grid = TimeGrid::new(0.0, 5.0, 1e-3).unwrap();
        let path = brownian_increments(grid, 4).unwrap();
        let d = DriftSpec::linear(0.3).unwrap();
        let a = ProcessSpec::new(d, NoiseSchedule::ExpHalf, 0.0, 0.5).unwrap();
        let b = ProcessSpec::new(d, NoiseSchedule::ExpHalf, 0.0, -0.5).unwrap();
        let (ta, tb) = simulate_coupled(&a, &b, &grid, &path).unwrap();
        assert!(ta.values.iter().zip(&tb.values).all(|(x, y)| x > y));
    }

    #[test]
    fn exact_sampler_identity_at_start() {
        let s = simulate_linear_exact(0.3, LinearBranch::Negative, -0.7, 2.0, &[2.0, 2.0], 1).unwrap();
        assert_eq!(s.trajectory.values, vec![-0.7, -0.7]);
        assert_eq!(s.first_hit, None);
    }

    #[test]
    fn exact_sampler_negative_branch_moments() {
        let k = 0.3;
        let t = 2.0;
        let x_s = -0.5;
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|i| simulate_linear_exact(k, LinearBranch::Negative, x_s, 0.0, &[t], i).unwrap().trajectory.values[0])
            .collect();
        let (m, v) = mean_var(&xs);
        let mean = (-k * t).exp() * x_s;
        let var = (-2.0 * k * t).exp() * ((2.0 * t * (k - 0.5)).exp() - 1.0) / (2.0 * k - 1.0);
        assert!((m - mean).abs() < 4.0 * (var / n as f64).sqrt(), "mean {m} vs {mean}");
        assert!(((v - var) / var).abs() < 0.02, "var {v} vs {var}");
    }

    #[test]
    fn exact_sampler_half_rate_limit() {
        // k = 1/2 on the negative branch: variance e^(-t) (t - s)
        let n = 50_000;
        let xs: Vec<f64> = (0..n)
            .map(|i| simulate_linear_exact(0.5, LinearBranch::Negative, 0.0, 0.0, &[3.0], i).unwrap().trajectory.values[0])
            .collect();
        let (_, v) = mean_var(&xs);
        let var = (-3.0f64).exp() * 3.0;
        assert!(((v - var) / var).abs() < 0.03, "var {v} vs {var}");
    }

    #[test]
    fn exact_sampler_joint_vs_restart() {
        let k = 0.3;
        let (t1, t2) = (1.0, 2.5);
        let n = 10_000u64;
        let joint: Vec<f64> = (0..n)
            .map(|i| simulate_linear_exact(k, LinearBranch::Negative, -0.5, 0.0, &[t1, t2], i).unwrap().trajectory.values[1])
            .collect();
        let restart: Vec<f64> = (0..n)
            .map(|i| {
                let a = simulate_linear_exact(k, LinearBranch::Negative, -0.5, 0.0, &[t1], 1_000_000 + i).unwrap();
                let x1 = a.trajectory.values[0];
                simulate_linear_exact(k, LinearBranch::Negative, x1, t1, &[t2], 2_000_000 + i).unwrap().trajectory.values[0]
            })
            .collect();
        let (ma, va) = mean_var(&joint);
        let (mb, vb) = mean_var(&restart);
        let se_m = ((va + vb) / n as f64).sqrt();
        assert!((ma - mb).abs() < 4.0 * se_m, "means {ma} {mb}");
        let se_v = (2.0 * (va * va + vb * vb) / n as f64).sqrt();
        assert!((va - vb).abs() < 4.0 * se_v, "vars {va} {vb}");
    }

    #[test]
    fn exact_sampler_truncates_at_crossing() {
        let times: Vec<f64> = (1..=300).map(|i| i as f64 * 0.1).collect();
        let mut hits = 0;
        for seed in 0..200 {
            let s = simulate_linear_exact(0.8, LinearBranch::Negative, -0.05, 0.0, &times, seed).unwrap();
            let tr = s.truncated();
            if let Some(i) = s.first_hit {
                hits += 1;
                assert_eq!(tr.len(), i + 1);
                assert!(tr.values[..i].iter().all(|&v| v < 0.0));
            } else {
                assert!(s.trajectory.values.iter().all(|&v| v < 0.0));
            }
        }
        // k > 1/2: the negative branch reaches zero almost surely
        assert!(hits >= 195, "hits {hits}");
    }

    #[test]
    fn quadratic_variation_examples() {
        assert_relative_eq!(quadratic_variation(&NoiseSchedule::ExpHalf, 0.0, f64::INFINITY).unwrap(), 1.0);
        assert_eq!(quadratic_variation(&NoiseSchedule::ExpHalf, 2.0, 2.0).unwrap(), 0.0);
        assert_relative_eq!(
            quadratic_variation(&NoiseSchedule::ExpHalf, 1.0, 3.0).unwrap(),
            (-1.0f64).exp() - (-3.0f64).exp(),
            max_relative = 1e-14
        );
        let pt = NoiseSchedule::PowerTransformed { gamma: 0.9 };
        assert_relative_eq!(quadratic_variation(&pt, 1.0, f64::INFINITY).unwrap(), 0.125, max_relative = 1e-12);
        let pg = NoiseSchedule::PowerGamma { gamma: 0.75 };
        assert_relative_eq!(quadratic_variation(&pg, 1.0, f64::INFINITY).unwrap(), 2.0, max_relative = 1e-12);
        assert!(quadratic_variation(&pt, 0.5, 2.0).is_err());
    }

    /// Composite Simpson rule, used as an independent check of the antiderivatives.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn quadratic_variation_matches_quadrature() {
        for gamma in [0.55, 0.7, 0.9] {
            for s in [NoiseSchedule::PowerGamma { gamma }, NoiseSchedule::PowerTransformed { gamma }, NoiseSchedule::ExpHalf] {
                let closed = quadratic_variation(&s, 1.5, 7.0).unwrap();
                let quad = simpson(|u| s.amplitude(u).powi(2), 1.5, 7.0, 20_000);
                assert_relative_eq!(closed, quad, max_relative = 1e-9);
            }
        }
        // infinite horizon for gamma = 0.9: u^-9 integrated far enough is exact to 1e-12
        let pt = NoiseSchedule::PowerTransformed { gamma: 0.9 };
        let quad = simpson(|u| pt.amplitude(u).powi(2), 1.0, 60.0, 400_000);
        assert_relative_eq!(quad, 0.125, max_relative = 1e-9);
    }

    #[test]
    fn normalized_noise_diverges_iff_subcritical() {
        for &(k, gamma) in &[(2.0, 0.6), (2.0, 0.75), (3.0, 0.6), (1.5, 0.8)] {
            assert!(
                matches!(normalized_noise_variance(k, gamma, 1.0, f64::INFINITY), Err(Error::InfiniteVariance { .. })),
                "k={k} gamma={gamma}"
            );
        }
        for &(k, gamma) in &[(2.0, 0.8), (3.0, 0.7), (1.5, 0.9)] {
            assert!(normalized_noise_variance(k, gamma, 1.0, f64::INFINITY).unwrap() > 0.0);
        }
    }

    #[test]
    fn exp_integral_limits() {
        assert_eq!(exp_integral(0.0, 1.0, 3.0), 2.0);
        assert_relative_eq!(exp_integral(1e-12, 1.0, 3.0), 2.0, max_relative = 1e-9);
        assert_relative_eq!(exp_integral(-2.0, 0.0, f64::INFINITY), 0.5);
        assert!(exp_integral(0.5, 0.0, f64::INFINITY).is_infinite());
    }
}
