//! Pathwise ordering of coupled trajectories.

use serde::{Deserialize, Serialize};

use crate::continuous::Trajectory;
use crate::error::{Error, Result};
use crate::model::DriftSpec;

/// Largest `dt * Lip(f) * w` for which the Euler map `x -> x + f(x) w dt` is
/// treated as safely order preserving.
pub const MONOTONE_STEP_BOUND: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    /// Number of nodes where `lower > upper`.
    pub violations: usize,
    pub first_violation: Option<usize>,
    /// Both paths are identical.
    pub tie: bool,
    /// `dt * Lip * w_max` for the steeper drift.
    pub step_lipschitz: f64,
    /// `MONOTONE_STEP_BOUND - step_lipschitz`; negative means the
    /// monotonicity precondition is violated.
    pub margin: f64,
    pub precondition_ok: bool,
}

/// `dt * max(Lip f_a, Lip f_b) * w_max` on `[-max_abs, max_abs]`.
pub fn step_lipschitz(a: &DriftSpec, b: &DriftSpec, max_abs: f64, max_weight: f64, dt: f64) -> f64 {
    dt * max_weight * a.lipschitz_on(max_abs).max(b.lipschitz_on(max_abs))
}

/// Checks `upper >= lower` at every shared node.
pub fn verify_dominance(upper: &Trajectory, lower: &Trajectory, step_lipschitz: f64) -> Result<DominanceReport> {
    if upper.times != lower.times {
        return Err(Error::Mismatch("coupled trajectories must share one grid".into()));
    }
    let mut violations = 0;
    let mut first_violation = None;
    for (i, (u, l)) in upper.values.iter().zip(&lower.values).enumerate() {
        if l > u {
            violations += 1;
            first_violation.get_or_insert(i);
        }
    }
    Ok(DominanceReport {
        violations,
        first_violation,
        tie: upper.values == lower.values,
        step_lipschitz,
        margin: MONOTONE_STEP_BOUND - step_lipschitz,
        precondition_ok: step_lipschitz <= MONOTONE_STEP_BOUND,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuous::{brownian_increments, simulate_coupled, TimeGrid};
    use crate::model::{NoiseSchedule, ProcessSpec};

    #[test]
    fn identical_paths_tie() {
        let spec = ProcessSpec::new(DriftSpec::linear(0.5).unwrap(), NoiseSchedule::ExpHalf, 0.0, -0.5).unwrap();
        let grid = TimeGrid::new(0.0, 2.0, 1e-3).unwrap();
        let path = brownian_increments(grid, 0).unwrap();
        let (a, b) = simulate_coupled(&spec, &spec, &grid, &path).unwrap();
        let r = verify_dominance(&a, &b, 5e-4).unwrap();
        assert!(r.tie && r.violations == 0 && r.precondition_ok);
    }

    #[test]
    fn oversized_step_flags_precondition() {
        let a = DriftSpec::linear(0.8).unwrap();
        let b = DriftSpec::linear(0.3).unwrap();
        let lip = step_lipschitz(&a, &b, 10.0, 1.0, 2.0);
        let spec_a = ProcessSpec::new(a, NoiseSchedule::ExpHalf, 0.0, -0.5).unwrap();
        let spec_b = ProcessSpec::new(b, NoiseSchedule::ExpHalf, 0.0, -0.5).unwrap();
        let grid = TimeGrid::new(0.0, 20.0, 2.0).unwrap();
        let path = brownian_increments(grid, 1).unwrap();
        let (ta, tb) = simulate_coupled(&spec_a, &spec_b, &grid, &path).unwrap();
        let r = verify_dominance(&ta, &tb, lip).unwrap();
        assert!(!r.precondition_ok && r.margin < 0.0);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let t = |times: Vec<f64>| Trajectory {
            values: vec![0.0; times.len()],
            times,
            seed: 0,
            frame: crate::model::Frame::Raw,
        };
        assert!(verify_dominance(&t(vec![0.0, 1.0]), &t(vec![0.0, 2.0]), 0.0).is_err());
    }
}
