//! Binomial intervals and two-sample moment comparisons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;
/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.5758293035489004;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && p <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> Interval {
    if n == 0 {
        return Interval { lo: 0.0, hi: 1.0 };
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).clamp(0.0, p) };
    let hi = if successes == n { 1.0 } else { (centre + half).clamp(p, 1.0) };
    Interval { lo, hi }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mean_a: f64,
    pub mean_b: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub z_mean: f64,
    pub z_var: f64,
    pub passed: bool,
}

fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for x in xs {
        let d2 = (x - mean) * (x - mean);
        m2 += d2;
        m4 += d2 * d2;
    }
    let var = if xs.len() > 1 { m2 / (n - 1.0) } else { 0.0 };
    (mean, var, m4 / n)
}

fn z_score(diff: f64, se: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else if se > 0.0 {
        diff / se
    } else {
        f64::INFINITY.copysign(diff)
    }
}

/// z-scores for the difference in means and in variances, passing at 4.
pub fn moment_compare(a: &[f64], b: &[f64]) -> Result<MomentReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("moment_compare needs two nonempty samples".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mean_a, var_a, m4_a) = moments(a);
    let (mean_b, var_b, m4_b) = moments(b);
    let se_mean = (var_a / na + var_b / nb).sqrt();
    let se_var = (((m4_a - var_a * var_a) / na).max(0.0) + ((m4_b - var_b * var_b) / nb).max(0.0)).sqrt();
    let z_mean = z_score(mean_a - mean_b, se_mean);
    let z_var = z_score(var_a - var_b, se_var);
    Ok(MomentReport {
        mean_a,
        mean_b,
        var_a,
        var_b,
        z_mean,
        z_var,
        passed: z_mean.abs() <= 4.0 && z_var.abs() <= 4.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::path_rng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn wilson_edges() {
        let i = wilson_interval(0, 100, Z95);
        assert_eq!(i.lo, 0.0);
        assert!(i.hi > 0.0 && i.hi < 0.05);
        let i = wilson_interval(100, 100, Z95);
        assert_eq!(i.hi, 1.0);
        let i = wilson_interval(50, 100, Z95);
        assert!((i.lo - 0.4038).abs() < 1e-4 && (i.hi - 0.5962).abs() < 1e-4);
    }

    #[test]
    fn wilson_shrinks_with_n() {
        for p in [0.01, 0.2, 0.5] {
            let n = 1000u64;
            let w1 = wilson_interval((p * n as f64) as u64, n, Z95).width();
            let w4 = wilson_interval((p * 4.0 * n as f64) as u64, 4 * n, Z95).width();
            assert!(w4 <= 0.6 * w1);
        }
    }

    #[test]
    fn moment_compare_cases() {
        let mut rng = path_rng(1);
        let a: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
        let r = moment_compare(&a, &a).unwrap();
        assert_eq!((r.z_mean, r.z_var), (0.0, 0.0));
        let b: Vec<f64> = (0..10_000).map(|_| 0.5 + rng.sample::<f64, _>(StandardNormal)).collect();
        assert!(!moment_compare(&a, &b).unwrap().passed);
        assert!(moment_compare(&a, &[]).is_err());
    }
}
