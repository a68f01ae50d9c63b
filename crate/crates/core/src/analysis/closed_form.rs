//! Closed-form probabilities and variances for the linear drift.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Probability that the linear process `dX = k|X| dt + e^(-t/2) dB`, started
/// at `x_s < 0` at time `s`, ever reaches zero when `k < 1/2`:
/// `2 P(N(0, sigma^2) > -e^(ks) x_s)` with `sigma^2 = e^(2s(k-1/2)) / (1-2k)`.
pub fn never_return_alpha(k: f64, s: f64, x_s: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&k) {
        return Err(Error::Hypothesis {
            param: "k",
            value: k,
            hypothesis: "0 <= k < 1/2; for k >= 1/2 zero is reached almost surely",
        });
    }
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("start time must be >= 0, got {s}")));
    }
    if !(x_s < 0.0) {
        return Err(Error::InvalidParameter(format!("start state must be negative, got {x_s}")));
    }
    let sigma = ((2.0 * s * (k - 0.5)).exp() / (1.0 - 2.0 * k)).sqrt();
    let level = -(k * s).exp() * x_s;
    // 2 P(N(0,1) > a) = erfc(a / sqrt 2)
    Ok(erfc(level / (sigma * std::f64::consts::SQRT_2)))
}

/// Variance of `int_s^inf e^(-u(k+1/2)) dB_u`, i.e. `e^(-s(2k+1)) / (2k+1)`.
pub fn remaining_variance(k: f64, s: f64) -> Result<f64> {
    if !(k > -0.5 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("need k > -1/2, got {k}")));
    }
    if !(s >= 0.0) {
        return Err(Error::InvalidParameter(format!("start time must be >= 0, got {s}")));
    }
    Ok((-s * (2.0 * k + 1.0)).exp() / (2.0 * k + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn alpha_examples() {
        assert_relative_eq!(never_return_alpha(0.0, 0.0, -1.0).unwrap(), 0.317_310_507_862_914, max_relative = 1e-9);
        assert!(never_return_alpha(0.3, 0.0, -1e-12).unwrap() > 0.999_999);
        assert!(never_return_alpha(0.3, 0.0, -50.0).unwrap() < 1e-100);
        assert!(never_return_alpha(0.5, 0.0, -1.0).is_err());
        assert!(never_return_alpha(0.3, 0.0, 0.0).is_err());
    }

    #[test]
    fn alpha_monotone_and_continuous() {
        let mut prev = 0.0;
        for i in 1..=100 {
            let x = -5.0 + 0.0499 * i as f64;
            let a = never_return_alpha(0.3, 1.0, x).unwrap();
            assert!(a > prev);
            prev = a;
        }
        for i in 0..100 {
            let k = 0.49 * i as f64 / 100.0;
            let a = never_return_alpha(k, 0.5, -0.5).unwrap();
            let b = never_return_alpha(k + 1e-7, 0.5, -0.5).unwrap();
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn remaining_variance_examples() {
        assert_relative_eq!(remaining_variance(0.3, 0.0).unwrap(), 0.625, max_relative = 1e-15);
        assert!(remaining_variance(0.3, 800.0).unwrap() < 1e-300);
        assert!(remaining_variance(-0.6, 0.0).is_err());
    }
}
