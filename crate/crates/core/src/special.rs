//! Modified Bessel function of the second kind, order zero.

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Crossover between the ascending series and the asymptotic expansion.
///
/// Below the cutoff the series cancellation error grows like `e^{2x}·ε`;
/// above it the asymptotic expansion truncated at its smallest term is
/// accurate to better than 1e-8. Both sides stay well inside 1e-7 relative
/// error at x = 9.
const SERIES_CUTOFF: f64 = 9.0;

/// `K_0(x)` for `x > 0`, relative error below 1e-7 on `[1e-6, 50]`.
pub fn bessel_k0(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(
            "x",
            format!("K_0 requires a positive finite argument, got {x}"),
        ));
    }
    if x < SERIES_CUTOFF {
        Ok(k0_series(x))
    } else {
        Ok(k0_asymptotic(x))
    }
}

/// Ascending series: `K_0(x) = -(ln(x/2) + γ) I_0(x) + Σ_{j>=1} (x²/4)^j / (j!)² H_j`.
fn k0_series(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut i0 = 1.0;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut sum = 0.0;
    for j in 1..200 {
        let jf = j as f64;
        term *= q / (jf * jf);
        harmonic += 1.0 / jf;
        i0 += term;
        let contrib = term * harmonic;
        sum += contrib;
        if contrib < 1e-18 * (sum.abs() + 1.0) {
            break;
        }
    }
    -( (x / 2.0).ln() + EULER_GAMMA) * i0 + sum
}

/// Asymptotic expansion `sqrt(π/(2x)) e^{-x} Σ t_k`, truncated at its
/// smallest term; `t_k = t_{k-1} · (-(2k-1)²) / (8kx)`.
fn k0_asymptotic(x: f64) -> f64 {
    let mut term: f64 = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(odd * odd) / (8.0 * kf * x);
        if term.abs() >= prev {
            break; // divergent tail of the asymptotic series
        }
        sum += term;
        prev = term.abs();
        if term.abs() < 1e-18 {
            break;
        }
    }
    (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn k0_reference_points() {
        // High-precision reference values.
        assert_relative_eq!(bessel_k0(1.0).unwrap(), 0.421_024_438_240_708_33, epsilon = 1e-9);
        assert_relative_eq!(
            bessel_k0(2.0).unwrap(),
            0.113_893_872_749_533_78,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            bessel_k0(5.0).unwrap(),
            3.691_098_334_042_594e-3,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            bessel_k0(50.0).unwrap(),
            3.410_167_749_789_496e-23,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            bessel_k0(1e-6).unwrap(),
            13.931_442_073_626_419,
            max_relative = 1e-12
        );
    }

    #[test]
    fn k0_small_argument_asymptotic() {
        // K_0(x) -> -ln(x/2) - γ as x -> 0.
        let x = 1e-4;
        let approx_val = -(x / 2.0f64).ln() - EULER_GAMMA;
        let exact = bessel_k0(x).unwrap();
        assert!(((exact - approx_val) / exact).abs() < 1e-3);
    }

    #[test]
    fn k0_strictly_decreasing() {
        assert!(bessel_k0(2.0).unwrap() < bessel_k0(1.0).unwrap());
        let mut prev = f64::INFINITY;
        let mut x = 1e-6;
        while x < 50.0 {
            let v = bessel_k0(x).unwrap();
            assert!(v > 0.0 && v < prev, "K_0 not decreasing at x={x}");
            prev = v;
            x *= 1.7;
        }
    }

    #[test]
    fn k0_continuous_at_cutoff() {
        let below = k0_series(SERIES_CUTOFF - 1e-9);
        let above = k0_asymptotic(SERIES_CUTOFF + 1e-9);
        assert_relative_eq!(below, above, max_relative = 1e-7);
    }

    #[test]
    fn k0_rejects_nonpositive() {
        assert!(bessel_k0(0.0).is_err());
        assert!(bessel_k0(-1.0).is_err());
        assert!(bessel_k0(f64::NAN).is_err());
    }
}
