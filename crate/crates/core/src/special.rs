//! Chi-square and standard normal tail functions.
//!
//! The regularized incomplete gamma function comes from `statrs` and the
//! complementary error function from `libm`; quantiles are obtained by bisection on the survival function
//! so that `sf(quantile(α)) = α` holds to working precision.

use statrs::function::gamma::{gamma_lr, gamma_ur};

/// `P(χ²_d <= x)` for real `d > 0`.
pub fn chi2_cdf(x: f64, d: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        gamma_lr(d / 2.0, x / 2.0)
    }
}

/// `P(χ²_d >= x)` for real `d > 0`.
pub fn chi2_sf(x: f64, d: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else {
        gamma_ur(d / 2.0, x / 2.0)
    }
}

/// Upper-`alpha` quantile of `χ²_d`, i.e. `q` with `P(χ²_d >= q) = alpha`.
pub fn chi2_upper_quantile(alpha: f64, d: f64) -> f64 {
    let mut hi = d + 10.0 * (2.0 * d).sqrt() + 10.0;
    while chi2_sf(hi, d) > alpha {
        hi *= 2.0;
    }
    invert_decreasing(|x| chi2_sf(x, d), alpha, 0.0, hi)
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal upper tail `1 - Φ(z)`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Upper-`alpha` quantile `z_α` of the standard normal.
pub fn normal_upper_quantile(alpha: f64) -> f64 {
    invert_decreasing(normal_sf, alpha, -40.0, 40.0)
}

/// Bisection for `f(x) = target` with `f` non-increasing on `[lo, hi]`.
fn invert_decreasing<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(lo.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}
