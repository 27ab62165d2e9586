//! Three-cumulant matched chi-square approximation.
//!
//! The null law of the statistic is approximated by `β0 + β1 χ²_d` with the
//! mean, variance and third central moment matched:
//!
//! ```text
//! β0 = -2 K2^2 / K3,   β1 = K3 / (4 K2),   d = 8 K2^3 / K3^2
//! ```
//!
//! Since the matched mean is zero, `β0 + β1 d = 0`, and the skewness of the
//! reference is `sqrt(8 / d)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{chi2_sf, chi2_upper_quantile, normal_sf};

/// Default `d` above which a plain normal reference is considered adequate
/// (skewness `sqrt(8/50) = 0.4`).
pub const DEFAULT_NORMALITY_THRESHOLD: f64 = 50.0;

/// Parameters of the reference `β0 + β1 χ²_d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxParams {
    pub beta0: f64,
    pub beta1: f64,
    pub d: f64,
}

impl ApproxParams {
    fn check(&self) -> Result<()> {
        if !(self.beta1 > 0.0 && self.beta1.is_finite()) {
            return Err(Error::InvalidParams(format!("beta1 = {} must be positive", self.beta1)));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::InvalidParams(format!("d = {} must be positive", self.d)));
        }
        if !self.beta0.is_finite() {
            return Err(Error::InvalidParams(format!("beta0 = {} must be finite", self.beta0)));
        }
        Ok(())
    }

    /// Skewness of the reference distribution, `8 β1^3 d / (2 β1^2 d)^{3/2}`.
    pub fn skewness(&self) -> f64 {
        8.0 * self.beta1.powi(3) * self.d / (2.0 * self.beta1 * self.beta1 * self.d).powf(1.5)
    }
}

/// Result of cumulant matching.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Calibration {
    ThreeCumulant(ApproxParams),
    /// `K̂3 <= 0`: the chi-square family cannot match a non-positive skewness,
    /// so the `d -> ∞` limit (standard normal on the normalized statistic) is used.
    NormalFallback,
}

/// Matches `(K2, K3)` to `(β0, β1, d)`.
pub fn match_params(k2: f64, k3: f64) -> Result<Calibration> {
    if !(k2 > 0.0) || !k2.is_finite() {
        return Err(Error::NonpositiveVariance(k2));
    }
    if !(k3 > 0.0) || !k3.is_finite() {
        return Ok(Calibration::NormalFallback);
    }
    Ok(Calibration::ThreeCumulant(ApproxParams {
        beta0: -2.0 * k2 * k2 / k3,
        beta1: k3 / (4.0 * k2),
        d: 8.0 * k2 * k2 * k2 / (k3 * k3),
    }))
}

/// `P{χ²_d >= (t - β0) / β1}`.
pub fn p_value(t: f64, params: &ApproxParams) -> Result<f64> {
    params.check()?;
    let x = (t - params.beta0) / params.beta1;
    if x <= 0.0 {
        return Ok(1.0);
    }
    Ok(chi2_sf(x, params.d))
}

/// `P{χ²_d >= d + sqrt(2d) t̃}` for the normalized statistic.
pub fn p_value_normalized(t_tilde: f64, d: f64) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidParams(format!("d = {d} must be positive")));
    }
    let x = d + (2.0 * d).sqrt() * t_tilde;
    if x <= 0.0 {
        return Ok(1.0);
    }
    Ok(chi2_sf(x, d))
}

/// `β0 + β1 χ²_d(α)` where `χ²_d(α)` is the upper-α quantile.
pub fn critical_value(params: &ApproxParams, alpha: f64) -> Result<f64> {
    params.check()?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParams(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    Ok(params.beta0 + params.beta1 * chi2_upper_quantile(alpha, params.d))
}

/// `1 - Φ(t̃)`.
pub fn normal_fallback_p(t_tilde: f64) -> f64 {
    normal_sf(t_tilde)
}

/// How far the reference is from normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityDiagnostic {
    pub d: f64,
    pub skewness: f64,
    pub normal_adequate: bool,
}

/// Reports `d`, the skewness `sqrt(8/d)` and whether `d >= threshold`.
pub fn normality_diagnostic(d: f64, threshold: f64) -> Result<NormalityDiagnostic> {
    if !(d > 0.0) {
        return Err(Error::InvalidParams(format!("d = {d} must be positive")));
    }
    Ok(NormalityDiagnostic { d, skewness: (8.0 / d).sqrt(), normal_adequate: d >= threshold })
}
