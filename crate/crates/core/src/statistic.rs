//! The U-statistic and its normalized form.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gram::GramBlocks;

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn strict_upper_sum(g: &DMatrix<f64>) -> f64 {
    let n = g.nrows();
    compensated_sum((0..n).flat_map(|i| ((i + 1)..n).map(move |j| g[(i, j)])))
}

/// Three-term U-statistic
///
/// `T = 2/(n1(n1-1)) Σ_{i<j} g11 + 2/(n2(n2-1)) Σ_{i<j} g22 - 2/(n1 n2) Σ g12`,
/// an unbiased estimator of `tr{(Σ1 - Σ2)^2}`.
pub fn compute_t(g: &GramBlocks, n1: usize, n2: usize) -> Result<f64> {
    if g.g11.shape() != (n1, n1) {
        return Err(Error::DimensionMismatch { expected: n1, found: g.g11.nrows() });
    }
    if g.g22.shape() != (n2, n2) {
        return Err(Error::DimensionMismatch { expected: n2, found: g.g22.nrows() });
    }
    if g.g12.shape() != (n1, n2) {
        return Err(Error::DimensionMismatch { expected: n2, found: g.g12.ncols() });
    }
    let (f1, f2) = (n1 as f64, n2 as f64);
    let within1 = strict_upper_sum(&g.g11) * 2.0 / (f1 * (f1 - 1.0));
    let within2 = strict_upper_sum(&g.g22) * 2.0 / (f2 * (f2 - 1.0));
    let cross = compensated_sum(g.g12.iter().copied()) * 2.0 / (f1 * f2);
    Ok(compensated_sum([within1, within2, -cross]))
}

/// `t / sqrt(k2_hat)`.
pub fn normalize_t(t: f64, k2_hat: f64) -> Result<f64> {
    if !(k2_hat > 0.0) {
        return Err(Error::NonpositiveVariance(k2_hat));
    }
    Ok(t / k2_hat.sqrt())
}
