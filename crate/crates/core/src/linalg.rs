//! Small dense helpers on top of nalgebra.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative tolerance below which negative eigenvalues count as rounding noise.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Eigenvalues of a symmetric matrix, sorted descending and clipped at zero.
///
/// Fails with [`Error::NotPsd`] when an eigenvalue is below
/// `-PSD_TOLERANCE * max |λ|`.
pub fn psd_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let mut values: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    clip_psd(&mut values)?;
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

fn clip_psd(values: &mut [f64]) -> Result<()> {
    let scale = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOLERANCE * scale {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    values.iter_mut().for_each(|v| *v = v.max(0.0));
    Ok(())
}

/// Symmetric square root `V diag(sqrt λ) Vᵀ` of a PSD matrix.
pub fn sym_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = m.clone().symmetric_eigen();
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    clip_psd(&mut values)?;
    let v = &eig.eigenvectors;
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * values[j].sqrt());
    let root = &scaled * v.transpose();
    Ok((&root + root.transpose()) * 0.5)
}
