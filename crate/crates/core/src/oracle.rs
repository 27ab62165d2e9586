//! Reference computations used to validate the Gram pipeline.
//!
//! Everything here works on explicit `p²`-dimensional induced vectors and
//! dense `p² × p²` matrices, so it is limited to `p <= MAX_EXPLICIT_P`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{psd_eigenvalues, sym_sqrt};
use crate::model::{validate_pair, Method, SampleBlock, TestReport};
use crate::rng::stream;
use crate::sim::{gen_innovation, Innovation};
use crate::special::{chi2_sf, normal_sf};

/// Largest `p` accepted by the explicit routes.
pub const MAX_EXPLICIT_P: usize = 12;

fn check_dimension(p: usize) -> Result<()> {
    if p > MAX_EXPLICIT_P {
        return Err(Error::DimensionTooLarge { p, max: MAX_EXPLICIT_P });
    }
    Ok(())
}

/// Rows `y_j ⊗ y_j`; entry `a p + b` of a row is `y_a y_b`.
pub fn explicit_induced(x: &SampleBlock) -> Result<DMatrix<f64>> {
    let p = x.p();
    check_dimension(p)?;
    Ok(DMatrix::from_fn(x.n(), p * p, |j, ab| x.get(j, ab / p) * x.get(j, ab % p)))
}

fn row_mean(w: &DMatrix<f64>) -> DVector<f64> {
    let n = w.nrows() as f64;
    DVector::from_fn(w.ncols(), |c, _| w.column(c).sum() / n)
}

/// Sample covariance of the rows of `w`, `p² × p²`.
fn explicit_covariance(w: &DMatrix<f64>) -> DMatrix<f64> {
    let mean = row_mean(w);
    let mut centered = w.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    centered.transpose() * &centered / (w.nrows() as f64 - 1.0)
}

/// `Σ_{i≠j} w_iᵀ w_j / (n (n-1))` via `|Σ w_i|² - Σ |w_i|²`.
fn off_diagonal_mean(w: &DMatrix<f64>) -> f64 {
    let n = w.nrows() as f64;
    let total: DVector<f64> = DVector::from_fn(w.ncols(), |c, _| w.column(c).sum());
    let diag: f64 = w.row_iter().map(|r| r.norm_squared()).sum();
    (total.norm_squared() - diag) / (n * (n - 1.0))
}

/// The whole test recomputed from explicit induced vectors and `Ω̂` matrices.
pub fn brute_force_report(x: &SampleBlock, y: &SampleBlock, center: bool) -> Result<TestReport> {
    validate_pair(x, y)?;
    check_dimension(x.p())?;
    let demean = |s: &SampleBlock| -> SampleBlock {
        if !center {
            return s.clone();
        }
        let n = s.n() as f64;
        let means: Vec<f64> = (0..s.p()).map(|k| s.rows().map(|r| r[k]).sum::<f64>() / n).collect();
        let data = s.rows().flat_map(|r| r.iter().zip(&means).map(|(v, m)| v - m)).collect();
        SampleBlock::new(s.n(), s.p(), data).expect("finite input stays finite")
    };
    let (x, y) = (demean(x), demean(y));
    let w1 = explicit_induced(&x)?;
    let w2 = explicit_induced(&y)?;
    let (n1, n2) = (w1.nrows() as f64, w2.nrows() as f64);

    let cross = (row_mean(&w1).transpose() * row_mean(&w2))[(0, 0)];
    let statistic = off_diagonal_mean(&w1) + off_diagonal_mean(&w2) - 2.0 * cross;

    let o1 = explicit_covariance(&w1);
    let o2 = explicit_covariance(&w2);
    let tr = |m: &DMatrix<f64>| m.trace();
    let o1sq = &o1 * &o1;
    let o2sq = &o2 * &o2;

    let sq_hat = |n: f64, o: &DMatrix<f64>, osq: &DMatrix<f64>| {
        (n - 1.0).powi(2) / ((n - 2.0) * (n + 1.0)) * (tr(osq) - tr(o).powi(2) / (n - 1.0))
    };
    let cu_hat = |group: usize, n: f64, o: &DMatrix<f64>, osq: &DMatrix<f64>| -> Result<f64> {
        if n <= 3.0 {
            return Err(Error::DegenerateSampleSize { group, n: n as usize });
        }
        let a = tr(o);
        let b = tr(osq);
        let c = tr(&(osq * o));
        Ok((n - 1.0).powi(4) / ((n * n + n - 6.0) * (n * n - 2.0 * n - 3.0))
            * (c - 3.0 * a * b / (n - 1.0) + 2.0 * a.powi(3) / (n - 1.0).powi(2)))
    };

    let t1sq = sq_hat(n1, &o1, &o1sq);
    let t2sq = sq_hat(n2, &o2, &o2sq);
    let t12 = tr(&(&o1 * &o2));
    let t1cu = cu_hat(1, n1, &o1, &o1sq)?;
    let t2cu = cu_hat(2, n2, &o2, &o2sq)?;
    let t1sq_2 =
        (n1 - 1.0) / ((n1 - 2.0) * (n1 + 1.0)) * ((n1 - 1.0) * tr(&(&o1sq * &o2)) - t12 * tr(&o1));
    let t1_2sq =
        (n2 - 1.0) / ((n2 - 2.0) * (n2 + 1.0)) * ((n2 - 1.0) * tr(&(&o1 * &o2sq)) - t12 * tr(&o2));

    let k2 = 2.0 * (t1sq / (n1 * (n1 - 1.0)) + 2.0 * t12 / (n1 * n2) + t2sq / (n2 * (n2 - 1.0)));
    let k3 = 8.0
        * ((n1 - 2.0) * t1cu / (n1 * n1 * (n1 - 1.0).powi(2))
            + 3.0 * t1sq_2 / (n1 * n1 * n2)
            + 3.0 * t1_2sq / (n1 * n2 * n2)
            + (n2 - 2.0) * t2cu / (n2 * n2 * (n2 - 1.0).powi(2)));
    if !(k2 > 0.0) || !k2.is_finite() {
        return Err(Error::NonpositiveVariance(k2));
    }
    let normalized_statistic = statistic / k2.sqrt();

    let (beta0, beta1, d, p_value, method) = if k3 > 0.0 && k3.is_finite() {
        let beta0 = -2.0 * k2 * k2 / k3;
        let beta1 = k3 / (4.0 * k2);
        let d = 8.0 * k2.powi(3) / (k3 * k3);
        let q = (statistic - beta0) / beta1;
        let p = if q <= 0.0 { 1.0 } else { chi2_sf(q, d) };
        (Some(beta0), Some(beta1), Some(d), p, Method::ThreeCumulantChi2)
    } else {
        (None, None, None, normal_sf(normalized_statistic), Method::NormalFallback)
    };

    Ok(TestReport {
        statistic,
        normalized_statistic,
        k2_hat: k2,
        k3_hat: k3,
        beta0,
        beta1,
        d,
        p_value,
        method,
        n1: x.n(),
        n2: y.n(),
        p: x.p(),
        centered: center,
    })
}

/// Exact `Cov(y ⊗ y)` for `y = A z`, `z` i.i.d. with mean 0, variance 1 and
/// fourth moment `κ`:
///
/// ```text
/// Ω_{(ab),(cd)} = Σ_ac Σ_bd + Σ_ad Σ_bc + (κ - 3) Σ_m A_am A_bm A_cm A_dm
/// ```
///
/// with `Σ = A Aᵀ`. `factor` is `p × q`.
pub fn induced_covariance_from_factor(factor: &DMatrix<f64>, model: Innovation) -> Result<DMatrix<f64>> {
    let p = factor.nrows();
    check_dimension(p)?;
    let sigma = factor * factor.transpose();
    let excess = model.kurtosis() - 3.0;
    let q = factor.ncols();
    Ok(DMatrix::from_fn(p * p, p * p, |ab, cd| {
        let (a, b, c, d) = (ab / p, ab % p, cd / p, cd % p);
        let gaussian = sigma[(a, c)] * sigma[(b, d)] + sigma[(a, d)] * sigma[(b, c)];
        if excess == 0.0 {
            return gaussian;
        }
        let fourth: f64 = (0..q).map(|m| factor[(a, m)] * factor[(b, m)] * factor[(c, m)] * factor[(d, m)]).sum();
        gaussian + excess * fourth
    }))
}

/// [`induced_covariance_from_factor`] with the symmetric square root of `sigma`.
pub fn induced_covariance(sigma: &DMatrix<f64>, model: Innovation) -> Result<DMatrix<f64>> {
    check_dimension(sigma.nrows())?;
    induced_covariance_from_factor(&sym_sqrt(sigma)?, model)
}

/// Monte Carlo estimate of `Cov(y ⊗ y)` from `draws` rows `y = A z`.
pub fn mc_induced_covariance(factor: &DMatrix<f64>, model: Innovation, draws: usize, seed: u64) -> Result<DMatrix<f64>> {
    let (p, q) = (factor.nrows(), factor.ncols());
    check_dimension(p)?;
    if draws < 2 {
        return Err(Error::TooFewObservations { n: draws, min: 2 });
    }
    let mut rng = stream(seed, 0);
    let mut data = Vec::with_capacity(draws * p);
    for _ in 0..draws {
        let z = DVector::from_fn(q, |_, _| model.sample(&mut rng));
        data.extend((factor * z).iter());
    }
    let y = SampleBlock::new(draws, p, data)?;
    Ok(explicit_covariance(&explicit_induced(&y)?))
}

/// Seeded random pair for validation: `p` in `[2, 4]` unless given, `n_i` in
/// `[4, 12]`, one of the three innovation models, and rows `y = (I + M) z`
/// with `M` uniform on `[-1, 1]`.
pub fn seeded_instance(seed: u64, index: u64, p: Option<usize>) -> (SampleBlock, SampleBlock) {
    let mut rng = stream(seed, index);
    let p = p.unwrap_or_else(|| rng.random_range(2..=4));
    let n1 = rng.random_range(4..=12);
    let n2 = rng.random_range(4..=12);
    let model = [Innovation::Normal, Innovation::T5, Innovation::Chisq1][rng.random_range(0..3)];
    let mixing = DMatrix::from_fn(p, p, |i, j| f64::from(u8::from(i == j)) + rng.random_range(-1.0..1.0));
    let mut block = |n: usize| {
        let z = DMatrix::from_vec(p, n, gen_innovation(model, n * p, &mut rng));
        // column j of the p × n product is observation j, so column-major storage is row-major data
        let y = &mixing * z;
        SampleBlock::new(n, p, y.as_slice().to_vec()).expect("finite draws")
    };
    let x = block(n1);
    (x, block(n2))
}

/// Eigenvalues defining the mixture law of the statistic under `H0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    /// Eigenvalues of `Ω1`.
    pub lambda1: Vec<f64>,
    /// Eigenvalues of `Ω2`.
    pub lambda2: Vec<f64>,
    /// Eigenvalues of `Ω1 / n1 + Ω2 / n2`.
    pub lambda_n: Vec<f64>,
    pub n1: usize,
    pub n2: usize,
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<()> {
        for n in [self.n1, self.n2] {
            if n < 3 {
                return Err(Error::TooFewObservations { n, min: 3 });
            }
        }
        let len = self.lambda_n.len();
        for list in [&self.lambda1, &self.lambda2] {
            if list.len() != len {
                return Err(Error::DimensionMismatch { expected: len, found: list.len() });
            }
        }
        let all = self.lambda1.iter().chain(&self.lambda2).chain(&self.lambda_n);
        if let Some(bad) = all.copied().find(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParams(format!("eigenvalue {bad} is not a nonnegative real")));
        }
        Ok(())
    }

    fn sizes(&self) -> (f64, f64) {
        (self.n1 as f64, self.n2 as f64)
    }

    /// `2 { Σ λn² + Σ λ1² / (n1² (n1-1)) + Σ λ2² / (n2² (n2-1)) }`.
    pub fn exact_variance(&self) -> f64 {
        let (n1, n2) = self.sizes();
        let s = |v: &[f64]| v.iter().map(|l| l * l).sum::<f64>();
        2.0 * (s(&self.lambda_n) + s(&self.lambda1) / (n1 * n1 * (n1 - 1.0)) + s(&self.lambda2) / (n2 * n2 * (n2 - 1.0)))
    }

    /// `8 { Σ λn³ - Σ λ1³ / (n1³ (n1-1)²) - Σ λ2³ / (n2³ (n2-1)²) }`.
    pub fn exact_k3(&self) -> f64 {
        let (n1, n2) = self.sizes();
        let s = |v: &[f64]| v.iter().map(|l| l * l * l).sum::<f64>();
        8.0 * (s(&self.lambda_n)
            - s(&self.lambda1) / (n1.powi(3) * (n1 - 1.0).powi(2))
            - s(&self.lambda2) / (n2.powi(3) * (n2 - 1.0).powi(2)))
    }
}

/// `reps` draws of `Σ λn_r A_r - {Σ λ1_r B1_r / (n1 (n1-1)) + Σ λ2_r B2_r / (n2 (n2-1))}`
/// with `A_r ~ χ²_1`, `B_ir ~ χ²_{n_i - 1}`, all independent.
pub fn sample_mixture(spec: &MixtureSpec, reps: usize, seed: u64) -> Result<Vec<f64>> {
    sample_mixture_with(spec, reps, seed, Execution::default())
}

pub fn sample_mixture_with(spec: &MixtureSpec, reps: usize, seed: u64, exec: Execution) -> Result<Vec<f64>> {
    spec.validate()?;
    if reps == 0 {
        return Err(Error::InvalidConfig("reps must be at least 1".into()));
    }
    let (n1, n2) = spec.sizes();
    let nonzero = |v: &[f64]| v.iter().copied().filter(|l| *l > 0.0).collect::<Vec<_>>();
    let (ln, l1, l2) = (nonzero(&spec.lambda_n), nonzero(&spec.lambda1), nonzero(&spec.lambda2));
    let b1 = ChiSquared::new(n1 - 1.0).expect("n1 >= 3");
    let b2 = ChiSquared::new(n2 - 1.0).expect("n2 >= 3");
    Ok(exec.map(reps, |rep| {
        let mut rng = stream(seed, rep as u64);
        let a: f64 = ln
            .iter()
            .map(|l| {
                let z: f64 = StandardNormal.sample(&mut rng);
                l * z * z
            })
            .sum();
        let s1: f64 = l1.iter().map(|l| l * b1.sample(&mut rng)).sum();
        let s2: f64 = l2.iter().map(|l| l * b2.sample(&mut rng)).sum();
        a - s1 / (n1 * (n1 - 1.0)) - s2 / (n2 * (n2 - 1.0))
    }))
}

/// Builds `Ω_i = Cov(y ⊗ y)` under `model` and eigendecomposes `Ω1`, `Ω2` and
/// `Ω1 / n1 + Ω2 / n2`.
pub fn mixture_spec_from_cov(
    sigma1: &DMatrix<f64>,
    sigma2: &DMatrix<f64>,
    n1: usize,
    n2: usize,
    model: Innovation,
) -> Result<MixtureSpec> {
    if sigma1.shape() != sigma2.shape() {
        return Err(Error::DimensionMismatch { expected: sigma1.nrows(), found: sigma2.nrows() });
    }
    let o1 = induced_covariance(sigma1, model)?;
    let o2 = induced_covariance(sigma2, model)?;
    let on = &o1 / n1 as f64 + &o2 / n2 as f64;
    let spec = MixtureSpec {
        lambda1: psd_eigenvalues(&o1)?,
        lambda2: psd_eigenvalues(&o2)?,
        lambda_n: psd_eigenvalues(&on)?,
        n1,
        n2,
    };
    spec.validate()?;
    Ok(spec)
}
