//! Moment checks by simulation. Each compares a sample mean with an exact
//! value using a 4 standard-error band.

mod common;

use common::{gaussian_block, mean_se};
use hdcov::gram::{double_center, induced_gram, GramBlocks};
use hdcov::linalg::sym_sqrt;
use hdcov::oracle::{induced_covariance, mixture_spec_from_cov, sample_mixture};
use hdcov::rng::stream;
use hdcov::sim::{compound_symmetry_cov, gen_innovation, Innovation};
use hdcov::statistic::compute_t;
use hdcov::traces::cumulants_hat;
use nalgebra::DMatrix;

#[test]
fn statistic_has_mean_zero_under_null() {
    let reps = 10_000;
    let ts: Vec<f64> = (0..reps)
        .map(|r| {
            let x = gaussian_block(20, 3, 31, 2 * r);
            let y = gaussian_block(20, 3, 31, 2 * r + 1);
            compute_t(&induced_gram(&x, &y).unwrap(), 20, 20).unwrap()
        })
        .collect();
    let (mean, se) = mean_se(&ts);
    assert!(mean.abs() < 4.0 * se, "mean {mean}, se {se}");
}

#[test]
fn cross_trace_estimator_is_unbiased_for_gaussian_observations() {
    let omega = induced_covariance(&DMatrix::identity(3, 3), Innovation::Normal).unwrap();
    let exact = (&omega * &omega).trace();
    let values: Vec<f64> = (0..5000)
        .map(|r| {
            let x = gaussian_block(20, 3, 41, 2 * r);
            let y = gaussian_block(20, 3, 41, 2 * r + 1);
            cumulants_hat(&double_center(&induced_gram(&x, &y).unwrap())).unwrap().tr_o1o2
        })
        .collect();
    let (mean, se) = mean_se(&values);
    assert!((mean - exact).abs() < 4.0 * se, "mean {mean}, exact {exact}, se {se}");
}

/// Gram blocks of `n` Gaussian induced vectors with covariance `Ω = R Rᵀ` per group.
fn gaussian_induced_gram(root: &DMatrix<f64>, n: usize, seed: u64, rep: u64) -> GramBlocks {
    let q = root.nrows();
    let mut rng = stream(seed, rep);
    let mut draw = || (root * DMatrix::from_vec(q, n, gen_innovation(Innovation::Normal, n * q, &mut rng))).transpose();
    let (w1, w2) = (draw(), draw());
    GramBlocks { g11: &w1 * w1.transpose(), g12: &w1 * w2.transpose(), g22: &w2 * w2.transpose() }
}

#[test]
fn trace_estimators_are_unbiased_for_gaussian_induced_samples() {
    let omega = induced_covariance(&DMatrix::identity(2, 2), Innovation::Normal).unwrap();
    let root = sym_sqrt(&omega).unwrap();
    let sq = (&omega * &omega).trace();
    let cu = (&omega * &omega * &omega).trace();
    let reps = 20_000;
    let estimates: Vec<[f64; 4]> = (0..reps)
        .map(|r| {
            let c = cumulants_hat(&double_center(&gaussian_induced_gram(&root, 15, 43, r))).unwrap();
            [c.tr_o1sq, c.tr_o1cu, c.tr_o1sq_o2, c.tr_o1_o2sq]
        })
        .collect();
    for (k, exact) in [sq, cu, cu, cu].into_iter().enumerate() {
        let column: Vec<f64> = estimates.iter().map(|e| e[k]).collect();
        let (mean, se) = mean_se(&column);
        assert!((mean - exact).abs() < 4.0 * se, "estimator {k}: mean {mean}, exact {exact}, se {se}");
    }
}

#[test]
fn mixture_matches_exact_mean_and_variance() {
    let s1 = compound_symmetry_cov(&[1.0, 2.0, 1.5], 0.4);
    let s2 = DMatrix::identity(3, 3);
    let spec = mixture_spec_from_cov(&s1, &s2, 8, 12, Innovation::Normal).unwrap();
    let draws = sample_mixture(&spec, 200_000, 17).unwrap();
    let (mean, se) = mean_se(&draws);
    assert!(mean.abs() < 4.0 * se, "mean {mean}, se {se}");
    let n = draws.len() as f64;
    let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = draws.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let var_se = ((m4 - var * var) / n).sqrt();
    let exact = spec.exact_variance();
    assert!((var - exact).abs() < 4.0 * var_se, "var {var}, exact {exact}, se {var_se}");
}
