#![allow(dead_code)]

use hdcov::rng::stream;
use hdcov::sim::{gen_innovation, Innovation};
use hdcov::{SampleBlock, TestReport};

/// Seeded pair with `p ∈ [2, 4]`, `n_i ∈ [4, 12]` and a random model.
pub fn random_instance(seed: u64, index: u64) -> (SampleBlock, SampleBlock) {
    hdcov::oracle::seeded_instance(seed, index, None)
}

pub fn gaussian_block(n: usize, p: usize, seed: u64, index: u64) -> SampleBlock {
    SampleBlock::new(n, p, gen_innovation(Innovation::Normal, n * p, &mut stream(seed, index))).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn opt_close(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => rel_close(a, b, tol),
        (None, None) => true,
        _ => false,
    }
}

/// Names of the fields that differ by more than `tol` relative.
pub fn report_mismatches(a: &TestReport, b: &TestReport, tol: f64) -> Vec<&'static str> {
    let mut bad = Vec::new();
    let scalars = [
        ("statistic", a.statistic, b.statistic),
        ("normalized_statistic", a.normalized_statistic, b.normalized_statistic),
        ("k2_hat", a.k2_hat, b.k2_hat),
        ("k3_hat", a.k3_hat, b.k3_hat),
        ("p_value", a.p_value, b.p_value),
    ];
    for (name, x, y) in scalars {
        if !rel_close(x, y, tol) {
            bad.push(name);
        }
    }
    for (name, x, y) in [("beta0", a.beta0, b.beta0), ("beta1", a.beta1, b.beta1), ("d", a.d, b.d)] {
        if !opt_close(x, y, tol) {
            bad.push(name);
        }
    }
    if a.method != b.method {
        bad.push("method");
    }
    if (a.n1, a.n2, a.p, a.centered) != (b.n1, b.n2, b.p, b.centered) {
        bad.push("shape");
    }
    bad
}

/// Mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
