//! End-to-end test: centering, Gram blocks, statistic, cumulants, p-value.

use crate::error::Result;
use crate::exec::Execution;
use crate::gram::{double_center, induced_gram_with, GramBlocks};
use crate::matching::{match_params, normal_fallback_p, p_value, Calibration};
use crate::model::{center_by_group_mean, validate_pair, Method, SampleBlock, TestReport};
use crate::statistic::{compute_t, normalize_t};
use crate::traces::cumulants_hat;

/// Options for a single test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestOptions {
    /// Subtract group means before forming induced samples.
    pub center: bool,
    /// Scheduling of the Gram kernel.
    pub exec: Execution,
}

impl Default for TestOptions {
    fn default() -> Self {
        Self { center: true, exec: Execution::default() }
    }
}

/// Tests `H0: Σ1 = Σ2` for the two samples.
pub fn covariance_test(x: &SampleBlock, y: &SampleBlock, opts: &TestOptions) -> Result<TestReport> {
    validate_pair(x, y)?;
    let (xc, yc);
    let (x, y) = if opts.center {
        xc = center_by_group_mean(x);
        yc = center_by_group_mean(y);
        (&xc, &yc)
    } else {
        (x, y)
    };
    let gram = induced_gram_with(x, y, opts.exec)?;
    report_from_gram(&gram, x.p(), opts.center)
}

/// Finishes the test from precomputed Gram blocks of (already centered, if
/// `centered`) data with dimension `p`.
pub fn report_from_gram(gram: &GramBlocks, p: usize, centered: bool) -> Result<TestReport> {
    let (n1, n2) = (gram.n1(), gram.n2());
    let statistic = compute_t(gram, n1, n2)?;
    let cumulants = cumulants_hat(&double_center(gram))?;
    let calibration = match_params(cumulants.k2_hat, cumulants.k3_hat)?;
    let normalized_statistic = normalize_t(statistic, cumulants.k2_hat)?;

    let (beta0, beta1, d, p_value, method) = match calibration {
        Calibration::ThreeCumulant(params) => (
            Some(params.beta0),
            Some(params.beta1),
            Some(params.d),
            p_value(statistic, &params)?,
            Method::ThreeCumulantChi2,
        ),
        Calibration::NormalFallback => {
            (None, None, None, normal_fallback_p(normalized_statistic), Method::NormalFallback)
        }
    };

    Ok(TestReport {
        statistic,
        normalized_statistic,
        k2_hat: cumulants.k2_hat,
        k3_hat: cumulants.k3_hat,
        beta0,
        beta1,
        d,
        p_value,
        method,
        n1,
        n2,
        p,
        centered,
    })
}
