//! Shared domain types: sample blocks, cumulant estimates and the test report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest group size accepted by [`validate_pair`].
pub const MIN_OBSERVATIONS: usize = 3;

/// An `n x p` block of observations, rows are subjects and columns are variables.
///
/// Stored row-major so that the per-subject dot products in the Gram kernel
/// read contiguous memory.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBlock {
    data: Vec<f64>,
    n: usize,
    p: usize,
}

impl SampleBlock {
    /// Builds a block from row-major data. Every entry must be finite.
    pub fn new(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParams("block needs at least one variable".into()));
        }
        if data.len() != n * p {
            return Err(Error::InvalidParams(format!(
                "data length {} does not match {n} x {p}",
                data.len()
            )));
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry { row: idx / p, col: idx % p });
        }
        Ok(Self { data, n, p })
    }

    /// Builds a block from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * p);
        for row in rows {
            let row = row.as_ref();
            if row.len() != p {
                return Err(Error::DimensionMismatch { expected: p, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), p, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.p)
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.p + k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Multiplies every entry by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { data: self.data.iter().map(|v| v * c).collect(), n: self.n, p: self.p }
    }

    /// Returns the block with rows reordered as `order[new] = old`.
    pub fn permuted_rows(&self, order: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for &i in order {
            data.extend_from_slice(self.row(i));
        }
        Self { data, n: order.len(), p: self.p }
    }

    /// Column means.
    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.p];
        for row in self.rows() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        let n = self.n as f64;
        means.iter_mut().for_each(|m| *m /= n);
        means
    }
}

/// Checks that two blocks can be compared: same `p`, both `n >= 3`.
///
/// Finiteness is already guaranteed by [`SampleBlock::new`].
pub fn validate_pair<'a>(
    x: &'a SampleBlock,
    y: &'a SampleBlock,
) -> Result<(&'a SampleBlock, &'a SampleBlock)> {
    if x.p != y.p {
        return Err(Error::DimensionMismatch { expected: x.p, found: y.p });
    }
    for block in [x, y] {
        if block.n < MIN_OBSERVATIONS {
            return Err(Error::TooFewObservations { n: block.n, min: MIN_OBSERVATIONS });
        }
    }
    Ok((x, y))
}

/// Subtracts the column means from every row.
pub fn center_by_group_mean(x: &SampleBlock) -> SampleBlock {
    let means = x.column_means();
    let mut data = x.data.clone();
    for row in data.chunks_exact_mut(x.p) {
        for (v, m) in row.iter_mut().zip(&means) {
            *v -= m;
        }
    }
    SampleBlock { data, n: x.n, p: x.p }
}

/// Which reference distribution produced the p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ThreeCumulantChi2,
    NormalFallback,
}

/// Outcome of one two-sample covariance test.
///
/// `beta0`, `beta1` and `d` are `None` when the normal fallback was used, in
/// which case they are serialized as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: f64,
    pub normalized_statistic: f64,
    pub k2_hat: f64,
    pub k3_hat: f64,
    pub beta0: Option<f64>,
    pub beta1: Option<f64>,
    pub d: Option<f64>,
    pub p_value: f64,
    pub method: Method,
    pub n1: usize,
    pub n2: usize,
    pub p: usize,
    pub centered: bool,
}

/// The seven estimated traces and the cumulant estimates built from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantEstimates {
    pub n1: usize,
    pub n2: usize,
    pub tr_o1sq: f64,
    pub tr_o2sq: f64,
    pub tr_o1o2: f64,
    pub tr_o1cu: f64,
    pub tr_o2cu: f64,
    pub tr_o1sq_o2: f64,
    pub tr_o1_o2sq: f64,
    pub k2_hat: f64,
    pub k3_hat: f64,
}

impl CumulantEstimates {
    /// Assembles the estimates, computing the second and third cumulants from
    /// the traces.
    #[allow(clippy::too_many_arguments)]
    pub fn from_traces(
        n1: usize,
        n2: usize,
        tr_o1sq: f64,
        tr_o2sq: f64,
        tr_o1o2: f64,
        tr_o1cu: f64,
        tr_o2cu: f64,
        tr_o1sq_o2: f64,
        tr_o1_o2sq: f64,
    ) -> Self {
        let k2_hat = second_cumulant(n1, n2, tr_o1sq, tr_o1o2, tr_o2sq);
        let k3_hat = third_cumulant(n1, n2, tr_o1cu, tr_o1sq_o2, tr_o1_o2sq, tr_o2cu);
        Self { n1, n2, tr_o1sq, tr_o2sq, tr_o1o2, tr_o1cu, tr_o2cu, tr_o1sq_o2, tr_o1_o2sq, k2_hat, k3_hat }
    }
}

/// `2 { tr(O1^2)/(n1(n1-1)) + 2 tr(O1 O2)/(n1 n2) + tr(O2^2)/(n2(n2-1)) }`
pub fn second_cumulant(n1: usize, n2: usize, tr_o1sq: f64, tr_o1o2: f64, tr_o2sq: f64) -> f64 {
    let (n1, n2) = (n1 as f64, n2 as f64);
    2.0 * (tr_o1sq / (n1 * (n1 - 1.0)) + 2.0 * tr_o1o2 / (n1 * n2) + tr_o2sq / (n2 * (n2 - 1.0)))
}

/// `8 { (n1-2) tr(O1^3)/(n1^2 (n1-1)^2) + 3 tr(O1^2 O2)/(n1^2 n2)
///    + 3 tr(O1 O2^2)/(n1 n2^2) + (n2-2) tr(O2^3)/(n2^2 (n2-1)^2) }`
pub fn third_cumulant(
    n1: usize,
    n2: usize,
    tr_o1cu: f64,
    tr_o1sq_o2: f64,
    tr_o1_o2sq: f64,
    tr_o2cu: f64,
) -> f64 {
    let (n1, n2) = (n1 as f64, n2 as f64);
    8.0 * ((n1 - 2.0) * tr_o1cu / (n1 * n1 * (n1 - 1.0) * (n1 - 1.0))
        + 3.0 * tr_o1sq_o2 / (n1 * n1 * n2)
        + 3.0 * tr_o1_o2sq / (n1 * n2 * n2)
        + (n2 - 2.0) * tr_o2cu / (n2 * n2 * (n2 - 1.0) * (n2 - 1.0)))
}
