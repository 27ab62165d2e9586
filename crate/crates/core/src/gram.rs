//! Gram blocks of the induced samples `w = y ⊗ y`.
//!
//! The induced vectors live in `p^2` dimensions but only their inner products
//! are ever needed, and `(y_a ⊗ y_a)ᵀ(y_b ⊗ y_b) = (y_aᵀ y_b)^2`. Everything
//! downstream works on `n x n` blocks, so the cost is `O(n^2 p)`.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::exec::Execution;
use crate::model::{validate_pair, SampleBlock};

/// Inner products of induced vectors within and across groups.
#[derive(Debug, Clone, PartialEq)]
pub struct GramBlocks {
    pub g11: DMatrix<f64>,
    pub g12: DMatrix<f64>,
    pub g22: DMatrix<f64>,
}

/// Double-centered Gram blocks `H_a G_ab H_b`, i.e. inner products of the
/// mean-centered induced vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredGramBlocks {
    pub c11: DMatrix<f64>,
    pub c12: DMatrix<f64>,
    pub c22: DMatrix<f64>,
}

impl GramBlocks {
    pub fn n1(&self) -> usize {
        self.g11.nrows()
    }

    pub fn n2(&self) -> usize {
        self.g22.nrows()
    }
}

impl CenteredGramBlocks {
    pub fn n1(&self) -> usize {
        self.c11.nrows()
    }

    pub fn n2(&self) -> usize {
        self.c22.nrows()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn squared_dot(a: &[f64], b: &[f64]) -> f64 {
    let d = dot(a, b);
    d * d
}

/// Symmetric within-group block; only the upper triangle is computed.
fn within_block(x: &SampleBlock, exec: Execution) -> DMatrix<f64> {
    let n = x.n();
    let rows = exec.map(n, |i| {
        let yi = x.row(i);
        (i..n).map(|j| squared_dot(yi, x.row(j))).collect::<Vec<_>>()
    });
    let mut g = DMatrix::zeros(n, n);
    for (i, upper) in rows.into_iter().enumerate() {
        for (offset, v) in upper.into_iter().enumerate() {
            let j = i + offset;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

fn cross_block(x: &SampleBlock, y: &SampleBlock, exec: Execution) -> DMatrix<f64> {
    let rows = exec.map(x.n(), |i| {
        let xi = x.row(i);
        y.rows().map(|yj| squared_dot(xi, yj)).collect::<Vec<_>>()
    });
    DMatrix::from_fn(x.n(), y.n(), |i, j| rows[i][j])
}

/// Computes `g_ab[i, j] = (x_aiᵀ x_bj)^2` for the three blocks.
pub fn induced_gram(x: &SampleBlock, y: &SampleBlock) -> Result<GramBlocks> {
    induced_gram_with(x, y, Execution::default())
}

pub fn induced_gram_with(x: &SampleBlock, y: &SampleBlock, exec: Execution) -> Result<GramBlocks> {
    validate_pair(x, y)?;
    Ok(GramBlocks {
        g11: within_block(x, exec),
        g12: cross_block(x, y, exec),
        g22: within_block(y, exec),
    })
}

/// `g - row means - column means + grand mean`, equal to `H_a g H_b`.
pub fn double_center_block(g: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = g.shape();
    if r == 0 || c == 0 {
        return g.clone();
    }
    let row_means: Vec<f64> = (0..r).map(|i| g.row(i).sum() / c as f64).collect();
    let col_means: Vec<f64> = (0..c).map(|j| g.column(j).sum() / r as f64).collect();
    let grand = row_means.iter().sum::<f64>() / r as f64;
    DMatrix::from_fn(r, c, |i, j| g[(i, j)] - row_means[i] - col_means[j] + grand)
}

fn symmetrize_upper(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            m[(j, i)] = m[(i, j)];
        }
    }
    m
}

pub fn double_center(g: &GramBlocks) -> CenteredGramBlocks {
    CenteredGramBlocks {
        c11: symmetrize_upper(double_center_block(&g.g11)),
        c12: double_center_block(&g.g12),
        c22: symmetrize_upper(double_center_block(&g.g22)),
    }
}
