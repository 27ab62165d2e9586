//! Unbiased estimators of `tr(Ω1^2)`, `tr(Ω1 Ω2)`, `tr(Ω1^3)`, `tr(Ω1^2 Ω2)`
//! and their mirrors, computed from centered Gram blocks.
//!
//! With `W_a` the `n_a x p^2` matrix of centered induced vectors,
//! `Ω̂_a = W_aᵀ W_a / (n_a - 1)` and `c_ab = W_a W_bᵀ`. Cyclic invariance of the
//! trace turns every `p^2 x p^2` product into an `n x n` one:
//!
//! * `tr(Ω̂_a)     = tr(c_aa) / (n_a - 1)`
//! * `tr(Ω̂_a^2)   = ‖c_aa‖_F^2 / (n_a - 1)^2`
//! * `tr(Ω̂_1 Ω̂_2) = ‖c_12‖_F^2 / ((n_1 - 1)(n_2 - 1))`
//! * `tr(Ω̂_a^3)   = tr(c_aa^3) / (n_a - 1)^3`
//! * `tr(Ω̂_1^2 Ω̂_2) = tr(c_11 c_12 c_21) / ((n_1 - 1)^2 (n_2 - 1))`
//!
//! Estimates are returned raw; negative values are possible in small samples.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gram::CenteredGramBlocks;
use crate::model::CumulantEstimates;

/// One of the two samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    First,
    Second,
}

impl Group {
    fn index(self) -> usize {
        match self {
            Group::First => 1,
            Group::Second => 2,
        }
    }
}

/// Selects `tr(Ω1^2 Ω2)` or `tr(Ω1 Ω2^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossTerm {
    FirstSquared,
    SecondSquared,
}

fn block(c: &CenteredGramBlocks, group: Group) -> &DMatrix<f64> {
    match group {
        Group::First => &c.c11,
        Group::Second => &c.c22,
    }
}

/// `Σ_ij a_ij b_ij`
fn frobenius_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// `tr(c^3)` as the sum of `(c^2) ∘ cᵀ`.
fn trace_cubed(c: &DMatrix<f64>) -> f64 {
    let sq = c * c;
    frobenius_inner(&sq, &c.transpose())
}

/// Plug-in `tr(Ω̂_i)`.
pub fn tr_omega(c: &CenteredGramBlocks, group: Group) -> f64 {
    let m = block(c, group);
    m.trace() / (m.nrows() as f64 - 1.0)
}

/// Plug-in `tr(Ω̂_i^2)`.
pub fn tr_omega_sq_plugin(c: &CenteredGramBlocks, group: Group) -> f64 {
    let m = block(c, group);
    let nm1 = m.nrows() as f64 - 1.0;
    m.norm_squared() / (nm1 * nm1)
}

/// Plug-in `tr(Ω̂_i^3)`.
pub fn tr_omega_cu_plugin(c: &CenteredGramBlocks, group: Group) -> f64 {
    let m = block(c, group);
    let nm1 = m.nrows() as f64 - 1.0;
    trace_cubed(m) / (nm1 * nm1 * nm1)
}

/// Plug-in `tr(Ω̂_1^2 Ω̂_2)` or `tr(Ω̂_1 Ω̂_2^2)`.
pub fn tr_omega_sq_cross_plugin(c: &CenteredGramBlocks, which: CrossTerm) -> f64 {
    let (n1m1, n2m1) = (c.n1() as f64 - 1.0, c.n2() as f64 - 1.0);
    match which {
        CrossTerm::FirstSquared => {
            let m = &c.c11 * &c.c12;
            frobenius_inner(&m, &c.c12) / (n1m1 * n1m1 * n2m1)
        }
        CrossTerm::SecondSquared => {
            let m = &c.c12 * &c.c22;
            frobenius_inner(&m, &c.c12) / (n1m1 * n2m1 * n2m1)
        }
    }
}

/// Unbiased `tr(Ω_i^2)`:
/// `(n-1)^2/((n-2)(n+1)) {tr(Ω̂^2) - tr^2(Ω̂)/(n-1)}`.
pub fn tr_omega_sq_hat(c: &CenteredGramBlocks, group: Group) -> f64 {
    let n = block(c, group).nrows() as f64;
    let tr1 = tr_omega(c, group);
    let tr2 = tr_omega_sq_plugin(c, group);
    (n - 1.0) * (n - 1.0) / ((n - 2.0) * (n + 1.0)) * (tr2 - tr1 * tr1 / (n - 1.0))
}

/// Unbiased `tr(Ω1 Ω2)`, which is simply the plug-in `tr(Ω̂1 Ω̂2)`.
pub fn tr_omega12_hat(c: &CenteredGramBlocks) -> f64 {
    c.c12.norm_squared() / ((c.n1() as f64 - 1.0) * (c.n2() as f64 - 1.0))
}

/// Unbiased `tr(Ω_i^3)` under Gaussian induced samples:
/// `(n-1)^4/((n^2+n-6)(n^2-2n-3)) {tr(Ω̂^3) - 3 tr(Ω̂) tr(Ω̂^2)/(n-1) + 2 tr^3(Ω̂)/(n-1)^2}`.
///
/// The second denominator factor is `(n-3)(n+1)`, so `n >= 4` is required.
pub fn tr_omega_cu_hat(c: &CenteredGramBlocks, group: Group) -> Result<f64> {
    let n_usize = block(c, group).nrows();
    if n_usize <= 3 {
        return Err(Error::DegenerateSampleSize { group: group.index(), n: n_usize });
    }
    let n = n_usize as f64;
    let nm1 = n - 1.0;
    let tr1 = tr_omega(c, group);
    let tr2 = tr_omega_sq_plugin(c, group);
    let tr3 = tr_omega_cu_plugin(c, group);
    let factor = nm1.powi(4) / ((n * n + n - 6.0) * (n * n - 2.0 * n - 3.0));
    Ok(factor * (tr3 - 3.0 * tr1 * tr2 / nm1 + 2.0 * tr1.powi(3) / (nm1 * nm1)))
}

/// Unbiased `tr(Ω1^2 Ω2)` (or its mirror):
/// `(n1-1)/((n1-2)(n1+1)) {(n1-1) tr(Ω̂1^2 Ω̂2) - tr(Ω̂1 Ω̂2) tr(Ω̂1)}`.
pub fn tr_omega_sq_cross_hat(c: &CenteredGramBlocks, which: CrossTerm) -> f64 {
    let group = match which {
        CrossTerm::FirstSquared => Group::First,
        CrossTerm::SecondSquared => Group::Second,
    };
    let n = block(c, group).nrows() as f64;
    let plug = tr_omega_sq_cross_plugin(c, which);
    (n - 1.0) / ((n - 2.0) * (n + 1.0)) * ((n - 1.0) * plug - tr_omega12_hat(c) * tr_omega(c, group))
}

/// All seven trace estimates together with `K̂2` and `K̂3`.
pub fn cumulants_hat(c: &CenteredGramBlocks) -> Result<CumulantEstimates> {
    let tr_o1cu = tr_omega_cu_hat(c, Group::First)?;
    let tr_o2cu = tr_omega_cu_hat(c, Group::Second)?;
    Ok(CumulantEstimates::from_traces(
        c.n1(),
        c.n2(),
        tr_omega_sq_hat(c, Group::First),
        tr_omega_sq_hat(c, Group::Second),
        tr_omega12_hat(c),
        tr_o1cu,
        tr_o2cu,
        tr_omega_sq_cross_hat(c, CrossTerm::FirstSquared),
        tr_omega_sq_cross_hat(c, CrossTerm::SecondSquared),
    ))
}
