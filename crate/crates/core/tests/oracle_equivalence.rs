mod common;

use common::{random_instance, rel_close, report_mismatches};
use hdcov::gram::{double_center, induced_gram};
use hdcov::oracle::{brute_force_report, explicit_induced};
use hdcov::traces::{cumulants_hat, tr_omega, tr_omega_sq_plugin, Group};
use hdcov::{covariance_test, Execution, TestOptions};
use proptest::prelude::*;

fn pipeline(center: bool) -> TestOptions {
    TestOptions { center, exec: Execution::Sequential }
}

#[test]
fn seeded_p2_instance_matches_every_field() {
    let x = common::gaussian_block(4, 2, 99, 0);
    let y = common::gaussian_block(4, 2, 99, 1);
    let a = covariance_test(&x, &y, &pipeline(true)).unwrap();
    let b = brute_force_report(&x, &y, true).unwrap();
    assert!(report_mismatches(&a, &b, 1e-9).is_empty(), "{a:?}\n{b:?}");
}

#[test]
fn degenerate_data_fails_in_both_pipelines() {
    let z = hdcov::SampleBlock::new(5, 2, vec![0.0; 10]).unwrap();
    assert!(matches!(covariance_test(&z, &z, &pipeline(true)), Err(hdcov::Error::NonpositiveVariance(_))));
    assert!(matches!(brute_force_report(&z, &z, true), Err(hdcov::Error::NonpositiveVariance(_))));
}

#[test]
fn plug_in_traces_match_explicit_matrices() {
    let (x, y) = random_instance(5, 0);
    let c = double_center(&induced_gram(&x, &y).unwrap());
    let w = explicit_induced(&x).unwrap();
    let n = w.nrows() as f64;
    let mean = w.row_sum() / n;
    let centered = nalgebra::DMatrix::from_fn(w.nrows(), w.ncols(), |i, j| w[(i, j)] - mean[j]);
    let omega = centered.transpose() * &centered / (n - 1.0);
    assert!(rel_close(tr_omega(&c, Group::First), omega.trace(), 1e-10));
    assert!(rel_close(tr_omega_sq_plugin(&c, Group::First), (&omega * &omega).trace(), 1e-10));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gram_pipeline_matches_brute_force(seed in any::<u64>(), center in any::<bool>()) {
        let (x, y) = random_instance(seed, 0);
        let a = covariance_test(&x, &y, &pipeline(center));
        let b = brute_force_report(&x, &y, center);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                let bad = report_mismatches(&a, &b, 1e-9);
                prop_assert!(bad.is_empty(), "fields {bad:?} differ\n{a:?}\n{b:?}");
            }
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            (a, b) => prop_assert!(false, "outcomes differ: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn induced_gram_matches_explicit_kronecker(seed in any::<u64>(), p in 1usize..=5, n1 in 1usize..=10, n2 in 1usize..=10) {
        let x = common::gaussian_block(n1.max(3), p, seed, 0);
        let y = common::gaussian_block(n2.max(3), p, seed, 1);
        let g = induced_gram(&x, &y).unwrap();
        let (w1, w2) = (explicit_induced(&x).unwrap(), explicit_induced(&y).unwrap());
        let (d1, d2) = (g.g11.diagonal(), g.g22.diagonal());
        let blocks = [
            (&g.g11, &w1 * w1.transpose(), &d1, &d1),
            (&g.g12, &w1 * w2.transpose(), &d1, &d2),
            (&g.g22, &w2 * w2.transpose(), &d2, &d2),
        ];
        for (fast, slow, da, db) in blocks {
            for i in 0..fast.nrows() {
                for j in 0..fast.ncols() {
                    // entries are bounded by sqrt(g_ii g_jj), which sets the rounding scale
                    let scale = (da[i] * db[j]).sqrt();
                    prop_assert!((fast[(i, j)] - slow[(i, j)]).abs() <= 1e-10 * scale, "({i},{j}): {} vs {}", fast[(i, j)], slow[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn cumulant_estimates_follow_scale_law(seed in any::<u64>(), c in 0.2f64..5.0) {
        let (x, y) = random_instance(seed, 1);
        let base = cumulants_hat(&double_center(&induced_gram(&x, &y).unwrap())).unwrap();
        let scaled = cumulants_hat(&double_center(&induced_gram(&x.scaled(c), &y.scaled(c)).unwrap())).unwrap();
        let (c8, c12) = (c.powi(8), c.powi(12));
        for (a, b) in [(base.tr_o1sq, scaled.tr_o1sq), (base.tr_o2sq, scaled.tr_o2sq), (base.tr_o1o2, scaled.tr_o1o2), (base.k2_hat, scaled.k2_hat)] {
            prop_assert!((a * c8 - b).abs() <= 1e-9 * b.abs().max(a.abs() * c8) + 1e-12 * scaled.k2_hat.abs());
        }
        for (a, b) in [(base.tr_o1cu, scaled.tr_o1cu), (base.tr_o2cu, scaled.tr_o2cu), (base.tr_o1sq_o2, scaled.tr_o1sq_o2), (base.tr_o1_o2sq, scaled.tr_o1_o2sq)] {
            prop_assert!((a * c12 - b).abs() <= 1e-9 * b.abs().max(a.abs() * c12) + 1e-9 * scaled.tr_o1cu.abs().max(scaled.tr_o2cu.abs()));
        }
        prop_assert!(rel_close(base.k3_hat * c12, scaled.k3_hat, 1e-8));
    }

    #[test]
    fn cumulant_estimates_are_swap_symmetric(seed in any::<u64>()) {
        let (x, y) = random_instance(seed, 2);
        let a = cumulants_hat(&double_center(&induced_gram(&x, &y).unwrap())).unwrap();
        let b = cumulants_hat(&double_center(&induced_gram(&y, &x).unwrap())).unwrap();
        prop_assert!(rel_close(a.k2_hat, b.k2_hat, 1e-10));
        prop_assert!(rel_close(a.k3_hat, b.k3_hat, 1e-10));
        prop_assert!(rel_close(a.tr_o1sq_o2, b.tr_o1_o2sq, 1e-10));
    }
}
