mod common;

use common::*;
use srzf_core::channel::ChannelSet;
use srzf_core::metrics;
use srzf_core::precoding::{self, StackedCsi};
use srzf_core::ComplexMatrix;

#[test]
fn user_rate_matches_explicit_inverse_form() {
    for seed in 0..30 {
        let mut r = rng(seed);
        let desired = random_matrix(&mut r, 2, 2);
        let interference: Vec<ComplexMatrix> = (0..3)
            .map(|_| random_matrix(&mut r, 2, 2) * c(0.5))
            .collect();
        let got = metrics::user_rate(&desired, &interference, 0.7).unwrap();
        let want = explicit_inverse_rate(&desired, &interference, 0.7);
        assert!((got - want).abs() <= 1e-9 * want.abs(), "{got} vs {want}");
    }
}

#[test]
fn scalar_rate_closed_form() {
    let g = ComplexMatrix::from_element(1, 1, c(1.0));
    assert!((metrics::user_rate(&g, &[], 1.0).unwrap() - 1.0).abs() < 1e-15);
    let z = ComplexMatrix::zeros(2, 2);
    assert_eq!(metrics::user_rate(&z, &[], 1.0).unwrap(), 0.0);
}

#[test]
fn single_user_identity_channel_sum_rate() {
    let ch = ChannelSet {
        h: vec![ComplexMatrix::from_element(1, 1, c(1.0))],
        path_loss: vec![1.0],
    };
    let p = precoding::zf(&StackedCsi::in_order(&ch.h), 5.0).unwrap();
    let r = metrics::sum_rate(&ch, &p, 0.5).unwrap();
    assert!((r.sum_rate - (1.0f64 + 10.0).log2()).abs() < 1e-12);
    assert!((r.power_used - 5.0).abs() < 1e-12);
}

#[test]
fn perfect_csi_zf_has_no_interference() {
    let blocks = random_blocks(&mut rng(5), 4, 2, 8);
    let ch = ChannelSet {
        h: blocks.clone(),
        path_loss: vec![4.0; 4],
    };
    let p = precoding::zf(&StackedCsi::new(&blocks, &[3, 1, 0, 2]), 10.0).unwrap();
    let r = metrics::sum_rate(&ch, &p, 0.1).unwrap();
    for k in 0..4 {
        for j in 0..4 {
            if j != k {
                assert!(r.iui_norms[k][j] <= 1e-9 * r.iui_norms[k][k]);
            }
        }
    }
}
