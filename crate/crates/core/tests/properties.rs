mod common;

use common::*;
use proptest::prelude::*;
use srzf_core::channel::{self, ChannelSet, Scenario};
use srzf_core::precoding::{self, RegularizationPlan, Scheme, StackedCsi};
use srzf_core::{metrics, numerics, power};

fn instance(seed: u64, users: usize, n: usize) -> Vec<srzf_core::ComplexMatrix> {
    random_blocks(&mut rng(seed), users, 2, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gram_is_hermitian_psd(seed in any::<u64>(), rows in 1usize..6, extra in 0usize..4) {
        let h = random_matrix(&mut rng(seed), rows, rows + extra);
        let g = numerics::gram(&h);
        prop_assert!((&g - g.adjoint()).norm() == 0.0);
        let shifted = numerics::add_diagonal(&g, &vec![1e-9 * g.norm(); rows]);
        prop_assert!(numerics::Cholesky::factor(&shifted).is_ok());
    }

    #[test]
    fn fpa_is_scale_invariant(seed in any::<u64>(), scale in 1e-6f64..1e6, pt in 1e-3f64..1e3) {
        let dirs = instance(seed, 3, 6).iter().map(|b| b.adjoint()).collect::<Vec<_>>();
        let scaled: Vec<_> = dirs.iter().map(|d| d * c(scale)).collect();
        let a = power::fpa(&dirs, pt).unwrap().apply(&dirs);
        let b = power::fpa(&scaled, pt).unwrap().apply(&scaled);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(rel_diff(y, x) < 1e-12);
        }
    }

    #[test]
    fn fpa_columns_share_power_equally(seed in any::<u64>(), pt in 1e-3f64..1e3) {
        let dirs = instance(seed, 4, 8).iter().map(|b| b.adjoint()).collect::<Vec<_>>();
        let p = power::fpa(&dirs, pt).unwrap().apply(&dirs);
        for pk in &p {
            for col in pk.column_iter() {
                prop_assert!((col.norm_squared() - pt / 8.0).abs() <= 1e-12 * pt / 8.0);
            }
        }
        prop_assert!((power::precoders_power(&p) - pt).abs() <= 1e-10 * pt);
    }

    #[test]
    fn prop1_residual_is_tiny(seed in any::<u64>(), a in 1e-3f64..10.0, b in 1e-3f64..10.0) {
        let blocks = instance(seed, 3, 8);
        let stacked = StackedCsi::in_order(&blocks);
        let plan = RegularizationPlan::successive(&stacked.sizes, vec![a, b, a]);
        let t = metrics::prop1_residuals(&stacked, &plan, 5.0).unwrap();
        prop_assert!(t.max_residual() <= 1e-8);
    }

    #[test]
    fn rates_never_increase_with_noise(seed in any::<u64>(), s1 in 1e-3f64..1.0, factor in 1.0f64..100.0) {
        let blocks = instance(seed, 3, 6);
        let ch = ChannelSet { h: blocks.clone(), path_loss: vec![1.0, 2.0, 3.0] };
        let plan = RegularizationPlan::successive(&[2, 2, 2], vec![0.1; 3]);
        let p = precoding::build(Scheme::Srzf, &StackedCsi::in_order(&blocks), &plan, 4.0, s1).unwrap();
        let lo = metrics::sum_rate(&ch, &p, s1).unwrap();
        let hi = metrics::sum_rate(&ch, &p, s1 * factor).unwrap();
        for (a, b) in lo.rates.iter().zip(&hi.rates) {
            prop_assert!(*b <= *a + 1e-12);
        }
    }

    #[test]
    fn csi_estimate_is_truth_plus_error(seed in any::<u64>(), mu2 in 0f64..0.1, masked in 0usize..3) {
        let mut s = Scenario::paired(3, 8, 2);
        s.seed = seed;
        let ch = channel::generate_channels(&s, 0).unwrap();
        let mut mask = vec![false; 3];
        mask[masked] = true;
        let csi = channel::apply_csi_error(&ch, &[mu2; 3], &mask, seed, 0);
        for k in 0..3 {
            prop_assert_eq!(&csi.hbar[k], &(&ch.h[k] + &csi.delta[k]));
        }
        prop_assert!(csi.delta[masked].norm() == 0.0);
    }

    #[test]
    fn path_loss_is_monotone(d1 in 1e-3f64..1e4, d2 in 1e-3f64..1e4) {
        prop_assume!(d1 < d2);
        prop_assert!(channel::path_loss(d1) < channel::path_loss(d2));
    }
}

#[test]
fn zero_power_gives_zero_rate() {
    let blocks = instance(7, 4, 8);
    let ch = ChannelSet {
        h: blocks.clone(),
        path_loss: vec![1.0; 4],
    };
    let sigma2 = channel::dbm_to_linear(-35.0);
    let plan = RegularizationPlan::successive(&[2; 4], vec![1.0; 4]);
    for scheme in Scheme::ALL {
        let p =
            precoding::build(scheme, &StackedCsi::in_order(&blocks), &plan, 1e-12, sigma2).unwrap();
        assert!(
            metrics::sum_rate(&ch, &p, sigma2).unwrap().sum_rate <= 1e-6,
            "{scheme}"
        );
    }
}
