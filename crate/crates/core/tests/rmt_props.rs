use std::f64::consts::PI;

use hyperell_core::rmt::{kernel_det, kernel_k, one_level_usp_exact};
use hyperell_core::testfn::TestFn;
use proptest::prelude::*;

proptest! {
    #[test]
    fn det_even_in_each_coordinate(xs in prop::collection::vec(-3.0f64..3.0, 2..6), i in any::<prop::sample::Index>()) {
        let base = kernel_det(&xs);
        let mut ys = xs.clone();
        let k = i.index(xs.len());
        ys[k] = -ys[k];
        prop_assert!((kernel_det(&ys) - base).abs() <= 1e-12 * (1.0 + base.abs()));
    }

    #[test]
    fn det_symmetric(xs in prop::collection::vec(-3.0f64..3.0, 2..6), i in any::<prop::sample::Index>()) {
        let base = kernel_det(&xs);
        let mut ys = xs.clone();
        ys.swap(0, i.index(xs.len()));
        prop_assert!((kernel_det(&ys) - base).abs() <= 1e-12 * (1.0 + base.abs()));
    }

    #[test]
    fn one_level_density_range(x in 0.0f64..50.0) {
        let w = kernel_k(x, x);
        prop_assert!((0.0..=1.0 + 1.0 / PI).contains(&w));
    }
}

#[test]
fn one_level_density_vanishes_at_zero() {
    assert_eq!(kernel_k(0.0, 0.0), 0.0);
}

#[test]
fn finite_g_mean_tends_to_limit() {
    let f = TestFn::triangle(1.5).unwrap();
    let gap = |g: usize| (one_level_usp_exact(&f, g) - 1.0 / 3.0).abs();
    assert!(gap(200) < gap(20) && gap(200) < 1e-2);
}
