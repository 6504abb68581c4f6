use proptest::prelude::*;
use skewlab_core::skews::{compute_skew_report, norm_growth_curve, CurveMode};
use skewlab_core::taskgen::{gen_geometric_2d, GenSpec, InvPoint};
use skewlab_core::Label;

const MAJ: [f64; 5] = [0.1, 0.25, 0.5, 1.0, 2.0];
const MIN: [f64; 5] = [0.5, 1.0, 2.0, 4.0, 8.0];
const SIZES: [(usize, usize); 3] = [(2, 2), (8, 2), (20, 4)];

#[test]
fn sandwich_over_grid() {
    let mut checked = 0;
    for &maj in &MAJ {
        for &min in &MIN {
            for &(n_maj, n_min) in &SIZES {
                let d = gen_geometric_2d(maj, min, n_maj, n_min, 1.0).unwrap();
                let r = compute_skew_report(&d).unwrap();
                if r.lb_precondition_met && r.ub_precondition_met {
                    checked += 1;
                    assert!(r.slack_lower >= -1e-9, "maj {maj} min {min}: {r:?}");
                    assert!(r.slack_upper >= -1e-9, "maj {maj} min {min}: {r:?}");
                }
            }
        }
    }
    assert!(checked >= 20, "only {checked} cells met both preconditions");
}

#[test]
fn vanishing_skew_shrinks_upper_bound() {
    let mut prev = f64::INFINITY;
    for min in [8.0, 4.0, 2.0, 1.5, 1.1, 1.01, 1.0] {
        let d = gen_geometric_2d(1.0, min, 6, 2, 1.0).unwrap();
        let r = compute_skew_report(&d).unwrap();
        assert!(r.upper_bound <= prev + 1e-9);
        assert!(r.measured_bwsp.abs() <= r.upper_bound + 1e-9);
        prev = r.upper_bound;
    }
    assert!(prev.abs() < 1e-7);
}

fn heavy_tail_pool(n: usize, seed: u64) -> Vec<InvPoint> {
    use rand::Rng;
    let mut rng = skewlab_core::rng::seeded(seed);
    (0..n)
        .map(|i| {
            let y = if i % 2 == 0 { Label::Pos } else { Label::Neg };
            // Pareto-like margins: small margins appear rarely but keep appearing
            let u: f64 = rng.random_range(1e-3..1.0);
            let m = u.powf(1.5);
            (vec![y.value() * m, rng.random_range(-1.0..1.0)], y)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn plain_kappa_never_exceeds_tilde(maj in 0.1f64..3.0, min in 0.1f64..8.0, b in 0.5f64..3.0) {
        let d = gen_geometric_2d(maj, min, 6, 2, b).unwrap();
        let r = compute_skew_report(&d).unwrap();
        prop_assert!((r.vt_all - r.v_all).abs() < 1e-7);
        prop_assert!(r.kappa1 <= r.kappa1_tilde + 1e-7);
    }

    #[test]
    fn sandwich_on_random_geometry(maj in 0.05f64..2.0, ratio in 1.0f64..40.0, b in 0.5f64..2.0, k in 1usize..6) {
        let d = gen_geometric_2d(maj, maj * ratio, 2 * k + 2, 2, b).unwrap();
        let r = compute_skew_report(&d).unwrap();
        prop_assert!(r.sandwich_holds(1e-9), "{:?}", r);
    }

    #[test]
    fn nested_curve_is_monotone(seed in 0u64..1000) {
        let pool = heavy_tail_pool(120, seed);
        let sizes = [4, 8, 16, 32, 64, 120];
        let spec = GenSpec::new("tail", 0, 0.8, 1.0, seed);
        let rows = norm_growth_curve(&pool, &sizes, &spec, CurveMode::Nested).unwrap();
        for w in rows.windows(2) {
            prop_assert!(w[1].v_norm >= w[0].v_norm * (1.0 - 1e-7));
        }
    }
}
