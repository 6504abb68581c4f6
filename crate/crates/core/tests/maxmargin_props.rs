use proptest::prelude::*;
use skewlab_core::maxmargin::kkt_residual;
use skewlab_core::taskgen::{gen_2dim, gen_geometric_2d, GenSpec};
use skewlab_core::{
    max_margin, oracle_active_set, solve_least_norm, v_norm, v_tilde_norm, Dataset, Error, FeatureMask, Label,
    LabeledPoint, MarginProblem, Metadata, SolverOptions,
};

fn dataset(rows: &[(Vec<f64>, bool)]) -> Dataset {
    let pts = rows
        .iter()
        .map(|(x, pos)| {
            let y = if *pos { Label::Pos } else { Label::Neg };
            LabeledPoint::new(x[..x.len() - 1].to_vec(), vec![x[x.len() - 1]], y)
        })
        .collect();
    Dataset::new(pts, 1.0, false, Metadata::default()).unwrap()
}

type Problem = (Vec<(Vec<f64>, bool)>, Vec<f64>, bool, bool);

fn problem_strategy() -> impl Strategy<Value = Problem> {
    (2usize..=3, 2usize..=10).prop_flat_map(|(d, n)| {
        (
            prop::collection::vec((prop::collection::vec(-3.0f64..3.0, d), any::<bool>()), n),
            prop::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.2f64..3.0], n),
            any::<bool>(),
            any::<bool>(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn solver_agrees_with_oracle((rows, targets, bias, full) in problem_strategy()) {
        let d = dataset(&rows);
        let mask = if full { FeatureMask::Full } else { FeatureMask::InvOnly };
        let prob = MarginProblem::new(&d, targets, mask, bias).unwrap();
        let oracle = oracle_active_set(&prob);
        let solved = solve_least_norm(&prob, &SolverOptions::default());
        match (oracle, solved) {
            (Ok(o), Ok(s)) => {
                prop_assert!(s.converged);
                let scale = 1.0 + o.objective.abs();
                prop_assert!((o.objective - s.objective).abs() <= 1e-6 * scale,
                    "oracle {} solver {}", o.objective, s.objective);
                let amax = s.duals.iter().fold(1.0f64, |m, a| m.max(*a));
                prop_assert!(s.kkt_residual <= 1e-6 * amax, "kkt {} duals {:?}", s.kkt_residual, s.duals);
            }
            (Err(Error::Infeasible), Err(Error::NotSeparable { .. })) => {}
            (o, s) => prop_assert!(false, "oracle {:?} vs solver {:?}", o.map(|v| v.objective), s.map(|v| v.objective)),
        }
    }

    #[test]
    fn restricted_norms_are_ordered(maj in 0.1f64..3.0, min in 0.1f64..3.0, b in 0.5f64..2.0) {
        let d = gen_geometric_2d(maj, min, 4, 2, b).unwrap();
        let all: Vec<usize> = (0..d.len()).collect();
        let min_idx = vec![4, 5];
        // fewer constraints never need a larger norm
        let v_min = v_norm(&d, &min_idx).unwrap();
        let vt_min = v_tilde_norm(&d, &min_idx).unwrap();
        let v_all = v_norm(&d, &all).unwrap();
        prop_assert!(v_min <= vt_min + 1e-7);
        prop_assert!(vt_min <= v_all + 1e-7);
        prop_assert!((v_tilde_norm(&d, &all).unwrap() - v_all).abs() < 1e-7);
    }

    #[test]
    fn max_margin_is_duplicate_invariant(seed in 0u64..500, reps in 1usize..4) {
        let d = gen_2dim(&GenSpec::new("2dim", 12, 0.75, 1.0, seed)).unwrap();
        let mut idx: Vec<usize> = (0..d.len()).collect();
        for _ in 0..reps {
            idx.push(seed as usize % d.len());
        }
        let dup = d.subset(&idx).unwrap();
        let a = max_margin(&d).unwrap();
        let b = max_margin(&dup).unwrap();
        for (x, y) in a.model.weights().iter().zip(b.model.weights()) {
            prop_assert!((x - y).abs() < 1e-6);
        }
    }
}

#[test]
fn worked_instance_full_max_margin() {
    let d = gen_geometric_2d(0.1, 2.0, 2, 2, 1.0).unwrap();
    let sol = max_margin(&d).unwrap();
    assert!((sol.model.w_inv[0] - 20.0 / 21.0).abs() < 1e-7);
    assert!((sol.model.w_sp[0] - 19.0 / 21.0).abs() < 1e-7);
    assert!(sol.model.bias.abs() < 1e-7);
    let prob = MarginProblem::unit(&d, FeatureMask::Full, true);
    let o = oracle_active_set(&prob).unwrap();
    assert!((o.objective - sol.objective).abs() < 1e-7);
    assert!(kkt_residual(&prob, &o.model.weights(), o.model.bias, &o.duals) < 1e-12);
}

#[test]
fn larger_problems_converge() {
    for seed in 0..5 {
        let d = gen_2dim(&GenSpec::new("2dim", 2048, 0.9, 1.0, seed).exact()).unwrap();
        let sol = max_margin(&d).unwrap();
        assert!(sol.kkt_residual < 1e-8);
        assert!((sol.model.w_inv[0] - 1.0).abs() < 1e-7, "{:?}", sol.model);
    }
}
