//! Group bookkeeping and the easy-to-learn constraint checks.

use crate::data::{Dataset, GroupSplit};
use crate::error::{Error, Result};
use crate::maxmargin::{solve_least_norm, FeatureMask, MarginProblem, SolverOptions};

/// Partitions a two-valued dataset by the sign of `x_sp * y`.
pub fn split_groups(d: &Dataset) -> Result<GroupSplit> {
    if d.sp_dim() != 1 {
        return Err(Error::NotTwoValued(format!(
            "spurious block has {} coordinates",
            d.sp_dim()
        )));
    }
    let mut split = GroupSplit::default();
    for (i, p) in d.points().iter().enumerate() {
        let s = p.sp_agreement();
        if s > 0.0 {
            split.majority.push(i);
        } else if s < 0.0 {
            split.minority.push(i);
        } else {
            return Err(Error::NotTwoValued(format!("point {i} has x_sp = 0")));
        }
    }
    Ok(split)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintCheck {
    pub holds: bool,
    pub detail: String,
}

impl ConstraintCheck {
    fn new(holds: bool, detail: impl Into<String>) -> Self {
        Self {
            holds,
            detail: detail.into(),
        }
    }
}

/// Outcome of checking the five easy-to-learn constraints on one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    /// Invariant features alone separate the sample.
    pub c1: ConstraintCheck,
    /// Invariant marginal identical across domains (generator claim).
    pub c2: ConstraintCheck,
    /// Spurious feature independent of invariant given the label (generator claim).
    pub c3: ConstraintCheck,
    /// Spurious feature takes exactly two values `+-B`.
    pub c4: ConstraintCheck,
    /// Feature map is the identity (generator claim).
    pub c5: ConstraintCheck,
    /// Margin `1 / ||v(S)||` of the invariant-only least-norm classifier, if
    /// one exists.
    pub inv_margin: Option<f64>,
}

impl ConstraintReport {
    pub fn all_hold(&self) -> bool {
        [&self.c1, &self.c2, &self.c3, &self.c4, &self.c5]
            .iter()
            .all(|c| c.holds)
    }
}

/// Decides constraints 1 and 4 from the sample and echoes the provenance
/// flags for the distribution-level constraints 2, 3 and 5.
pub fn validate_easy_task(d: &Dataset) -> ConstraintReport {
    let prob = MarginProblem::unit(d, FeatureMask::InvOnly, true);
    let (c1, inv_margin) = match solve_least_norm(&prob, &SolverOptions::default()) {
        Ok(sol) if sol.converged && sol.objective > 0.0 => {
            let m = 1.0 / sol.norm();
            (ConstraintCheck::new(true, format!("inv-only margin {m:.6e}")), Some(m))
        }
        Ok(sol) if sol.converged => (
            ConstraintCheck::new(true, "single class: bias alone separates"),
            Some(f64::INFINITY),
        ),
        Ok(sol) => (
            ConstraintCheck::new(false, format!("solver stopped at residual {:.3e}", sol.kkt_residual)),
            None,
        ),
        Err(e) => (ConstraintCheck::new(false, e.to_string()), None),
    };

    let b = d.sp_scale();
    let off_support = d
        .points()
        .iter()
        .position(|p| p.x_sp.len() != 1 || p.x_sp[0].abs() != b);
    let c4 = match off_support {
        None => ConstraintCheck::new(true, format!("all spurious values in {{-{b}, +{b}}}")),
        Some(i) => ConstraintCheck::new(false, format!("point {i} has spurious block {:?}", d.points()[i].x_sp)),
    };

    let prov = d.meta().provenance;
    let echo = |flag: bool| ConstraintCheck::new(flag, format!("generator `{}` provenance", d.meta().generator));
    ConstraintReport {
        c1,
        c2: echo(prov.stable_inv_marginal),
        c3: echo(prov.cond_independent),
        c4,
        c5: echo(prov.identity_mapping),
        inv_margin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Label, LabeledPoint, Metadata, Provenance};
    use crate::taskgen::{gen_2dim, gen_constraint_breakers, BreakerKind, GenSpec};

    #[test]
    fn four_point_groups() {
        let d = gen_2dim(&GenSpec::new("2dim", 4, 0.5, 1.0, 0).exact()).unwrap();
        let g = split_groups(&d).unwrap();
        assert_eq!(g.majority.len(), 2);
        assert_eq!(g.minority.len(), 2);
        for &i in &g.majority {
            let p = &d.points()[i];
            assert_eq!(p.x_sp[0], p.y.value());
            assert_eq!(p.x_inv[0], p.y.value());
        }
        for &i in &g.minority {
            let p = &d.points()[i];
            assert_eq!(p.x_sp[0], -p.y.value());
        }
    }

    #[test]
    fn exact_counts_split() {
        let d = gen_2dim(&GenSpec::new("2dim", 20, 0.9, 1.0, 3).exact()).unwrap();
        let g = split_groups(&d).unwrap();
        assert_eq!((g.majority.len(), g.minority.len()), (18, 2));
    }

    #[test]
    fn full_correlation_has_empty_minority() {
        let pts = vec![
            LabeledPoint::new(vec![1.0], vec![2.0], Label::Pos),
            LabeledPoint::new(vec![-1.0], vec![-2.0], Label::Neg),
        ];
        let d = Dataset::new(pts, 2.0, true, Metadata::default()).unwrap();
        assert!(split_groups(&d).unwrap().minority.is_empty());
    }

    #[test]
    fn rejects_zero_and_multidim() {
        let pts = vec![LabeledPoint::new(vec![1.0], vec![0.0], Label::Pos)];
        let d = Dataset::new(pts, 1.0, false, Metadata::default()).unwrap();
        assert!(split_groups(&d).is_err());
        let pts = vec![LabeledPoint::new(vec![1.0], vec![1.0, 1.0], Label::Pos)];
        let d = Dataset::new(pts, 1.0, false, Metadata::default()).unwrap();
        assert!(split_groups(&d).is_err());
    }

    #[test]
    fn two_dim_sample_is_easy() {
        let d = gen_2dim(&GenSpec::new("2dim", 50, 0.8, 1.0, 9)).unwrap();
        let r = validate_easy_task(&d);
        assert!(r.all_hold(), "{r:?}");
        assert!((r.inv_margin.unwrap() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn nonorthogonal_breaks_identity_mapping() {
        let d = gen_constraint_breakers(BreakerKind::Nonorthogonal, 40, 0.9, 1).unwrap();
        let r = validate_easy_task(&d);
        assert!(!r.c5.holds);
    }

    #[test]
    fn three_valued_support_fails_c4() {
        let pts = vec![
            LabeledPoint::new(vec![1.0], vec![1.0], Label::Pos),
            LabeledPoint::new(vec![-1.0], vec![0.0], Label::Neg),
            LabeledPoint::new(vec![2.0], vec![-1.0], Label::Pos),
        ];
        let d = Dataset::new(pts, 1.0, false, Metadata::new("manual", None, Provenance::ALL)).unwrap();
        let r = validate_easy_task(&d);
        assert!(!r.c4.holds);
        assert!(r.c1.holds);
    }

    #[test]
    fn inseparable_invariant_fails_c1() {
        let pts = vec![
            LabeledPoint::new(vec![1.0], vec![1.0], Label::Pos),
            LabeledPoint::new(vec![1.0], vec![-1.0], Label::Neg),
        ];
        let d = Dataset::new(pts, 1.0, true, Metadata::default()).unwrap();
        assert!(!validate_easy_task(&d).c1.holds);
    }
}
