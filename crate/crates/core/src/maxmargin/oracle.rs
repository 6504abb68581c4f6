use nalgebra::{DMatrix, DVector};

use super::{kkt_residual, MarginProblem, QpSolution};
use crate::data::dot;
use crate::error::{Error, Result};

pub const ORACLE_MAX_POINTS: usize = 16;
pub const ORACLE_MAX_DIMS: usize = 4;

const FEAS_TOL: f64 = 1e-9;

/// Exhaustive active-set solve for small margin problems.
///
/// Every optimum has an active set whose constraint rows `(y_i x_i, y_i)` are
/// linearly independent, so only subsets of size at most `dims + bias` are
/// enumerated. Each candidate is solved in closed form from its KKT system;
/// the feasible candidate with nonnegative multipliers and least norm wins.
pub fn oracle_active_set(prob: &MarginProblem<'_>) -> Result<QpSolution> {
    let n = prob.data().len();
    let d = prob.dims();
    if n > ORACLE_MAX_POINTS || d > ORACLE_MAX_DIMS {
        return Err(Error::BudgetExceeded { points: n, dims: d });
    }
    let rows = prob.rows();
    let x = |i: usize| &rows[i * d..(i + 1) * d];
    let y: Vec<f64> = prob.data().labels().collect();
    let c = prob.targets();
    let scale = 1.0 + c.iter().fold(0.0f64, |m, v| m.max(*v));

    let max_k = (d + usize::from(prob.bias())).min(n);
    let mut best: Option<(f64, Vec<f64>, f64, Vec<f64>)> = None;
    let mut subset = Vec::with_capacity(max_k);
    for k in 0..=max_k {
        for_each_combination(n, k, &mut subset, &mut |active| {
            let Some((w, b, alpha)) = solve_active(active, &x, &y, c, d, prob.bias()) else {
                return;
            };
            if alpha.iter().any(|a| *a < -FEAS_TOL * scale) {
                return;
            }
            let feasible = (0..n).all(|i| y[i] * (dot(&w, x(i)) + b) >= c[i] - FEAS_TOL * scale);
            if !feasible {
                return;
            }
            let obj = 0.5 * dot(&w, &w);
            if best.as_ref().is_none_or(|(o, ..)| obj < *o - 1e-15 * scale) {
                let mut full = vec![0.0; n];
                for (slot, &i) in active.iter().enumerate() {
                    full[i] = alpha[slot].max(0.0);
                }
                best = Some((obj, w, b, full));
            }
        });
    }
    let (objective, w, b, duals) = best.ok_or(Error::Infeasible)?;
    let kkt = kkt_residual(prob, &w, b, &duals);
    Ok(QpSolution {
        model: prob.model_from(&w, b),
        duals,
        objective,
        kkt_residual: kkt,
        iterations: 0,
        converged: true,
    })
}

/// Solves the equality-constrained least-norm system for one active set.
fn solve_active<'r>(
    active: &[usize],
    x: &impl Fn(usize) -> &'r [f64],
    y: &[f64],
    c: &[f64],
    d: usize,
    bias: bool,
) -> Option<(Vec<f64>, f64, Vec<f64>)> {
    let k = active.len();
    if k == 0 {
        return if bias {
            free_bias(y, c, d)
        } else {
            Some((vec![0.0; d], 0.0, vec![]))
        };
    }
    let m = k + usize::from(bias);
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for (r, &i) in active.iter().enumerate() {
        for (s, &j) in active.iter().enumerate() {
            a[(r, s)] = y[i] * y[j] * dot(x(i), x(j));
        }
        rhs[r] = c[i];
        if bias {
            a[(r, k)] = y[i];
            a[(k, r)] = y[i];
        }
    }
    let sol = a.clone().lu().solve(&rhs)?;
    if sol.iter().any(|v| !v.is_finite()) || (&a * &sol - &rhs).amax() > 1e-9 * (1.0 + rhs.amax()) {
        return None;
    }
    let alpha: Vec<f64> = sol.iter().take(k).copied().collect();
    let b = if bias { sol[k] } else { 0.0 };
    let mut w = vec![0.0; d];
    for (slot, &i) in active.iter().enumerate() {
        for (wk, xk) in w.iter_mut().zip(x(i)) {
            *wk += alpha[slot] * y[i] * xk;
        }
    }
    Some((w, b, alpha))
}

/// `w = 0` with a bias: feasible iff one offset meets every target.
fn free_bias(y: &[f64], c: &[f64], d: usize) -> Option<(Vec<f64>, f64, Vec<f64>)> {
    let lo = y
        .iter()
        .zip(c)
        .filter(|(y, _)| **y > 0.0)
        .map(|(_, c)| *c)
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = y
        .iter()
        .zip(c)
        .filter(|(y, _)| **y < 0.0)
        .map(|(_, c)| -*c)
        .fold(f64::INFINITY, f64::min);
    if lo > hi {
        return None;
    }
    Some((vec![0.0; d], 0.0f64.clamp(lo, hi), vec![]))
}

fn for_each_combination(n: usize, k: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if buf.len() == k {
            f(buf);
            return;
        }
        for i in start..n {
            if n - i < k - buf.len() {
                break;
            }
            buf.push(i);
            rec(i + 1, n, k, buf, f);
            buf.pop();
        }
    }
    buf.clear();
    rec(0, n, k, buf, f);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Dataset, Label, LabeledPoint};
    use crate::maxmargin::FeatureMask;
    use approx::assert_abs_diff_eq;

    #[test]
    fn combinations_count() {
        let mut count = 0;
        let mut buf = Vec::new();
        for_each_combination(6, 3, &mut buf, &mut |_| count += 1);
        assert_eq!(count, 20);
        count = 0;
        for_each_combination(4, 0, &mut buf, &mut |s| {
            assert!(s.is_empty());
            count += 1
        });
        assert_eq!(count, 1);
    }

    #[test]
    fn one_point_closed_form() {
        let d = Dataset::new(
            vec![LabeledPoint::new(vec![1.0, -2.0], vec![1.0], Label::Neg)],
            1.0,
            false,
            Default::default(),
        )
        .unwrap();
        let sol = oracle_active_set(&MarginProblem::unit(&d, FeatureMask::InvOnly, false)).unwrap();
        // w = y x / ||x||^2
        assert_abs_diff_eq!(sol.model.w_inv[0], -0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.model.w_inv[1], 0.4, epsilon = 1e-12);
    }

    #[test]
    fn opposite_labels_same_point_is_infeasible() {
        let d = Dataset::new(
            vec![
                LabeledPoint::new(vec![1.0], vec![1.0], Label::Pos),
                LabeledPoint::new(vec![1.0], vec![1.0], Label::Neg),
            ],
            1.0,
            false,
            Default::default(),
        )
        .unwrap();
        let r = oracle_active_set(&MarginProblem::unit(&d, FeatureMask::InvOnly, false));
        assert!(matches!(r, Err(Error::Infeasible)));
    }

    #[test]
    fn budget_is_enforced() {
        let pts = (0..17)
            .map(|i| LabeledPoint::new(vec![i as f64 + 1.0], vec![1.0], Label::Pos))
            .collect();
        let d = Dataset::new(pts, 1.0, false, Default::default()).unwrap();
        let r = oracle_active_set(&MarginProblem::unit(&d, FeatureMask::InvOnly, false));
        assert!(matches!(r, Err(Error::BudgetExceeded { points: 17, .. })));
    }
}
