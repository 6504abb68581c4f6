use super::{kkt_residual, MarginProblem, QpSolution};
use crate::data::dot;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop once the largest margin-unit KKT violation drops to this value.
    pub tol: f64,
    /// Cap on coordinate (or pair) updates.
    pub max_iter: usize,
    /// A dual objective above this value declares the problem not separable.
    pub dual_cap: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 1_000_000,
            dual_cap: 1e12,
        }
    }
}

/// Recompute `w` from the multipliers this often to keep rounding drift out
/// of the incremental primal.
const REFRESH_EVERY: usize = 4096;

/// Period of the extrapolation step along the accumulated ascent direction.
const EXTRAPOLATE_EVERY: usize = 64;

struct State<'p> {
    rows: Vec<f64>,
    y: Vec<f64>,
    c: &'p [f64],
    d: usize,
    alpha: Vec<f64>,
    w: Vec<f64>,
    // y_i * w . x_i - c_i, the gradient of the dual (as a minimization)
    grad: Vec<f64>,
}

impl<'p> State<'p> {
    fn new(prob: &'p MarginProblem<'_>) -> Self {
        let d = prob.dims();
        let n = prob.data().len();
        Self {
            rows: prob.rows(),
            y: prob.data().labels().collect(),
            c: prob.targets(),
            d,
            alpha: vec![0.0; n],
            w: vec![0.0; d],
            grad: prob.targets().iter().map(|c| -c).collect(),
        }
    }

    fn x(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    fn refresh_w(&mut self) {
        self.w.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.y.len() {
            let a = self.alpha[i];
            if a != 0.0 {
                let s = a * self.y[i];
                for k in 0..self.d {
                    self.w[k] += s * self.rows[i * self.d + k];
                }
            }
        }
    }

    fn refresh_grad(&mut self) {
        for i in 0..self.y.len() {
            self.grad[i] = self.y[i] * dot(&self.w, self.x(i)) - self.c[i];
        }
    }

    /// Bounded duals and dual objective are necessary for feasibility.
    fn check_cap(&self, cap: f64) -> Result<()> {
        let dual = self.dual_objective();
        let largest = self.alpha.iter().fold(0.0f64, |m, a| m.max(*a));
        if dual > cap || largest > cap || !dual.is_finite() {
            return Err(Error::NotSeparable {
                dual_objective: dual.max(largest),
            });
        }
        Ok(())
    }

    fn dual_objective(&self) -> f64 {
        let lin: f64 = self.alpha.iter().zip(self.c).map(|(a, c)| a * c).sum();
        lin - 0.5 * dot(&self.w, &self.w)
    }

    /// `w += s * x_i`
    fn axpy(&mut self, s: f64, i: usize) {
        let base = i * self.d;
        for k in 0..self.d {
            self.w[k] += s * self.rows[base + k];
        }
    }

    /// Exact line search along `alpha - snapshot`. On separable problems this
    /// only accelerates; on infeasible ones the direction approaches a ray of
    /// zero curvature and the dual blows past the cap geometrically.
    fn extrapolate(&mut self, snapshot: &[f64], w_snapshot: &[f64]) -> Result<()> {
        let delta: Vec<f64> = self.alpha.iter().zip(snapshot).map(|(a, s)| a - s).collect();
        let u: Vec<f64> = self.w.iter().zip(w_snapshot).map(|(a, s)| a - s).collect();
        let slope = delta.iter().zip(self.c).map(|(d, c)| d * c).sum::<f64>() - dot(&self.w, &u);
        if !(slope > 0.0) {
            return self.rescale();
        }
        let curv = dot(&u, &u);
        let mut step = if curv > 0.0 { slope / curv } else { f64::INFINITY };
        for (a, d) in self.alpha.iter().zip(&delta) {
            if *d < 0.0 {
                step = step.min(a / -d);
            }
        }
        if step.is_infinite() {
            return Err(Error::NotSeparable {
                dual_objective: f64::INFINITY,
            });
        }
        if step > 0.0 {
            for (a, d) in self.alpha.iter_mut().zip(&delta) {
                *a = (*a + step * d).max(0.0);
            }
            self.refresh_w();
            self.refresh_grad();
        }
        self.rescale()
    }

    /// Exact line search along `alpha` itself. The optimum of `t L - t^2 Q / 2`
    /// is `t = L / Q`, which equals 1 at a dual optimum.
    fn rescale(&mut self) -> Result<()> {
        let lin: f64 = self.alpha.iter().zip(self.c).map(|(a, c)| a * c).sum();
        if !(lin > 0.0) {
            return Ok(());
        }
        let quad = dot(&self.w, &self.w);
        if quad == 0.0 {
            return Err(Error::NotSeparable {
                dual_objective: f64::INFINITY,
            });
        }
        let t = lin / quad;
        if t > 1.0 {
            self.alpha.iter_mut().for_each(|a| *a *= t);
            self.w.iter_mut().for_each(|v| *v *= t);
            self.refresh_grad();
        }
        Ok(())
    }
}

/// Solves a least-norm margin problem by ascent on its hard-margin dual.
///
/// With a bias the multipliers must stay balanced (`sum alpha_i y_i = 0`), so
/// each step moves the maximally violating pair; without one, single
/// coordinates are updated exactly. Ties pick the lowest index. The dual is
/// unbounded exactly when the primal is infeasible, which is reported once
/// the dual objective or any multiplier passes `opts.dual_cap`.
///
/// Stops when the maximal-violating-pair gap (with a bias) or the largest
/// projected-gradient entry (without) drops to `opts.tol`; both are measured
/// in margin units. The full KKT certificate is reported alongside.
///
/// Hitting `opts.max_iter` is not an error: the current iterate comes back
/// with `converged == false`.
pub fn solve_least_norm(prob: &MarginProblem<'_>, opts: &SolverOptions) -> Result<QpSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be > 0, got {}", opts.tol)));
    }
    let mut st = State::new(prob);
    let (iterations, b, converged) = if prob.bias() {
        run_pairwise(&mut st, opts)?
    } else {
        run_coordinate(&mut st, opts)?
    };

    st.refresh_w();
    let objective = 0.5 * dot(&st.w, &st.w);
    let kkt = kkt_residual(prob, &st.w, b, &st.alpha);
    Ok(QpSolution {
        model: prob.model_from(&st.w, b),
        duals: st.alpha,
        objective,
        kkt_residual: kkt,
        iterations,
        converged,
    })
}

fn run_coordinate(st: &mut State<'_>, opts: &SolverOptions) -> Result<(usize, f64, bool)> {
    let n = st.y.len();
    let sq: Vec<f64> = (0..n).map(|i| dot(st.x(i), st.x(i))).collect();
    let (mut snap, mut w_snap) = (st.alpha.clone(), st.w.clone());
    for iter in 0..opts.max_iter {
        // projected-gradient violation
        let mut best = 0.0;
        let mut pick = usize::MAX;
        for i in 0..n {
            let g = st.grad[i];
            let v = if st.alpha[i] > 0.0 { g.abs() } else { (-g).max(0.0) };
            if v > best {
                best = v;
                pick = i;
            }
        }
        if pick == usize::MAX || best <= opts.tol {
            return Ok((iter, 0.0, true));
        }
        let i = pick;
        let old = st.alpha[i];
        let new = if sq[i] > 0.0 {
            (old - st.grad[i] / sq[i]).max(0.0)
        } else if st.grad[i] < 0.0 {
            // a positive target on the zero vector: dual increases without bound
            return Err(Error::NotSeparable {
                dual_objective: f64::INFINITY,
            });
        } else {
            0.0
        };
        let delta = new - old;
        st.alpha[i] = new;
        st.axpy(delta * st.y[i], i);
        if (iter + 1) % REFRESH_EVERY == 0 {
            st.refresh_w();
        }
        st.refresh_grad();
        if (iter + 1) % EXTRAPOLATE_EVERY == 0 {
            st.extrapolate(&snap, &w_snap)?;
            snap.clone_from(&st.alpha);
            w_snap.clone_from(&st.w);
        }
        st.check_cap(opts.dual_cap)?;
    }
    Ok((opts.max_iter, 0.0, false))
}

/// Optimal bias for the current multipliers: the midpoint of the interval
/// left open by the up/low index sets.
fn bias_from(m_up: f64, m_low: f64) -> f64 {
    match (m_up.is_finite(), m_low.is_finite()) {
        (true, true) => 0.5 * (m_up + m_low),
        (true, false) => m_up,
        (false, true) => m_low,
        (false, false) => 0.0,
    }
}

fn run_pairwise(st: &mut State<'_>, opts: &SolverOptions) -> Result<(usize, f64, bool)> {
    let n = st.y.len();
    let (mut snap, mut w_snap) = (st.alpha.clone(), st.w.clone());
    for iter in 0..opts.max_iter {
        // I_up: y = +1 or alpha > 0; I_low: y = -1 or alpha > 0. The score
        // -y * grad is <= b on I_up and >= b on I_low at the optimum.
        let (mut m_up, mut i_up) = (f64::NEG_INFINITY, usize::MAX);
        let (mut m_low, mut i_low) = (f64::INFINITY, usize::MAX);
        for t in 0..n {
            let v = -st.y[t] * st.grad[t];
            let free = st.alpha[t] > 0.0;
            if (st.y[t] > 0.0 || free) && v > m_up {
                m_up = v;
                i_up = t;
            }
            if (st.y[t] < 0.0 || free) && v < m_low {
                m_low = v;
                i_low = t;
            }
        }
        let b = bias_from(m_up, m_low);
        if i_up == usize::MAX || i_low == usize::MAX || m_up - m_low <= opts.tol {
            return Ok((iter, b, true));
        }

        let (i, j) = (i_up, i_low);
        let (xi, xj) = (st.x(i), st.x(j));
        let curv: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
        // alpha_i += y_i * lam, alpha_j -= y_j * lam; both must stay >= 0
        let mut cap = f64::INFINITY;
        if st.y[i] < 0.0 {
            cap = cap.min(st.alpha[i]);
        }
        if st.y[j] > 0.0 {
            cap = cap.min(st.alpha[j]);
        }
        let lam = if curv > 0.0 {
            ((m_up - m_low) / curv).min(cap)
        } else if cap.is_finite() {
            cap
        } else {
            return Err(Error::NotSeparable {
                dual_objective: f64::INFINITY,
            });
        };
        let clipped_i = st.y[i] < 0.0 && lam >= st.alpha[i];
        let clipped_j = st.y[j] > 0.0 && lam >= st.alpha[j];
        st.alpha[i] = if clipped_i { 0.0 } else { st.alpha[i] + st.y[i] * lam };
        st.alpha[j] = if clipped_j { 0.0 } else { st.alpha[j] - st.y[j] * lam };
        // w moves by lam * (x_i - x_j)
        st.axpy(lam, i);
        st.axpy(-lam, j);
        if (iter + 1) % REFRESH_EVERY == 0 {
            st.refresh_w();
        }
        st.refresh_grad();
        if (iter + 1) % EXTRAPOLATE_EVERY == 0 {
            st.extrapolate(&snap, &w_snap)?;
            snap.clone_from(&st.alpha);
            w_snap.clone_from(&st.w);
        }
        st.check_cap(opts.dual_cap)?;
    }
    let (mut m_up, mut m_low) = (f64::NEG_INFINITY, f64::INFINITY);
    for t in 0..n {
        let v = -st.y[t] * st.grad[t];
        if st.y[t] > 0.0 || st.alpha[t] > 0.0 {
            m_up = m_up.max(v);
        }
        if st.y[t] < 0.0 || st.alpha[t] > 0.0 {
            m_low = m_low.min(v);
        }
    }
    Ok((opts.max_iter, bias_from(m_up, m_low), false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Dataset, Label, LabeledPoint};
    use crate::maxmargin::FeatureMask;
    use approx::assert_abs_diff_eq;

    fn ds(points: Vec<(Vec<f64>, Label)>) -> Dataset {
        let pts = points
            .into_iter()
            .map(|(x, y)| LabeledPoint::new(x, vec![1.0], y))
            .collect();
        Dataset::new(pts, 1.0, false, Default::default()).unwrap()
    }

    #[test]
    fn one_point_without_bias() {
        let d = ds(vec![(vec![3.0, 4.0], Label::Pos)]);
        let sol = solve_least_norm(
            &MarginProblem::unit(&d, FeatureMask::InvOnly, false),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(sol.converged);
        assert_abs_diff_eq!(sol.model.w_inv[0], 3.0 / 25.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.model.w_inv[1], 4.0 / 25.0, epsilon = 1e-12);
    }

    #[test]
    fn contradictory_labels_are_not_separable() {
        let d = ds(vec![(vec![1.0], Label::Pos), (vec![1.0], Label::Neg)]);
        for bias in [false, true] {
            let r = solve_least_norm(
                &MarginProblem::unit(&d, FeatureMask::InvOnly, bias),
                &SolverOptions::default(),
            );
            assert!(matches!(r, Err(Error::NotSeparable { .. })), "bias={bias}: {r:?}");
        }
    }

    #[test]
    fn overlapping_classes_hit_the_dual_cap() {
        // 1-D, interleaved labels: infeasible, but no two rows coincide
        let d = ds(vec![
            (vec![1.0], Label::Pos),
            (vec![2.0], Label::Neg),
            (vec![3.0], Label::Pos),
        ]);
        let r = solve_least_norm(
            &MarginProblem::unit(&d, FeatureMask::InvOnly, true),
            &SolverOptions::default(),
        );
        assert!(matches!(r, Err(Error::NotSeparable { .. })), "{r:?}");
    }

    #[test]
    fn zero_targets_give_zero_model() {
        let d = ds(vec![(vec![1.0], Label::Pos), (vec![-2.0], Label::Neg)]);
        for bias in [false, true] {
            let prob = MarginProblem::new(&d, vec![0.0, 0.0], FeatureMask::Full, bias).unwrap();
            let sol = solve_least_norm(&prob, &SolverOptions::default()).unwrap();
            assert!(sol.converged);
            assert_eq!(sol.objective, 0.0);
            assert_eq!(sol.iterations, 0);
        }
    }

    #[test]
    fn single_class_with_bias_uses_bias_only() {
        let d = ds(vec![(vec![1.0], Label::Pos), (vec![5.0], Label::Pos)]);
        let sol = solve_least_norm(
            &MarginProblem::unit(&d, FeatureMask::InvOnly, true),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(sol.converged);
        assert_eq!(sol.objective, 0.0);
        assert!(sol.model.bias >= 1.0);
    }

    #[test]
    fn max_iterations_returns_iterate() {
        let d = ds(vec![
            (vec![1.0, 0.3], Label::Pos),
            (vec![0.2, 1.0], Label::Pos),
            (vec![-1.0, -0.1], Label::Neg),
            (vec![-0.4, -1.2], Label::Neg),
        ]);
        let opts = SolverOptions {
            max_iter: 1,
            ..Default::default()
        };
        let sol = solve_least_norm(&MarginProblem::unit(&d, FeatureMask::InvOnly, true), &opts).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations, 1);
        assert!(solve_least_norm(
            &MarginProblem::unit(&d, FeatureMask::InvOnly, true),
            &SolverOptions {
                tol: 0.0,
                ..Default::default()
            }
        )
        .is_err());
    }
}
