//! Least-norm margin problems.
//!
//! Every classifier in this crate that is defined by a margin requirement is
//! an instance of
//!
//! ```text
//! minimize    ||w||^2 / 2
//! subject to  y_i (w . x_i + b) >= c_i     for every point i
//! ```
//!
//! where `x_i` is either the invariant block or the full feature vector, `b`
//! is optional and the targets `c_i >= 0` may differ per point. The plain
//! max-margin classifier has `c_i = 1`; the restricted invariant-only solves
//! used to quantify geometric skew set `c_i = 0` on points that only need to
//! be classified correctly; the balanced variant inflates minority targets.
//!
//! [`solve_least_norm`] is the production solver (dual ascent with pairwise
//! updates). [`oracle_active_set`] enumerates active sets exhaustively and is
//! kept as an independent check for small instances.

mod oracle;
mod solver;

pub use oracle::{oracle_active_set, ORACLE_MAX_DIMS, ORACLE_MAX_POINTS};
pub use solver::{solve_least_norm, SolverOptions};

use crate::data::{Dataset, LinearModel};
use crate::error::{Error, Result};
use crate::task::split_groups;

/// Which feature block the classifier may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMask {
    InvOnly,
    Full,
}

#[derive(Debug, Clone)]
pub struct MarginProblem<'a> {
    data: &'a Dataset,
    targets: Vec<f64>,
    mask: FeatureMask,
    bias: bool,
}

impl<'a> MarginProblem<'a> {
    pub fn new(data: &'a Dataset, targets: Vec<f64>, mask: FeatureMask, bias: bool) -> Result<Self> {
        if targets.len() != data.len() {
            return Err(Error::InvalidParameter(format!(
                "{} targets for {} points",
                targets.len(),
                data.len()
            )));
        }
        if let Some(c) = targets.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "margin target {c} must be finite and >= 0"
            )));
        }
        Ok(Self {
            data,
            targets,
            mask,
            bias,
        })
    }

    /// Unit margin targets on every point.
    pub fn unit(data: &'a Dataset, mask: FeatureMask, bias: bool) -> Self {
        Self {
            data,
            targets: vec![1.0; data.len()],
            mask,
            bias,
        }
    }

    pub fn data(&self) -> &Dataset {
        self.data
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn mask(&self) -> FeatureMask {
        self.mask
    }

    pub fn bias(&self) -> bool {
        self.bias
    }

    pub fn dims(&self) -> usize {
        match self.mask {
            FeatureMask::InvOnly => self.data.inv_dim(),
            FeatureMask::Full => self.data.dim(),
        }
    }

    /// Masked feature rows, flattened row-major.
    pub(crate) fn rows(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len() * self.dims());
        for p in self.data.points() {
            out.extend_from_slice(&p.x_inv);
            if self.mask == FeatureMask::Full {
                out.extend_from_slice(&p.x_sp);
            }
        }
        out
    }

    pub(crate) fn model_from(&self, w: &[f64], b: f64) -> LinearModel {
        match self.mask {
            FeatureMask::Full => LinearModel::from_concat(w, self.data.inv_dim(), b),
            FeatureMask::InvOnly => LinearModel {
                w_inv: w.to_vec(),
                w_sp: vec![0.0; self.data.sp_dim()],
                bias: b,
            },
        }
    }
}

/// A solved margin problem together with its optimality certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub model: LinearModel,
    pub duals: Vec<f64>,
    /// `||w||^2 / 2`
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl QpSolution {
    pub fn norm(&self) -> f64 {
        (2.0 * self.objective).sqrt()
    }

    fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                iterations: self.iterations,
                residual: self.kkt_residual,
            })
        }
    }
}

/// KKT certificate of a candidate `(w, b, alpha)`: the largest violation of
/// stationarity, primal feasibility, dual feasibility, complementary
/// slackness and (with a bias) the balance constraint.
pub fn kkt_residual(prob: &MarginProblem<'_>, w: &[f64], b: f64, alpha: &[f64]) -> f64 {
    let d = prob.dims();
    let rows = prob.rows();
    let mut recon = vec![0.0; d];
    let mut balance = 0.0;
    let mut worst: f64 = 0.0;
    for (i, (p, &c)) in prob.data.points().iter().zip(&prob.targets).enumerate() {
        let x = &rows[i * d..(i + 1) * d];
        let y = p.y.value();
        let a = alpha[i];
        for (r, xv) in recon.iter_mut().zip(x) {
            *r += a * y * xv;
        }
        balance += a * y;
        let bb = if prob.bias { b } else { 0.0 };
        let slack = y * (crate::data::dot(w, x) + bb) - c;
        worst = worst.max(-slack).max(-a).max(a.max(0.0) * slack.abs());
    }
    for (r, wv) in recon.iter().zip(w) {
        worst = worst.max((r - wv).abs());
    }
    if prob.bias {
        worst = worst.max(balance.abs());
    }
    worst
}

fn solve_converged(prob: &MarginProblem<'_>) -> Result<QpSolution> {
    solve_least_norm(prob, &SolverOptions::default())?.require_converged()
}

fn check_subset(d: &Dataset, subset: &[usize]) -> Result<()> {
    if let Some(&i) = subset.iter().find(|&&i| i >= d.len()) {
        return Err(Error::InvalidParameter(format!("subset index {i} out of range")));
    }
    Ok(())
}

/// Norm of the least-norm invariant-only classifier (with bias) that puts a
/// margin of at least 1 on every point of `subset`; other points are free.
pub fn v_norm(d: &Dataset, subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::InvalidParameter("v_norm needs a non-empty subset".into()));
    }
    check_subset(d, subset)?;
    let sub = d.subset(subset)?;
    let sol = solve_converged(&MarginProblem::unit(&sub, FeatureMask::InvOnly, true))?;
    Ok(sol.norm())
}

/// Like [`v_norm`], but every point outside `subset` must still be classified
/// correctly (margin at least 0).
pub fn v_tilde_norm(d: &Dataset, subset: &[usize]) -> Result<f64> {
    check_subset(d, subset)?;
    let mut targets = vec![0.0; d.len()];
    for &i in subset {
        targets[i] = 1.0;
    }
    let prob = MarginProblem::new(d, targets, FeatureMask::InvOnly, true)?;
    Ok(solve_converged(&prob)?.norm())
}

/// Full max-margin classifier with a bias.
pub fn max_margin(d: &Dataset) -> Result<QpSolution> {
    solve_converged(&MarginProblem::unit(d, FeatureMask::Full, true))
}

/// Least-norm full classifier with margin targets 1 on the majority group and
/// `1/c` on the minority group. Normalized, it maximizes
/// `min(majority margin, c * minority margin)`.
pub fn balanced_max_margin(d: &Dataset, c: f64) -> Result<QpSolution> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "balance constant must be > 0, got {c}"
        )));
    }
    let groups = split_groups(d)?;
    if groups.majority.is_empty() {
        return Err(Error::MissingGroup("majority"));
    }
    if groups.minority.is_empty() {
        return Err(Error::MissingGroup("minority"));
    }
    let mut targets = vec![1.0; d.len()];
    for &i in &groups.minority {
        targets[i] = 1.0 / c;
    }
    solve_converged(&MarginProblem::new(d, targets, FeatureMask::Full, true)?)
}
