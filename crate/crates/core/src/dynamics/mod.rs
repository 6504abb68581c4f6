//! Gradient flow and gradient descent on linear classifiers without a bias,
//! started at the origin.

mod bounds;
mod loss;

pub use bounds::{
    closed_form_2dim_exp, fixed_point_exp, implicit_2dim_logistic, initial_gradient_direction, thm_b2_bounds,
    thm_b2_bounds_with, thm_b4_bounds, EnvelopeConstants,
};
pub use loss::{loss_gradient, mean_loss, Loss, MARGIN_CLAMP};

use std::io::Write;

use rand::seq::SliceRandom;

use crate::data::{norm, Dataset};
use crate::error::{Error, Result};
use crate::maxmargin::{solve_least_norm, FeatureMask, MarginProblem, SolverOptions};
use crate::rng::{derive_seed, seeded};
use loss::Design;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// `dw/dt = -grad L(w) - lambda w`, integrated adaptively.
    Flow,
    /// `w <- (1 - lr lambda) w - lr grad L_batch(w)`, one record per checkpoint
    /// epoch.
    Discrete { lr: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Batch {
    Full,
    /// Shuffles runs of `block` consecutive points each epoch, then cuts
    /// batches of `size`. `block = 1` is a plain shuffle.
    Minibatch {
        size: usize,
        seed: u64,
        block: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynSpec {
    pub loss: Loss,
    pub mode: Mode,
    pub weight_decay: f64,
    pub batch: Batch,
    /// Flow times or epoch numbers, strictly ascending and positive.
    pub checkpoints: Vec<f64>,
    pub rel_tol: f64,
    /// Track `||w(t) - w_hat ln(1 + t)||` against the bias-free max-margin
    /// direction.
    pub residual: bool,
}

impl DynSpec {
    pub fn flow(loss: Loss, checkpoints: Vec<f64>) -> Self {
        Self {
            loss,
            mode: Mode::Flow,
            weight_decay: 0.0,
            batch: Batch::Full,
            checkpoints,
            rel_tol: 1e-8,
            residual: false,
        }
    }

    pub fn discrete(loss: Loss, lr: f64, batch: Batch, epochs: Vec<f64>) -> Self {
        Self {
            loss,
            mode: Mode::Discrete { lr },
            weight_decay: 0.0,
            batch,
            checkpoints: epochs,
            rel_tol: 1e-8,
            residual: false,
        }
    }

    pub fn with_decay(mut self, lambda: f64) -> Self {
        self.weight_decay = lambda;
        self
    }

    pub fn with_residual(mut self) -> Self {
        self.residual = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.checkpoints.is_empty() {
            return bad("no checkpoints".into());
        }
        if self.checkpoints[0] <= 0.0 || self.checkpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("checkpoints must be positive and strictly ascending".into());
        }
        if self.checkpoints.iter().any(|t| !t.is_finite()) {
            return bad("checkpoints must be finite".into());
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad(format!("weight decay must be >= 0, got {}", self.weight_decay));
        }
        match self.mode {
            Mode::Flow => {
                if !(self.rel_tol > 0.0) {
                    return bad(format!("rel_tol must be > 0, got {}", self.rel_tol));
                }
            }
            Mode::Discrete { lr } => {
                if !(lr > 0.0 && lr.is_finite()) {
                    return bad(format!("lr must be > 0, got {lr}"));
                }
                if self.checkpoints.iter().any(|e| e.fract() != 0.0) {
                    return bad("discrete checkpoints must be whole epochs".into());
                }
            }
        }
        if let Batch::Minibatch { size, block, .. } = self.batch {
            if size == 0 || block == 0 {
                return bad("batch size and block must be >= 1".into());
            }
        }
        Ok(())
    }
}

/// Logarithmically spaced points from `t_min` to `t_max` inclusive.
pub fn log_grid(t_min: f64, t_max: f64, per_decade: usize) -> Vec<f64> {
    let (a, b) = (t_min.log10(), t_max.log10());
    let steps = ((b - a) * per_decade as f64).round().max(1.0) as usize;
    (0..=steps)
        .map(|k| {
            if k == steps {
                t_max
            } else {
                10f64.powf(a + (b - a) * k as f64 / steps as f64)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    /// Flow time, or epoch in discrete mode.
    pub t: f64,
    pub w_inv: Vec<f64>,
    pub w_sp: Vec<f64>,
    /// `B w_sp / min_S |w_inv . x_inv|`.
    pub beta: f64,
    /// `w_sp / ||w_inv||`.
    pub beta_2d: f64,
    pub loss: f64,
    pub residual_norm: Option<f64>,
}

impl Record {
    /// The spurious weight as a scalar: itself when one-dimensional, its
    /// norm otherwise.
    pub fn w_sp_scalar(&self) -> f64 {
        if self.w_sp.len() == 1 {
            self.w_sp[0]
        } else {
            norm(&self.w_sp)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<Record>,
    /// Margins clamped before exponentiation.
    pub clamp_events: u64,
    /// Accepted integrator steps or gradient updates.
    pub steps: u64,
}

impl Trajectory {
    pub const CSV_HEADER: [&'static str; 7] = ["t", "loss", "w_inv_norm", "w_sp", "beta", "beta_2d", "residual_norm"];

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for r in &self.records {
            w.write_record([
                r.t.to_string(),
                r.loss.to_string(),
                norm(&r.w_inv).to_string(),
                r.w_sp_scalar().to_string(),
                r.beta.to_string(),
                r.beta_2d.to_string(),
                r.residual_norm.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Observer<'a> {
    data: &'a Dataset,
    design: &'a Design,
    loss: Loss,
    w_hat: Option<Vec<f64>>,
}

impl Observer<'_> {
    fn record(&self, t: f64, resid_t: f64, w: &[f64], clamps: &mut u64) -> Result<Record> {
        let di = self.data.inv_dim();
        let (w_inv, w_sp) = (w[..di].to_vec(), w[di..].to_vec());
        let loss = self.design.mean_loss(self.loss, w, clamps);
        let min_out = self
            .data
            .points()
            .iter()
            .map(|p| crate::data::dot(&w_inv, &p.x_inv).abs())
            .fold(f64::INFINITY, f64::min);
        let sp = if w_sp.len() == 1 { w_sp[0] } else { norm(&w_sp) };
        let beta = ratio(self.data.sp_scale() * sp, min_out);
        let beta_2d = ratio(sp, norm(&w_inv));
        let residual_norm = self.w_hat.as_ref().map(|h| {
            let s = resid_t.ln_1p();
            w.iter().zip(h).map(|(a, b)| (a - b * s).powi(2)).sum::<f64>().sqrt()
        });
        let rec = Record {
            t,
            w_inv,
            w_sp,
            beta,
            beta_2d,
            loss,
            residual_norm,
        };
        if !(rec.loss.is_finite() && rec.beta.is_finite() && rec.beta_2d.is_finite())
            || rec.w_inv.iter().chain(&rec.w_sp).any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite {
                t,
                detail: format!("record {rec:?}"),
            });
        }
        Ok(rec)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Runs the dynamics described by `spec` from `w = 0`.
pub fn simulate(d: &Dataset, spec: &DynSpec) -> Result<Trajectory> {
    spec.validate()?;
    let design = Design::new(d);
    let w_hat = if spec.residual {
        solve_least_norm(
            &MarginProblem::unit(d, FeatureMask::Full, false),
            &SolverOptions::default(),
        )
        .ok()
        .filter(|s| s.converged)
        .map(|s| s.model.weights())
    } else {
        None
    };
    let obs = Observer {
        data: d,
        design: &design,
        loss: spec.loss,
        w_hat,
    };
    match spec.mode {
        Mode::Flow => run_flow(&design, spec, &obs),
        Mode::Discrete { lr } => run_discrete(&design, spec, lr, &obs),
    }
}

fn check_finite(w: &[f64], g: &[f64], t: f64) -> Result<()> {
    if w.iter().chain(g).all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            t,
            detail: format!("w = {w:?}, grad = {g:?}"),
        })
    }
}

fn run_flow(design: &Design, spec: &DynSpec, obs: &Observer<'_>) -> Result<Trajectory> {
    let n = design.len();
    let dim = design.d;
    let lambda = spec.weight_decay;
    let mut clamps = 0u64;
    let mut scratch = vec![0.0; dim];
    let mut field = |w: &[f64], out: &mut [f64], clamps: &mut u64| {
        design.grad_over(spec.loss, w, 0..n, &mut scratch, clamps);
        for k in 0..dim {
            out[k] = -scratch[k] - lambda * w[k];
        }
    };
    let mut rk4 = |w: &[f64], h: f64, out: &mut [f64], clamps: &mut u64| {
        let mut k1 = vec![0.0; dim];
        let mut k2 = vec![0.0; dim];
        let mut k3 = vec![0.0; dim];
        let mut k4 = vec![0.0; dim];
        let mut tmp = vec![0.0; dim];
        field(w, &mut k1, clamps);
        for k in 0..dim {
            tmp[k] = w[k] + 0.5 * h * k1[k];
        }
        field(&tmp, &mut k2, clamps);
        for k in 0..dim {
            tmp[k] = w[k] + 0.5 * h * k2[k];
        }
        field(&tmp, &mut k3, clamps);
        for k in 0..dim {
            tmp[k] = w[k] + h * k3[k];
        }
        field(&tmp, &mut k4, clamps);
        for k in 0..dim {
            out[k] = w[k] + h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
    };

    let mut w = vec![0.0; dim];
    let mut t = 0.0f64;
    let mut h = 1e-3f64.min(spec.checkpoints[0]);
    let mut steps = 0u64;
    let mut records = Vec::with_capacity(spec.checkpoints.len());
    let (mut full, mut half, mut two) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    for &target in &spec.checkpoints {
        while t < target {
            let remaining = target - t;
            let clipped = h >= remaining;
            let step = if clipped { remaining } else { h };
            rk4(&w, step, &mut full, &mut clamps);
            rk4(&w, 0.5 * step, &mut half, &mut clamps);
            rk4(&half, 0.5 * step, &mut two, &mut clamps);
            let err = full.iter().zip(&two).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / 15.0;
            let tol = spec.rel_tol * (1.0 + norm(&two));
            if !err.is_finite() {
                return Err(Error::NonFinite {
                    t,
                    detail: format!("integrator error estimate at step {step:e}"),
                });
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0)
            };
            if err <= tol {
                for k in 0..dim {
                    w[k] = two[k] + (two[k] - full[k]) / 15.0;
                }
                t = if clipped { target } else { t + step };
                steps += 1;
                check_finite(&w, &[], t)?;
                h = if clipped { h.max(step * factor) } else { step * factor };
            } else {
                h = step * factor;
                if h < 1e-14 * (1.0 + t) {
                    return Err(Error::NonFinite {
                        t,
                        detail: format!("step size underflow ({h:e})"),
                    });
                }
            }
        }
        records.push(obs.record(target, target, &w, &mut clamps)?);
    }
    Ok(Trajectory {
        records,
        clamp_events: clamps,
        steps,
    })
}

fn run_discrete(design: &Design, spec: &DynSpec, lr: f64, obs: &Observer<'_>) -> Result<Trajectory> {
    let n = design.len();
    let dim = design.d;
    let shrink = 1.0 - lr * spec.weight_decay;
    let mut clamps = 0u64;
    let mut w = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    let mut order: Vec<usize> = (0..n).collect();
    let mut steps = 0u64;
    let mut records = Vec::with_capacity(spec.checkpoints.len());
    let last = *spec.checkpoints.last().unwrap() as u64;
    let mut next = 0usize;
    for epoch in 1..=last {
        match spec.batch {
            Batch::Full => {
                design.grad_over(spec.loss, &w, 0..n, &mut g, &mut clamps);
                step(&mut w, &g, lr, shrink);
                steps += 1;
                check_finite(&w, &g, epoch as f64)?;
            }
            Batch::Minibatch { size, seed, block } => {
                shuffle_blocks(&mut order, block, derive_seed(seed, epoch));
                for chunk in order.chunks(size) {
                    design.grad_over(spec.loss, &w, chunk.iter().copied(), &mut g, &mut clamps);
                    step(&mut w, &g, lr, shrink);
                    steps += 1;
                }
                check_finite(&w, &g, epoch as f64)?;
            }
        }
        if spec.checkpoints[next] as u64 == epoch {
            records.push(obs.record(epoch as f64, lr * steps as f64, &w, &mut clamps)?);
            next += 1;
        }
    }
    Ok(Trajectory {
        records,
        clamp_events: clamps,
        steps,
    })
}

fn step(w: &mut [f64], g: &[f64], lr: f64, shrink: f64) {
    for (wk, gk) in w.iter_mut().zip(g) {
        *wk = shrink * *wk - lr * gk;
    }
}

/// Reorders `0..n` by shuffling consecutive runs of `block` indices; the
/// permutation depends only on `seed`.
fn shuffle_blocks(order: &mut Vec<usize>, block: usize, seed: u64) {
    let n = order.len();
    let mut blocks: Vec<usize> = (0..n.div_ceil(block)).collect();
    blocks.shuffle(&mut seeded(seed));
    order.clear();
    for b in blocks {
        order.extend(b * block..((b + 1) * block).min(n));
    }
}
