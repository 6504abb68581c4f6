//! Closed-form trajectories and theorem envelopes for the two-feature task.

use crate::data::Dataset;

/// Exponential-loss gradient flow on the two-feature task with `B = 1`,
/// started at the origin: `w_inv + w_sp = ln(1 + 2pt)` and
/// `w_inv - w_sp = ln(1 + 2(1-p)t)`.
pub fn closed_form_2dim_exp(p: f64, t: f64) -> (f64, f64) {
    let a = (2.0 * p * t).ln_1p();
    let b = (2.0 * (1.0 - p) * t).ln_1p();
    (0.5 * (a + b), 0.5 * (a - b))
}

/// The spurious weight at which its exponential-loss gradient vanishes.
pub fn fixed_point_exp(p: f64, b: f64) -> f64 {
    (p / (1.0 - p)).ln() / (2.0 * b)
}

/// Logistic-loss flow on the two-feature task: `w_inv + w_sp = a` and
/// `w_inv - w_sp = c` with `a + e^a = 2pt + 1`, `c + e^c = 2(1-p)t + 1`.
pub fn implicit_2dim_logistic(p: f64, t: f64) -> (f64, f64) {
    let a = solve_x_plus_exp(2.0 * p * t + 1.0);
    let c = solve_x_plus_exp(2.0 * (1.0 - p) * t + 1.0);
    (0.5 * (a + c), 0.5 * (a - c))
}

/// Root of `x + e^x = r` by Newton's method.
fn solve_x_plus_exp(r: f64) -> f64 {
    let mut x = if r > 1.0 { r.ln() } else { r - 1.0 };
    for _ in 0..100 {
        let f = x + x.exp() - r;
        let step = f / (1.0 + x.exp());
        x -= step;
        if step.abs() <= 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

/// Multipliers for the asymptotic envelopes, whose constants are not pinned
/// down by the statements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeConstants {
    pub lower: f64,
    pub upper: f64,
}

impl Default for EnvelopeConstants {
    fn default() -> Self {
        Self { lower: 1.0, upper: 1.0 }
    }
}

/// Envelopes on `beta(t)` for exponential-loss flow on skew-free data with
/// maximum max-margin margin `m_max`.
pub fn thm_b2_bounds(p: f64, b: f64, m_max: f64, t: f64) -> (f64, f64) {
    thm_b2_bounds_with(p, b, m_max, t, EnvelopeConstants::default())
}

pub fn thm_b2_bounds_with(p: f64, b: f64, m_max: f64, t: f64, k: EnvelopeConstants) -> (f64, f64) {
    let c = 2.0 * (2.0 * m_max - 1.0) / (b * b);
    let log_t = t.ln_1p();
    let lower = ((c + p) / (c + (p * (1.0 - p)).sqrt())).ln() / (2.0 * m_max * log_t);
    let upper = 0.5 * (p / (1.0 - p)).ln() / (0.5 * log_t);
    (k.lower * lower, k.upper * upper)
}

/// Envelopes on `beta(t)` for logistic-loss flow on the two-feature task.
pub fn thm_b4_bounds(p: f64, t: f64) -> (f64, f64) {
    let lower = (0.5 * (2.0 / (3.0 - 2.0 * p)).ln() / t.ln_1p()).min(1.0);
    let upper = 0.5 * (p / (1.0 - p)).ln() / (0.5 * t).ln_1p();
    (lower, upper)
}

/// `(1/|S|) sum y x` over the concatenated features: the negative gradient
/// direction of any margin loss at the origin, up to the loss derivative.
pub fn initial_gradient_direction(d: &Dataset) -> Vec<f64> {
    let mut g = vec![0.0; d.dim()];
    for p in d.points() {
        let y = p.y.value();
        for (gk, x) in g.iter_mut().zip(p.x_inv.iter().chain(&p.x_sp)) {
            *gk += y * x;
        }
    }
    let n = d.len() as f64;
    g.iter_mut().for_each(|v| *v /= n);
    g
}
