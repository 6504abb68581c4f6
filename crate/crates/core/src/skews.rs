//! Geometric skew: how much larger the invariant-only norm must grow to fit
//! the whole sample than to fit the minority group alone.

use rand::Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::maxmargin::{max_margin, solve_least_norm, v_norm, v_tilde_norm, FeatureMask, MarginProblem, SolverOptions};
use crate::rng::{derive_seed, seeded};
use crate::task::split_groups;
use crate::taskgen::{attach_spurious, GenSpec, InvPoint};

/// Absolute slop on the bound preconditions.
pub const PRECONDITION_SLOP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SkewReport {
    pub v_all: f64,
    pub v_maj: f64,
    pub v_min: f64,
    pub vt_all: f64,
    pub vt_maj: f64,
    pub vt_min: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa1_tilde: f64,
    pub kappa2_tilde: f64,
    pub c1: f64,
    pub c2: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub lb_precondition_met: bool,
    pub ub_precondition_met: bool,
    /// `B * w_sp` of the full max-margin classifier.
    pub measured_bwsp: f64,
    pub slack_lower: f64,
    pub slack_upper: f64,
}

impl SkewReport {
    pub fn sandwich_holds(&self, tol: f64) -> bool {
        let lower_ok = !self.lb_precondition_met || self.slack_lower >= -tol;
        let upper_ok = !self.ub_precondition_met || self.slack_upper >= -tol;
        lower_ok && upper_ok
    }

    /// `key=value` lines in a fixed order.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.fields() {
            s.push_str(&format!("{k}={v}\n"));
        }
        s
    }

    pub fn csv_header() -> Vec<&'static str> {
        Self::field_names().to_vec()
    }

    pub fn csv_row(&self) -> Vec<String> {
        self.fields().into_iter().map(|(_, v)| v).collect()
    }

    fn field_names() -> [&'static str; 19] {
        [
            "v_all",
            "v_maj",
            "v_min",
            "vt_all",
            "vt_maj",
            "vt_min",
            "kappa1",
            "kappa2",
            "kappa1_tilde",
            "kappa2_tilde",
            "c1",
            "c2",
            "lower_bound",
            "upper_bound",
            "lb_precondition_met",
            "ub_precondition_met",
            "measured_bwsp",
            "slack_lower",
            "slack_upper",
        ]
    }

    fn fields(&self) -> Vec<(&'static str, String)> {
        let vals = [
            self.v_all.to_string(),
            self.v_maj.to_string(),
            self.v_min.to_string(),
            self.vt_all.to_string(),
            self.vt_maj.to_string(),
            self.vt_min.to_string(),
            self.kappa1.to_string(),
            self.kappa2.to_string(),
            self.kappa1_tilde.to_string(),
            self.kappa2_tilde.to_string(),
            self.c1.to_string(),
            self.c2.to_string(),
            self.lower_bound.to_string(),
            self.upper_bound.to_string(),
            self.lb_precondition_met.to_string(),
            self.ub_precondition_met.to_string(),
            self.measured_bwsp.to_string(),
            self.slack_lower.to_string(),
            self.slack_upper.to_string(),
        ];
        Self::field_names().into_iter().zip(vals).collect()
    }
}

/// Skew ratios, the sandwich bounds on `B w_sp` and the measured value.
pub fn compute_skew_report(d: &Dataset) -> Result<SkewReport> {
    if !d.is_two_valued() {
        return Err(Error::NotTwoValued("spurious feature is not two-valued".into()));
    }
    let g = split_groups(d)?;
    if g.majority.is_empty() {
        return Err(Error::MissingGroup("majority"));
    }
    if g.minority.is_empty() {
        return Err(Error::MissingGroup("minority"));
    }
    let all: Vec<usize> = (0..d.len()).collect();
    let b = d.sp_scale();

    let v_all = v_norm(d, &all)?;
    let v_maj = v_norm(d, &g.majority)?;
    let v_min = v_norm(d, &g.minority)?;
    let vt_all = v_tilde_norm(d, &all)?;
    let vt_maj = v_tilde_norm(d, &g.majority)?;
    let vt_min = v_tilde_norm(d, &g.minority)?;

    let kappa1 = v_min / v_all;
    let kappa2 = v_min / v_maj;
    let kappa1_tilde = vt_min / vt_all;
    let kappa2_tilde = vt_min / vt_maj;
    let c1 = 1.0 / (2.0 * vt_all * b);
    let c2 = 1.0 / (2.0 * vt_maj * b);

    let lower_bound = (1.0 - 2.0 * (kappa1_tilde + c1 * c1).sqrt()).max(0.0);
    let upper_bound = (1.0 / kappa1 - 1.0).min(b * v_all);
    let lb_precondition_met = c2 <= 0.5 && kappa2_tilde <= (0.25 - c2 * c2).sqrt() + PRECONDITION_SLOP;
    let ub_precondition_met = kappa2 <= 1.0 + PRECONDITION_SLOP;

    let measured_bwsp = b * max_margin(d)?.model.w_sp[0];
    Ok(SkewReport {
        v_all,
        v_maj,
        v_min,
        vt_all,
        vt_maj,
        vt_min,
        kappa1,
        kappa2,
        kappa1_tilde,
        kappa2_tilde,
        c1,
        c2,
        lower_bound,
        upper_bound,
        lb_precondition_met,
        ub_precondition_met,
        measured_bwsp,
        slack_lower: measured_bwsp - lower_bound,
        slack_upper: upper_bound - measured_bwsp.abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurveMode {
    /// Each size's sample is a prefix of the next one.
    #[default]
    Nested,
    /// Each size draws its own sample (with replacement) from the pool.
    Resample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub n: usize,
    pub v_norm: f64,
    /// `||v~(minority)||` on the same sample, when it has a minority group.
    pub v_tilde_min: Option<f64>,
}

/// Invariant-only max-margin norm as the sample grows.
pub fn norm_growth_curve(
    inv_points: &[InvPoint],
    sizes: &[usize],
    spec: &GenSpec,
    mode: CurveMode,
) -> Result<Vec<CurveRow>> {
    if sizes.is_empty() {
        return Err(Error::InvalidParameter("no sizes given".into()));
    }
    if sizes.windows(2).any(|w| w[0] > w[1]) || sizes[0] == 0 {
        return Err(Error::InvalidParameter(format!(
            "sizes must be positive and ascending: {sizes:?}"
        )));
    }
    let row = |d: &Dataset| -> Result<CurveRow> {
        let all: Vec<usize> = (0..d.len()).collect();
        let v = v_norm(d, &all)?;
        let minority = split_groups(d)?.minority;
        let vt = if minority.is_empty() {
            None
        } else {
            Some(v_tilde_norm(d, &minority)?)
        };
        Ok(CurveRow {
            n: d.len(),
            v_norm: v,
            v_tilde_min: vt,
        })
    };
    match mode {
        CurveMode::Nested => {
            let full = attach_spurious(inv_points, spec)?;
            let largest = *sizes.last().unwrap();
            if largest > full.len() {
                return Err(Error::InvalidParameter(format!(
                    "size {largest} exceeds the {} available points",
                    full.len()
                )));
            }
            sizes
                .iter()
                .map(|&n| row(&full.subset(&(0..n).collect::<Vec<_>>())?))
                .collect()
        }
        CurveMode::Resample => sizes
            .iter()
            .map(|&n| {
                let mut rng = seeded(derive_seed(spec.seed, n as u64));
                let pick: Vec<InvPoint> = (0..n)
                    .map(|_| inv_points[rng.random_range(0..inv_points.len())].clone())
                    .collect();
                let s = GenSpec {
                    seed: derive_seed(spec.seed, n as u64 ^ 0x5eed),
                    ..spec.clone()
                };
                row(&attach_spurious(&pick, &s)?)
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropositionCheck {
    /// `||w_sp|| / w_inv` of the bias-free max-margin classifier.
    pub ratio: f64,
    /// `c sqrt(D) / 2`.
    pub threshold: f64,
    pub passed: bool,
    pub p_condition: bool,
    pub d_condition: bool,
    /// Smallest `D` satisfying the dimension condition.
    pub d_required: f64,
}

impl PropositionCheck {
    pub fn preconditions_met(&self) -> bool {
        self.p_condition && self.d_condition
    }
}

/// Checks the high-dimensional spurious-feature bound on one sample. The
/// coordinate probabilities come from the generator's `p_vec` annotation when
/// present, otherwise from the empirical agreement rates.
pub fn verify_highdim_proposition(d: &Dataset, c: f64, delta: f64) -> Result<PropositionCheck> {
    if d.inv_dim() != 1 {
        return Err(Error::InvalidParameter(format!(
            "expected a scalar invariant feature, got {}",
            d.inv_dim()
        )));
    }
    if !(c > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need c > 0 and delta in (0, 1), got c = {c}, delta = {delta}"
        )));
    }
    let dim = d.sp_dim();
    let p_vec: Vec<f64> = match d.meta().extra.get("p_vec") {
        Some(s) => s
            .split(';')
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("p_vec entry `{v}`: {e}")))
            })
            .collect::<Result<_>>()?,
        None => (0..dim)
            .map(|k| {
                let agree = d.points().iter().filter(|p| p.x_sp[k] * p.y.value() > 0.0).count();
                agree as f64 / d.len() as f64
            })
            .collect(),
    };
    let p_condition = p_vec.iter().all(|p| *p > 0.5 + c / 2.0 - PRECONDITION_SLOP);
    let d_required = (2.0 * (d.len() as f64 / delta).ln()).sqrt() / (2.0 * c);
    let d_condition = dim as f64 >= d_required - PRECONDITION_SLOP;

    let sol = solve_least_norm(
        &MarginProblem::unit(d, FeatureMask::Full, false),
        &SolverOptions::default(),
    )?;
    if !sol.converged {
        return Err(Error::NotConverged {
            iterations: sol.iterations,
            residual: sol.kkt_residual,
        });
    }
    let w_sp = crate::data::norm(&sol.model.w_sp);
    let w_inv = sol.model.w_inv[0];
    let ratio = if w_inv > 0.0 { w_sp / w_inv } else { f64::INFINITY };
    let threshold = c * (dim as f64).sqrt() / 2.0;
    Ok(PropositionCheck {
        ratio,
        threshold,
        passed: ratio >= threshold,
        p_condition,
        d_condition,
        d_required,
    })
}
