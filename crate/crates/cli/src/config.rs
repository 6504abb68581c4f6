//! TOML experiment configuration. Every table is optional; missing keys take
//! the defaults below.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Gen,
    Maxmargin,
    Skews,
    Normcurve,
    Dynamics,
    Verify,
    Report,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Gen => "gen",
            Kind::Maxmargin => "maxmargin",
            Kind::Skews => "skews",
            Kind::Normcurve => "normcurve",
            Kind::Dynamics => "dynamics",
            Kind::Verify => "verify",
            Kind::Report => "report",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<Kind>,
    pub out: Option<PathBuf>,
    pub emit_svg: bool,
    pub sweep: Sweep,
    pub gen: GenConfig,
    pub maxmargin: MaxMarginConfig,
    pub dynamics: DynamicsConfig,
    pub normcurve: NormCurveConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: None,
            out: None,
            emit_svg: true,
            sweep: Sweep::default(),
            gen: GenConfig::default(),
            maxmargin: MaxMarginConfig::default(),
            dynamics: DynamicsConfig::default(),
            normcurve: NormCurveConfig::default(),
        }
    }
}

/// Grid axes; one cell per `(p, b, n, seed)` combination.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub p: Vec<f64>,
    pub b: Vec<f64>,
    pub n: Vec<usize>,
    pub seeds: Vec<u64>,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            p: vec![0.9],
            b: vec![1.0],
            n: vec![100],
            seeds: vec![0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    #[serde(rename = "2dim")]
    TwoDim,
    Geometric,
    Highdim,
    Breaker,
    Tabular,
    Idx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Counts {
    Sampled,
    Exact,
    Paired,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub generator: Generator,
    pub counts: Counts,
    /// Load this dataset CSV instead of generating one.
    pub data: Option<PathBuf>,
    pub maj_margin: f64,
    pub min_margin: f64,
    pub n_maj: usize,
    pub n_min: usize,
    pub dim: usize,
    pub inv_margin: f64,
    pub breaker: String,
    /// Tabular CSV (`tabular`) or IDX images file (`idx`).
    pub input: Option<PathBuf>,
    /// IDX labels file.
    pub labels: Option<PathBuf>,
    pub label_column: String,
    pub scale: bool,
    /// Random ReLU feature dimension applied to tabular/IDX inputs.
    pub relu_dim: Option<usize>,
    /// Majority:minority ratio reached by duplicating majority points.
    pub dup_ratio: Option<f64>,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            generator: Generator::TwoDim,
            counts: Counts::Exact,
            data: None,
            maj_margin: 0.1,
            min_margin: 2.0,
            n_maj: 2,
            n_min: 2,
            dim: 100,
            inv_margin: 1.0,
            breaker: "unstable_invariant".into(),
            input: None,
            labels: None,
            label_column: "label".into(),
            scale: true,
            relu_dim: None,
            dup_ratio: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskChoice {
    Inv,
    Full,
}

impl FromStr for MaskChoice {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, HarnessError> {
        match s {
            "inv" => Ok(Self::Inv),
            "full" => Ok(Self::Full),
            _ => Err(HarnessError::Config(format!("mask must be `inv` or `full`, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsetChoice {
    All,
    Maj,
    Min,
}

impl FromStr for SubsetChoice {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, HarnessError> {
        match s {
            "all" => Ok(Self::All),
            "maj" => Ok(Self::Maj),
            "min" => Ok(Self::Min),
            _ => Err(HarnessError::Config(format!(
                "subset must be `maj`, `min` or `all`, got `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Targets {
    Default,
    Balanced(f64),
}

impl FromStr for Targets {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, HarnessError> {
        if s == "default" {
            return Ok(Self::Default);
        }
        let c = s
            .strip_prefix("balanced:")
            .and_then(|c| c.parse::<f64>().ok())
            .ok_or_else(|| HarnessError::Config(format!("targets must be `default` or `balanced:<c>`, got `{s}`")))?;
        if !(c > 0.0 && c <= 1.0) {
            return Err(HarnessError::Config(format!("balanced c must lie in (0, 1], got {c}")));
        }
        Ok(Self::Balanced(c))
    }
}

impl<'de> Deserialize<'de> for Targets {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaxMarginConfig {
    pub mask: MaskChoice,
    pub targets: Targets,
    pub subset: SubsetChoice,
    pub bias: bool,
    pub tol: f64,
    pub max_iter: usize,
    pub duals: bool,
}

impl Default for MaxMarginConfig {
    fn default() -> Self {
        Self {
            mask: MaskChoice::Full,
            targets: Targets::Default,
            subset: SubsetChoice::All,
            bias: true,
            tol: 1e-8,
            max_iter: 1_000_000,
            duals: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossChoice {
    Exponential,
    Logistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeChoice {
    Flow,
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundsChoice {
    None,
    B2,
    B4,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsConfig {
    pub loss: LossChoice,
    pub mode: ModeChoice,
    pub lr: f64,
    pub weight_decay: f64,
    /// Minibatch size; full batch when absent.
    pub batch_size: Option<usize>,
    pub block: usize,
    /// Explicit checkpoints; otherwise a log grid from `t_min` to `t_max`.
    pub checkpoints: Option<Vec<f64>>,
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
    pub rel_tol: f64,
    pub residual: bool,
    pub bounds: BoundsChoice,
    /// Bounds rows start at this time.
    pub t0: f64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            loss: LossChoice::Exponential,
            mode: ModeChoice::Flow,
            lr: 1e-3,
            weight_decay: 0.0,
            batch_size: None,
            block: 1,
            checkpoints: None,
            t_min: 1e-2,
            t_max: 1e4,
            per_decade: 4,
            rel_tol: 1e-8,
            residual: false,
            bounds: BoundsChoice::None,
            t0: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pool {
    /// Margins `u^1.5`, `u` uniform, plus one noise coordinate.
    HeavyTail,
    /// Symmetric pairs at `+-1/i`.
    Inverse,
    /// Inputs named by `[gen]` (tabular or IDX).
    Source,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormCurveConfig {
    pub sizes: Vec<usize>,
    pub resample: bool,
    pub pool: Pool,
}

impl Default for NormCurveConfig {
    fn default() -> Self {
        Self {
            sizes: vec![4, 8, 16, 32, 64, 128],
            resample: false,
            pool: Pool::HeavyTail,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let s = &self.sweep;
        if s.p.is_empty() || s.b.is_empty() || s.n.is_empty() || s.seeds.is_empty() {
            return Err(HarnessError::Config("sweep axes must be non-empty".into()));
        }
        if self.normcurve.sizes.is_empty() {
            return Err(HarnessError::Config("normcurve.sizes must be non-empty".into()));
        }
        Ok(())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("skewlab-out"))
    }
}
