//! Shared domain types: labeled points, datasets, group splits and linear
//! classifiers over the (invariant, spurious) feature decomposition.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    pub fn value(self) -> f64 {
        match self {
            Label::Neg => -1.0,
            Label::Pos => 1.0,
        }
    }

    pub fn from_sign(v: f64) -> Option<Label> {
        if v == 1.0 {
            Some(Label::Pos)
        } else if v == -1.0 {
            Some(Label::Neg)
        } else {
            None
        }
    }

    pub fn flip(self) -> Label {
        match self {
            Label::Neg => Label::Pos,
            Label::Pos => Label::Neg,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint {
    pub x_inv: Vec<f64>,
    pub x_sp: Vec<f64>,
    pub y: Label,
}

impl LabeledPoint {
    pub fn new(x_inv: Vec<f64>, x_sp: Vec<f64>, y: Label) -> Self {
        Self { x_inv, x_sp, y }
    }

    /// Concatenation `[x_inv, x_sp]`, the identity feature map.
    pub fn features(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.x_inv.len() + self.x_sp.len());
        v.extend_from_slice(&self.x_inv);
        v.extend_from_slice(&self.x_sp);
        v
    }

    /// Sign of `x_sp * y` for a scalar spurious block.
    pub fn sp_agreement(&self) -> f64 {
        self.x_sp.first().copied().unwrap_or(0.0) * self.y.value()
    }
}

/// Construction-time claims a generator makes about the distribution it
/// samples from. Properties of the distribution cannot be decided from one
/// finite sample, so they travel with the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub predictive_inv: bool,
    pub stable_inv_marginal: bool,
    pub cond_independent: bool,
    pub two_valued_sp: bool,
    pub identity_mapping: bool,
}

impl Provenance {
    pub const ALL: Provenance = Provenance {
        predictive_inv: true,
        stable_inv_marginal: true,
        cond_independent: true,
        two_valued_sp: true,
        identity_mapping: true,
    };

    pub const UNKNOWN: Provenance = Provenance {
        predictive_inv: false,
        stable_inv_marginal: false,
        cond_independent: false,
        two_valued_sp: false,
        identity_mapping: false,
    };
}

impl Default for Provenance {
    fn default() -> Self {
        Provenance::UNKNOWN
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metadata {
    pub generator: String,
    pub seed: Option<u64>,
    pub provenance: Provenance,
    /// Free-form key/value annotations (realized p, multiplicities, ...).
    pub extra: BTreeMap<String, String>,
}

impl Metadata {
    pub fn new(generator: impl Into<String>, seed: Option<u64>, provenance: Provenance) -> Self {
        Self {
            generator: generator.into(),
            seed,
            provenance,
            extra: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.insert(key.to_string(), value.to_string());
        self
    }
}

/// An immutable, dimension-homogeneous sample. `sp_scale` is the magnitude B
/// of the spurious feature; when `sp_two_valued` is set every point carries a
/// scalar spurious value of exactly `+B` or `-B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<LabeledPoint>,
    sp_scale: f64,
    sp_two_valued: bool,
    meta: Metadata,
}

impl Dataset {
    pub fn new(points: Vec<LabeledPoint>, sp_scale: f64, sp_two_valued: bool, meta: Metadata) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidDataset("dataset is empty".into()))?;
        if !(sp_scale > 0.0 && sp_scale.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "sp_scale must be positive, got {sp_scale}"
            )));
        }
        let (di, ds) = (first.x_inv.len(), first.x_sp.len());
        for (i, p) in points.iter().enumerate() {
            if p.x_inv.len() != di || p.x_sp.len() != ds {
                return Err(Error::InvalidDataset(format!(
                    "point {i} has dims ({}, {}), expected ({di}, {ds})",
                    p.x_inv.len(),
                    p.x_sp.len()
                )));
            }
            if p.x_inv.iter().chain(&p.x_sp).any(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!("point {i} has a non-finite value")));
            }
            if sp_two_valued && (ds != 1 || p.x_sp[0].abs() != sp_scale) {
                return Err(Error::NotTwoValued(format!(
                    "point {i} has spurious block {:?}, expected a single value in {{-{sp_scale}, +{sp_scale}}}",
                    p.x_sp
                )));
            }
        }
        Ok(Self {
            points,
            sp_scale,
            sp_two_valued,
            meta,
        })
    }

    pub fn points(&self) -> &[LabeledPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn inv_dim(&self) -> usize {
        self.points[0].x_inv.len()
    }

    pub fn sp_dim(&self) -> usize {
        self.points[0].x_sp.len()
    }

    pub fn dim(&self) -> usize {
        self.inv_dim() + self.sp_dim()
    }

    pub fn sp_scale(&self) -> f64 {
        self.sp_scale
    }

    pub fn is_two_valued(&self) -> bool {
        self.sp_two_valued
    }

    pub fn meta(&self) -> &Metadata {
        &self.meta
    }

    pub fn with_meta(mut self, meta: Metadata) -> Self {
        self.meta = meta;
        self
    }

    pub fn labels(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.y.value())
    }

    /// Points at `indices`, in that order. Metadata is carried over.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let pts = indices
            .iter()
            .map(|&i| {
                self.points
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::InvalidParameter(format!("index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(pts, self.sp_scale, self.sp_two_valued, self.meta.clone())
    }

    /// Fraction of points whose scalar spurious value agrees with the label.
    pub fn empirical_p(&self) -> f64 {
        let agree = self.points.iter().filter(|p| p.sp_agreement() > 0.0).count();
        agree as f64 / self.len() as f64
    }
}

/// Majority (`x_sp * y > 0`) and minority (`x_sp * y < 0`) index lists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupSplit {
    pub majority: Vec<usize>,
    pub minority: Vec<usize>,
}

/// Linear classifier `w_inv . x_inv + w_sp . x_sp + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub w_inv: Vec<f64>,
    pub w_sp: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn zeros(inv_dim: usize, sp_dim: usize) -> Self {
        Self {
            w_inv: vec![0.0; inv_dim],
            w_sp: vec![0.0; sp_dim],
            bias: 0.0,
        }
    }

    /// Splits a concatenated `[inv, sp]` weight vector.
    pub fn from_concat(w: &[f64], inv_dim: usize, bias: f64) -> Self {
        Self {
            w_inv: w[..inv_dim].to_vec(),
            w_sp: w[inv_dim..].to_vec(),
            bias,
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        let mut v = self.w_inv.clone();
        v.extend_from_slice(&self.w_sp);
        v
    }

    pub fn norm(&self) -> f64 {
        self.w_inv.iter().chain(&self.w_sp).map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn decision(&self, p: &LabeledPoint) -> f64 {
        dot(&self.w_inv, &p.x_inv) + dot(&self.w_sp, &p.x_sp) + self.bias
    }

    pub fn margin(&self, p: &LabeledPoint) -> f64 {
        p.y.value() * self.decision(p)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
