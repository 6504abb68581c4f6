//! Seeded dataset generators. Every generator is a pure function of its
//! arguments: the same inputs always yield the same dataset.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{Dataset, Label, LabeledPoint, Metadata, Provenance};
use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::task::split_groups;

pub type InvPoint = (Vec<f64>, Label);

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub name: String,
    pub n: usize,
    /// Probability that the spurious feature agrees with the label.
    pub p: f64,
    /// Spurious feature scale B.
    pub b: f64,
    pub seed: u64,
    /// Realize `ceil(p * n)` majority points exactly instead of sampling.
    pub exact_counts: bool,
    /// Emit every invariant point with both spurious signs, so both groups
    /// share the same invariant multiset.
    pub pairing: bool,
}

impl GenSpec {
    pub fn new(name: impl Into<String>, n: usize, p: f64, b: f64, seed: u64) -> Self {
        Self {
            name: name.into(),
            n,
            p,
            b,
            seed,
            exact_counts: false,
            pairing: false,
        }
    }

    pub fn exact(mut self) -> Self {
        self.exact_counts = true;
        self
    }

    pub fn paired(mut self) -> Self {
        self.pairing = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.5..1.0).contains(&self.p) {
            return Err(Error::InvalidParameter(format!(
                "p must lie in [0.5, 1), got {}",
                self.p
            )));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::InvalidParameter(format!("B must be > 0, got {}", self.b)));
        }
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("n must be >= 2, got {}", self.n)));
        }
        Ok(())
    }
}

/// Majority/minority copy counts `(q, r)` with `q / (q + r)` closest to `p`,
/// using the smallest denominator that hits `p` to 1e-9 (up to 100).
pub fn pairing_multiplicities(p: f64) -> (usize, usize) {
    let mut best = (1, 1);
    let mut best_err = f64::INFINITY;
    for den in 2..=100usize {
        let q = (p * den as f64).round() as usize;
        if q == 0 || q >= den {
            continue;
        }
        let err = (q as f64 / den as f64 - p).abs();
        if err < best_err - 1e-12 {
            best = (q, den - q);
            best_err = err;
        }
        if err < 1e-9 {
            break;
        }
    }
    best
}

fn alternating_labels(n: usize) -> impl Iterator<Item = Label> {
    (0..n).map(|i| if i % 2 == 0 { Label::Pos } else { Label::Neg })
}

/// The two-feature task: `x_inv = y`, `x_sp = yB` with probability `p`.
pub fn gen_2dim(spec: &GenSpec) -> Result<Dataset> {
    spec.validate()?;
    let n_inv = if spec.pairing {
        let (q, r) = pairing_multiplicities(spec.p);
        (spec.n / (q + r)).max(1)
    } else {
        spec.n
    };
    let inv: Vec<InvPoint> = alternating_labels(n_inv).map(|y| (vec![y.value()], y)).collect();
    let d = attach_spurious(&inv, spec)?;
    let meta = Metadata {
        generator: "2dim".into(),
        ..d.meta().clone()
    };
    Ok(d.with_meta(meta))
}

/// Symmetric two-group construction: majority points at invariant distance
/// `maj_margin`, minority at `min_margin`. Labels alternate within each group
/// starting with `+1`, so even group sizes are symmetric under negation.
pub fn gen_geometric_2d(maj_margin: f64, min_margin: f64, n_maj: usize, n_min: usize, b: f64) -> Result<Dataset> {
    if !(maj_margin > 0.0 && min_margin > 0.0) {
        return Err(Error::InvalidParameter("margins must be > 0".into()));
    }
    let mut pts = Vec::with_capacity(n_maj + n_min);
    for y in alternating_labels(n_maj) {
        pts.push(LabeledPoint::new(vec![y.value() * maj_margin], vec![y.value() * b], y));
    }
    for y in alternating_labels(n_min) {
        pts.push(LabeledPoint::new(vec![y.value() * min_margin], vec![-y.value() * b], y));
    }
    let meta = Metadata::new("geometric_2d", None, Provenance::ALL)
        .with("maj_margin", maj_margin)
        .with("min_margin", min_margin)
        .with("n_maj", n_maj)
        .with("n_min", n_min);
    Dataset::new(pts, b, true, meta)
}

/// Attaches a two-valued spurious feature to invariant points, independently
/// of `x_inv` given the label.
///
/// * sampled: `x_sp = yB` with probability `p`, else `-yB`;
/// * exact counts: within each class, `ceil(p * n_class)` randomly chosen
///   points agree with the label;
/// * pairing: each invariant point is emitted `q` times agreeing and `r`
///   times disagreeing, with `q / (q + r)` the closest small-denominator
///   fraction to `p`. Agreeing and disagreeing copies alternate.
pub fn attach_spurious(inv_points: &[InvPoint], spec: &GenSpec) -> Result<Dataset> {
    if inv_points.is_empty() {
        return Err(Error::InvalidParameter("no invariant points".into()));
    }
    if !(0.5..1.0).contains(&spec.p) || !(spec.b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need p in [0.5, 1) and B > 0, got p = {}, B = {}",
            spec.p, spec.b
        )));
    }
    let b = spec.b;
    let mut rng = seeded(spec.seed);
    let mut pts = Vec::new();
    let mut meta_extra: Vec<(&str, String)> = Vec::new();

    if spec.pairing {
        let (q, r) = pairing_multiplicities(spec.p);
        for (x, y) in inv_points {
            let agree = LabeledPoint::new(x.clone(), vec![y.value() * b], *y);
            let disagree = LabeledPoint::new(x.clone(), vec![-y.value() * b], *y);
            for k in 0..q.max(r) {
                if k < q {
                    pts.push(agree.clone());
                }
                if k < r {
                    pts.push(disagree.clone());
                }
            }
        }
        meta_extra.push(("pairing_multiplicity", format!("{q}:{r}")));
    } else if spec.exact_counts {
        let mut agree = vec![false; inv_points.len()];
        for class in [Label::Pos, Label::Neg] {
            let mut idx: Vec<usize> = (0..inv_points.len()).filter(|&i| inv_points[i].1 == class).collect();
            let k = (spec.p * idx.len() as f64 - 1e-9).ceil() as usize;
            idx.shuffle(&mut rng);
            for &i in idx.iter().take(k) {
                agree[i] = true;
            }
        }
        for ((x, y), a) in inv_points.iter().zip(agree) {
            let s = if a { 1.0 } else { -1.0 };
            pts.push(LabeledPoint::new(x.clone(), vec![s * y.value() * b], *y));
        }
    } else {
        for (x, y) in inv_points {
            let s = if rng.random::<f64>() < spec.p { 1.0 } else { -1.0 };
            pts.push(LabeledPoint::new(x.clone(), vec![s * y.value() * b], *y));
        }
    }

    let mut meta = Metadata::new(spec.name.clone(), Some(spec.seed), Provenance::ALL)
        .with("p_target", spec.p)
        .with("exact_counts", spec.exact_counts)
        .with("pairing", spec.pairing);
    for (k, v) in meta_extra {
        meta = meta.with(k, v);
    }
    let d = Dataset::new(pts, b, true, meta)?;
    let realized = d.empirical_p();
    let meta = d.meta().clone().with("p_empirical", realized);
    Ok(d.with_meta(meta))
}

/// A fixed random ReLU feature map `x -> max(0, W x)` with i.i.d. standard
/// normal `W` (row-major, `out_dim x in_dim`).
#[derive(Debug, Clone, PartialEq)]
pub struct ReluFeatureMap {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
}

impl ReluFeatureMap {
    pub fn new(in_dim: usize, out_dim: usize, seed: u64) -> Result<Self> {
        if out_dim == 0 {
            return Err(Error::InvalidParameter("out_dim must be >= 1".into()));
        }
        let mut rng = seeded(seed);
        let weights = (0..in_dim * out_dim).map(|_| rng.sample(StandardNormal)).collect();
        Ok(Self {
            in_dim,
            out_dim,
            weights,
        })
    }

    pub fn pre_activation(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.in_dim.max(1))
            .take(self.out_dim)
            .map(|row| {
                if self.in_dim == 0 {
                    0.0
                } else {
                    crate::data::dot(row, x)
                }
            })
            .collect()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.pre_activation(x).into_iter().map(|v| v.max(0.0)).collect()
    }
}

/// Maps raw inputs through a seeded random ReLU layer.
pub fn gen_random_relu_features(raw: &[InvPoint], out_dim: usize, seed: u64) -> Result<Vec<InvPoint>> {
    let in_dim = raw.first().map(|r| r.0.len()).unwrap_or(0);
    if let Some(i) = raw.iter().position(|r| r.0.len() != in_dim) {
        return Err(Error::InvalidParameter(format!(
            "raw point {i} has dimension {}, expected {in_dim}",
            raw[i].0.len()
        )));
    }
    let map = ReluFeatureMap::new(in_dim, out_dim, seed)?;
    Ok(raw.iter().map(|(x, y)| (map.apply(x), *y)).collect())
}

/// Appends majority copies (sampled with replacement) until
/// `|majority| : |minority|` reaches `ratio`. The minority is untouched and
/// no new distinct point is created.
pub fn duplicate_majority(d: &Dataset, ratio: f64, seed: u64) -> Result<Dataset> {
    let groups = split_groups(d)?;
    if groups.majority.is_empty() {
        return Err(Error::MissingGroup("majority"));
    }
    if groups.minority.is_empty() {
        return Err(Error::MissingGroup("minority"));
    }
    let n_min = groups.minority.len();
    let current = groups.majority.len() as f64 / n_min as f64;
    if !(ratio.is_finite()) || ratio < current - 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "ratio {ratio} is below the current majority:minority ratio {current}"
        )));
    }
    let target = ((ratio * n_min as f64).round() as usize).max(groups.majority.len());
    let extra = target - groups.majority.len();
    let mut rng = seeded(seed);
    let mut counts = vec![0usize; d.len()];
    let mut pts = d.points().to_vec();
    for _ in 0..extra {
        let i = groups.majority[rng.random_range(0..groups.majority.len())];
        counts[i] += 1;
        pts.push(d.points()[i].clone());
    }
    let multiplicity: Vec<String> = counts
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > 0)
        .map(|(i, c)| format!("{i}:{c}"))
        .collect();
    let meta = d
        .meta()
        .clone()
        .with("dup_ratio", ratio)
        .with("dup_seed", seed)
        .with("dup_added", extra)
        .with("dup_multiplicity", multiplicity.join(";"));
    let out = Dataset::new(pts, d.sp_scale(), d.is_two_valued(), meta)?;
    let realized = out.empirical_p();
    let meta = out.meta().clone().with("p_empirical", realized);
    Ok(out.with_meta(meta))
}

/// `D` binary spurious coordinates, coordinate `i` agreeing with the label
/// with probability `p_vec[i]`; scalar invariant feature `y * inv_margin`.
pub fn gen_highdim_spurious(n: usize, p_vec: &[f64], inv_margin: f64, seed: u64) -> Result<Dataset> {
    if n == 0 || p_vec.is_empty() {
        return Err(Error::InvalidParameter("need n >= 1 and D >= 1".into()));
    }
    if let Some(p) = p_vec.iter().find(|p| !(**p > 0.5 && **p <= 1.0)) {
        return Err(Error::InvalidParameter(format!("p_i must lie in (1/2, 1], got {p}")));
    }
    if !(inv_margin > 0.0) {
        return Err(Error::InvalidParameter("inv_margin must be > 0".into()));
    }
    let mut rng = seeded(seed);
    let pts = (0..n)
        .map(|_| {
            let y = if rng.random::<bool>() { Label::Pos } else { Label::Neg };
            let sp = p_vec
                .iter()
                .map(|&p| if rng.random::<f64>() < p { y.value() } else { -y.value() })
                .collect();
            LabeledPoint::new(vec![y.value() * inv_margin], sp, y)
        })
        .collect();
    let prov = Provenance {
        two_valued_sp: false,
        ..Provenance::ALL
    };
    let meta = Metadata::new("highdim", Some(seed), prov)
        .with("D", p_vec.len())
        .with("inv_margin", inv_margin)
        .with("p_vec", p_vec.iter().map(f64::to_string).collect::<Vec<_>>().join(";"));
    Dataset::new(pts, 1.0, false, meta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakerKind {
    /// Training invariant values at `2y` or `3y` while the true boundary sits
    /// at `x_inv = -0.5`.
    UnstableInvariant,
    /// `x_inv + x_sp = y` exactly.
    CondDependent,
    /// Stored as `(x_inv, x_inv + x_sp)` with `x_inv = y`, `x_sp = +-0.5`.
    Nonorthogonal,
}

impl std::str::FromStr for BreakerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unstable_invariant" => Ok(Self::UnstableInvariant),
            "cond_dependent" => Ok(Self::CondDependent),
            "nonorthogonal" => Ok(Self::Nonorthogonal),
            other => Err(Error::InvalidParameter(format!("unknown breaker kind `{other}`"))),
        }
    }
}

/// Datasets that each violate exactly one easy-to-learn constraint.
pub fn gen_constraint_breakers(kind: BreakerKind, n: usize, p: f64, seed: u64) -> Result<Dataset> {
    if n == 0 || !(0.5..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "need n >= 1 and p in [0.5, 1], got n = {n}, p = {p}"
        )));
    }
    let mut rng = seeded(seed);
    let agree = |rng: &mut rand_chacha::ChaCha8Rng| if rng.random::<f64>() < p { 1.0 } else { -1.0 };
    let labels: Vec<Label> = alternating_labels(n).collect();
    let (pts, two_valued, prov, name) = match kind {
        BreakerKind::UnstableInvariant => {
            let pts = labels
                .iter()
                .map(|&y| {
                    let mag = if rng.random::<bool>() { 2.0 } else { 3.0 };
                    let s = agree(&mut rng);
                    LabeledPoint::new(vec![mag * y.value()], vec![s * y.value()], y)
                })
                .collect();
            let prov = Provenance {
                stable_inv_marginal: false,
                ..Provenance::ALL
            };
            (pts, true, prov, "unstable_invariant")
        }
        BreakerKind::CondDependent => {
            let pts = labels
                .iter()
                .map(|&y| {
                    let x_inv = y.value() * rng.random_range(0.5..1.5);
                    LabeledPoint::new(vec![x_inv], vec![y.value() - x_inv], y)
                })
                .collect();
            let prov = Provenance {
                cond_independent: false,
                two_valued_sp: false,
                ..Provenance::ALL
            };
            (pts, false, prov, "cond_dependent")
        }
        BreakerKind::Nonorthogonal => {
            let pts = labels
                .iter()
                .map(|&y| {
                    let x_sp = 0.5 * agree(&mut rng) * y.value();
                    LabeledPoint::new(vec![y.value()], vec![y.value() + x_sp], y)
                })
                .collect();
            let prov = Provenance {
                identity_mapping: false,
                two_valued_sp: false,
                ..Provenance::ALL
            };
            (pts, false, prov, "nonorthogonal")
        }
    };
    let meta = Metadata::new(name, Some(seed), prov).with("p_target", p);
    Dataset::new(pts, 1.0, two_valued, meta)
}

/// Test-time points for the unstable-invariant task: `x_inv = -0.5 + 0.1 y`,
/// close to the true boundary.
pub fn unstable_invariant_test_split(n: usize) -> Result<Dataset> {
    let pts = alternating_labels(n)
        .map(|y| LabeledPoint::new(vec![-0.5 + 0.1 * y.value()], vec![y.value()], y))
        .collect();
    let meta = Metadata::new("unstable_invariant_test", None, Provenance::UNKNOWN);
    Dataset::new(pts, 1.0, true, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn key(x: &[f64]) -> Vec<u64> {
        x.iter().map(|v| v.to_bits()).collect()
    }

    #[test]
    fn four_point_task() {
        let d = gen_2dim(&GenSpec::new("2dim", 4, 0.5, 1.0, 0).exact()).unwrap();
        let mut got: Vec<(i64, i64, i64)> = d
            .points()
            .iter()
            .map(|p| (p.x_inv[0] as i64, p.x_sp[0] as i64, p.y.value() as i64))
            .collect();
        got.sort();
        assert_eq!(got, vec![(-1, -1, -1), (-1, 1, -1), (1, -1, 1), (1, 1, 1)]);
    }

    #[test]
    fn exact_counts_round_toward_majority() {
        let d = gen_2dim(&GenSpec::new("2dim", 20, 0.9, 1.0, 5).exact()).unwrap();
        assert!(d.points().iter().all(|p| p.x_inv[0] == p.y.value()));
        assert_eq!(d.empirical_p(), 0.9);
        let d = gen_2dim(&GenSpec::new("2dim", 10, 0.75, 1.0, 5).exact()).unwrap();
        // ceil(0.75 * 5) = 4 per class
        assert_eq!(d.empirical_p(), 0.8);
        assert_eq!(d.meta().extra["p_empirical"], "0.8");
    }

    #[test]
    fn spec_validation() {
        assert!(GenSpec::new("x", 10, 1.0, 1.0, 0).validate().is_err());
        assert!(GenSpec::new("x", 10, 0.4, 1.0, 0).validate().is_err());
        assert!(GenSpec::new("x", 1, 0.5, 1.0, 0).validate().is_err());
        assert!(GenSpec::new("x", 10, 0.5, 0.0, 0).validate().is_err());
    }

    #[test]
    fn pairing_gives_identical_inv_multisets() {
        for p in [0.5, 0.6, 0.75, 0.9] {
            let inv: Vec<InvPoint> = (0..7)
                .map(|i| {
                    (
                        vec![i as f64 + 0.5, -(i as f64)],
                        if i % 3 == 0 { Label::Neg } else { Label::Pos },
                    )
                })
                .collect();
            let d = attach_spurious(&inv, &GenSpec::new("paired", 0, p, 1.0, 1).paired()).unwrap();
            assert!((d.empirical_p() - p).abs() < 1e-12, "p = {p}");
            let g = split_groups(&d).unwrap();
            let hist = |idx: &[usize]| {
                let mut m: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
                for &i in idx {
                    *m.entry(key(&d.points()[i].x_inv)).or_default() += 1;
                }
                m
            };
            let (maj, min) = (hist(&g.majority), hist(&g.minority));
            let (q, r) = pairing_multiplicities(p);
            assert_eq!(maj.keys().collect::<Vec<_>>(), min.keys().collect::<Vec<_>>());
            for (k, c) in &maj {
                assert_eq!(c * r, min[k] * q);
            }
        }
    }

    #[test]
    fn pairing_at_half_is_bijective() {
        let d = gen_2dim(&GenSpec::new("2dim", 8, 0.5, 2.0, 0).paired()).unwrap();
        let g = split_groups(&d).unwrap();
        assert_eq!(g.majority.len(), g.minority.len());
        for (&a, &b) in g.majority.iter().zip(&g.minority) {
            assert_eq!(d.points()[a].x_inv, d.points()[b].x_inv);
            assert_eq!(d.points()[a].y, d.points()[b].y);
        }
    }

    #[test]
    fn multiplicities() {
        assert_eq!(pairing_multiplicities(0.5), (1, 1));
        assert_eq!(pairing_multiplicities(0.6), (3, 2));
        assert_eq!(pairing_multiplicities(0.75), (3, 1));
        assert_eq!(pairing_multiplicities(0.9), (9, 1));
        assert_eq!(pairing_multiplicities(10.0 / 11.0), (10, 1));
    }

    #[test]
    fn geometric_worked_instance() {
        let d = gen_geometric_2d(0.1, 2.0, 2, 2, 1.0).unwrap();
        let got: Vec<(f64, f64, f64)> = d
            .points()
            .iter()
            .map(|p| (p.x_inv[0], p.x_sp[0], p.y.value()))
            .collect();
        assert_eq!(
            got,
            vec![(0.1, 1.0, 1.0), (-0.1, -1.0, -1.0), (2.0, -1.0, 1.0), (-2.0, 1.0, -1.0)]
        );
        let empty_min = gen_geometric_2d(0.1, 2.0, 4, 0, 1.0).unwrap();
        assert!(split_groups(&empty_min).unwrap().minority.is_empty());
        assert!(gen_geometric_2d(0.0, 1.0, 2, 2, 1.0).is_err());
    }

    #[test]
    fn attach_exactly_one_minority() {
        let inv: Vec<InvPoint> = (0..10).map(|i| (vec![i as f64 + 1.0], Label::Pos)).collect();
        let d = attach_spurious(&inv, &GenSpec::new("a", 10, 0.9, 1.0, 4).exact()).unwrap();
        assert_eq!(split_groups(&d).unwrap().minority.len(), 1);
        assert!(attach_spurious(&[], &GenSpec::new("a", 10, 0.9, 1.0, 4)).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let s = GenSpec::new("2dim", 64, 0.7, 1.5, 99);
        assert_eq!(gen_2dim(&s).unwrap(), gen_2dim(&s).unwrap());
        let a = gen_highdim_spurious(20, &[0.6; 30], 1.0, 3).unwrap();
        assert_eq!(a, gen_highdim_spurious(20, &[0.6; 30], 1.0, 3).unwrap());
        assert_ne!(a, gen_highdim_spurious(20, &[0.6; 30], 1.0, 4).unwrap());
    }

    #[test]
    fn relu_features() {
        let map = ReluFeatureMap::new(3, 5, 11).unwrap();
        assert_eq!(map.apply(&[0.0, 0.0, 0.0]), vec![0.0; 5]);
        let x = [0.3, -1.2, 2.0];
        let one = ReluFeatureMap::new(3, 1, 7).unwrap();
        let w = &one.weights;
        let hand = (w[0] * x[0] + w[1] * x[1] + w[2] * x[2]).max(0.0);
        assert_eq!(one.apply(&x), vec![hand]);
        // relu(Wx) + relu(-Wx) = |Wx|
        let neg = ReluFeatureMap {
            weights: map.weights.iter().map(|v| -v).collect(),
            ..map.clone()
        };
        for ((a, b), z) in map.apply(&x).iter().zip(neg.apply(&x)).zip(map.pre_activation(&x)) {
            assert!((a + b - z.abs()).abs() < 1e-12);
        }
        let raw = vec![(vec![1.0, 2.0], Label::Pos), (vec![1.0], Label::Neg)];
        assert!(gen_random_relu_features(&raw, 4, 0).is_err());
        assert!(ReluFeatureMap::new(2, 0, 0).is_err());
    }

    #[test]
    fn duplication() {
        let inv: Vec<InvPoint> = (0..100)
            .map(|i| {
                (
                    vec![1.0 + i as f64 / 10.0],
                    if i % 2 == 0 { Label::Pos } else { Label::Neg },
                )
            })
            .collect();
        let d = attach_spurious(&inv, &GenSpec::new("con", 0, 0.5, 1.0, 0).paired()).unwrap();
        assert_eq!(d.len(), 200);
        let out = duplicate_majority(&d, 10.0, 1).unwrap();
        let g = split_groups(&out).unwrap();
        assert_eq!((g.majority.len(), g.minority.len()), (1000, 100));
        assert_eq!(&out.points()[..200], d.points());
        let distinct = |d: &Dataset| {
            let mut v: Vec<_> = d.points().iter().map(|p| (key(&p.x_inv), key(&p.x_sp), p.y)).collect();
            v.sort();
            v.dedup();
            v
        };
        assert_eq!(distinct(&out), distinct(&d));
        let same = duplicate_majority(&d, 1.0, 1).unwrap();
        assert_eq!(same.points(), d.points());
        assert!(duplicate_majority(&out, 2.0, 1).is_err());
    }

    #[test]
    fn highdim_extremes() {
        let d = gen_highdim_spurious(10, &[1.0; 8], 1.0, 0).unwrap();
        for p in d.points() {
            assert!(p.x_sp.iter().all(|v| *v == p.y.value()));
        }
        assert!(!d.is_two_valued());
        assert!(gen_highdim_spurious(10, &[0.5], 1.0, 0).is_err());
    }

    #[test]
    fn breakers() {
        let d = gen_constraint_breakers(BreakerKind::CondDependent, 30, 0.9, 2).unwrap();
        assert!(d.points().iter().all(|p| p.x_inv[0] + p.x_sp[0] == p.y.value()));
        assert!(!d.meta().provenance.cond_independent);

        let d = gen_constraint_breakers(BreakerKind::Nonorthogonal, 30, 0.9, 2).unwrap();
        assert!(d.points().iter().all(|p| p.x_sp[0] * p.y.value() > 0.0));
        assert!(d.points().iter().all(|p| (p.x_sp[0] - p.x_inv[0]).abs() == 0.5));

        let d = gen_constraint_breakers(BreakerKind::UnstableInvariant, 30, 0.9, 2).unwrap();
        assert!(d.points().iter().all(|p| {
            let v = p.x_inv[0] * p.y.value();
            v == 2.0 || v == 3.0
        }));
        assert!(!d.meta().provenance.stable_inv_marginal);
        let t = unstable_invariant_test_split(4).unwrap();
        assert!(t.points().iter().all(|p| p.x_inv[0] < 0.0));
        assert!("bogus".parse::<BreakerKind>().is_err());
    }
}
