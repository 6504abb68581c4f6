//! Sweep execution: one cell per grid point, computed in parallel, written
//! sequentially in grid order so reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;

use skewlab_core::dynamics::log_grid;
use skewlab_core::io::{binarize_labels, load_csv_tabular, load_dataset, parse_idx, write_dataset_csv, write_meta};
use skewlab_core::maxmargin::solve_least_norm;
use skewlab_core::rng::{derive_seed, seeded};
use skewlab_core::skews::CurveRow;
use skewlab_core::taskgen::{
    attach_spurious, duplicate_majority, gen_2dim, gen_constraint_breakers, gen_geometric_2d, gen_highdim_spurious,
    gen_random_relu_features,
};
use skewlab_core::{
    compute_skew_report, norm_growth_curve, simulate, validate_easy_task, Batch, BreakerKind, CurveMode, Dataset,
    DynSpec, FeatureMask, GenSpec, InvPoint, Label, Loss, MarginProblem, SkewReport, SolverOptions, Trajectory,
};

use crate::config::{
    BoundsChoice, Counts, ExperimentConfig, Generator, Kind, LossChoice, MaskChoice, ModeChoice, Pool, SubsetChoice,
    Targets,
};
use crate::svg::Chart;
use crate::HarnessError;

/// Embedding width used by the random-feature experiments this harness
/// scales down from.
pub const PAPER_RELU_DIM: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub p: f64,
    pub b: f64,
    pub n: usize,
    pub seed: u64,
    /// Set when the cell reads a dataset file instead of generating one.
    pub label: Option<String>,
}

impl Cell {
    pub fn id(&self) -> String {
        match &self.label {
            Some(l) => l.clone(),
            None => format!("p{}_b{}_n{}_s{}", self.p, self.b, self.n, self.seed),
        }
    }

    fn columns(&self) -> Vec<String> {
        vec![
            self.id(),
            self.p.to_string(),
            self.b.to_string(),
            self.n.to_string(),
            self.seed.to_string(),
        ]
    }
}

const CELL_HEADER: [&str; 5] = ["cell", "p", "b", "n", "seed"];

pub fn cells(kind: Kind, cfg: &ExperimentConfig) -> Vec<Cell> {
    if let Some(path) = &cfg.gen.data {
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "data".into());
        return vec![Cell {
            p: f64::NAN,
            b: f64::NAN,
            n: 0,
            seed: cfg.sweep.seeds[0],
            label: Some(label),
        }];
    }
    let sizes: Vec<usize> = if kind == Kind::Normcurve {
        vec![*cfg.normcurve.sizes.iter().max().unwrap()]
    } else {
        cfg.sweep.n.clone()
    };
    let mut out = Vec::new();
    for &p in &cfg.sweep.p {
        for &b in &cfg.sweep.b {
            for &n in &sizes {
                for &seed in &cfg.sweep.seeds {
                    out.push(Cell {
                        p,
                        b,
                        n,
                        seed,
                        label: None,
                    });
                }
            }
        }
    }
    out
}

/// Raw `(features, label)` points for the tabular and IDX generators.
pub fn load_source(cfg: &ExperimentConfig) -> Result<Option<Vec<InvPoint>>, HarnessError> {
    let g = &cfg.gen;
    let need = matches!(g.generator, Generator::Tabular | Generator::Idx) || cfg.normcurve.pool == Pool::Source;
    if !need || g.data.is_some() {
        return Ok(None);
    }
    let input = g
        .input
        .as_ref()
        .ok_or_else(|| HarnessError::Config("gen.input is required for tabular and idx sources".into()))?;
    let pts = match g.generator {
        Generator::Idx => {
            let labels = g
                .labels
                .as_ref()
                .ok_or_else(|| HarnessError::Config("gen.labels is required for idx input".into()))?;
            binarize_labels(&parse_idx(input, labels)?)?
        }
        _ => load_csv_tabular(input, &g.label_column, g.scale)?.points,
    };
    Ok(Some(pts))
}

fn gen_spec(cfg: &ExperimentConfig, cell: &Cell, name: &str) -> GenSpec {
    let spec = GenSpec::new(name, cell.n, cell.p, cell.b, cell.seed);
    match cfg.gen.counts {
        Counts::Sampled => spec,
        Counts::Exact => spec.exact(),
        Counts::Paired => spec.paired(),
    }
}

fn source_points(
    cfg: &ExperimentConfig,
    source: Option<&[InvPoint]>,
    n: usize,
    seed: u64,
) -> Result<Vec<InvPoint>, HarnessError> {
    let raw = source.ok_or_else(|| HarnessError::Config("no source points loaded".into()))?;
    let take = &raw[..n.min(raw.len())];
    Ok(match cfg.gen.relu_dim {
        Some(k) => gen_random_relu_features(take, k, derive_seed(seed, 0x7e1))?,
        None => take.to_vec(),
    })
}

pub fn build_dataset(
    cfg: &ExperimentConfig,
    cell: &Cell,
    source: Option<&[InvPoint]>,
) -> Result<Dataset, HarnessError> {
    let g = &cfg.gen;
    if let Some(path) = &g.data {
        return Ok(load_dataset(path)?);
    }
    let d = match g.generator {
        Generator::TwoDim => gen_2dim(&gen_spec(cfg, cell, "2dim"))?,
        Generator::Geometric => gen_geometric_2d(g.maj_margin, g.min_margin, g.n_maj, g.n_min, cell.b)?,
        Generator::Highdim => gen_highdim_spurious(cell.n, &vec![cell.p; g.dim], g.inv_margin, cell.seed)?,
        Generator::Breaker => {
            let kind: BreakerKind = g.breaker.parse()?;
            gen_constraint_breakers(kind, cell.n, cell.p, cell.seed)?
        }
        Generator::Tabular | Generator::Idx => {
            let name = if g.generator == Generator::Idx {
                "idx"
            } else {
                "tabular"
            };
            let pts = source_points(cfg, source, cell.n, cell.seed)?;
            let mut d = attach_spurious(&pts, &gen_spec(cfg, cell, name))?;
            if let Some(k) = g.relu_dim {
                let meta = d
                    .meta()
                    .clone()
                    .with("relu_dim", k)
                    .with("relu_dim_reference", PAPER_RELU_DIM);
                d = d.with_meta(meta);
            }
            d
        }
    };
    Ok(match g.dup_ratio {
        Some(r) => duplicate_majority(&d, r, cell.seed)?,
        None => d,
    })
}

/// Pool for norm-growth curves.
pub fn curve_pool(
    cfg: &ExperimentConfig,
    cell: &Cell,
    source: Option<&[InvPoint]>,
) -> Result<Vec<InvPoint>, HarnessError> {
    Ok(match cfg.normcurve.pool {
        Pool::HeavyTail => heavy_tail_pool(cell.n, cell.seed),
        Pool::Inverse => inverse_pool(cell.n),
        Pool::Source => source_points(cfg, source, cell.n, cell.seed)?,
    })
}

pub fn heavy_tail_pool(n: usize, seed: u64) -> Vec<InvPoint> {
    let mut rng = seeded(seed);
    (0..n)
        .map(|i| {
            let y = if i % 2 == 0 { Label::Pos } else { Label::Neg };
            let u: f64 = rng.random_range(1e-3..1.0);
            (vec![y.value() * u.powf(1.5), rng.random_range(-1.0..1.0)], y)
        })
        .collect()
}

/// Points `2k` and `2k + 1` sit at `+1/(k+1)` and `-1/(k+1)`.
pub fn inverse_pool(n: usize) -> Vec<InvPoint> {
    (0..n)
        .map(|i| {
            let m = 1.0 / (i / 2 + 1) as f64;
            if i % 2 == 0 {
                (vec![m], Label::Pos)
            } else {
                (vec![-m], Label::Neg)
            }
        })
        .collect()
}

pub fn dyn_spec(cfg: &ExperimentConfig, cell: &Cell) -> DynSpec {
    let c = &cfg.dynamics;
    let loss = match c.loss {
        LossChoice::Exponential => Loss::Exponential,
        LossChoice::Logistic => Loss::Logistic,
    };
    let checkpoints = c
        .checkpoints
        .clone()
        .unwrap_or_else(|| log_grid(c.t_min, c.t_max, c.per_decade));
    let mut spec = match c.mode {
        ModeChoice::Flow => DynSpec::flow(loss, checkpoints),
        ModeChoice::Discrete => {
            let batch = match c.batch_size {
                Some(size) => Batch::Minibatch {
                    size,
                    seed: derive_seed(cell.seed, 0xba7c),
                    block: c.block,
                },
                None => Batch::Full,
            };
            DynSpec::discrete(loss, c.lr, batch, checkpoints)
        }
    };
    spec.weight_decay = c.weight_decay;
    spec.rel_tol = c.rel_tol;
    spec.residual = c.residual;
    spec
}

/// Everything one cell produces. Files are relative to the output directory.
#[derive(Debug, Default)]
struct CellResult {
    files: Vec<(PathBuf, Vec<u8>)>,
    row: Option<Vec<String>>,
    extra_rows: Vec<Vec<String>>,
    series: Option<Vec<(f64, f64)>>,
    stdout: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub kind: Kind,
    pub cells: usize,
    pub failures: Vec<(String, String)>,
}

impl RunSummary {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

fn dataset_bytes(d: &Dataset) -> Result<(Vec<u8>, Vec<u8>), HarnessError> {
    let mut csv = Vec::new();
    let mut meta = Vec::new();
    write_dataset_csv(d, &mut csv)?;
    write_meta(d, &mut meta)?;
    Ok((csv, meta))
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn run_gen(cfg: &ExperimentConfig, cell: &Cell, src: Option<&[InvPoint]>) -> Result<CellResult, HarnessError> {
    let d = build_dataset(cfg, cell, src)?;
    let (csv, meta) = dataset_bytes(&d)?;
    let id = cell.id();
    let report = validate_easy_task(&d);
    let mut row = cell.columns();
    row.extend([
        d.len().to_string(),
        d.empirical_p().to_string(),
        report.inv_margin.map(|m| m.to_string()).unwrap_or_default(),
        report.all_hold().to_string(),
    ]);
    Ok(CellResult {
        files: vec![
            (PathBuf::from(format!("datasets/{id}.csv")), csv),
            (PathBuf::from(format!("datasets/{id}.meta")), meta),
        ],
        row: Some(row),
        ..Default::default()
    })
}

fn run_maxmargin(cfg: &ExperimentConfig, cell: &Cell, src: Option<&[InvPoint]>) -> Result<CellResult, HarnessError> {
    let mc = &cfg.maxmargin;
    let full = build_dataset(cfg, cell, src)?;
    let d = match mc.subset {
        SubsetChoice::All => full,
        SubsetChoice::Maj => full.subset(&skewlab_core::split_groups(&full)?.majority)?,
        SubsetChoice::Min => full.subset(&skewlab_core::split_groups(&full)?.minority)?,
    };
    let targets = match mc.targets {
        Targets::Default => vec![1.0; d.len()],
        Targets::Balanced(c) => {
            let groups = skewlab_core::split_groups(&d)?;
            let mut t = vec![1.0; d.len()];
            for &i in &groups.minority {
                t[i] = 1.0 / c;
            }
            t
        }
    };
    let mask = match mc.mask {
        MaskChoice::Inv => FeatureMask::InvOnly,
        MaskChoice::Full => FeatureMask::Full,
    };
    let prob = MarginProblem::new(&d, targets, mask, mc.bias)?;
    let opts = SolverOptions {
        tol: mc.tol,
        max_iter: mc.max_iter,
        ..SolverOptions::default()
    };
    let sol = solve_least_norm(&prob, &opts)?;
    let m = &sol.model;
    let min_margin = d.points().iter().map(|p| m.margin(p)).fold(f64::INFINITY, f64::min);
    let mut kv = String::new();
    let _ = writeln!(kv, "w_inv={}", join(&m.w_inv));
    let _ = writeln!(kv, "w_sp={}", join(&m.w_sp));
    let _ = writeln!(kv, "bias={}", m.bias);
    let _ = writeln!(kv, "norm={}", sol.norm());
    let _ = writeln!(kv, "objective={}", sol.objective);
    let _ = writeln!(kv, "min_margin={min_margin}");
    let _ = writeln!(kv, "kkt_residual={}", sol.kkt_residual);
    let _ = writeln!(kv, "iterations={}", sol.iterations);
    let _ = writeln!(kv, "converged={}", sol.converged);
    let id = cell.id();
    let mut files = vec![(PathBuf::from(format!("models/{id}.txt")), kv.clone().into_bytes())];
    if mc.duals {
        let mut s = String::from("index,alpha\n");
        for (i, a) in sol.duals.iter().enumerate() {
            let _ = writeln!(s, "{i},{a}");
        }
        files.push((PathBuf::from(format!("duals/{id}.csv")), s.into_bytes()));
    }
    let mut row = cell.columns();
    row.extend([
        d.len().to_string(),
        skewlab_core::data::norm(&m.w_inv).to_string(),
        skewlab_core::data::norm(&m.w_sp).to_string(),
        m.w_inv.first().copied().unwrap_or(0.0).to_string(),
        m.w_sp.first().copied().unwrap_or(0.0).to_string(),
        m.bias.to_string(),
        sol.objective.to_string(),
        sol.kkt_residual.to_string(),
        sol.iterations.to_string(),
        sol.converged.to_string(),
    ]);
    if !sol.converged {
        return Err(HarnessError::Core(skewlab_core::Error::NotConverged {
            iterations: sol.iterations,
            residual: sol.kkt_residual,
        }));
    }
    Ok(CellResult {
        files,
        row: Some(row),
        stdout: Some(kv),
        ..Default::default()
    })
}

fn run_skews(cfg: &ExperimentConfig, cell: &Cell, src: Option<&[InvPoint]>) -> Result<CellResult, HarnessError> {
    let d = build_dataset(cfg, cell, src)?;
    let r = compute_skew_report(&d)?;
    let kv = r.to_kv();
    let mut row = cell.columns();
    row.extend(r.csv_row());
    Ok(CellResult {
        files: vec![(
            PathBuf::from(format!("reports/{}.txt", cell.id())),
            kv.clone().into_bytes(),
        )],
        row: Some(row),
        stdout: Some(kv),
        ..Default::default()
    })
}

fn run_normcurve(cfg: &ExperimentConfig, cell: &Cell, src: Option<&[InvPoint]>) -> Result<CellResult, HarnessError> {
    let pool = curve_pool(cfg, cell, src)?;
    let spec = gen_spec(cfg, cell, "normcurve");
    let mode = if cfg.normcurve.resample {
        CurveMode::Resample
    } else {
        CurveMode::Nested
    };
    let mut sizes = cfg.normcurve.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let rows: Vec<CurveRow> = norm_growth_curve(&pool, &sizes, &spec, mode)?;
    let extra_rows = rows
        .iter()
        .map(|r| {
            let mut row = cell.columns();
            row.extend([
                r.n.to_string(),
                r.v_norm.to_string(),
                r.v_tilde_min.map(|v| v.to_string()).unwrap_or_default(),
            ]);
            row
        })
        .collect();
    Ok(CellResult {
        extra_rows,
        series: Some(rows.iter().map(|r| (r.n as f64, r.v_norm)).collect()),
        ..Default::default()
    })
}

fn effective_times(cfg: &ExperimentConfig, d: &Dataset, tr: &Trajectory) -> Vec<f64> {
    match cfg.dynamics.mode {
        ModeChoice::Flow => tr.records.iter().map(|r| r.t).collect(),
        ModeChoice::Discrete => {
            let per_epoch = match cfg.dynamics.batch_size {
                Some(s) => d.len().div_ceil(s),
                None => 1,
            } as f64;
            tr.records.iter().map(|r| cfg.dynamics.lr * per_epoch * r.t).collect()
        }
    }
}

fn bounds_csv(cfg: &ExperimentConfig, d: &Dataset, tr: &Trajectory) -> Result<Vec<u8>, HarnessError> {
    use skewlab_core::dynamics::{thm_b2_bounds, thm_b4_bounds};
    let p = d.empirical_p();
    let m_max = if cfg.dynamics.bounds == BoundsChoice::B2 {
        let sol = solve_least_norm(
            &MarginProblem::unit(d, FeatureMask::Full, false),
            &SolverOptions::default(),
        )?;
        d.points().iter().map(|pt| sol.model.margin(pt)).fold(0.0, f64::max)
    } else {
        0.0
    };
    let mut s = String::from("t,lower,upper,beta\n");
    for (r, t) in tr.records.iter().zip(effective_times(cfg, d, tr)) {
        if t < cfg.dynamics.t0 {
            continue;
        }
        let (lo, hi) = match cfg.dynamics.bounds {
            BoundsChoice::B2 => thm_b2_bounds(p, d.sp_scale(), m_max, t),
            _ => thm_b4_bounds(p, t),
        };
        let _ = writeln!(s, "{},{lo},{hi},{}", r.t, r.beta);
    }
    Ok(s.into_bytes())
}

fn run_dynamics(cfg: &ExperimentConfig, cell: &Cell, src: Option<&[InvPoint]>) -> Result<CellResult, HarnessError> {
    let d = build_dataset(cfg, cell, src)?;
    let tr = simulate(&d, &dyn_spec(cfg, cell))?;
    let id = cell.id();
    let mut csv = Vec::new();
    tr.write_csv(&mut csv)?;
    let mut files = vec![(PathBuf::from(format!("trajectories/{id}.csv")), csv)];
    if cfg.dynamics.bounds != BoundsChoice::None {
        files.push((PathBuf::from(format!("bounds/{id}.csv")), bounds_csv(cfg, &d, &tr)?));
    }
    let last = tr.records.last().expect("validated checkpoints are non-empty");
    let mut row = cell.columns();
    row.extend([
        last.t.to_string(),
        last.w_sp_scalar().to_string(),
        last.beta.to_string(),
        last.beta_2d.to_string(),
        last.loss.to_string(),
        tr.clamp_events.to_string(),
        tr.steps.to_string(),
    ]);
    let finite = tr
        .records
        .iter()
        .all(|r| r.loss.is_finite() && r.beta.is_finite() && r.w_inv.iter().chain(&r.w_sp).all(|v| v.is_finite()));
    if !finite {
        return Err(HarnessError::Config(format!(
            "cell {id}: non-finite trajectory entries"
        )));
    }
    Ok(CellResult {
        files,
        row: Some(row),
        series: Some(tr.records.iter().map(|r| (r.t, r.beta)).collect()),
        ..Default::default()
    })
}

fn header(kind: Kind) -> Vec<String> {
    let tail: Vec<&str> = match kind {
        Kind::Gen => vec!["points", "p_empirical", "inv_margin", "easy"],
        Kind::Maxmargin => vec![
            "points",
            "w_inv_norm",
            "w_sp_norm",
            "w_inv0",
            "w_sp0",
            "bias",
            "objective",
            "kkt_residual",
            "iterations",
            "converged",
        ],
        Kind::Skews => SkewReport::csv_header(),
        Kind::Normcurve => vec!["size", "v_norm", "v_tilde_min"],
        Kind::Dynamics => vec!["t_final", "w_sp", "beta", "beta_2d", "loss", "clamp_events", "steps"],
        Kind::Verify | Kind::Report => vec![],
    };
    CELL_HEADER.iter().chain(&tail).map(|s| s.to_string()).collect()
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))
}

fn write_file(out: &Path, rel: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let path = out.join(rel);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Runs one sweep kind and writes its artifacts under `out`. Cell failures
/// are collected into `failures.csv`; the remaining cells are still written.
pub fn run_experiment(kind: Kind, cfg: &ExperimentConfig, out: &Path, jobs: usize) -> Result<RunSummary, HarnessError> {
    cfg.validate()?;
    if matches!(kind, Kind::Verify | Kind::Report) {
        return Err(HarnessError::Config(format!("`{}` is not a sweep kind", kind.as_str())));
    }
    let source = load_source(cfg)?;
    let src = source.as_deref();
    let grid = cells(kind, cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let results: Vec<Result<CellResult, HarnessError>> = pool.install(|| {
        grid.par_iter()
            .map(|cell| match kind {
                Kind::Gen => run_gen(cfg, cell, src),
                Kind::Maxmargin => run_maxmargin(cfg, cell, src),
                Kind::Skews => run_skews(cfg, cell, src),
                Kind::Normcurve => run_normcurve(cfg, cell, src),
                Kind::Dynamics => run_dynamics(cfg, cell, src),
                Kind::Verify | Kind::Report => unreachable!(),
            })
            .collect()
    });

    fs::create_dir_all(out)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut chart = match kind {
        Kind::Dynamics => Some(Chart::new("beta over time", "t", "beta", true)),
        Kind::Normcurve => Some(Chart::new("invariant max-margin norm", "n", "||v(S_n)||", true)),
        _ => None,
    };
    let mut stdout = Vec::new();
    for (cell, res) in grid.iter().zip(results) {
        match res {
            Ok(r) => {
                for (rel, bytes) in &r.files {
                    write_file(out, rel, bytes)?;
                }
                rows.extend(r.row);
                rows.extend(r.extra_rows);
                if let (Some(c), Some(s)) = (chart.as_mut(), r.series) {
                    c.push(cell.id(), s);
                }
                stdout.extend(r.stdout);
            }
            Err(e) => failures.push((cell.id(), e.to_string())),
        }
    }
    let table = match kind {
        Kind::Gen => "datasets.csv",
        Kind::Maxmargin => "maxmargin.csv",
        Kind::Skews => "skews.csv",
        Kind::Normcurve => "normcurve.csv",
        _ => "dynamics.csv",
    };
    write_file(out, Path::new(table), &csv_text(&header(kind), &rows)?)?;
    let fail_rows: Vec<Vec<String>> = failures.iter().map(|(c, e)| vec![c.clone(), e.clone()]).collect();
    write_file(
        out,
        Path::new("failures.csv"),
        &csv_text(&["cell".into(), "error".into()], &fail_rows)?,
    )?;
    if let (Some(c), true) = (chart, cfg.emit_svg) {
        let name = if kind == Kind::Dynamics {
            "dynamics.svg"
        } else {
            "normcurve.svg"
        };
        write_file(out, Path::new(name), c.render().as_bytes())?;
    }

    let mut summary = String::new();
    let _ = writeln!(summary, "kind={}", kind.as_str());
    let _ = writeln!(summary, "cells={}", grid.len());
    let _ = writeln!(summary, "converged={}", grid.len() - failures.len());
    let _ = writeln!(summary, "failed={}", failures.len());
    let _ = writeln!(
        summary,
        "seeds={}",
        cfg.sweep.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(";")
    );
    if let Some(k) = cfg.gen.relu_dim {
        let _ = writeln!(summary, "relu_dim={k}");
        let _ = writeln!(summary, "relu_dim_reference={PAPER_RELU_DIM}");
    }
    write_file(out, Path::new("summary.txt"), summary.as_bytes())?;
    if grid.len() == 1 {
        if let Some(s) = stdout.first() {
            print!("{s}");
        }
    }
    Ok(RunSummary {
        kind,
        cells: grid.len(),
        failures,
    })
}

/// Reads `trajectories/*.csv` under `input` and derives the normalized
/// spurious share `w_sp / sqrt(w_inv^2 + w_sp^2)` per checkpoint.
pub fn run_report(input: &Path, out: &Path, emit_svg: bool) -> Result<usize, HarnessError> {
    let dir = input.join("trajectories");
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(HarnessError::Config(format!("no trajectory CSVs in {}", dir.display())));
    }
    let mut rows = Vec::new();
    let mut chart = Chart::new("spurious share of the weight norm", "epoch / t", "w_sp / ||w||", true);
    for f in &files {
        let name = f.file_stem().unwrap().to_string_lossy().into_owned();
        let mut r = csv::Reader::from_path(f)?;
        let h = r.headers()?.clone();
        let col = |k: &str| {
            h.iter()
                .position(|c| c == k)
                .ok_or_else(|| HarnessError::Config(format!("{}: missing column `{k}`", f.display())))
        };
        let (ti, wi, ws, bi) = (col("t")?, col("w_inv_norm")?, col("w_sp")?, col("beta")?);
        let mut series = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64, HarnessError> {
                rec[i]
                    .parse()
                    .map_err(|_| HarnessError::Config(format!("{}: bad number `{}`", f.display(), &rec[i])))
            };
            let (t, w_inv, w_sp, beta) = (num(ti)?, num(wi)?, num(ws)?, num(bi)?);
            let len = w_inv.hypot(w_sp);
            let frac = if len > 0.0 { w_sp / len } else { 0.0 };
            rows.push(vec![name.clone(), t.to_string(), beta.to_string(), frac.to_string()]);
            series.push((t, frac));
        }
        chart.push(name, series);
    }
    let header: Vec<String> = ["series", "t", "beta", "frac"].iter().map(|s| s.to_string()).collect();
    write_file(out, Path::new("report/fig5a.csv"), &csv_text(&header, &rows)?)?;
    if emit_svg {
        write_file(out, Path::new("report/fig5a.svg"), chart.render().as_bytes())?;
    }
    Ok(files.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    #[test]
    fn grid_is_the_axis_product() {
        let c = cfg("[sweep]\np = [0.5, 0.9]\nb = [1.0, 2.0]\nseeds = [0, 1, 2]");
        let g = cells(Kind::Gen, &c);
        assert_eq!(g.len(), 12);
        assert_eq!(g[0].id(), "p0.5_b1_n100_s0");
        assert_eq!(cells(Kind::Normcurve, &c)[0].n, 128);
    }

    #[test]
    fn inverse_pool_pairs() {
        let pool = inverse_pool(6);
        assert_eq!(pool[4], (vec![1.0 / 3.0], Label::Pos));
        assert_eq!(pool[5], (vec![-1.0 / 3.0], Label::Neg));
    }

    #[test]
    fn sweep_writes_tables_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg("[sweep]\np = [0.75]\nn = [8]\nseeds = [0, 1]\n[maxmargin]\nduals = true");
        let s = run_experiment(Kind::Maxmargin, &c, dir.path(), 2).unwrap();
        assert!(s.success());
        let table = fs::read_to_string(dir.path().join("maxmargin.csv")).unwrap();
        assert_eq!(table.lines().count(), 3);
        assert!(dir.path().join("duals/p0.75_b1_n8_s1.csv").exists());
        let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
        assert!(summary.contains("failed=0"));
    }

    #[test]
    fn failures_are_recorded_and_other_cells_kept() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg("[sweep]\np = [0.75]\nn = [8]\n[gen]\ngenerator = \"breaker\"\nbreaker = \"bogus\"");
        let s = run_experiment(Kind::Gen, &c, dir.path(), 1).unwrap();
        assert_eq!(s.failures.len(), 1);
        let f = fs::read_to_string(dir.path().join("failures.csv")).unwrap();
        assert!(f.contains("bogus"));
    }

    #[test]
    fn report_derives_the_normalized_share() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(
            "[sweep]\np = [0.9]\nn = [20]\n[dynamics]\nloss = \"logistic\"\nmode = \"discrete\"\nlr = 0.1\ncheckpoints = [1, 10]",
        );
        run_experiment(Kind::Dynamics, &c, dir.path(), 1).unwrap();
        assert_eq!(run_report(dir.path(), dir.path(), true).unwrap(), 1);
        let text = fs::read_to_string(dir.path().join("report/fig5a.csv")).unwrap();
        let last: Vec<f64> = text
            .lines()
            .last()
            .unwrap()
            .split(',')
            .skip(1)
            .map(|v| v.parse().unwrap())
            .collect();
        assert!(last[2] > 0.0 && last[2] < 1.0);
        assert!(dir.path().join("report/fig5a.svg").exists());
    }
}
