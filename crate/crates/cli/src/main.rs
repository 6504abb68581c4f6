use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use skewlab_cli::config::{MaskChoice, SubsetChoice, Targets};
use skewlab_cli::verify::{run_all, run_criterion, VerifyContext, CRITERIA};
use skewlab_cli::{run_experiment, run_report, ExperimentConfig, HarnessError, Kind};

#[derive(Parser)]
#[command(
    name = "skewlab",
    version,
    about = "Spurious-feature experiments on linear classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// TOML experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Replace the sweep seeds with this single seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default `skewlab-out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args, Default)]
struct DataArg {
    /// Dataset CSV (with optional `.meta` sidecar) instead of a generator.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate datasets.
    Gen,
    /// Least-norm margin solves.
    Maxmargin {
        #[command(flatten)]
        data: DataArg,
        #[arg(long)]
        mask: Option<MaskChoice>,
        /// `default` or `balanced:<c>`.
        #[arg(long)]
        targets: Option<Targets>,
        #[arg(long)]
        subset: Option<SubsetChoice>,
        /// Also write per-point dual multipliers.
        #[arg(long)]
        duals: bool,
    },
    /// Geometric-skew reports with theorem bounds.
    Skews {
        #[command(flatten)]
        data: DataArg,
    },
    /// Invariant max-margin norm against sample size.
    Normcurve {
        /// Comma-separated ascending sizes.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
    },
    /// Gradient flow / descent trajectories.
    Dynamics {
        #[command(flatten)]
        data: DataArg,
    },
    /// Acceptance checks.
    Verify {
        /// Run every criterion (the default).
        #[arg(long)]
        all: bool,
        /// Comma-separated criterion numbers.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u32>>,
    },
    /// Derived views of earlier dynamics output.
    Report {
        /// Directory holding `trajectories/` (default: the output directory).
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("skewlab: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool, HarnessError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.sweep.seeds = vec![s];
    }
    let out = cli.out.clone().unwrap_or_else(|| cfg.out_dir());
    let kind = match cli.command {
        Cmd::Gen => Kind::Gen,
        Cmd::Maxmargin {
            data,
            mask,
            targets,
            subset,
            duals,
        } => {
            if data.data.is_some() {
                cfg.gen.data = data.data;
            }
            let m = &mut cfg.maxmargin;
            m.mask = mask.unwrap_or(m.mask);
            m.targets = targets.unwrap_or(m.targets);
            m.subset = subset.unwrap_or(m.subset);
            m.duals |= duals;
            Kind::Maxmargin
        }
        Cmd::Skews { data } => {
            if data.data.is_some() {
                cfg.gen.data = data.data;
            }
            Kind::Skews
        }
        Cmd::Normcurve { sizes } => {
            if let Some(s) = sizes {
                cfg.normcurve.sizes = s;
            }
            Kind::Normcurve
        }
        Cmd::Dynamics { data } => {
            if data.data.is_some() {
                cfg.gen.data = data.data;
            }
            Kind::Dynamics
        }
        Cmd::Verify { all: _, only } => {
            let ctx = VerifyContext {
                binary: std::env::current_exe().ok(),
            };
            let results = match only {
                Some(ids) => {
                    let mut r = Vec::new();
                    for id in ids {
                        r.push(run_criterion(id, &ctx).ok_or_else(|| {
                            HarnessError::Config(format!("no criterion {id} (1-{})", CRITERIA.len()))
                        })?);
                    }
                    r
                }
                None => run_all(&ctx),
            };
            for r in &results {
                println!("{}", r.line());
            }
            return Ok(results.iter().all(|r| r.pass));
        }
        Cmd::Report { input } => {
            let input = input.unwrap_or_else(|| out.clone());
            let n = run_report(&input, &out, cfg.emit_svg)?;
            println!("report: {n} trajectories -> {}", out.join("report").display());
            return Ok(true);
        }
    };
    if let Some(k) = cfg.kind.filter(|k| *k != kind) {
        return Err(HarnessError::Config(format!(
            "config is for `{}` but `{}` was requested",
            k.as_str(),
            kind.as_str()
        )));
    }
    cfg.validate()?;
    let summary = run_experiment(kind, &cfg, &out, cli.jobs)?;
    for (cell, err) in &summary.failures {
        eprintln!("skewlab: cell {cell} failed: {err}");
    }
    Ok(summary.success())
}
