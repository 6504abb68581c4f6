//! Max-margin classifiers, geometric and statistical skews, and gradient
//! dynamics for linear models trained on tasks with a spurious feature.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod maxmargin;
pub mod rng;
pub mod skews;
pub mod task;
pub mod taskgen;

pub use data::{Dataset, GroupSplit, Label, LabeledPoint, LinearModel, Metadata, Provenance};
pub use dynamics::{simulate, Batch, DynSpec, Loss, Mode, Record, Trajectory};
pub use error::{Error, Result};
pub use maxmargin::{
    balanced_max_margin, max_margin, oracle_active_set, solve_least_norm, v_norm, v_tilde_norm, FeatureMask,
    MarginProblem, QpSolution, SolverOptions,
};
pub use skews::{compute_skew_report, norm_growth_curve, verify_highdim_proposition, CurveMode, SkewReport};
pub use task::{split_groups, validate_easy_task, ConstraintReport};
pub use taskgen::{BreakerKind, GenSpec, InvPoint};
