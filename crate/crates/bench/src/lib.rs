//! Shared benchmark inputs.

use skewlab_core::taskgen::{gen_2dim, gen_highdim_spurious};
use skewlab_core::{Dataset, GenSpec};

pub fn two_dim(n: usize, p: f64) -> Dataset {
    gen_2dim(&GenSpec::new("2dim", n, p, 1.0, 0).exact()).expect("valid spec")
}

pub fn paired(n: usize, p: f64) -> Dataset {
    gen_2dim(&GenSpec::new("2dim", n, p, 1.0, 0).paired()).expect("valid spec")
}

pub fn highdim(n: usize, dim: usize) -> Dataset {
    gen_highdim_spurious(n, &vec![0.6; dim], 1.0, 0).expect("valid spec")
}
