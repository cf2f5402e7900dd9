//! Named models accepted by `verify` and `reduce`.

use bhe_core::catalog;
use bhe_core::hermitian::HermitianModel;
use bhe_core::linalg::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;

/// `su2xsu2` with a seeded random `J`-compatible metric perturbation; not BHE.
pub const PERTURBED_CONTROL: &str = "perturbed-control";
pub const CONTROL_SEED: u64 = 20_240_917;
pub const CONTROL_EPSILON: f64 = 1e-2;

pub const MODEL_NAMES: [&str; 6] = ["su2xsu2", "su2xRxC", "hopf", "flat", "flat-torus", PERTURBED_CONTROL];

/// Symmetric `n×n` matrix with entries uniform in `[-1, 1]` drawn from `seed`.
pub fn random_symmetric(n: usize, seed: u64) -> Mat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x: f64 = rng.gen_range(-1.0..=1.0);
            s[(i, j)] = x;
            s[(j, i)] = x;
        }
    }
    s
}

pub fn perturbed_control() -> Result<HermitianModel, CliError> {
    let base = catalog::su2xsu2();
    let s = random_symmetric(base.dim(), CONTROL_SEED);
    Ok(catalog::perturb_metric(&base, &s, CONTROL_EPSILON)?.with_name(PERTURBED_CONTROL))
}

pub fn lookup(name: &str) -> Result<HermitianModel, CliError> {
    if name == PERTURBED_CONTROL {
        return perturbed_control();
    }
    match catalog::by_name(name) {
        Some(m) => Ok(m.with_name(name)),
        None => Err(CliError::UnknownModel { name: name.to_string(), known: MODEL_NAMES.join(", ") }),
    }
}
