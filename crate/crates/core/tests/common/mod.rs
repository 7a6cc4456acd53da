#![allow(dead_code)]

use rmt_decoherence::matrix::ComplexMatrix;
use rmt_decoherence::rmt::{RandomSeed, sample_gue};
use rmt_decoherence::{DensityMatrix, state::validate_density};

/// G·G†/tr from a GUE draw: full rank, generic.
pub fn random_density(dim: usize, seed: u64) -> DensityMatrix {
    let g = sample_gue(dim, RandomSeed::new(seed, 99)).unwrap().matrix().clone();
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    validate_density(&m.scale_real(1.0 / tr), 1e-12).unwrap()
}

/// Eigenvectors of a GUE draw.
pub fn random_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    sample_gue(dim, RandomSeed::new(seed, 7)).unwrap().matrix().eigh().unwrap().vectors
}

/// Largest violation of hermiticity, unit trace and positivity.
pub fn invariant_violation(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let herm = m.hermiticity_residual();
    let tr = (m.trace() - 1.0).norm();
    let min = m.eigh().unwrap().values[0];
    herm.max(tr).max((-min).max(0.0))
}
