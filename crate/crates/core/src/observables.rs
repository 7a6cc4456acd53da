//! Purity, entropy, concurrence and Werner-structure diagnostics.

use crate::error::{Error, Result};
use crate::matrix::{C64, ComplexMatrix};
use crate::state::{DensityMatrix, PureState, SubsystemSplit, partial_trace};

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

/// −Σ λ ln λ over eigenvalues clamped to \[0, 1\].
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(rho
        .eigenvalues()?
        .into_iter()
        .map(|l| l.clamp(0.0, 1.0))
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum())
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::Dimension(format!(
            "two-qubit quantity requested for dimension {}",
            rho.dim()
        )));
    }
    Ok(())
}

/// σ_y ⊗ σ_y in the computational basis.
fn sigma_yy() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    for (i, s) in [-1.0, 1.0, 1.0, -1.0].into_iter().enumerate() {
        m[(i, 3 - i)] = C64::new(s, 0.0);
    }
    m
}

/// Wootters concurrence from the eigenvalues of ρ·(σ_y⊗σ_y)·ρ*·(σ_y⊗σ_y).
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let yy = sigma_yy();
    let tilde = yy.matmul(&rho.matrix().conj()).matmul(&yy);
    let r = rho.matrix().matmul(&tilde);
    let mut l: Vec<f64> = r
        .eigenvalues_general()?
        .into_iter()
        .map(|z| z.re.max(0.0).sqrt())
        .collect();
    l.sort_by(|a, b| b.total_cmp(a));
    Ok((l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct WernerDiagnostics {
    pub sigma_werner: f64,
    pub dominant_eigenvector_concurrence: f64,
    /// Descending.
    pub eigenvalues: [f64; 4],
}

fn population_std(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt()
}

/// Finds the three closest eigenvalues (minimal population std) and the
/// concurrence of the remaining eigenvector. Ties within 1e−14 keep the
/// triple that excludes the largest eigenvalue.
pub fn werner_diagnostics(rho: &DensityMatrix) -> Result<WernerDiagnostics> {
    require_two_qubits(rho)?;
    let eig = rho.matrix().eigh()?;
    let desc: Vec<usize> = (0..4).rev().collect();
    let vals: Vec<f64> = desc.iter().map(|&k| eig.values[k]).collect();

    let mut best = (f64::INFINITY, 0usize);
    for excl in 0..4 {
        let triple: Vec<f64> = (0..4).filter(|&k| k != excl).map(|k| vals[k]).collect();
        let s = population_std(&triple);
        if s < best.0 - 1e-14 {
            best = (s, excl);
        }
    }
    let col = desc[best.1];
    let v: Vec<C64> = (0..4).map(|i| eig.vectors[(i, col)]).collect();
    let proj = PureState::normalized(v)?.density();
    Ok(WernerDiagnostics {
        sigma_werner: best.0,
        dominant_eigenvector_concurrence: concurrence(&proj)?,
        eigenvalues: [vals[0], vals[1], vals[2], vals[3]],
    })
}

/// α·I/4 + β|ψ⟩⟨ψ| with α = 1 − β.
pub fn werner_state(beta: f64, psi: &PureState) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Validation(format!("β = {beta} outside [0, 1]")));
    }
    if psi.dim() != 4 {
        return Err(Error::Dimension("Werner states are two-qubit states".into()));
    }
    let split = SubsystemSplit::new(vec![2, 2])?;
    let marginal = partial_trace(&psi.density(), &split, &[1])?;
    let dev = marginal
        .matrix()
        .max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5));
    if dev > 1e-10 {
        return Err(Error::Validation(format!(
            "ψ is not maximally entangled (marginal deviates by {dev:.3e})"
        )));
    }
    let m = &ComplexMatrix::identity(4).scale_real((1.0 - beta) / 4.0)
        + &psi.density().matrix().scale_real(beta);
    Ok(DensityMatrix::from_trusted(m))
}

/// β̂ = (4·λ_max − 1)/3, exact on Werner states.
pub fn werner_beta_estimate(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let lmax = *rho.eigenvalues()?.last().expect("dim 4");
    Ok((4.0 * lmax - 1.0) / 3.0)
}
