use crate::error::{Error, Result};
use crate::matrix::{C64, ComplexMatrix};
use crate::state::DensityMatrix;

/// Levels of one subsystem and the diagonal weights of its state.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationKernel {
    energies: Vec<f64>,
    weights: Vec<f64>,
}

impl CorrelationKernel {
    pub fn new(energies: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if energies.is_empty() || energies.len() != weights.len() {
            return Err(Error::Dimension(format!(
                "{} energies with {} weights",
                energies.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| w < -1e-12 || !w.is_finite()) {
            return Err(Error::Validation("kernel weights must be non-negative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("kernel weights sum to {sum}, expected 1")));
        }
        Ok(Self { energies, weights })
    }

    pub fn uniform(energies: Vec<f64>) -> Result<Self> {
        let n = energies.len().max(1);
        Self::new(energies, vec![1.0 / n as f64; n])
    }

    /// Weights taken from the diagonal of `rho`.
    pub fn from_state(energies: Vec<f64>, rho: &DensityMatrix) -> Result<Self> {
        Self::new(energies, rho.diagonal_real())
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn bandwidth(&self) -> f64 {
        let (lo, hi) = self
            .energies
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &e| (a.min(e), b.max(e)));
        hi - lo
    }

    /// (Σ_l e^{−iE_l t}, Σ_j w_j e^{−iE_j t}) in one pass.
    pub(crate) fn sums(&self, t: f64) -> (C64, C64) {
        let mut a = C64::new(0.0, 0.0);
        let mut b = C64::new(0.0, 0.0);
        for (&e, &w) in self.energies.iter().zip(&self.weights) {
            let (s, c) = (e * t).sin_cos();
            a += C64::new(c, -s);
            b += C64::new(w * c, -w * s);
        }
        (a, b)
    }
}

/// diag_i Σ_k e^{−i(E_k−E_i)t}.
pub fn kernel_operator(energies: &[f64], t: f64) -> ComplexMatrix {
    let total: C64 = energies.iter().map(|e| C64::from_polar(1.0, -e * t)).sum();
    let d: Vec<C64> = energies
        .iter()
        .map(|e| C64::from_polar(1.0, e * t) * total)
        .collect();
    ComplexMatrix::from_diagonal(&d)
}

/// C(t) = Σ_jl w_j e^{−i(E_l−E_j)t}.
pub fn kernel_scalar(k: &CorrelationKernel, t: f64) -> C64 {
    let (a, b) = k.sums(t);
    a * b.conj()
}

/// S(t) = Σ_ik w_i w_k e^{−i(E_k−E_i)t} = |Σ_k w_k e^{−iE_k t}|².
pub fn s_function(k: &CorrelationKernel, t: f64) -> C64 {
    let (_, b) = k.sums(t);
    C64::new(b.norm_sqr(), 0.0)
}

/// diag_i Σ_k e^{−i(E_k−E_i)t} ρ_kk.
pub fn diagonal_map(rho_c: &DensityMatrix, energies: &[f64], t: f64) -> Result<ComplexMatrix> {
    spectator_diagonal_map(rho_c, energies, t)
}

/// B(t) = Σ_k e^{−iE_k t} ρ^{(kk)}, where ρ^{(kk)} is the m2×m2 block of
/// factor-1 level k.
pub(crate) fn block_sum(rho: &ComplexMatrix, energies_1: &[f64], t: f64) -> ComplexMatrix {
    let m1 = energies_1.len();
    let m2 = rho.rows() / m1;
    let mut b = ComplexMatrix::zeros(m2, m2);
    for (k, e) in energies_1.iter().enumerate() {
        let ph = C64::from_polar(1.0, -e * t);
        for j in 0..m2 {
            for n in 0..m2 {
                b[(j, n)] += ph * rho[(k * m2 + j, k * m2 + n)];
            }
        }
    }
    b
}

pub(crate) fn split_dims(rho_dim: usize, m1: usize) -> Result<usize> {
    if m1 == 0 || rho_dim % m1 != 0 {
        return Err(Error::Dimension(format!(
            "state of dim {rho_dim} does not factor over a {m1}-level factor 1"
        )));
    }
    Ok(rho_dim / m1)
}

/// 𝒞₁\[ρ\](t): entries \[(i,j),(i,n)\] = Σ_k e^{−i(E_k−E_i)t} ρ_{(k,j),(k,n)}.
pub fn spectator_diagonal_map(
    rho_c: &DensityMatrix,
    energies_1: &[f64],
    t: f64,
) -> Result<ComplexMatrix> {
    let m1 = energies_1.len();
    let m2 = split_dims(rho_c.dim(), m1)?;
    let b = block_sum(rho_c.matrix(), energies_1, t);
    let mut out = ComplexMatrix::zeros(m1 * m2, m1 * m2);
    for (i, e) in energies_1.iter().enumerate() {
        let ph = C64::from_polar(1.0, e * t);
        for j in 0..m2 {
            for n in 0..m2 {
                out[(i * m2 + j, i * m2 + n)] = ph * b[(j, n)];
            }
        }
    }
    Ok(out)
}

/// Σ_ik e^{−i(E_k−E_i)t} tr(ρ^{(kk)} ρ^{(ii)}) = ‖B(t)‖²_F; reduces to the
/// plain S_c for a one-dimensional spectator.
pub fn spectator_s_function(rho_c: &DensityMatrix, energies_1: &[f64], t: f64) -> Result<f64> {
    split_dims(rho_c.dim(), energies_1.len())?;
    let b = block_sum(rho_c.matrix(), energies_1, t);
    Ok(b.as_slice().iter().map(|z| z.norm_sqr()).sum())
}
