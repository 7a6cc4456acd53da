//! Density matrices, pure states and partial traces.

use crate::error::{Error, Invariant, Result};
use crate::matrix::{C64, ComplexMatrix, MAX_DIM, tensor_product};

/// Tolerance used when the pipeline re-validates states it produced itself.
pub const PIPELINE_TOL: f64 = 1e-10;

/// Factor dimensions of a tensor-product space, first factor slowest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemSplit {
    dims: Vec<usize>,
}

impl SubsystemSplit {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Dimension(format!("invalid factor dimensions {dims:?}")));
        }
        let total = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d));
        match total {
            Some(t) if t <= MAX_DIM => Ok(Self { dims }),
            _ => Err(Error::Dimension(format!(
                "factors {dims:?} exceed the maximum dimension {MAX_DIM}"
            ))),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }
}

/// Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Wraps a matrix whose invariants hold by construction.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_trusted(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    /// Diagonal state with the given probabilities.
    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        validate_density(&ComplexMatrix::from_real_diagonal(p), 1e-12)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self::from_trusted(ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes()))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    /// Eigenvalues ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        crate::matrix::hermitian_eigenvalues(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }

    /// u · ρ · u† for a diagonal unitary u = diag(phases).
    pub fn conjugate_diagonal(&self, phases: &[C64]) -> Self {
        let m = &self.matrix;
        Self::from_trusted(ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| {
            phases[i] * m[(i, j)] * phases[j].conj()
        }))
    }

    /// u · ρ · u† for a general unitary u.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Self {
        let m = u.matmul(&self.matrix).matmul(&u.adjoint());
        Self::from_trusted(m.hermitian_part())
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self::from_trusted(tensor_product(&self.matrix, &other.matrix)?))
    }
}

/// Checks hermiticity, unit trace and positivity against `tol`, then stores the
/// Hermitian part with its trace renormalized to 1.
pub fn validate_density(m: &ComplexMatrix, tol: f64) -> Result<DensityMatrix> {
    if !m.is_square() {
        return Err(Error::InvalidDensity {
            invariant: Invariant::Square,
            amount: (m.rows() as f64 - m.cols() as f64).abs(),
        });
    }
    let herm = m.hermiticity_residual();
    if herm > tol {
        return Err(Error::InvalidDensity {
            invariant: Invariant::Hermiticity,
            amount: herm,
        });
    }
    let tr = m.trace();
    let trace_err = (tr - C64::new(1.0, 0.0)).norm();
    if trace_err > tol {
        return Err(Error::InvalidDensity {
            invariant: Invariant::Trace,
            amount: trace_err,
        });
    }
    let h = m.hermitian_part();
    let min_eig = crate::matrix::hermitian_eigenvalues(&h)?
        .first()
        .copied()
        .unwrap_or(0.0);
    if min_eig < -tol {
        return Err(Error::InvalidDensity {
            invariant: Invariant::Positivity,
            amount: -min_eig,
        });
    }
    Ok(DensityMatrix::from_trusted(h.scale_real(1.0 / tr.re)))
}

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Dimension("empty state vector".into()));
        }
        let n2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (n2 - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!("state norm² is {n2}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let n: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Validation("cannot normalize a zero vector".into()));
        }
        Self::new(amplitudes.into_iter().map(|z| z / n).collect())
    }

    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::Dimension(format!("basis index {k} out of range {dim}")));
        }
        let mut a = vec![C64::new(0.0, 0.0); dim];
        a[k] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: a })
    }

    /// (|00⟩ + |11⟩)/√2
    pub fn bell() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        Self {
            amplitudes: vec![C64::new(s, 0.0), z, z, C64::new(s, 0.0)],
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut a = Vec::with_capacity(self.dim() * other.dim());
        for x in &self.amplitudes {
            for y in &other.amplitudes {
                a.push(x * y);
            }
        }
        Self { amplitudes: a }
    }
}

fn check_keep(split: &SubsystemSplit, keep: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; split.dims().len()];
    for &k in keep {
        if k >= mask.len() {
            return Err(Error::Dimension(format!(
                "subsystem {k} does not exist in split {:?}",
                split.dims()
            )));
        }
        mask[k] = true;
    }
    Ok(mask)
}

/// Partial trace of an arbitrary square matrix, keeping the factors in `keep`
/// (in their original order).
pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    split: &SubsystemSplit,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    if !m.is_square() || m.rows() != split.total() {
        return Err(Error::Dimension(format!(
            "split {:?} does not match a {}x{} matrix",
            split.dims(),
            m.rows(),
            m.cols()
        )));
    }
    let mask = check_keep(split, keep)?;
    let dims = split.dims();
    let kept_dim: usize = dims.iter().zip(&mask).filter(|(_, k)| **k).map(|(d, _)| d).product();
    let traced_dim = split.total() / kept_dim;

    // For every composite index, its (kept, traced) sub-indices.
    let n = split.total();
    let mut kept_of = vec![0usize; n];
    let mut groups: Vec<Vec<usize>> = vec![Vec::with_capacity(kept_dim); traced_dim];
    for (idx, slot) in kept_of.iter_mut().enumerate() {
        let mut rem = idx;
        let (mut k, mut t) = (0usize, 0usize);
        let (mut kstride, mut tstride) = (1usize, 1usize);
        for (f, &d) in dims.iter().enumerate().rev() {
            let digit = rem % d;
            rem /= d;
            if mask[f] {
                k += digit * kstride;
                kstride *= d;
            } else {
                t += digit * tstride;
                tstride *= d;
            }
        }
        *slot = k;
        groups[t].push(idx);
    }

    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for g in &groups {
        for &a in g {
            for &b in g {
                out[(kept_of[a], kept_of[b])] += m[(a, b)];
            }
        }
    }
    Ok(out)
}

pub fn partial_trace(
    rho: &DensityMatrix,
    split: &SubsystemSplit,
    keep: &[usize],
) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_trusted(partial_trace_matrix(
        rho.matrix(),
        split,
        keep,
    )?))
}
