use crate::error::{Error, Result};
use crate::matrix::{C64, ComplexMatrix, HermitianEigen, hermitian_eigensystem};
use crate::state::{DensityMatrix, PureState, partial_trace_matrix};

use super::{HamiltonianSpec, Picture};

/// Eigendecomposition of the coupled block H_{1e} = H_1 + H_e + λV.
///
/// The spectator factor only contributes phases, so the full propagator is
/// `U(t) = e^{−iH_2 t} ⊗ U_{1e}(t)` up to index ordering.
#[derive(Clone, Debug)]
pub struct Propagator {
    eigen: HermitianEigen,
    m1: usize,
    m2: usize,
    n: usize,
    coupled: Vec<f64>,
    spectator: Vec<f64>,
    block_h0: Vec<f64>,
}

impl Propagator {
    pub fn new(spec: &HamiltonianSpec) -> Result<Self> {
        let (m1, m2, n) = (spec.coupled_dim(), spec.spectator_dim(), spec.env_dim());
        let lam = spec.lambda();
        let mut block_h0 = Vec::with_capacity(m1 * n);
        for e1 in spec.coupled_spectrum() {
            for ee in spec.env_spectrum().energies() {
                block_h0.push(e1 + ee);
            }
        }
        let mut h = spec.coupling().matrix().scale_real(lam);
        for (k, e) in block_h0.iter().enumerate() {
            h[(k, k)] += e;
        }
        let eigen = hermitian_eigensystem(&h)?;
        Ok(Self {
            eigen,
            m1,
            m2,
            n,
            coupled: spec.coupled_spectrum().to_vec(),
            spectator: spec.spectator_spectrum().to_vec(),
            block_h0,
        })
    }

    pub fn dim(&self) -> usize {
        self.m1 * self.m2 * self.n
    }

    pub fn block_eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    /// All eigenvalues of H_λ, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .spectator
            .iter()
            .flat_map(|e2| self.eigen.values.iter().map(move |e| e + e2))
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    fn block_unitary(&self, t: f64) -> ComplexMatrix {
        self.eigen.reconstruct_with(|e| C64::from_polar(1.0, -e * t))
    }

    fn embed_block(&self, f: impl Fn(usize) -> C64, block: &ComplexMatrix) -> ComplexMatrix {
        let (m1, m2, n) = (self.m1, self.m2, self.n);
        let mut out = ComplexMatrix::zeros(self.dim(), self.dim());
        for s in 0..m2 {
            let ph = f(s);
            for i in 0..m1 {
                for j in 0..n {
                    let row = (i * m2 + s) * n + j;
                    for ip in 0..m1 {
                        for jp in 0..n {
                            out[(row, (ip * m2 + s) * n + jp)] = ph * block[(i * n + j, ip * n + jp)];
                        }
                    }
                }
            }
        }
        out
    }

    /// H_λ rebuilt from the eigendecomposition.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let block = self.eigen.reconstruct();
        let mut h = self.embed_block(|_| C64::new(1.0, 0.0), &block);
        let (m1, m2, n) = (self.m1, self.m2, self.n);
        for i in 0..m1 {
            for s in 0..m2 {
                for j in 0..n {
                    let k = (i * m2 + s) * n + j;
                    h[(k, k)] += self.spectator[s];
                }
            }
        }
        h
    }

    /// U(t) = e^{−iH_λ t}.
    pub fn unitary(&self, t: f64) -> ComplexMatrix {
        let block = self.block_unitary(t);
        self.embed_block(|s| C64::from_polar(1.0, -self.spectator[s] * t), &block)
    }

    /// M(t) = e^{iH_0 t} e^{−iH_λ t}.
    pub fn echo(&self, t: f64) -> ComplexMatrix {
        let mut block = self.block_unitary(t);
        let ph: Vec<C64> = self.block_h0.iter().map(|e| C64::from_polar(1.0, e * t)).collect();
        block = block.scale_rows(&ph);
        self.embed_block(|_| C64::new(1.0, 0.0), &block)
    }

    /// Reduced central states of the pure product ψ_c ⊗ ψ_e at each time.
    ///
    /// Only the (m1·N)×m2 coefficient matrix is propagated, so the cost per
    /// time is O((m1·N)²·m2).
    pub fn reduced_pure(
        &self,
        psi_c: &PureState,
        psi_e: &PureState,
        times: &[f64],
        picture: Picture,
    ) -> Result<Vec<DensityMatrix>> {
        let (m1, m2, n) = (self.m1, self.m2, self.n);
        if psi_c.dim() != m1 * m2 || psi_e.dim() != n {
            return Err(Error::Dimension(format!(
                "initial states of dims {}, {} do not match central {} and environment {n}",
                psi_c.dim(),
                psi_e.dim(),
                m1 * m2
            )));
        }
        let (c, e) = (psi_c.amplitudes(), psi_e.amplitudes());
        let psi0 = ComplexMatrix::from_fn(m1 * n, m2, |row, s| {
            c[(row / n) * m2 + s] * e[row % n]
        });
        let w = &self.eigen.vectors;
        let c0 = w.adjoint().matmul(&psi0);
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            let ph: Vec<C64> = self
                .eigen
                .values
                .iter()
                .map(|e| C64::from_polar(1.0, -e * t))
                .collect();
            let psi = w.matmul(&c0.scale_rows(&ph));
            let mut rho = ComplexMatrix::zeros(m1 * m2, m1 * m2);
            for i in 0..m1 {
                for ip in 0..m1 {
                    for s in 0..m2 {
                        for sp in 0..m2 {
                            let mut acc = C64::new(0.0, 0.0);
                            for j in 0..n {
                                acc += psi[(i * n + j, s)] * psi[(ip * n + j, sp)].conj();
                            }
                            rho[(i * m2 + s, ip * m2 + sp)] = acc;
                        }
                    }
                }
            }
            // ρ so far carries only the block evolution. Schroedinger adds the
            // spectator phases; the interaction picture removes factor 1's.
            let phases: Vec<C64> = (0..m1 * m2)
                .map(|k| match picture {
                    Picture::Schroedinger => C64::from_polar(1.0, -self.spectator[k % m2] * t),
                    Picture::Interaction => C64::from_polar(1.0, self.coupled[k / m2] * t),
                })
                .collect();
            let rho = DensityMatrix::from_trusted(rho.hermitian_part()).conjugate_diagonal(&phases);
            out.push(rho);
        }
        Ok(out)
    }
}

/// U ρ U†.
pub fn evolve(rho0: &DensityMatrix, prop: &Propagator, t: f64) -> Result<DensityMatrix> {
    if rho0.dim() != prop.dim() {
        return Err(Error::Dimension(format!(
            "state dim {} vs propagator dim {}",
            rho0.dim(),
            prop.dim()
        )));
    }
    Ok(rho0.conjugate(&prop.unitary(t)))
}

pub fn echo_operator(spec: &HamiltonianSpec, t: f64) -> Result<ComplexMatrix> {
    Ok(Propagator::new(spec)?.echo(t))
}

/// Reduced central state of ρ_c ⊗ ρ_e at time t.
///
/// The interaction picture is computed from the echo operator, the
/// Schroedinger picture from the full propagator.
pub fn reduced_state(
    spec: &HamiltonianSpec,
    rho_c0: &DensityMatrix,
    rho_e0: &DensityMatrix,
    t: f64,
    picture: Picture,
) -> Result<DensityMatrix> {
    if rho_c0.dim() != spec.central_dim() || rho_e0.dim() != spec.env_dim() {
        return Err(Error::Dimension(format!(
            "initial factors of dims {}, {} do not match central {} and environment {}",
            rho_c0.dim(),
            rho_e0.dim(),
            spec.central_dim(),
            spec.env_dim()
        )));
    }
    let prop = Propagator::new(spec)?;
    let rho0 = rho_c0.tensor(rho_e0)?;
    let u = match picture {
        Picture::Interaction => prop.echo(t),
        Picture::Schroedinger => prop.unitary(t),
    };
    let full = rho0.conjugate(&u);
    let red = partial_trace_matrix(full.matrix(), &spec.split(), &spec.central_factors())?;
    Ok(DensityMatrix::from_trusted(red.hermitian_part()))
}
