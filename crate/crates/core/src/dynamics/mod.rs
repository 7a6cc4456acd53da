//! Hamiltonian assembly, exact propagation and Monte Carlo ensembles.
//!
//! Composite indices are big-endian: plain `(c, e)`, spectator `(1, 2, e)`.
//! The plain model is handled internally as a spectator model whose
//! spectator factor has dimension 1.

mod ensemble;
mod propagator;

pub use ensemble::{
    CentralState, EnsembleConfig, EnvState, RealizationInputs, Resample, StateEnsemble,
    UNIT_TAU_H, ensemble_mean, generate_ensemble, generate_ensembles, mean_state,
    realization_environment, realization_inputs,
};
pub use propagator::{Propagator, echo_operator, evolve, reduced_state};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{C64, ComplexMatrix};
use crate::rmt::{CouplingMatrix, Spectrum};
use crate::state::SubsystemSplit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Plain,
    Spectator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    Schroedinger,
    #[default]
    Interaction,
}

/// H = H_c + H_e + λV in the H_0 eigenbasis.
#[derive(Clone, Debug)]
pub struct HamiltonianSpec {
    coupled: Vec<f64>,
    spectator: Vec<f64>,
    env: Spectrum,
    coupling: CouplingMatrix,
    lambda: f64,
    topology: Topology,
}

impl HamiltonianSpec {
    pub fn plain(
        central: Vec<f64>,
        env: Spectrum,
        coupling: CouplingMatrix,
        lambda: f64,
    ) -> Result<Self> {
        Self::build(central, vec![0.0], env, coupling, lambda, Topology::Plain)
    }

    /// `h1` couples to the environment, `h2` is the spectator.
    pub fn spectator(
        h1: Vec<f64>,
        h2: Vec<f64>,
        env: Spectrum,
        coupling: CouplingMatrix,
        lambda: f64,
    ) -> Result<Self> {
        Self::build(h1, h2, env, coupling, lambda, Topology::Spectator)
    }

    fn build(
        coupled: Vec<f64>,
        spectator: Vec<f64>,
        env: Spectrum,
        coupling: CouplingMatrix,
        lambda: f64,
        topology: Topology,
    ) -> Result<Self> {
        let label = match topology {
            Topology::Plain => "central",
            Topology::Spectator => "coupled factor 1",
        };
        if coupled.is_empty() {
            return Err(Error::Dimension(format!("{label} spectrum is empty")));
        }
        if spectator.is_empty() {
            return Err(Error::Dimension("spectator factor 2 spectrum is empty".into()));
        }
        if coupled.iter().chain(&spectator).any(|e| !e.is_finite()) {
            return Err(Error::Validation("central energies must be finite".into()));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Validation(format!("coupling strength {lambda} must be ≥ 0")));
        }
        let want = coupled.len() * env.len();
        if coupling.dim() != want {
            return Err(Error::Dimension(format!(
                "coupling has dim {} but {label} ({}) × environment ({}) = {want}",
                coupling.dim(),
                coupled.len(),
                env.len()
            )));
        }
        let spec = Self {
            coupled,
            spectator,
            env,
            coupling,
            lambda,
            topology,
        };
        SubsystemSplit::new(spec.split_dims())?;
        Ok(spec)
    }

    fn split_dims(&self) -> Vec<usize> {
        match self.topology {
            Topology::Plain => vec![self.coupled.len(), self.env.len()],
            Topology::Spectator => vec![self.coupled.len(), self.spectator.len(), self.env.len()],
        }
    }

    pub fn split(&self) -> SubsystemSplit {
        SubsystemSplit::new(self.split_dims()).expect("checked at construction")
    }

    /// Indices of the central factors within [`Self::split`].
    pub fn central_factors(&self) -> Vec<usize> {
        match self.topology {
            Topology::Plain => vec![0],
            Topology::Spectator => vec![0, 1],
        }
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        let mut s = self.clone();
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Validation(format!("coupling strength {lambda} must be ≥ 0")));
        }
        s.lambda = lambda;
        Ok(s)
    }

    /// Spectrum of the coupled factor (H_c plain, H_1 spectator).
    pub fn coupled_spectrum(&self) -> &[f64] {
        &self.coupled
    }

    pub fn spectator_spectrum(&self) -> &[f64] {
        &self.spectator
    }

    pub fn env_spectrum(&self) -> &Spectrum {
        &self.env
    }

    pub fn coupling(&self) -> &CouplingMatrix {
        &self.coupling
    }

    pub fn coupled_dim(&self) -> usize {
        self.coupled.len()
    }

    pub fn spectator_dim(&self) -> usize {
        self.spectator.len()
    }

    pub fn env_dim(&self) -> usize {
        self.env.len()
    }

    pub fn central_dim(&self) -> usize {
        self.coupled.len() * self.spectator.len()
    }

    pub fn total_dim(&self) -> usize {
        self.central_dim() * self.env_dim()
    }

    /// Diagonal of H_c over the composite central index.
    pub fn central_energies(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.central_dim());
        for e1 in &self.coupled {
            for e2 in &self.spectator {
                out.push(e1 + e2);
            }
        }
        out
    }

    /// Diagonal of H_0 over the full composite index.
    pub fn h0_diagonal(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.total_dim());
        for ec in self.central_energies() {
            for ee in self.env.energies() {
                out.push(ec + ee);
            }
        }
        out
    }

    /// diag(e^{−i E_c t}), the free central evolution u_c(t).
    pub fn central_phases(&self, t: f64) -> Vec<C64> {
        self.central_energies()
            .iter()
            .map(|e| C64::from_polar(1.0, -e * t))
            .collect()
    }
}

/// H_λ = H_0 + λ·V embedded per topology (V ⊗ 1_2 on factors (1, e)).
pub fn assemble_hamiltonian(spec: &HamiltonianSpec) -> Result<ComplexMatrix> {
    let (m1, m2, n) = (spec.coupled_dim(), spec.spectator_dim(), spec.env_dim());
    let dim = spec.total_dim();
    let v = spec.coupling().matrix();
    let lam = spec.lambda();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for i in 0..m1 {
        for s in 0..m2 {
            for j in 0..n {
                let row = (i * m2 + s) * n + j;
                for ip in 0..m1 {
                    for jp in 0..n {
                        let col = (ip * m2 + s) * n + jp;
                        h[(row, col)] = v[(i * n + j, ip * n + jp)] * lam;
                    }
                }
            }
        }
    }
    for (k, e) in spec.h0_diagonal().iter().enumerate() {
        h[(k, k)] += e;
    }
    Ok(h)
}
