use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::{C64, ComplexMatrix};
use crate::parallel::{Workers, try_map_indexed};
use crate::rmt::{
    CouplingEnsemble, RandomSeed, Spectrum, SpectrumKind, sample_coupling, sample_spectrum,
};
use crate::state::{DensityMatrix, PIPELINE_TOL, PureState, validate_density};

use super::{HamiltonianSpec, Picture, Propagator, Topology};

/// τ_H of a spectrum unfolded to unit mean spacing.
pub const UNIT_TAU_H: f64 = 2.0 * PI;

const DOMAIN_COUPLING: u64 = 1;
const DOMAIN_SPECTRUM: u64 = 2;
const DOMAIN_ENV_STATE: u64 = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CentralState {
    /// (|00⟩ + |11⟩)/√2 on a 4-dimensional central space.
    Bell,
    Basis { index: usize },
    Explicit { amplitudes: Vec<[f64; 2]> },
}

impl CentralState {
    pub fn to_pure(&self, dim: usize) -> Result<PureState> {
        match self {
            CentralState::Bell if dim == 4 => Ok(PureState::bell()),
            CentralState::Bell => Err(Error::Config(format!(
                "Bell initial state needs a 4-dimensional central space, got {dim}"
            ))),
            CentralState::Basis { index } => PureState::basis(dim, *index),
            CentralState::Explicit { amplitudes } => {
                if amplitudes.len() != dim {
                    return Err(Error::Config(format!(
                        "{} amplitudes for a {dim}-dimensional central space",
                        amplitudes.len()
                    )));
                }
                PureState::normalized(amplitudes.iter().map(|[re, im]| C64::new(*re, *im)).collect())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvState {
    /// N^{-1/2} Σ_k e^{iφ_k}|k⟩ with uniform random phases.
    #[default]
    RandomPhase,
    /// The H_0 basis state at the middle of the spectrum.
    CenterBasis,
}

/// Which inputs are drawn afresh for every realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resample {
    pub coupling: bool,
    pub spectrum: bool,
    pub env_state: bool,
}

impl Default for Resample {
    fn default() -> Self {
        Self {
            coupling: true,
            spectrum: true,
            env_state: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub topology: Topology,
    /// Spectrum of the coupled factor (H_c or H_1); its length is the dimension.
    pub coupled_spectrum: Vec<f64>,
    /// Spectrum of the spectator H_2; must be `[0.0]`-like of length 1 for plain.
    pub spectator_spectrum: Vec<f64>,
    pub env_dim: usize,
    pub env_kind: SpectrumKind,
    pub coupling: CouplingEnsemble,
    pub lambda: f64,
    pub initial_state: CentralState,
    pub env_state: EnvState,
    pub realizations: usize,
    pub resample: Resample,
    pub picture: Picture,
    pub root_seed: u64,
}

impl EnsembleConfig {
    /// Two-qubit spectator with H_1 = Δσ_z/2, H_2 = 0, Bell initial state.
    pub fn two_qubit_spectator(env_dim: usize, lambda: f64, delta: f64, realizations: usize, root_seed: u64) -> Self {
        Self {
            topology: Topology::Spectator,
            coupled_spectrum: vec![-delta / 2.0, delta / 2.0],
            spectator_spectrum: vec![0.0, 0.0],
            env_dim,
            env_kind: SpectrumKind::Gue,
            coupling: CouplingEnsemble::Gue,
            lambda,
            initial_state: CentralState::Bell,
            env_state: EnvState::RandomPhase,
            realizations,
            resample: Resample::default(),
            picture: Picture::Interaction,
            root_seed,
        }
    }

    pub fn central_dim(&self) -> usize {
        self.coupled_spectrum.len() * self.spectator_spectrum.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::Config("ensemble needs at least one realization".into()));
        }
        if self.coupled_spectrum.is_empty() || self.spectator_spectrum.is_empty() {
            return Err(Error::Config("central spectra must be non-empty".into()));
        }
        if self.topology == Topology::Plain && self.spectator_spectrum.len() != 1 {
            return Err(Error::Config("plain topology has no spectator factor".into()));
        }
        if self.env_dim < 2 {
            return Err(Error::Config("environment needs at least 2 levels".into()));
        }
        if self.env_kind == SpectrumKind::Explicit {
            return Err(Error::Config("environment spectrum must be sampled".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda = {} must be ≥ 0", self.lambda)));
        }
        self.initial_state.to_pure(self.central_dim())?;
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn seed(&self, realization: usize) -> RandomSeed {
        RandomSeed::new(self.root_seed, realization as u64)
    }
}

/// Everything that defines realization `i`.
#[derive(Clone, Debug)]
pub struct RealizationInputs {
    pub spec: HamiltonianSpec,
    pub central_state: PureState,
    pub env_state: PureState,
}

/// Environment spectrum and initial state of realization `i`.
pub fn realization_environment(cfg: &EnsembleConfig, i: usize) -> Result<(Spectrum, PureState)> {
    let root = RandomSeed::new(cfg.root_seed, 0);
    let stream = |on: bool| if on { i as u64 } else { 0 };
    let n = cfg.env_dim;
    let spectrum = sample_spectrum(
        cfg.env_kind,
        n,
        root.with_domain(DOMAIN_SPECTRUM).with_stream(stream(cfg.resample.spectrum)),
    )?;
    let env_state = match cfg.env_state {
        EnvState::CenterBasis => PureState::basis(n, n / 2)?,
        EnvState::RandomPhase => {
            let mut rng = root
                .with_domain(DOMAIN_ENV_STATE)
                .with_stream(stream(cfg.resample.env_state))
                .rng();
            let a = 1.0 / (n as f64).sqrt();
            PureState::normalized(
                (0..n)
                    .map(|_| C64::from_polar(a, 2.0 * PI * rng.random::<f64>()))
                    .collect(),
            )?
        }
    };
    Ok((spectrum, env_state))
}

pub fn realization_inputs(cfg: &EnsembleConfig, i: usize) -> Result<RealizationInputs> {
    let (spectrum, env_state) = realization_environment(cfg, i)?;
    let stream = if cfg.resample.coupling { i as u64 } else { 0 };
    let coupling = sample_coupling(
        cfg.coupling,
        cfg.coupled_spectrum.len() * cfg.env_dim,
        RandomSeed::new(cfg.root_seed, 0)
            .with_domain(DOMAIN_COUPLING)
            .with_stream(stream),
    )?;
    let spec = match cfg.topology {
        Topology::Plain => {
            HamiltonianSpec::plain(cfg.coupled_spectrum.clone(), spectrum, coupling, cfg.lambda)?
        }
        Topology::Spectator => HamiltonianSpec::spectator(
            cfg.coupled_spectrum.clone(),
            cfg.spectator_spectrum.clone(),
            spectrum,
            coupling,
            cfg.lambda,
        )?,
    };
    Ok(RealizationInputs {
        spec,
        central_state: cfg.initial_state.to_pure(cfg.central_dim())?,
        env_state,
    })
}

/// Reduced states ρ_c^{(i)}(t) of one time point.
#[derive(Clone, Debug)]
pub struct StateEnsemble {
    pub time: f64,
    pub members: Vec<DensityMatrix>,
    pub seeds: Vec<RandomSeed>,
    pub config_hash: String,
}

impl StateEnsemble {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn mean(&self) -> Result<DensityMatrix> {
        ensemble_mean(self)
    }
}

/// One ensemble per entry of `times`, sharing each realization's
/// diagonalization.
pub fn generate_ensembles(
    cfg: &EnsembleConfig,
    times: &[f64],
    workers: Workers,
) -> Result<Vec<StateEnsemble>> {
    cfg.validate()?;
    let per_realization = try_map_indexed(cfg.realizations, workers, |i| {
        let inp = realization_inputs(cfg, i)?;
        let prop = Propagator::new(&inp.spec)?;
        prop.reduced_pure(&inp.central_state, &inp.env_state, times, cfg.picture)?
            .into_iter()
            .map(|rho| validate_density(rho.matrix(), PIPELINE_TOL))
            .collect::<Result<Vec<_>>>()
    })?;
    let hash = cfg.hash();
    let seeds: Vec<RandomSeed> = (0..cfg.realizations).map(|i| cfg.seed(i)).collect();
    let mut out: Vec<StateEnsemble> = times
        .iter()
        .map(|&time| StateEnsemble {
            time,
            members: Vec::with_capacity(cfg.realizations),
            seeds: seeds.clone(),
            config_hash: hash.clone(),
        })
        .collect();
    for states in per_realization {
        for (e, rho) in out.iter_mut().zip(states) {
            e.members.push(rho);
        }
    }
    Ok(out)
}

pub fn generate_ensemble(cfg: &EnsembleConfig, t: f64, workers: Workers) -> Result<StateEnsemble> {
    Ok(generate_ensembles(cfg, &[t], workers)?.remove(0))
}

/// Entrywise mean of a non-empty slice of states, validated.
pub fn mean_state(states: &[DensityMatrix]) -> Result<DensityMatrix> {
    let first = states
        .first()
        .ok_or_else(|| Error::Validation("mean of an empty ensemble".into()))?;
    let d = first.dim();
    let mut acc = ComplexMatrix::zeros(d, d);
    for s in states {
        if s.dim() != d {
            return Err(Error::Dimension("ensemble members differ in dimension".into()));
        }
        for (a, b) in acc.as_mut_slice().iter_mut().zip(s.matrix().as_slice()) {
            *a += b;
        }
    }
    validate_density(&acc.scale_real(1.0 / states.len() as f64), PIPELINE_TOL)
}

pub fn ensemble_mean(e: &StateEnsemble) -> Result<DensityMatrix> {
    mean_state(&e.members)
}
