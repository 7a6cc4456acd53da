use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{CentralState, EnsembleConfig, EnvState, Picture, Resample, Topology};
use crate::error::{Error, Result};
use crate::rmt::{CouplingEnsemble, SpectrumKind};

/// How the central initial state is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialStateKind {
    Bell,
    Basis,
    Explicit,
}

/// Flat experiment configuration, read from TOML without tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: Topology,
    /// Dimension of the coupled factor (m for plain, m₁ for spectator).
    pub m1: usize,
    /// Spectator dimension m₂ (1 for plain).
    pub m2: usize,
    pub n_env: Vec<usize>,
    pub lambda: f64,
    pub env_spectrum: SpectrumKind,
    pub coupling: CouplingEnsemble,
    /// Level splittings Δ of the coupled factor, in mean level spacings.
    pub delta: Vec<f64>,
    pub initial_state: InitialStateKind,
    pub initial_basis_index: usize,
    /// (re, im) pairs, used when `initial_state = "explicit"`.
    pub initial_amplitudes: Vec<[f64; 2]>,
    pub env_state: EnvState,
    /// In units of τ_H.
    pub times: Vec<f64>,
    pub realizations: usize,
    /// Group sizes N_par of the Werner study.
    pub partition_sizes: Vec<usize>,
    pub resample_coupling: bool,
    pub resample_spectrum: bool,
    pub resample_env_state: bool,
    pub seed: u64,
    pub output_dir: String,
    pub bootstrap_groups: usize,
    /// Latest time (in τ_H) at which the convergence study evaluates the
    /// linear-response purity difference.
    pub lr_max_time: f64,
    /// Fixed quadrature step; automatic when absent.
    pub quadrature_step: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            topology: Topology::Spectator,
            m1: 2,
            m2: 2,
            n_env: vec![16, 32, 64, 128],
            lambda: 0.03,
            env_spectrum: SpectrumKind::Gue,
            coupling: CouplingEnsemble::Gue,
            delta: vec![0.0],
            initial_state: InitialStateKind::Bell,
            initial_basis_index: 0,
            initial_amplitudes: Vec::new(),
            env_state: EnvState::RandomPhase,
            times: vec![0.2, 0.5, 1.0, 2.0],
            realizations: 400,
            partition_sizes: vec![4, 8, 16, 32, 64, 128],
            resample_coupling: true,
            resample_spectrum: true,
            resample_env_state: true,
            seed: 1,
            output_dir: "out".into(),
            bootstrap_groups: 10,
            lr_max_time: 0.2,
            quadrature_step: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the TOML encoding with `output_dir` blanked, so the
    /// output location does not change the data files.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir.clear();
        hex::encode(Sha256::digest(c.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.m1 == 0 || self.m2 == 0 {
            return err("m1 and m2 must be positive".into());
        }
        if self.topology == Topology::Plain && self.m2 != 1 {
            return err("plain topology requires m2 = 1".into());
        }
        if self.n_env.is_empty() || self.n_env.iter().any(|&n| n < 2) {
            return err("n_env must list sizes ≥ 2".into());
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return err(format!("lambda = {} must be ≥ 0", self.lambda));
        }
        if self.env_spectrum == SpectrumKind::Explicit {
            return err("env_spectrum must be poisson, goe or gue".into());
        }
        if self.delta.is_empty() || self.delta.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return err("delta must list values ≥ 0".into());
        }
        if self.times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return err("times must be ≥ 0".into());
        }
        if self.realizations == 0 {
            return err("realizations must be ≥ 1".into());
        }
        if self.bootstrap_groups < 2 {
            return err("bootstrap_groups must be ≥ 2".into());
        }
        if let Some(h) = self.quadrature_step {
            if !(h > 0.0 && h.is_finite()) {
                return err(format!("quadrature_step = {h} must be > 0"));
            }
        }
        self.central_state()?
            .to_pure(self.m1 * self.m2)
            .map_err(|e| Error::Config(format!("initial state: {e}")))?;
        Ok(())
    }

    /// Requires the two-qubit spectator with a Bell initial state.
    pub fn require_bell_spectator(&self, study: &str) -> Result<()> {
        if self.topology != Topology::Spectator
            || self.m1 != 2
            || self.m2 != 2
            || self.initial_state != InitialStateKind::Bell
        {
            return Err(Error::Config(format!(
                "the {study} study needs topology = \"spectator\", m1 = m2 = 2 and initial_state = \"bell\""
            )));
        }
        Ok(())
    }

    pub fn central_state(&self) -> Result<CentralState> {
        Ok(match self.initial_state {
            InitialStateKind::Bell => CentralState::Bell,
            InitialStateKind::Basis => CentralState::Basis {
                index: self.initial_basis_index,
            },
            InitialStateKind::Explicit => CentralState::Explicit {
                amplitudes: self.initial_amplitudes.clone(),
            },
        })
    }

    /// Levels of the coupled factor for splitting Δ: (−Δ/2, Δ/2) for a qubit,
    /// equally spaced and centered otherwise.
    pub fn coupled_spectrum(&self, delta: f64) -> Vec<f64> {
        let c = (self.m1 as f64 - 1.0) / 2.0;
        (0..self.m1).map(|k| (k as f64 - c) * delta).collect()
    }

    pub fn ensemble_config(&self, n_env: usize, delta: f64) -> Result<EnsembleConfig> {
        let e = EnsembleConfig {
            topology: self.topology,
            coupled_spectrum: self.coupled_spectrum(delta),
            spectator_spectrum: vec![0.0; self.m2],
            env_dim: n_env,
            env_kind: self.env_spectrum,
            coupling: self.coupling,
            lambda: self.lambda,
            initial_state: self.central_state()?,
            env_state: self.env_state,
            realizations: self.realizations,
            resample: Resample {
                coupling: self.resample_coupling,
                spectrum: self.resample_spectrum,
                env_state: self.resample_env_state,
            },
            picture: Picture::Interaction,
            root_seed: self.seed,
        };
        e.validate()?;
        Ok(e)
    }
}
