//! Random coupling matrices, environment spectra and unfolding.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{C64, ComplexMatrix, hermitian_eigenvalues};

/// Root seed plus stream index. Realization `i` of an ensemble uses stream `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSeed {
    pub root_seed: u64,
    pub stream_index: u64,
}

impl RandomSeed {
    pub fn new(root_seed: u64, stream_index: u64) -> Self {
        Self {
            root_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Same stream under a root decorrelated by `domain`.
    pub fn with_domain(&self, domain: u64) -> Self {
        Self {
            root_seed: splitmix64(self.root_seed ^ splitmix64(domain)),
            stream_index: self.stream_index,
        }
    }

    pub fn with_stream(&self, stream_index: u64) -> Self {
        Self {
            root_seed: self.root_seed,
            stream_index,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Poisson,
    Goe,
    Gue,
    Explicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingEnsemble {
    Gue,
    Goe,
}

/// Ascending energies.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    energies: Vec<f64>,
    kind: SpectrumKind,
}

impl Spectrum {
    pub fn explicit(energies: Vec<f64>) -> Result<Self> {
        Self::with_kind(energies, SpectrumKind::Explicit)
    }

    fn with_kind(energies: Vec<f64>, kind: SpectrumKind) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::Dimension("empty spectrum".into()));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::Validation("spectrum contains non-finite values".into()));
        }
        if energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Validation("spectrum is not ascending".into()));
        }
        Ok(Self { energies, kind })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn bandwidth(&self) -> f64 {
        self.energies[self.len() - 1] - self.energies[0]
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::with_kind(self.energies.iter().map(|e| e * factor).collect(), self.kind)
    }
}

/// Hermitian random matrix tagged with its ensemble.
#[derive(Clone, Debug)]
pub struct CouplingMatrix {
    matrix: ComplexMatrix,
    ensemble: CouplingEnsemble,
}

impl CouplingMatrix {
    /// Wraps a user-provided Hermitian matrix.
    pub fn from_matrix(matrix: ComplexMatrix, ensemble: CouplingEnsemble) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension("coupling must be square".into()));
        }
        let r = matrix.hermiticity_residual();
        if r > 1e-12 * matrix.max_abs().max(1.0) {
            return Err(Error::Validation(format!("coupling not Hermitian ({r:.3e})")));
        }
        Ok(Self { matrix, ensemble })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn ensemble(&self) -> CouplingEnsemble {
        self.ensemble
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// GUE with ⟨|V_ij|²⟩ = 1 off the diagonal and ⟨V_ii²⟩ = 1.
pub fn sample_gue(n: usize, seed: RandomSeed) -> Result<CouplingMatrix> {
    if n == 0 {
        return Err(Error::Dimension("GUE of dimension 0".into()));
    }
    let mut rng = seed.rng();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(normal(&mut rng), 0.0);
        for j in i + 1..n {
            let z = C64::new(s * normal(&mut rng), s * normal(&mut rng));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    Ok(CouplingMatrix {
        matrix: m,
        ensemble: CouplingEnsemble::Gue,
    })
}

/// GOE with off-diagonal variance 1 and diagonal variance 2.
pub fn sample_goe(n: usize, seed: RandomSeed) -> Result<CouplingMatrix> {
    if n == 0 {
        return Err(Error::Dimension("GOE of dimension 0".into()));
    }
    let mut rng = seed.rng();
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(std::f64::consts::SQRT_2 * normal(&mut rng), 0.0);
        for j in i + 1..n {
            let x = C64::new(normal(&mut rng), 0.0);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    Ok(CouplingMatrix {
        matrix: m,
        ensemble: CouplingEnsemble::Goe,
    })
}

pub fn sample_coupling(
    ensemble: CouplingEnsemble,
    n: usize,
    seed: RandomSeed,
) -> Result<CouplingMatrix> {
    match ensemble {
        CouplingEnsemble::Gue => sample_gue(n, seed),
        CouplingEnsemble::Goe => sample_goe(n, seed),
    }
}

/// Samples `n` levels. Gaussian-ensemble spectra are unfolded to unit spacing;
/// Poisson levels are partial sums of unit-mean exponentials.
pub fn sample_spectrum(kind: SpectrumKind, n: usize, seed: RandomSeed) -> Result<Spectrum> {
    if n < 2 {
        return Err(Error::Dimension(format!("spectrum needs at least 2 levels, got {n}")));
    }
    match kind {
        SpectrumKind::Poisson => {
            let mut rng = seed.rng();
            let mut acc = 0.0;
            let e = (0..n)
                .map(|_| {
                    let x: f64 = rng.sample(Exp1);
                    acc += x;
                    acc
                })
                .collect();
            Spectrum::with_kind(e, SpectrumKind::Poisson)
        }
        SpectrumKind::Gue | SpectrumKind::Goe => {
            let ens = if kind == SpectrumKind::Gue {
                CouplingEnsemble::Gue
            } else {
                CouplingEnsemble::Goe
            };
            let raw = hermitian_eigenvalues(sample_coupling(ens, n, seed)?.matrix())?;
            let s = unfold_semicircle(&raw, 1.0)?;
            Spectrum::with_kind(s.energies, kind)
        }
        SpectrumKind::Explicit => Err(Error::Config(
            "explicit spectra are given, not sampled".into(),
        )),
    }
}

fn central_range(n: usize) -> (usize, usize) {
    let lo = (0.1 * n as f64).floor() as usize;
    let hi = ((0.9 * n as f64).ceil() as usize).saturating_sub(1).max(lo + 1).min(n - 1);
    let lo = lo.min(hi - 1);
    (lo, hi)
}

/// Mean nearest-neighbour spacing over the central 80% of the levels.
pub fn mean_spacing(energies: &[f64]) -> f64 {
    let (lo, hi) = central_range(energies.len());
    (energies[hi] - energies[lo]) / (hi - lo) as f64
}

fn check_raw(raw: &[f64]) -> Result<()> {
    if raw.len() < 2 {
        return Err(Error::Dimension("unfolding needs at least 2 levels".into()));
    }
    if raw.iter().any(|e| !e.is_finite()) || raw.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Validation("raw levels must be finite and ascending".into()));
    }
    Ok(())
}

/// Affine unfolding: shifts the lowest level to 0 and rescales so the central
/// 80% have mean spacing `target`.
pub fn unfold(raw: &[f64], target_mean_spacing: f64) -> Result<Spectrum> {
    check_raw(raw)?;
    let d = mean_spacing(raw);
    if d <= 0.0 {
        return Err(Error::Validation("degenerate levels cannot be unfolded".into()));
    }
    let f = target_mean_spacing / d;
    let e0 = raw[0];
    Spectrum::explicit(raw.iter().map(|e| (e - e0) * f).collect())
}

/// Unfolding through the integrated Wigner semicircle fitted to the sample
/// (center = mean, radius = 2·std), followed by the affine step.
pub fn unfold_semicircle(raw: &[f64], target_mean_spacing: f64) -> Result<Spectrum> {
    check_raw(raw)?;
    let n = raw.len() as f64;
    let mean = raw.iter().sum::<f64>() / n;
    let var = raw.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    let radius = 2.0 * var.sqrt();
    if radius <= 0.0 {
        return Err(Error::Validation("degenerate levels cannot be unfolded".into()));
    }
    let staircase: Vec<f64> = raw
        .iter()
        .map(|e| {
            let x = ((e - mean) / radius).clamp(-1.0, 1.0);
            n * (0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / PI)
        })
        .collect();
    unfold(&staircase, target_mean_spacing)
}

/// τ_H = 2π/d with d the central mean spacing.
pub fn heisenberg_time(s: &Spectrum) -> f64 {
    if s.len() < 2 {
        return f64::INFINITY;
    }
    2.0 * PI / mean_spacing(s.energies())
}
