use std::f64::consts::PI;

use crate::dynamics::{HamiltonianSpec, Picture};
use crate::error::{Error, Invariant, Result};
use crate::matrix::{C64, ComplexMatrix};
use crate::rmt::{CouplingEnsemble, mean_spacing};
use crate::state::{DensityMatrix, PIPELINE_TOL, validate_density};

use super::kernel::{CorrelationKernel, block_sum, split_dims};

const PURE_TOL: f64 = 1e-10;

/// Environment correlation function C_e(s), and S_e(s) where defined.
#[derive(Clone, Debug)]
pub enum EnvironmentKernel {
    /// Built from a concrete spectrum and the diagonal of ρ_e.
    Spectral { kernel: CorrelationKernel, pure: bool },
    /// τ_H·g(s) with g a unit-area Gaussian of the given width: the
    /// golden-rule replacement of C_e by τ_H·δ(s).
    Delta { tau_h: f64, width: f64 },
}

impl EnvironmentKernel {
    pub fn spectral(energies: Vec<f64>, rho_e: &DensityMatrix) -> Result<Self> {
        Ok(EnvironmentKernel::Spectral {
            kernel: CorrelationKernel::from_state(energies, rho_e)?,
            pure: rho_e.is_pure(PURE_TOL),
        })
    }

    pub fn delta(tau_h: f64, width: f64) -> Result<Self> {
        if !(tau_h > 0.0 && width > 0.0) {
            return Err(Error::Validation("delta kernel needs τ_H > 0 and width > 0".into()));
        }
        Ok(EnvironmentKernel::Delta { tau_h, width })
    }

    pub fn tau_h(&self) -> f64 {
        match self {
            EnvironmentKernel::Spectral { kernel, .. } => {
                let mut e = kernel.energies().to_vec();
                e.sort_by(f64::total_cmp);
                if e.len() < 2 {
                    return f64::INFINITY;
                }
                2.0 * PI / mean_spacing(&e)
            }
            EnvironmentKernel::Delta { tau_h, .. } => *tau_h,
        }
    }

    /// C_e(s) and S_e(s).
    fn eval(&self, s: f64) -> (C64, Option<f64>) {
        match self {
            EnvironmentKernel::Spectral { kernel, .. } => {
                let (a, b) = kernel.sums(s);
                (a * b.conj(), Some(b.norm_sqr()))
            }
            EnvironmentKernel::Delta { tau_h, width } => {
                let g = (-(s * s) / (2.0 * width * width)).exp() / ((2.0 * PI).sqrt() * width);
                (C64::new(tau_h * g, 0.0), None)
            }
        }
    }
}

/// Trapezoid step for the difference-variable integrals.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QuadratureSpec {
    step: Option<f64>,
}

impl QuadratureSpec {
    /// h = min(τ_H/200, 0.1/ω_max), ω_max the largest frequency in the kernels.
    pub fn auto() -> Self {
        Self { step: None }
    }

    pub fn fixed(h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Validation(format!("quadrature step {h} must be > 0")));
        }
        Ok(Self { step: Some(h) })
    }

    pub fn step(&self, model: &LinearResponseModel) -> f64 {
        if let Some(h) = self.step {
            return h;
        }
        let coupled_bw = bandwidth(&model.coupled);
        let (tau_h, omega, extra) = match &model.env {
            EnvironmentKernel::Spectral { kernel, .. } => {
                (model.env.tau_h(), kernel.bandwidth() + coupled_bw, f64::INFINITY)
            }
            EnvironmentKernel::Delta { tau_h, width } => (*tau_h, coupled_bw, width / 10.0),
        };
        let mut h = (tau_h / 200.0).min(extra);
        if omega > 0.0 {
            h = h.min(0.1 / omega);
        }
        h
    }

    pub fn halved(&self, model: &LinearResponseModel) -> Self {
        Self {
            step: Some(self.step(model) / 2.0),
        }
    }
}

fn bandwidth(e: &[f64]) -> f64 {
    let (lo, hi) = e
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if e.is_empty() { 0.0 } else { hi - lo }
}

/// Nodes s_k and weights h_k·(t − s_k) of ∫₀ᵗ (t−s) f(s) ds.
fn grid(t: f64, h: f64) -> Vec<(f64, f64)> {
    if t <= 0.0 {
        return Vec::new();
    }
    let n = (t / h).ceil().max(1.0) as usize;
    let hh = t / n as f64;
    (0..=n)
        .map(|k| {
            let s = k as f64 * hh;
            let end = if k == 0 || k == n { 0.5 } else { 1.0 };
            (s, end * hh * (t - s))
        })
        .collect()
}

/// Central spectra plus environment kernel: everything the linear-response
/// formulas need.
#[derive(Clone, Debug)]
pub struct LinearResponseModel {
    coupled: Vec<f64>,
    spectator: Vec<f64>,
    env: EnvironmentKernel,
    lambda: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PurityRoute {
    /// 1 − 2λ²∫∫\[C_e C_c − C_e* S_c\]; pure ρ_c only.
    Kernel,
    /// tr ρ² − 2λ²\[tr(⟨A_J⟩ρ) − tr(⟨A_I⟩ρ)\]; any ρ_c.
    Trace,
}

#[derive(Clone, Debug)]
pub struct LinearResponseReport {
    pub time: f64,
    pub avg_rho: DensityMatrix,
    pub purity_of_avg: f64,
    pub avg_purity: f64,
    pub difference: f64,
    /// Largest relative change of 1−P(ρ̄), 1−⟨P⟩ and the difference when the
    /// step is halved.
    pub half_step_change: f64,
}

struct PurityIntegrals {
    /// ∫∫ [C_e C_c − C_e* S_c]
    j1: f64,
    /// ∫∫ S_e [C_c* − S_c]
    j2: Option<f64>,
}

impl LinearResponseModel {
    /// `coupled` is the spectrum of the factor that touches the environment,
    /// `spectator` that of the untouched factor (`[0.0]` for the plain model).
    pub fn new(
        coupled: Vec<f64>,
        spectator: Vec<f64>,
        env: EnvironmentKernel,
        lambda: f64,
    ) -> Result<Self> {
        if coupled.is_empty() || spectator.is_empty() {
            return Err(Error::Dimension("central spectra must be non-empty".into()));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Validation(format!("coupling strength {lambda} must be ≥ 0")));
        }
        Ok(Self {
            coupled,
            spectator,
            env,
            lambda,
        })
    }

    /// Uses the sampled environment spectrum and the diagonal of ρ_e.
    /// Only GUE couplings are supported.
    pub fn from_spec(spec: &HamiltonianSpec, rho_e: &DensityMatrix) -> Result<Self> {
        if spec.coupling().ensemble() != CouplingEnsemble::Gue {
            return Err(Error::Validation(
                "the linear-response formulas hold for GUE couplings only".into(),
            ));
        }
        if rho_e.dim() != spec.env_dim() {
            return Err(Error::Dimension(format!(
                "environment state of dim {} for {} levels",
                rho_e.dim(),
                spec.env_dim()
            )));
        }
        Self::new(
            spec.coupled_spectrum().to_vec(),
            spec.spectator_spectrum().to_vec(),
            EnvironmentKernel::spectral(spec.env_spectrum().energies().to_vec(), rho_e)?,
            spec.lambda(),
        )
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn environment(&self) -> &EnvironmentKernel {
        &self.env
    }

    pub fn central_dim(&self) -> usize {
        self.coupled.len() * self.spectator.len()
    }

    fn check(&self, rho: &DensityMatrix) -> Result<()> {
        let m2 = split_dims(rho.dim(), self.coupled.len())?;
        if m2 != self.spectator.len() {
            return Err(Error::Dimension(format!(
                "central state of dim {} for factors {}×{}",
                rho.dim(),
                self.coupled.len(),
                self.spectator.len()
            )));
        }
        Ok(())
    }

    /// C_1(s)_i = e^{iE_i s} Σ_k e^{−iE_k s}.
    fn coupled_kernel(&self, s: f64) -> Vec<C64> {
        let total: C64 = self.coupled.iter().map(|e| C64::from_polar(1.0, -e * s)).sum();
        self.coupled
            .iter()
            .map(|e| C64::from_polar(1.0, e * s) * total)
            .collect()
    }

    /// ⟨A_J⟩ = X ρ + ρ X† with X = ∫₀ᵗ (t−s) C_e(s) C_1(s) ⊗ 1_2 ds.
    pub fn avg_aj(&self, rho: &DensityMatrix, t: f64, quad: &QuadratureSpec) -> Result<ComplexMatrix> {
        self.check(rho)?;
        let m1 = self.coupled.len();
        let m2 = self.spectator.len();
        let mut x = vec![C64::new(0.0, 0.0); m1];
        for (s, w) in grid(t, quad.step(self)) {
            let (ce, _) = self.env.eval(s);
            for (xi, ci) in x.iter_mut().zip(self.coupled_kernel(s)) {
                *xi += ce * ci * w;
            }
        }
        let xd: Vec<C64> = (0..m1 * m2).map(|k| x[k / m2]).collect();
        let xr = rho.matrix().scale_rows(&xd);
        Ok(&xr + &xr.adjoint())
    }

    /// ⟨A_I⟩ = ∫₀ᵗ (t−s) \[C_e(−s) 𝒞₁\[ρ\](s) + C_e(s) 𝒞₁\[ρ\](−s)\] ds.
    pub fn avg_ai(&self, rho: &DensityMatrix, t: f64, quad: &QuadratureSpec) -> Result<ComplexMatrix> {
        self.check(rho)?;
        let m1 = self.coupled.len();
        let m2 = self.spectator.len();
        let mut out = ComplexMatrix::zeros(m1 * m2, m1 * m2);
        for (s, w) in grid(t, quad.step(self)) {
            let (ce, _) = self.env.eval(s);
            let bp = block_sum(rho.matrix(), &self.coupled, s);
            let bm = block_sum(rho.matrix(), &self.coupled, -s);
            for (i, e) in self.coupled.iter().enumerate() {
                let fp = ce.conj() * C64::from_polar(1.0, e * s) * w;
                let fm = ce * C64::from_polar(1.0, -e * s) * w;
                for j in 0..m2 {
                    for n in 0..m2 {
                        out[(i * m2 + j, i * m2 + n)] += fp * bp[(j, n)] + fm * bm[(j, n)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// ⟨ρ̃_c(t)⟩ ≈ ρ_c − λ²(⟨A_J⟩ − ⟨A_I⟩), optionally rotated to the
    /// Schroedinger picture.
    pub fn avg_density(
        &self,
        rho: &DensityMatrix,
        t: f64,
        quad: &QuadratureSpec,
        picture: Picture,
    ) -> Result<DensityMatrix> {
        let aj = self.avg_aj(rho, t, quad)?;
        let ai = self.avg_ai(rho, t, quad)?;
        let (tj, ti) = (aj.trace().re, ai.trace().re);
        if (tj - ti).abs() > 1e-9 * tj.abs().max(ti.abs()).max(1e-300) {
            return Err(Error::Numerical(format!(
                "trace mismatch tr⟨A_J⟩ = {tj}, tr⟨A_I⟩ = {ti}"
            )));
        }
        let l2 = self.lambda * self.lambda;
        let m = rho.matrix() - &(&aj - &ai).scale_real(l2);
        let avg = match validate_density(&m, PIPELINE_TOL) {
            Err(Error::InvalidDensity {
                invariant: Invariant::Positivity,
                amount,
            }) => return Err(Error::RegimeExceeded { deficit: amount }),
            other => other?,
        };
        Ok(match picture {
            Picture::Interaction => avg,
            Picture::Schroedinger => {
                let mut ph = Vec::with_capacity(self.central_dim());
                for e1 in &self.coupled {
                    for e2 in &self.spectator {
                        ph.push(C64::from_polar(1.0, -(e1 + e2) * t));
                    }
                }
                avg.conjugate_diagonal(&ph)
            }
        })
    }

    fn integrals(
        &self,
        rho: &DensityMatrix,
        t: f64,
        quad: &QuadratureSpec,
        with_env_purity: bool,
    ) -> Result<PurityIntegrals> {
        self.check(rho)?;
        let m2 = self.spectator.len();
        // Weights of C_c: diag(tr₂ ρ²).
        let r2 = rho.matrix().matmul(rho.matrix());
        let weights: Vec<f64> = (0..self.coupled.len())
            .map(|k| (0..m2).map(|s| r2[(k * m2 + s, k * m2 + s)].re).sum())
            .collect();
        let mut j1 = 0.0;
        let mut j2 = 0.0;
        for (s, w) in grid(t, quad.step(self)) {
            let (ce, se) = self.env.eval(s);
            let mut cc = C64::new(0.0, 0.0);
            let total: C64 = self.coupled.iter().map(|e| C64::from_polar(1.0, -e * s)).sum();
            for (e, wk) in self.coupled.iter().zip(&weights) {
                cc += C64::from_polar(*wk, e * s) * total;
            }
            let b = block_sum(rho.matrix(), &self.coupled, s);
            let sc: f64 = b.as_slice().iter().map(|z| z.norm_sqr()).sum();
            // g(−s) = conj g(s), so g(s) + g(−s) = 2 Re g(s).
            j1 += 2.0 * w * (ce * cc - ce.conj() * sc).re;
            if with_env_purity {
                let se = se.ok_or_else(|| {
                    Error::Validation("S_e is undefined for a delta kernel".into())
                })?;
                j2 += 2.0 * w * se * (cc.conj().re - sc);
            }
        }
        Ok(PurityIntegrals {
            j1,
            j2: with_env_purity.then_some(j2),
        })
    }

    fn require_pure_central(&self, rho: &DensityMatrix) -> Result<()> {
        if !rho.is_pure(PURE_TOL) {
            return Err(Error::Validation(format!(
                "central state is mixed (purity {:.12}); the kernel shortcut needs a pure state, use the trace route",
                rho.purity()
            )));
        }
        Ok(())
    }

    fn require_pure_env(&self) -> Result<()> {
        match &self.env {
            EnvironmentKernel::Spectral { pure: true, .. } => Ok(()),
            EnvironmentKernel::Spectral { pure: false, .. } => Err(Error::Validation(
                "average purity needs a pure environment state".into(),
            )),
            EnvironmentKernel::Delta { .. } => Err(Error::Validation(
                "average purity needs a spectral environment kernel".into(),
            )),
        }
    }

    /// Purity of the linear-response average state.
    pub fn purity_of_avg(
        &self,
        rho: &DensityMatrix,
        t: f64,
        quad: &QuadratureSpec,
        route: PurityRoute,
    ) -> Result<f64> {
        let l2 = self.lambda * self.lambda;
        match route {
            PurityRoute::Kernel => {
                self.require_pure_central(rho)?;
                Ok(1.0 - 2.0 * l2 * self.integrals(rho, t, quad, false)?.j1)
            }
            PurityRoute::Trace => {
                let aj = self.avg_aj(rho, t, quad)?;
                let ai = self.avg_ai(rho, t, quad)?;
                let r = rho.matrix();
                Ok(rho.purity()
                    - 2.0 * l2 * (aj.trace_product(r).re - ai.trace_product(r).re))
            }
        }
    }

    /// Ensemble-averaged purity; needs pure ρ_c and ρ_e.
    pub fn avg_purity(&self, rho: &DensityMatrix, t: f64, quad: &QuadratureSpec) -> Result<f64> {
        self.require_pure_central(rho)?;
        self.require_pure_env()?;
        let p = self.integrals(rho, t, quad, true)?;
        let l2 = self.lambda * self.lambda;
        Ok(1.0 - 2.0 * l2 * (p.j1 - p.j2.expect("requested")))
    }

    /// ⟨P⟩ − P(⟨ρ⟩) = 2λ² ∫∫ S_e(s) \[C_c(−s) − S_c(s)\].
    pub fn purity_difference(&self, rho: &DensityMatrix, t: f64, quad: &QuadratureSpec) -> Result<f64> {
        self.require_pure_central(rho)?;
        self.require_pure_env()?;
        let p = self.integrals(rho, t, quad, true)?;
        Ok(2.0 * self.lambda * self.lambda * p.j2.expect("requested"))
    }

    /// All scalars at the finer of two steps, with the half-step change.
    pub fn report(&self, rho: &DensityMatrix, t: f64, quad: &QuadratureSpec) -> Result<LinearResponseReport> {
        self.require_pure_central(rho)?;
        self.require_pure_env()?;
        let l2 = self.lambda * self.lambda;
        let fine = quad.halved(self);
        let coarse = self.integrals(rho, t, quad, true)?;
        let finer = self.integrals(rho, t, &fine, true)?;
        let terms = |p: &PurityIntegrals| {
            let j2 = p.j2.expect("requested");
            [2.0 * l2 * p.j1, 2.0 * l2 * (p.j1 - j2), 2.0 * l2 * j2]
        };
        let (a, b) = (terms(&coarse), terms(&finer));
        let half_step_change = a
            .iter()
            .zip(&b)
            .map(|(x, y)| if *y == 0.0 { (x - y).abs() } else { ((x - y) / y).abs() })
            .fold(0.0, f64::max);
        Ok(LinearResponseReport {
            time: t,
            avg_rho: self.avg_density(rho, t, &fine, Picture::Interaction)?,
            purity_of_avg: 1.0 - b[0],
            avg_purity: 1.0 - b[1],
            difference: b[2],
            half_step_change,
        })
    }
}

pub fn avg_aj(
    spec: &HamiltonianSpec,
    rho_c: &DensityMatrix,
    rho_e: &DensityMatrix,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<ComplexMatrix> {
    LinearResponseModel::from_spec(spec, rho_e)?.avg_aj(rho_c, t, quad)
}

pub fn avg_ai(
    spec: &HamiltonianSpec,
    rho_c: &DensityMatrix,
    rho_e: &DensityMatrix,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<ComplexMatrix> {
    LinearResponseModel::from_spec(spec, rho_e)?.avg_ai(rho_c, t, quad)
}

pub fn avg_density_lr(
    spec: &HamiltonianSpec,
    rho_c: &DensityMatrix,
    rho_e: &DensityMatrix,
    t: f64,
    quad: &QuadratureSpec,
    picture: Picture,
) -> Result<DensityMatrix> {
    LinearResponseModel::from_spec(spec, rho_e)?.avg_density(rho_c, t, quad, picture)
}

pub fn purity_of_avg_lr(
    spec: &HamiltonianSpec,
    rho_c: &DensityMatrix,
    rho_e: &DensityMatrix,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    LinearResponseModel::from_spec(spec, rho_e)?.purity_of_avg(rho_c, t, quad, PurityRoute::Kernel)
}

pub fn avg_purity_lr(
    spec: &HamiltonianSpec,
    rho_c: &DensityMatrix,
    rho_e: &DensityMatrix,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    LinearResponseModel::from_spec(spec, rho_e)?.avg_purity(rho_c, t, quad)
}

pub fn purity_difference_lr(
    spec: &HamiltonianSpec,
    rho_c: &DensityMatrix,
    rho_e: &DensityMatrix,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    LinearResponseModel::from_spec(spec, rho_e)?.purity_difference(rho_c, t, quad)
}
