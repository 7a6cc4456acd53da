//! Golden-rule master equations and their closed-form solutions.
//!
//! Plain: dρ/dt = −Γ(ρ − I/m), Γ = m·τ_H·λ².
//! Spectator: dρ/dt = −Γ₁(ρ − ι(ρ)), ι(ρ) = m₁⁻¹·1₁ ⊗ tr₁ρ, Γ₁ = m₁·τ_H·λ².
//! Both live in the interaction picture.

use crate::error::{Error, Result};
use crate::matrix::{C64, ComplexMatrix, tensor_product};
use crate::state::{DensityMatrix, SubsystemSplit, partial_trace_matrix};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MasterParams {
    /// m (plain) or m₁ (spectator).
    pub m: usize,
    pub tau_h: f64,
    pub lambda: f64,
}

impl MasterParams {
    pub fn new(m: usize, tau_h: f64, lambda: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Dimension("master equation with m = 0".into()));
        }
        if !(tau_h > 0.0 && tau_h.is_finite()) || !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Validation(format!(
                "need τ_H > 0 and λ ≥ 0, got τ_H = {tau_h}, λ = {lambda}"
            )));
        }
        Ok(Self { m, tau_h, lambda })
    }

    pub fn rate(&self) -> f64 {
        self.m as f64 * self.tau_h * self.lambda * self.lambda
    }
}

/// Which equation to integrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MasterKind {
    Plain,
    Spectator { m2: usize },
}

fn fixed_point(rho: &ComplexMatrix, m: usize, kind: MasterKind) -> Result<ComplexMatrix> {
    match kind {
        MasterKind::Plain => {
            let tr = rho.trace();
            Ok(ComplexMatrix::identity(m).scale(tr / m as f64))
        }
        MasterKind::Spectator { m2 } => {
            let split = SubsystemSplit::new(vec![m, m2])?;
            let reduced = partial_trace_matrix(rho, &split, &[1])?;
            tensor_product(&ComplexMatrix::identity(m).scale_real(1.0 / m as f64), &reduced)
        }
    }
}

fn check_dim(rho: &DensityMatrix, p: &MasterParams, kind: MasterKind) -> Result<()> {
    let want = match kind {
        MasterKind::Plain => p.m,
        MasterKind::Spectator { m2 } => p.m * m2,
    };
    if rho.dim() != want {
        return Err(Error::Dimension(format!(
            "state of dim {} for a master equation on dim {want}",
            rho.dim()
        )));
    }
    Ok(())
}

fn relax(rho0: &DensityMatrix, p: &MasterParams, t: f64, kind: MasterKind) -> Result<DensityMatrix> {
    check_dim(rho0, p, kind)?;
    let fp = fixed_point(rho0.matrix(), p.m, kind)?;
    let decay = (-p.rate() * t).exp();
    let m = &(rho0.matrix() - &fp).scale_real(decay) + &fp;
    Ok(DensityMatrix::from_trusted(m.hermitian_part()))
}

/// e^{−Γt}(ρ₀ − I/m) + I/m.
pub fn solve_plain(rho0: &DensityMatrix, p: &MasterParams, t: f64) -> Result<DensityMatrix> {
    relax(rho0, p, t, MasterKind::Plain)
}

/// e^{−Γ₁t}(ρ₀ − ι(ρ₀)) + ι(ρ₀).
pub fn solve_spectator(
    rho0: &DensityMatrix,
    p: &MasterParams,
    m2: usize,
    t: f64,
) -> Result<DensityMatrix> {
    relax(rho0, p, t, MasterKind::Spectator { m2 })
}

/// u_c ρ u_c† with u_c = e^{−iH_c t} for a diagonal H_c.
pub fn to_schroedinger(rho: &DensityMatrix, central_energies: &[f64], t: f64) -> Result<DensityMatrix> {
    if central_energies.len() != rho.dim() {
        return Err(Error::Dimension("central energies do not match the state".into()));
    }
    let ph: Vec<C64> = central_energies
        .iter()
        .map(|e| C64::from_polar(1.0, -e * t))
        .collect();
    Ok(rho.conjugate_diagonal(&ph))
}

/// Classical RK4 on the master equation, as an oracle for the closed forms.
pub fn integrate_numeric(
    rho0: &DensityMatrix,
    p: &MasterParams,
    t: f64,
    dt: f64,
    kind: MasterKind,
) -> Result<DensityMatrix> {
    check_dim(rho0, p, kind)?;
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::Validation(format!("step {dt} must be > 0")));
    }
    if dt > t {
        return Err(Error::Validation(format!("step {dt} exceeds the horizon {t}")));
    }
    let steps = (t / dt).round().max(1.0) as usize;
    let h = t / steps as f64;
    let g = p.rate();
    let rhs = |r: &ComplexMatrix| -> Result<ComplexMatrix> {
        Ok((r - &fixed_point(r, p.m, kind)?).scale_real(-g))
    };
    let mut r = rho0.matrix().clone();
    for _ in 0..steps {
        let k1 = rhs(&r)?;
        let k2 = rhs(&(&r + &k1.scale_real(h / 2.0)))?;
        let k3 = rhs(&(&r + &k2.scale_real(h / 2.0)))?;
        let k4 = rhs(&(&r + &k3.scale_real(h)))?;
        let inc = &(&k1 + &k2.scale_real(2.0)) + &(&k3.scale_real(2.0) + &k4);
        r = &r + &inc.scale_real(h / 6.0);
    }
    Ok(DensityMatrix::from_trusted(r))
}

/// β(t) = e^{−2τ_Hλ²t} for the two-qubit spectator.
pub fn werner_beta(p: &MasterParams, t: f64) -> Result<f64> {
    if p.m != 2 {
        return Err(Error::Dimension(format!(
            "the Werner solution needs a coupled qubit, got m₁ = {}",
            p.m
        )));
    }
    Ok((-2.0 * p.tau_h * p.lambda * p.lambda * t).exp())
}
