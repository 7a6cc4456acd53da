use crate::dynamics::{
    EnsembleConfig, StateEnsemble, UNIT_TAU_H, generate_ensembles, mean_state,
    realization_environment,
};
use crate::error::{Error, Result};
use crate::linear_response::{EnvironmentKernel, LinearResponseModel, QuadratureSpec};
use crate::master_equation::{MasterParams, solve_plain, solve_spectator, werner_beta};
use crate::matrix::ComplexMatrix;
use crate::observables::{
    concurrence, von_neumann_entropy, werner_beta_estimate, werner_diagnostics,
};
use crate::parallel::{Workers, try_map_indexed};
use crate::state::DensityMatrix;
use crate::dynamics::Topology;
use crate::rmt::CouplingEnsemble;

use super::ExperimentConfig;
use super::export::{Cell, Column, Provenance, StudyResult, Table};
use super::stats::{batch_error, log_log_fit, mean, standard_error};

fn quad(cfg: &ExperimentConfig) -> Result<QuadratureSpec> {
    match cfg.quadrature_step {
        Some(h) => QuadratureSpec::fixed(h),
        None => Ok(QuadratureSpec::auto()),
    }
}

fn abs_times(cfg: &ExperimentConfig) -> Vec<f64> {
    cfg.times.iter().map(|x| x * UNIT_TAU_H).collect()
}

/// Per-member purity, entropy and (two qubits) concurrence.
struct MemberObservables {
    purity: Vec<f64>,
    entropy: Vec<f64>,
    concurrence: Vec<f64>,
}

fn member_observables(e: &StateEnsemble, with_concurrence: bool) -> Result<MemberObservables> {
    let mut out = MemberObservables {
        purity: Vec::with_capacity(e.len()),
        entropy: Vec::with_capacity(e.len()),
        concurrence: Vec::with_capacity(e.len()),
    };
    for rho in &e.members {
        out.purity.push(rho.purity());
        out.entropy.push(von_neumann_entropy(rho)?);
        if with_concurrence {
            out.concurrence.push(concurrence(rho)?);
        }
    }
    Ok(out)
}

/// f(mean of members\[range\]) − mean of f over the range.
fn gap(
    members: &[DensityMatrix],
    values: &[f64],
    range: std::ops::Range<usize>,
    f: &dyn Fn(&DensityMatrix) -> Result<f64>,
) -> Result<f64> {
    let avg = mean_state(&members[range.clone()])?;
    Ok(f(&avg)? - mean(&values[range]))
}

/// Signed gap with its batch-means standard error.
fn gap_with_error(
    members: &[DensityMatrix],
    values: &[f64],
    groups: usize,
    f: &dyn Fn(&DensityMatrix) -> Result<f64>,
    warnings: &mut Vec<String>,
) -> Result<(f64, f64)> {
    let full = gap(members, values, 0..members.len(), f)?;
    let mut failure = None;
    let b = batch_error(members.len(), groups, |r| match gap(members, values, r, f) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    if let Some(w) = b.warning {
        if !warnings.contains(&w) {
            warnings.push(w);
        }
    }
    Ok((full, b.se))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergencePoint {
    pub n_env: usize,
    pub t_tau_h: f64,
    pub mean_purity: f64,
    pub purity_of_mean: f64,
    /// S(ρ̄) − ⟨S⟩, non-negative by concavity.
    pub entropy_gap: f64,
    pub entropy_gap_se: f64,
    /// C(ρ̄) − ⟨C⟩.
    pub concurrence_gap: f64,
    pub concurrence_gap_se: f64,
    /// ⟨P⟩ − P(ρ̄), non-negative by convexity.
    pub purity_gap: f64,
    pub purity_gap_se: f64,
    /// Linear-response prediction of the purity gap, averaged over the
    /// realizations' spectra (NaN past `lr_max_time`).
    pub lr_purity_gap: f64,
    pub lr_purity_gap_se: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    pub quantity: String,
    pub t_tau_h: f64,
    pub slope: f64,
    pub slope_se: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergenceStudy {
    pub points: Vec<ConvergencePoint>,
    pub fits: Vec<SlopeFit>,
    pub warnings: Vec<String>,
}

/// Linear-response purity gap per realization, averaged.
fn lr_gap(ens: &EnsembleConfig, cfg: &ExperimentConfig, t: f64, workers: Workers) -> Result<(f64, f64)> {
    let resampled = ens.resample.spectrum || ens.resample.env_state;
    let count = if resampled { ens.realizations } else { 1 };
    let q = quad(cfg)?;
    let rho_c = ens.initial_state.to_pure(ens.central_dim())?.density();
    let vals = try_map_indexed(count, workers, |i| {
        let (spectrum, psi_e) = realization_environment(ens, i)?;
        let model = LinearResponseModel::new(
            ens.coupled_spectrum.clone(),
            ens.spectator_spectrum.clone(),
            EnvironmentKernel::spectral(spectrum.energies().to_vec(), &psi_e.density())?,
            ens.lambda,
        )?;
        model.purity_difference(&rho_c, t, &q)
    })?;
    Ok((mean(&vals), if count > 1 { standard_error(&vals) } else { 0.0 }))
}

/// Gaps between observables of the mean state and mean observables, as a
/// function of the environment size.
pub fn run_convergence_study(cfg: &ExperimentConfig, workers: Workers) -> Result<ConvergenceStudy> {
    cfg.validate()?;
    cfg.require_bell_spectator("convergence")?;
    let delta = cfg.delta[0];
    let times = abs_times(cfg);
    let mut warnings = Vec::new();
    let mut points = Vec::new();
    for &n in &cfg.n_env {
        let ens_cfg = cfg.ensemble_config(n, delta)?;
        let ensembles = generate_ensembles(&ens_cfg, &times, workers)?;
        for (e, &x) in ensembles.iter().zip(&cfg.times) {
            let obs = member_observables(e, true)?;
            let avg = e.mean()?;
            let g = cfg.bootstrap_groups;
            let (entropy_gap, entropy_gap_se) =
                gap_with_error(&e.members, &obs.entropy, g, &von_neumann_entropy, &mut warnings)?;
            let (concurrence_gap, concurrence_gap_se) =
                gap_with_error(&e.members, &obs.concurrence, g, &concurrence, &mut warnings)?;
            let (pg, purity_gap_se) =
                gap_with_error(&e.members, &obs.purity, g, &|r| Ok(r.purity()), &mut warnings)?;
            let (lr_purity_gap, lr_purity_gap_se) = if x <= cfg.lr_max_time + 1e-12 {
                lr_gap(&ens_cfg, cfg, e.time, workers)?
            } else {
                (f64::NAN, f64::NAN)
            };
            points.push(ConvergencePoint {
                n_env: n,
                t_tau_h: x,
                mean_purity: mean(&obs.purity),
                purity_of_mean: avg.purity(),
                entropy_gap,
                entropy_gap_se,
                concurrence_gap,
                concurrence_gap_se,
                purity_gap: -pg,
                purity_gap_se,
                lr_purity_gap,
                lr_purity_gap_se,
            });
        }
    }
    let mut fits = Vec::new();
    for &x in &cfg.times {
        let sel: Vec<&ConvergencePoint> = points.iter().filter(|p| p.t_tau_h == x).collect();
        let ns: Vec<f64> = sel.iter().map(|p| p.n_env as f64).collect();
        let series: [(&str, Vec<f64>); 3] = [
            ("entropy", sel.iter().map(|p| p.entropy_gap).collect()),
            ("concurrence", sel.iter().map(|p| p.concurrence_gap).collect()),
            ("purity", sel.iter().map(|p| p.purity_gap).collect()),
        ];
        for (name, ys) in series {
            let f = log_log_fit(&ns, &ys);
            fits.push(SlopeFit {
                quantity: name.into(),
                t_tau_h: x,
                slope: f.map_or(f64::NAN, |f| f.slope),
                slope_se: f.map_or(f64::NAN, |f| f.slope_se),
            });
        }
    }
    Ok(ConvergenceStudy {
        points,
        fits,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WernerPoint {
    pub delta: f64,
    pub n_env: usize,
    pub t_tau_h: f64,
    pub n_par: usize,
    pub groups: usize,
    pub sigma_werner: f64,
    pub sigma_werner_se: f64,
    pub dominant_concurrence: f64,
    pub group_purity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WernerFit {
    pub delta: f64,
    pub n_env: usize,
    pub t_tau_h: f64,
    pub slope: f64,
    pub slope_se: f64,
}

#[derive(Clone, Debug)]
pub struct WernerStudy {
    pub points: Vec<WernerPoint>,
    pub fits: Vec<WernerFit>,
}

/// σ_Werner, dominant-eigenvector concurrence and purity of the group means
/// when `members` is cut into consecutive groups of `n_par`.
pub fn partition_statistics(members: &[DensityMatrix], n_par: usize) -> Result<(usize, [f64; 4])> {
    if n_par == 0 || members.len() % n_par != 0 {
        return Err(Error::Config(format!(
            "partition size {n_par} does not divide the ensemble size {}",
            members.len()
        )));
    }
    let groups = members.len() / n_par;
    let mut sigma = Vec::with_capacity(groups);
    let mut conc = Vec::with_capacity(groups);
    let mut pur = Vec::with_capacity(groups);
    for g in 0..groups {
        let avg = mean_state(&members[g * n_par..(g + 1) * n_par])?;
        let d = werner_diagnostics(&avg)?;
        sigma.push(d.sigma_werner);
        conc.push(d.dominant_eigenvector_concurrence);
        pur.push(avg.purity());
    }
    let se = if groups > 1 { standard_error(&sigma) } else { f64::NAN };
    Ok((groups, [mean(&sigma), se, mean(&conc), mean(&pur)]))
}

/// σ_Werner of partition averages against the partition size.
pub fn run_werner_study(cfg: &ExperimentConfig, workers: Workers) -> Result<WernerStudy> {
    cfg.validate()?;
    cfg.require_bell_spectator("werner")?;
    if cfg.partition_sizes.is_empty() {
        return Err(Error::Config("partition_sizes is empty".into()));
    }
    for &p in &cfg.partition_sizes {
        if p == 0 || cfg.realizations % p != 0 {
            return Err(Error::Config(format!(
                "partition size {p} does not divide realizations = {}",
                cfg.realizations
            )));
        }
    }
    let times = abs_times(cfg);
    let mut points = Vec::new();
    let mut fits = Vec::new();
    for &delta in &cfg.delta {
        for &n in &cfg.n_env {
            let ens_cfg = cfg.ensemble_config(n, delta)?;
            let ensembles = generate_ensembles(&ens_cfg, &times, workers)?;
            for (e, &x) in ensembles.iter().zip(&cfg.times) {
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for &n_par in &cfg.partition_sizes {
                    let (groups, [s, se, c, p]) = partition_statistics(&e.members, n_par)?;
                    xs.push(n_par as f64);
                    ys.push(s);
                    points.push(WernerPoint {
                        delta,
                        n_env: n,
                        t_tau_h: x,
                        n_par,
                        groups,
                        sigma_werner: s,
                        sigma_werner_se: se,
                        dominant_concurrence: c,
                        group_purity: p,
                    });
                }
                let f = log_log_fit(&xs, &ys);
                fits.push(WernerFit {
                    delta,
                    n_env: n,
                    t_tau_h: x,
                    slope: f.map_or(f64::NAN, |f| f.slope),
                    slope_se: f.map_or(f64::NAN, |f| f.slope_se),
                });
            }
        }
    }
    Ok(WernerStudy { points, fits })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerPoint {
    pub n_env: usize,
    pub t_tau_h: f64,
    pub mc_avg_purity: f64,
    pub mc_avg_purity_se: f64,
    pub mc_purity_of_avg: f64,
    pub mc_purity_of_avg_se: f64,
    pub mc_difference: f64,
    pub mc_difference_se: f64,
    pub lr_avg_purity: f64,
    pub lr_purity_of_avg: f64,
    pub lr_difference: f64,
    /// |difference − (avg_purity − purity_of_avg)| / |difference|.
    pub lr_identity_residual: f64,
    pub lr_half_step_change: f64,
    /// Largest entry of |ρ̄_MC − ρ̄_LR|.
    pub lr_state_distance: f64,
    pub master_purity: f64,
    /// Werner weight estimated from ρ̄ (two-qubit spectator, Bell state only).
    pub beta_hat: f64,
    pub beta_master: f64,
}

#[derive(Clone, Debug)]
pub struct LayerStudy {
    pub points: Vec<LayerPoint>,
    pub warnings: Vec<String>,
}

struct LrSummary {
    avg_purity: f64,
    purity_of_avg: f64,
    difference: f64,
    identity_residual: f64,
    half_step_change: f64,
    avg_rho: ComplexMatrix,
}

fn lr_summary(ens: &EnsembleConfig, q: &QuadratureSpec, t: f64, workers: Workers) -> Result<LrSummary> {
    let resampled = ens.resample.spectrum || ens.resample.env_state;
    let count = if resampled { ens.realizations } else { 1 };
    let rho_c = ens.initial_state.to_pure(ens.central_dim())?.density();
    let reports = try_map_indexed(count, workers, |i| {
        let (spectrum, psi_e) = realization_environment(ens, i)?;
        LinearResponseModel::new(
            ens.coupled_spectrum.clone(),
            ens.spectator_spectrum.clone(),
            EnvironmentKernel::spectral(spectrum.energies().to_vec(), &psi_e.density())?,
            ens.lambda,
        )?
        .report(&rho_c, t, q)
    })?;
    let k = reports.len() as f64;
    let avg_purity = reports.iter().map(|r| r.avg_purity).sum::<f64>() / k;
    let purity_of_avg = reports.iter().map(|r| r.purity_of_avg).sum::<f64>() / k;
    let difference = reports.iter().map(|r| r.difference).sum::<f64>() / k;
    let identity_residual = reports
        .iter()
        .map(|r| {
            let sub = r.avg_purity - r.purity_of_avg;
            if r.difference == 0.0 { sub.abs() } else { ((r.difference - sub) / r.difference).abs() }
        })
        .fold(0.0, f64::max);
    let half_step_change = reports.iter().map(|r| r.half_step_change).fold(0.0, f64::max);
    let d = rho_c.dim();
    let mut avg_rho = ComplexMatrix::zeros(d, d);
    for r in &reports {
        avg_rho = &avg_rho + r.avg_rho.matrix();
    }
    Ok(LrSummary {
        avg_purity,
        purity_of_avg,
        difference,
        identity_residual,
        half_step_change,
        avg_rho: avg_rho.scale_real(1.0 / k),
    })
}

/// Monte Carlo, linear response and master equation side by side.
pub fn run_layer_comparison(cfg: &ExperimentConfig, workers: Workers) -> Result<LayerStudy> {
    cfg.validate()?;
    let delta = cfg.delta[0];
    let times = abs_times(cfg);
    let q = quad(cfg)?;
    let werner = cfg.require_bell_spectator("layers").is_ok();
    let mut warnings = Vec::new();
    let lr_valid = cfg.coupling == CouplingEnsemble::Gue;
    if !lr_valid {
        warnings.push("linear response is only available for GUE couplings; its columns are NaN".into());
    }
    let mut points = Vec::new();
    for &n in &cfg.n_env {
        let ens_cfg = cfg.ensemble_config(n, delta)?;
        let ensembles = generate_ensembles(&ens_cfg, &times, workers)?;
        let rho0 = ens_cfg.initial_state.to_pure(ens_cfg.central_dim())?.density();
        let params = MasterParams::new(cfg.m1, UNIT_TAU_H, cfg.lambda)?;
        for (e, &x) in ensembles.iter().zip(&cfg.times) {
            let purities: Vec<f64> = e.members.iter().map(|r| r.purity()).collect();
            let avg = e.mean()?;
            let r = e.len();
            let pavg_err = batch_error(r, cfg.bootstrap_groups, |rg| {
                mean_state(&e.members[rg]).map_or(f64::NAN, |m| m.purity())
            });
            let (gap, gap_se) = gap_with_error(
                &e.members,
                &purities,
                cfg.bootstrap_groups,
                &|m| Ok(m.purity()),
                &mut warnings,
            )?;
            if let Some(w) = pavg_err.warning {
                if !warnings.contains(&w) {
                    warnings.push(w);
                }
            }
            let lr = if !lr_valid {
                None
            } else {
                match lr_summary(&ens_cfg, &q, e.time, workers) {
                Ok(s) => Some(s),
                Err(Error::RegimeExceeded { deficit }) => {
                    warnings.push(format!(
                        "N = {n}, t = {x} τ_H: linear response left its regime (deficit {deficit:.3e})"
                    ));
                    None
                }
                Err(err) => return Err(err),
                }
            };
            let master = match cfg.topology {
                Topology::Plain => solve_plain(&rho0, &params, e.time)?,
                Topology::Spectator => solve_spectator(&rho0, &params, cfg.m2, e.time)?,
            };
            let nan = f64::NAN;
            points.push(LayerPoint {
                n_env: n,
                t_tau_h: x,
                mc_avg_purity: mean(&purities),
                mc_avg_purity_se: standard_error(&purities),
                mc_purity_of_avg: avg.purity(),
                mc_purity_of_avg_se: pavg_err.se,
                mc_difference: -gap,
                mc_difference_se: gap_se,
                lr_avg_purity: lr.as_ref().map_or(nan, |s| s.avg_purity),
                lr_purity_of_avg: lr.as_ref().map_or(nan, |s| s.purity_of_avg),
                lr_difference: lr.as_ref().map_or(nan, |s| s.difference),
                lr_identity_residual: lr.as_ref().map_or(nan, |s| s.identity_residual),
                lr_half_step_change: lr.as_ref().map_or(nan, |s| s.half_step_change),
                lr_state_distance: lr.as_ref().map_or(nan, |s| s.avg_rho.max_abs_diff(avg.matrix())),
                master_purity: master.purity(),
                beta_hat: if werner { werner_beta_estimate(&avg)? } else { nan },
                beta_master: if werner { werner_beta(&params, e.time)? } else { nan },
            });
        }
    }
    Ok(LayerStudy { points, warnings })
}

/// Raw dump of every member of every ensemble.
pub fn run_ensemble_dump(cfg: &ExperimentConfig, workers: Workers) -> Result<Vec<(usize, StateEnsemble)>> {
    cfg.validate()?;
    let times = abs_times(cfg);
    let mut out = Vec::new();
    for &n in &cfg.n_env {
        let ens_cfg = cfg.ensemble_config(n, cfg.delta[0])?;
        for e in generate_ensembles(&ens_cfg, &times, workers)? {
            out.push((n, e));
        }
    }
    Ok(out)
}

fn f(x: f64) -> Cell {
    Cell::Float(x)
}

fn sign(x: f64) -> Cell {
    Cell::Float(if x > 0.0 { 1.0 } else if x < 0.0 { -1.0 } else { 0.0 })
}

fn u(x: usize) -> Cell {
    Cell::Int(x as u64)
}

fn cols(spec: &[(&str, &str)]) -> Vec<Column> {
    spec.iter()
        .map(|(n, d)| Column::new(n, d))
        .collect()
}

impl ConvergenceStudy {
    pub fn to_result(&self, cfg: &ExperimentConfig) -> StudyResult {
        let mut points = Table::new(
            "convergence_points",
            cols(&[
                ("n_env", "environment dimension N"),
                ("t_tau_h", "time in units of the Heisenberg time"),
                ("mean_purity", "ensemble mean of tr ρ²"),
                ("purity_of_mean", "tr ρ̄²"),
                ("entropy_gap_abs", "|S(ρ̄) − ⟨S⟩ (nats)|"),
                ("entropy_gap_sign", "sign of S(ρ̄) − ⟨S⟩ (nats): 1, 0 or −1"),
                ("entropy_gap_se", "batch-means standard error"),
                ("concurrence_gap_abs", "|C(ρ̄) − ⟨C⟩|"),
                ("concurrence_gap_sign", "sign of C(ρ̄) − ⟨C⟩: 1, 0 or −1"),
                ("concurrence_gap_se", "batch-means standard error"),
                ("purity_gap_abs", "|⟨P⟩ − P(ρ̄)|"),
                ("purity_gap_sign", "sign of ⟨P⟩ − P(ρ̄): 1, 0 or −1"),
                ("purity_gap_se", "batch-means standard error"),
                ("lr_purity_gap", "linear-response ⟨P⟩ − P(ρ̄), NaN when not evaluated"),
                ("lr_purity_gap_se", "spread of the linear-response value over spectra"),
            ]),
        );
        for p in &self.points {
            points.rows.push(vec![
                u(p.n_env),
                f(p.t_tau_h),
                f(p.mean_purity),
                f(p.purity_of_mean),
                f(p.entropy_gap.abs()),
                sign(p.entropy_gap),
                f(p.entropy_gap_se),
                f(p.concurrence_gap.abs()),
                sign(p.concurrence_gap),
                f(p.concurrence_gap_se),
                f(p.purity_gap.abs()),
                sign(p.purity_gap),
                f(p.purity_gap_se),
                f(p.lr_purity_gap),
                f(p.lr_purity_gap_se),
            ]);
        }
        let mut fits = Table::new(
            "convergence_fits",
            cols(&[
                ("quantity", "entropy, concurrence or purity"),
                ("t_tau_h", "time in units of the Heisenberg time"),
                ("slope", "least-squares slope of ln|gap| against ln N"),
                ("slope_se", "standard error of the slope"),
            ]),
        );
        for s in &self.fits {
            fits.rows.push(vec![
                Cell::Text(s.quantity.clone()),
                f(s.t_tau_h),
                f(s.slope),
                f(s.slope_se),
            ]);
        }
        StudyResult::new("convergence", cfg, vec![points, fits], self.warnings.clone())
    }
}

impl WernerStudy {
    pub fn to_result(&self, cfg: &ExperimentConfig) -> StudyResult {
        let mut points = Table::new(
            "werner_points",
            cols(&[
                ("delta", "splitting Δ in mean level spacings"),
                ("n_env", "environment dimension N"),
                ("t_tau_h", "time in units of the Heisenberg time"),
                ("n_par", "partition size"),
                ("groups", "number of partitions"),
                ("sigma_werner", "mean std-dev of the three closest eigenvalues"),
                ("sigma_werner_se", "standard error over partitions"),
                ("dominant_concurrence", "mean concurrence of the remaining eigenvector"),
                ("group_purity", "mean purity of the partition averages"),
            ]),
        );
        for p in &self.points {
            points.rows.push(vec![
                f(p.delta),
                u(p.n_env),
                f(p.t_tau_h),
                u(p.n_par),
                u(p.groups),
                f(p.sigma_werner),
                f(p.sigma_werner_se),
                f(p.dominant_concurrence),
                f(p.group_purity),
            ]);
        }
        let mut fits = Table::new(
            "werner_fits",
            cols(&[
                ("delta", "splitting Δ in mean level spacings"),
                ("n_env", "environment dimension N"),
                ("t_tau_h", "time in units of the Heisenberg time"),
                ("slope", "least-squares slope of ln σ against ln N_par"),
                ("slope_se", "standard error of the slope"),
            ]),
        );
        for s in &self.fits {
            fits.rows.push(vec![
                f(s.delta),
                u(s.n_env),
                f(s.t_tau_h),
                f(s.slope),
                f(s.slope_se),
            ]);
        }
        StudyResult::new("werner", cfg, vec![points, fits], Vec::new())
    }
}

impl LayerStudy {
    /// One `layers_t<t>` table per time point plus a `linear_response` table.
    pub fn to_result(&self, cfg: &ExperimentConfig) -> StudyResult {
        let spec = cols(&[
            ("n_env", "environment dimension N"),
            ("t_tau_h", "time in units of the Heisenberg time"),
            ("mc_avg_purity", "Monte Carlo ⟨P⟩"),
            ("mc_avg_purity_se", "standard error of ⟨P⟩"),
            ("mc_purity_of_avg", "Monte Carlo P(ρ̄)"),
            ("mc_purity_of_avg_se", "batch-means standard error of P(ρ̄)"),
            ("mc_difference", "Monte Carlo ⟨P⟩ − P(ρ̄)"),
            ("mc_difference_se", "batch-means standard error"),
            ("lr_avg_purity", "linear-response ⟨P⟩"),
            ("lr_purity_of_avg", "linear-response P(ρ̄)"),
            ("lr_difference", "linear-response ⟨P⟩ − P(ρ̄)"),
            ("lr_identity_residual", "relative mismatch of the difference and the subtraction"),
            ("lr_half_step_change", "relative change under halving the quadrature step"),
            ("lr_state_distance", "max entry of |ρ̄_MC − ρ̄_LR|"),
            ("master_purity", "purity of the master-equation solution"),
            ("beta_hat", "Werner weight (4λ_max − 1)/3 of ρ̄"),
            ("beta_master", "e^{−2τ_Hλ²t}"),
        ]);
        let mut tables = Vec::new();
        let mut lr = Table::new(
            "linear_response",
            cols(&[
                ("n_env", "environment dimension N"),
                ("t", "time in units of the Heisenberg time"),
                ("purity_of_avg", "linear-response P(ρ̄)"),
                ("avg_purity", "linear-response ⟨P⟩"),
                ("difference", "linear-response ⟨P⟩ − P(ρ̄)"),
            ]),
        );
        for &x in &cfg.times {
            let mut t = Table::new(&format!("layers_t{x}"), spec.clone());
            for p in self.points.iter().filter(|p| p.t_tau_h == x) {
                t.rows.push(vec![
                    u(p.n_env),
                    f(p.t_tau_h),
                    f(p.mc_avg_purity),
                    f(p.mc_avg_purity_se),
                    f(p.mc_purity_of_avg),
                    f(p.mc_purity_of_avg_se),
                    f(p.mc_difference),
                    f(p.mc_difference_se),
                    f(p.lr_avg_purity),
                    f(p.lr_purity_of_avg),
                    f(p.lr_difference),
                    f(p.lr_identity_residual),
                    f(p.lr_half_step_change),
                    f(p.lr_state_distance),
                    f(p.master_purity),
                    f(p.beta_hat),
                    f(p.beta_master),
                ]);
                lr.rows.push(vec![
                    u(p.n_env),
                    f(p.t_tau_h),
                    f(p.lr_purity_of_avg),
                    f(p.lr_avg_purity),
                    f(p.lr_difference),
                ]);
            }
            tables.push(t);
        }
        tables.push(lr);
        StudyResult::new("layers", cfg, tables, self.warnings.clone())
    }
}

/// Flattens an ensemble dump into one row per matrix entry.
pub fn ensemble_result(cfg: &ExperimentConfig, dump: &[(usize, StateEnsemble)]) -> StudyResult {
    let mut t = Table::new(
        "ensemble",
        cols(&[
            ("n_env", "environment dimension N"),
            ("t_tau_h", "time in units of the Heisenberg time"),
            ("realization", "realization index (= seed stream)"),
            ("row", "row index"),
            ("col", "column index"),
            ("re", "real part of ρ_c[row, col] (interaction picture)"),
            ("im", "imaginary part"),
        ]),
    );
    for (n, e) in dump {
        let x = e.time / UNIT_TAU_H;
        for (rho, seed) in e.members.iter().zip(&e.seeds) {
            let m = rho.matrix();
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    t.rows.push(vec![
                                u(*n),
                        f(x),
                        Cell::Int(seed.stream_index),
                        u(i),
                        u(j),
                        f(m[(i, j)].re),
                        f(m[(i, j)].im),
                    ]);
                }
            }
        }
    }
    StudyResult::new("ensemble", cfg, vec![t], Vec::new())
}

impl StudyResult {
    /// Prepends `seed` and `config_hash` to every table so each row can be
    /// regenerated on its own.
    fn new(study: &str, cfg: &ExperimentConfig, mut tables: Vec<Table>, warnings: Vec<String>) -> Self {
        let hash = cfg.hash();
        for t in &mut tables {
            t.columns.splice(
                0..0,
                cols(&[("seed", "root seed"), ("config_hash", "SHA-256 of the run configuration")]),
            );
            for r in &mut t.rows {
                r.splice(0..0, [Cell::Int(cfg.seed), Cell::Text(hash.clone())]);
            }
        }
        StudyResult {
            study: study.into(),
            tables,
            provenance: Provenance::of(cfg),
            warnings,
        }
    }
}
