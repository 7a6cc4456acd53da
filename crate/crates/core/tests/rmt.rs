mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use rmt_decoherence::matrix::hermitian_eigenvalues;
use rmt_decoherence::rmt::{
    CouplingEnsemble, RandomSeed, Spectrum, SpectrumKind, heisenberg_time, mean_spacing,
    sample_coupling, sample_goe, sample_gue, sample_spectrum, unfold, unfold_semicircle,
};
use rmt_decoherence::Error;

use common::random_unitary;

#[test]
fn gue_n1_is_real_scalar() {
    let v = sample_gue(1, RandomSeed::new(5, 0)).unwrap();
    assert_eq!(v.dim(), 1);
    assert_eq!(v.matrix()[(0, 0)].im, 0.0);
    assert!(matches!(sample_gue(0, RandomSeed::new(5, 0)), Err(Error::Dimension(_))));
}

#[test]
fn gue_is_deterministic_per_seed() {
    let a = sample_gue(16, RandomSeed::new(9, 3)).unwrap();
    let b = sample_gue(16, RandomSeed::new(9, 3)).unwrap();
    let c = sample_gue(16, RandomSeed::new(9, 4)).unwrap();
    assert_eq!(a.matrix(), b.matrix());
    assert_ne!(a.matrix(), c.matrix());
}

#[test]
fn gue_second_moment() {
    let n = 64;
    let reps = 1000;
    let mut acc = 0.0;
    for s in 0..reps {
        let v = sample_gue(n, RandomSeed::new(11, s)).unwrap();
        let m = v.matrix();
        acc += m.trace_product(m).re / (n * n) as f64;
    }
    let mean = acc / reps as f64;
    assert!((mean - 1.0).abs() < 0.03, "⟨tr V²⟩/n² = {mean}");
}

#[test]
fn gue_entry_variances() {
    let n = 16;
    let (mut off, mut off_re, mut diag) = (Vec::new(), Vec::new(), Vec::new());
    for s in 0..100 {
        let m = sample_gue(n, RandomSeed::new(12, s)).unwrap().matrix().clone();
        assert!(m.hermiticity_residual() <= 1e-12);
        for i in 0..n {
            diag.push(m[(i, i)].re.powi(2));
            for j in i + 1..n {
                off.push(m[(i, j)].norm_sqr());
                off_re.push(m[(i, j)].re.powi(2));
            }
        }
    }
    let check = |x: &[f64], want: f64, var_of_sq: f64| {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let sigma = (var_of_sq / x.len() as f64).sqrt();
        assert!((mean - want).abs() < 5.0 * sigma, "{mean} vs {want} (σ {sigma})");
    };
    // |z|² of a unit complex Gaussian is Exp(1): variance 1. x² of N(0,σ²): 2σ⁴.
    check(&off, 1.0, 1.0);
    check(&off_re, 0.5, 0.5);
    check(&diag, 1.0, 2.0);
}

#[test]
fn gue_unitary_invariance() {
    let n = 6;
    let u = random_unitary(n, 77);
    let mut plain = [0.0; 2];
    let mut rotated = [0.0; 2];
    let reps = 2000;
    for s in 0..reps {
        let m = sample_gue(n, RandomSeed::new(13, s)).unwrap().matrix().clone();
        let w = u.matmul(&m).matmul(&u.adjoint());
        plain[0] += m[(0, 1)].norm_sqr();
        plain[1] += m[(2, 2)].re.powi(2);
        rotated[0] += w[(0, 1)].norm_sqr();
        rotated[1] += w[(2, 2)].re.powi(2);
    }
    let r = reps as f64;
    // Standard deviations of the two estimators: 1/√R and √2/√R.
    for (k, sd) in [(0, 1.0), (1, 2f64.sqrt())] {
        let band = 5.0 * sd * (2.0 / r).sqrt();
        assert!(
            (plain[k] / r - rotated[k] / r).abs() < band,
            "moment {k}: {} vs {}",
            plain[k] / r,
            rotated[k] / r
        );
    }
}

#[test]
fn goe_structure_and_variance() {
    let v = sample_goe(64, RandomSeed::new(1, 0)).unwrap();
    let m = v.matrix();
    assert!(m.as_slice().iter().all(|z| z.im == 0.0));
    assert_eq!(m, &m.transpose());
    let x: Vec<f64> = (0..4000)
        .map(|s| sample_goe(1, RandomSeed::new(2, s)).unwrap().matrix()[(0, 0)].re)
        .collect();
    let var = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    // Var of the sample variance of N(0, 2): 2·2²/n.
    assert!((var - 2.0).abs() < 5.0 * (8.0 / x.len() as f64).sqrt(), "{var}");
    assert_eq!(sample_coupling(CouplingEnsemble::Goe, 4, RandomSeed::new(1, 0)).unwrap().ensemble(), CouplingEnsemble::Goe);
}

fn spacings(kind: SpectrumKind, n: usize, reps: u64) -> Vec<f64> {
    let mut out = Vec::new();
    for s in 0..reps {
        let e = sample_spectrum(kind, n, RandomSeed::new(21, s)).unwrap();
        let e = e.energies();
        let (lo, hi) = (n / 10, n - n / 10);
        out.extend(e[lo..hi].windows(2).map(|w| w[1] - w[0]));
    }
    out
}

fn l1_to(density: impl Fn(f64) -> f64, s: &[f64]) -> f64 {
    let width = 0.1;
    let bins = 40;
    let mut hist = vec![0.0; bins];
    for &x in s {
        let b = (x / width) as usize;
        if b < bins {
            hist[b] += 1.0;
        }
    }
    let norm = s.len() as f64 * width;
    (0..bins)
        .map(|b| (hist[b] / norm - density((b as f64 + 0.5) * width)).abs() * width)
        .sum()
}

#[test]
fn goe_spacings_follow_wigner_surmise() {
    let s = spacings(SpectrumKind::Goe, 64, 1000);
    let wigner = |x: f64| PI / 2.0 * x * (-PI * x * x / 4.0).exp();
    let poisson = |x: f64| (-x).exp();
    let (dw, dp) = (l1_to(wigner, &s), l1_to(poisson, &s));
    assert!(dw < dp, "L1 to Wigner {dw}, to Poisson {dp}");
    assert!(dw < 0.1, "L1 to Wigner {dw}");
}

#[test]
fn poisson_spacings_are_exponential() {
    let s = spacings(SpectrumKind::Poisson, 64, 300);
    let wigner = |x: f64| PI / 2.0 * x * (-PI * x * x / 4.0).exp();
    let poisson = |x: f64| (-x).exp();
    assert!(l1_to(poisson, &s) < l1_to(wigner, &s));
}

#[test]
fn poisson_two_levels() {
    let s = sample_spectrum(SpectrumKind::Poisson, 2, RandomSeed::new(1, 1)).unwrap();
    let e = s.energies();
    assert!(e[0] > 0.0 && e[1] > e[0]);
    assert_eq!(s.kind(), SpectrumKind::Poisson);
}

#[test]
fn explicit_round_trips_and_cannot_be_sampled() {
    let e = vec![-1.0, 0.5, 2.25];
    assert_eq!(Spectrum::explicit(e.clone()).unwrap().energies(), &e[..]);
    assert!(Spectrum::explicit(vec![1.0, 0.0]).is_err());
    assert!(sample_spectrum(SpectrumKind::Explicit, 4, RandomSeed::new(1, 1)).is_err());
}

#[test]
fn sampled_gue_has_unit_spacing() {
    for n in [64, 128, 256] {
        let s = sample_spectrum(SpectrumKind::Gue, n, RandomSeed::new(4, n as u64)).unwrap();
        let e = s.energies();
        assert!(e.windows(2).all(|w| w[0] <= w[1]));
        assert!((mean_spacing(e) - 1.0).abs() < 0.02);
        let sp = spacings(SpectrumKind::Gue, n, 1);
        let mean = sp.iter().sum::<f64>() / sp.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "n = {n}: {mean}");
        assert!((heisenberg_time(&s) / (2.0 * PI) - 1.0).abs() < 0.02);
    }
}

#[test]
fn unfolding_gue_eigenvalues_n256() {
    let raw = hermitian_eigenvalues(sample_gue(256, RandomSeed::new(8, 0)).unwrap().matrix()).unwrap();
    let s = unfold_semicircle(&raw, 1.0).unwrap();
    let e = s.energies();
    let sp: Vec<f64> = e[25..231].windows(2).map(|w| w[1] - w[0]).collect();
    let mean = sp.iter().sum::<f64>() / sp.len() as f64;
    assert!((mean - 1.0).abs() < 0.02, "{mean}");
}

#[test]
fn affine_unfold_example() {
    let s = unfold(&[0.0, 2.0, 4.0, 6.0], 1.0).unwrap();
    assert_eq!(s.energies(), &[0.0, 1.0, 2.0, 3.0]);
    assert!(unfold(&[1.0], 1.0).is_err());
}

#[test]
fn unfolding_is_idempotent() {
    let s = sample_spectrum(SpectrumKind::Gue, 128, RandomSeed::new(6, 0)).unwrap();
    let again = unfold(s.energies(), 1.0).unwrap();
    let worst = s
        .energies()
        .iter()
        .zip(again.energies())
        .map(|(a, b)| (b - a).abs())
        .fold(0.0, f64::max);
    assert!(worst / s.bandwidth() < 0.01, "max change {worst}");
}

#[test]
fn heisenberg_time_examples() {
    let unit = Spectrum::explicit((0..20).map(f64::from).collect()).unwrap();
    assert!((heisenberg_time(&unit) - 2.0 * PI).abs() < 1e-12);
    assert!((heisenberg_time(&unit.scaled(2.0).unwrap()) - PI).abs() < 1e-12);
}

#[test]
fn domains_and_streams_are_distinct() {
    let s = RandomSeed::new(1, 0);
    let a = sample_gue(4, s.with_domain(1)).unwrap();
    let b = sample_gue(4, s.with_domain(2)).unwrap();
    let c = sample_gue(4, s.with_domain(1).with_stream(1)).unwrap();
    assert_ne!(a.matrix(), b.matrix());
    assert_ne!(a.matrix(), c.matrix());
    assert_eq!(a.matrix(), sample_gue(4, s.with_domain(1)).unwrap().matrix());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn samplers_are_pure_functions_of_seed(root in any::<u64>(), stream in any::<u64>(), n in 1usize..12) {
        let s = RandomSeed::new(root, stream);
        let (a, b) = (sample_gue(n, s).unwrap(), sample_gue(n, s).unwrap());
        prop_assert_eq!(a.matrix(), b.matrix());
        let (a, b) = (sample_goe(n, s).unwrap(), sample_goe(n, s).unwrap());
        prop_assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn spectra_ascending_and_finite(root in any::<u64>(), n in 2usize..40, k in 0usize..3) {
        let kind = [SpectrumKind::Poisson, SpectrumKind::Goe, SpectrumKind::Gue][k];
        let s = sample_spectrum(kind, n, RandomSeed::new(root, 0)).unwrap();
        prop_assert_eq!(s.len(), n);
        prop_assert!(s.energies().iter().all(|e| e.is_finite()));
        prop_assert!(s.energies().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn couplings_are_hermitian(root in any::<u64>(), n in 1usize..20) {
        let s = RandomSeed::new(root, 1);
        prop_assert!(sample_gue(n, s).unwrap().matrix().hermiticity_residual() <= 1e-12);
        prop_assert!(sample_goe(n, s).unwrap().matrix().hermiticity_residual() <= 1e-12);
    }
}
