mod common;

use proptest::prelude::*;
use rmt_decoherence::dynamics::{
    CentralState, EnsembleConfig, EnvState, HamiltonianSpec, Picture, Propagator, Resample,
    Topology, UNIT_TAU_H, assemble_hamiltonian, echo_operator, ensemble_mean, evolve,
    generate_ensemble, generate_ensembles, mean_state, realization_inputs, reduced_state,
};
use rmt_decoherence::matrix::{C64, ComplexMatrix, hermitian_eigensystem, tensor_product};
use rmt_decoherence::parallel::Workers;
use rmt_decoherence::rmt::{RandomSeed, SpectrumKind, sample_gue, sample_spectrum};
use rmt_decoherence::state::{partial_trace_matrix, validate_density};
use rmt_decoherence::{DensityMatrix, Error, PureState, SubsystemSplit};

use common::{random_density, random_unitary};

fn gue_env(n: usize, seed: u64) -> rmt_decoherence::rmt::Spectrum {
    sample_spectrum(SpectrumKind::Gue, n, RandomSeed::new(seed, 0)).unwrap()
}

fn plain_spec(m: usize, n: usize, lambda: f64, seed: u64) -> HamiltonianSpec {
    let central: Vec<f64> = (0..m).map(|k| 0.4 * k as f64 - 0.3).collect();
    let v = sample_gue(m * n, RandomSeed::new(seed, 1)).unwrap();
    HamiltonianSpec::plain(central, gue_env(n, seed), v, lambda).unwrap()
}

fn spectator_spec(n: usize, lambda: f64, seed: u64) -> HamiltonianSpec {
    let v = sample_gue(2 * n, RandomSeed::new(seed, 1)).unwrap();
    HamiltonianSpec::spectator(vec![-0.35, 0.35], vec![0.0, 0.8], gue_env(n, seed), v, lambda).unwrap()
}

/// e^{−iHt} from a dense diagonalization of the assembled Hamiltonian.
fn dense_unitary(spec: &HamiltonianSpec, t: f64) -> ComplexMatrix {
    let h = assemble_hamiltonian(spec).unwrap();
    hermitian_eigensystem(&h)
        .unwrap()
        .reconstruct_with(|e| C64::from_polar(1.0, -e * t))
}

/// tr_e[U(ρ_c ⊗ ρ_e)U†], optionally rotated back by u_c†.
fn dense_reduced(spec: &HamiltonianSpec, rc: &DensityMatrix, re: &DensityMatrix, t: f64, interaction: bool) -> ComplexMatrix {
    let u = dense_unitary(spec, t);
    let rho = tensor_product(rc.matrix(), re.matrix()).unwrap();
    let out = u.matmul(&rho).matmul(&u.adjoint());
    let split = spec.split();
    let keep = spec.central_factors();
    let r = partial_trace_matrix(&out, &split, &keep).unwrap();
    if interaction {
        let ph: Vec<C64> = spec.central_phases(t).iter().map(|z| z.conj()).collect();
        r.scale_rows(&ph).scale_cols(&ph.iter().map(|z| z.conj()).collect::<Vec<_>>())
    } else {
        r
    }
}

#[test]
fn uncoupled_hamiltonian_is_sum_of_levels() {
    let spec = spectator_spec(4, 0.0, 3);
    let h = assemble_hamiltonian(&spec).unwrap();
    let e = spec.env_spectrum().energies().to_vec();
    for (a, e1) in [-0.35, 0.35].iter().enumerate() {
        for (b, e2) in [0.0, 0.8].iter().enumerate() {
            for (j, ee) in e.iter().enumerate() {
                let k = (a * 2 + b) * 4 + j;
                assert!((h[(k, k)].re - (e1 + e2 + ee)).abs() < 1e-14);
            }
        }
    }
    assert!((&h - &ComplexMatrix::from_real_diagonal(&spec.h0_diagonal())).max_abs() == 0.0);
}

#[test]
fn spectator_hamiltonian_commutes_with_factor_two_diagonals() {
    let spec = spectator_spec(4, 1.0, 5);
    let h = assemble_hamiltonian(&spec).unwrap();
    let a = ComplexMatrix::from_real_diagonal(&[0.3, -1.7]);
    let op = tensor_product(&tensor_product(&ComplexMatrix::identity(2), &a).unwrap(), &ComplexMatrix::identity(4)).unwrap();
    let comm = &h.matmul(&op) - &op.matmul(&h);
    assert!(comm.max_abs() < 1e-12);
    assert!(h.hermiticity_residual() == 0.0);
}

#[test]
fn propagator_reconstructs_hamiltonian() {
    for spec in [plain_spec(3, 16, 0.2, 1), spectator_spec(24, 0.1, 2)] {
        let h = assemble_hamiltonian(&spec).unwrap();
        let p = Propagator::new(&spec).unwrap();
        assert!(p.reconstruct().max_abs_diff(&h) <= 1e-9 * h.max_abs());
        let mut dense = hermitian_eigensystem(&h).unwrap().values;
        dense.sort_by(f64::total_cmp);
        let ours = p.eigenvalues();
        assert!(ours.iter().zip(&dense).all(|(a, b)| (a - b).abs() < 1e-9));
    }
}

#[test]
fn propagator_unitary_matches_dense() {
    let spec = spectator_spec(8, 0.3, 4);
    let p = Propagator::new(&spec).unwrap();
    assert!(p.unitary(1.7).max_abs_diff(&dense_unitary(&spec, 1.7)) < 1e-10);
}

#[test]
fn evolve_examples() {
    let spec = plain_spec(2, 8, 0.3, 6);
    let p = Propagator::new(&spec).unwrap();
    let rho0 = random_density(16, 3);
    let same = evolve(&rho0, &p, 0.0).unwrap();
    assert!(same.matrix().max_abs_diff(rho0.matrix()) < 1e-14);

    let eig = hermitian_eigensystem(&assemble_hamiltonian(&spec).unwrap()).unwrap();
    let col: Vec<C64> = (0..16).map(|i| eig.vectors[(i, 5)]).collect();
    let proj = PureState::normalized(col).unwrap().density();
    for t in [0.3, 2.0, 11.0] {
        assert!(evolve(&proj, &p, t).unwrap().matrix().max_abs_diff(proj.matrix()) < 1e-10);
    }
    let later = evolve(&rho0, &p, 3.3).unwrap();
    assert!((later.purity() - rho0.purity()).abs() < 1e-10);
    let mut a = later.eigenvalues().unwrap();
    let mut b = rho0.eigenvalues().unwrap();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
    assert!(matches!(evolve(&random_density(3, 1), &p, 1.0), Err(Error::Dimension(_))));
}

#[test]
fn echo_examples() {
    let spec = spectator_spec(6, 0.0, 7);
    let id = ComplexMatrix::identity(24);
    assert!(echo_operator(&spec, 2.5).unwrap().max_abs_diff(&id) < 1e-12);
    let spec = spectator_spec(6, 0.4, 7);
    assert!(echo_operator(&spec, 0.0).unwrap().max_abs_diff(&id) < 1e-12);
    let m = echo_operator(&spec, 4.0).unwrap();
    assert!(m.adjoint().matmul(&m).max_abs_diff(&id) < 1e-9);
    let h0: Vec<C64> = spec.h0_diagonal().iter().map(|e| C64::from_polar(1.0, e * 4.0)).collect();
    let want = dense_unitary(&spec, 4.0).scale_rows(&h0);
    assert!(m.max_abs_diff(&want) < 1e-10);
}

#[test]
fn two_paths_agree() {
    for spec in [plain_spec(2, 12, 0.25, 8), spectator_spec(10, 0.25, 9)] {
        let rc = random_density(spec.central_dim(), 4);
        let re = random_density(spec.env_dim(), 5);
        for t in [0.0, 0.7, 5.0] {
            let tilde = reduced_state(&spec, &rc, &re, t, Picture::Interaction).unwrap();
            let direct = reduced_state(&spec, &rc, &re, t, Picture::Schroedinger).unwrap();
            let uc = spec.central_phases(t);
            assert!(tilde.conjugate_diagonal(&uc).matrix().max_abs_diff(direct.matrix()) < 1e-10);
            assert!(direct.matrix().max_abs_diff(&dense_reduced(&spec, &rc, &re, t, false)) < 1e-10);
            assert!(tilde.matrix().max_abs_diff(&dense_reduced(&spec, &rc, &re, t, true)) < 1e-10);
        }
    }
}

#[test]
fn reduced_pure_matches_reduced_state() {
    let spec = spectator_spec(12, 0.3, 10);
    let p = Propagator::new(&spec).unwrap();
    let psi_c = PureState::bell();
    let psi_e = PureState::normalized((0..12).map(|k| C64::from_polar(1.0, k as f64)).collect()).unwrap();
    let times = [0.0, 0.4, 3.0];
    for picture in [Picture::Interaction, Picture::Schroedinger] {
        let fast = p.reduced_pure(&psi_c, &psi_e, &times, picture).unwrap();
        for (r, &t) in fast.iter().zip(&times) {
            let slow = reduced_state(&spec, &psi_c.density(), &psi_e.density(), t, picture).unwrap();
            assert!(r.matrix().max_abs_diff(slow.matrix()) < 1e-10);
        }
    }
}

#[test]
fn reduced_state_examples() {
    let spec = plain_spec(2, 32, 0.0, 11);
    let psi = PureState::normalized(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
    let re = PureState::basis(32, 16).unwrap().density();
    for t in [0.5, 3.0, 40.0] {
        let r = reduced_state(&spec, &psi.density(), &re, t, Picture::Schroedinger).unwrap();
        assert!((r.purity() - 1.0).abs() < 1e-12);
    }
    let spec = plain_spec(2, 32, 0.2, 11);
    let r0 = reduced_state(&spec, &psi.density(), &re, 0.0, Picture::Interaction).unwrap();
    assert!(r0.matrix().max_abs_diff(psi.density().matrix()) < 1e-12);

    let t = 2.0;
    let rc = reduced_state(&spec, &psi.density(), &re, t, Picture::Schroedinger).unwrap();
    let u = dense_unitary(&spec, t);
    let full = tensor_product(psi.density().matrix(), re.matrix()).unwrap();
    let out = u.matmul(&full).matmul(&u.adjoint());
    let split = SubsystemSplit::new(vec![2, 32]).unwrap();
    let env = partial_trace_matrix(&out, &split, &[1]).unwrap();
    let pe: f64 = env.as_slice().iter().map(|z| z.norm_sqr()).sum();
    assert!(rc.purity() < 0.999);
    assert!((rc.purity() - pe).abs() < 1e-10);
}

#[test]
fn spectator_marginal_is_frozen_in_interaction_picture() {
    let spec = spectator_spec(8, 0.4, 12);
    let r1 = random_density(2, 1);
    let r2 = random_density(2, 2);
    let rc = r1.tensor(&r2).unwrap();
    let re = random_density(8, 3);
    let split = SubsystemSplit::new(vec![2, 2]).unwrap();
    for lambda in [0.0, 0.4] {
        let spec = spec.with_lambda(lambda).unwrap();
        for t in [0.5, 4.0] {
            let r = reduced_state(&spec, &rc, &re, t, Picture::Interaction).unwrap();
            let m2 = partial_trace_matrix(r.matrix(), &split, &[1]).unwrap();
            assert!(m2.max_abs_diff(r2.matrix()) < 1e-10);
        }
    }
}

fn small_config(n: usize, realizations: usize) -> EnsembleConfig {
    EnsembleConfig::two_qubit_spectator(n, 0.05, 0.0, realizations, 42)
}

#[test]
fn singleton_uncoupled_ensemble_is_initial_state() {
    let mut cfg = small_config(8, 1);
    cfg.lambda = 0.0;
    let e = generate_ensemble(&cfg, 3.0, Workers::SEQUENTIAL).unwrap();
    assert_eq!(e.len(), 1);
    assert!(e.members[0].matrix().max_abs_diff(PureState::bell().density().matrix()) < 1e-12);
    let avg = ensemble_mean(&e).unwrap();
    assert!(avg.matrix().max_abs_diff(e.members[0].matrix()) < 1e-15);
}

#[test]
fn zero_realizations_is_error() {
    assert!(generate_ensemble(&small_config(8, 0), 1.0, Workers::SEQUENTIAL).is_err());
    assert!(mean_state(&[]).is_err());
}

#[test]
fn ensembles_do_not_depend_on_workers() {
    let cfg = small_config(16, 100);
    let times = [0.5, UNIT_TAU_H];
    let a = generate_ensembles(&cfg, &times, Workers::SEQUENTIAL).unwrap();
    let b = generate_ensembles(&cfg, &times, Workers(4)).unwrap();
    let c = generate_ensembles(&cfg, &times, Workers::ALL).unwrap();
    for ((x, y), z) in a.iter().zip(&b).zip(&c) {
        assert_eq!(x.config_hash, y.config_hash);
        assert_eq!(x.seeds, y.seeds);
        for ((p, q), r) in x.members.iter().zip(&y.members).zip(&z.members) {
            assert_eq!(p.matrix(), q.matrix());
            assert_eq!(p.matrix(), r.matrix());
        }
    }
}

#[test]
fn members_and_seeds_line_up() {
    let cfg = small_config(8, 7);
    let e = generate_ensemble(&cfg, 1.0, Workers::ALL).unwrap();
    assert_eq!(e.members.len(), e.seeds.len());
    assert!(e.seeds.iter().enumerate().all(|(i, s)| s.stream_index == i as u64 && s.root_seed == 42));
    assert!(e.members.iter().all(|m| m.dim() == 4));
}

#[test]
fn bell_purity_band_at_heisenberg_time() {
    let cfg = EnsembleConfig::two_qubit_spectator(64, 0.03, 0.0, 500, 3);
    let e = generate_ensemble(&cfg, UNIT_TAU_H, Workers::ALL).unwrap();
    let mean: f64 = e.members.iter().map(|r| r.purity()).sum::<f64>() / e.len() as f64;
    assert!((0.80..=0.95).contains(&mean), "{mean}");
}

#[test]
fn averaged_state_validates_tightly() {
    let cfg = small_config(8, 1000);
    let e = generate_ensemble(&cfg, 2.0, Workers::ALL).unwrap();
    let avg = e.mean().unwrap();
    assert!(validate_density(avg.matrix(), 1e-10).is_ok());
    let mp: f64 = e.members.iter().map(|r| r.purity()).sum::<f64>() / e.len() as f64;
    assert!(mp >= avg.purity());
}

#[test]
fn mean_of_symmetric_pair_is_midpoint() {
    let rho = random_density(3, 9);
    let mixed = ComplexMatrix::identity(3).scale_real(1.0 / 3.0);
    let mirrored = &mixed.scale_real(2.0) - rho.matrix();
    let mirrored = validate_density(&mirrored, 1e-12);
    if let Ok(m) = mirrored {
        let avg = mean_state(&[rho.clone(), m]).unwrap();
        assert!(avg.matrix().max_abs_diff(&mixed) < 1e-14);
    }
    let a = DensityMatrix::from_probabilities(&[1.0, 0.0]).unwrap();
    let b = DensityMatrix::from_probabilities(&[0.0, 1.0]).unwrap();
    let avg = mean_state(&[a, b]).unwrap();
    assert!(avg.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
}

#[test]
fn switches_freeze_inputs() {
    let mut cfg = small_config(8, 3);
    cfg.resample = Resample { coupling: true, spectrum: false, env_state: false };
    let a = realization_inputs(&cfg, 0).unwrap();
    let b = realization_inputs(&cfg, 2).unwrap();
    assert_eq!(a.spec.env_spectrum(), b.spec.env_spectrum());
    assert_eq!(a.env_state, b.env_state);
    assert_ne!(a.spec.coupling().matrix(), b.spec.coupling().matrix());
    cfg.resample = Resample { coupling: false, spectrum: true, env_state: true };
    let a = realization_inputs(&cfg, 0).unwrap();
    let b = realization_inputs(&cfg, 2).unwrap();
    assert_eq!(a.spec.coupling().matrix(), b.spec.coupling().matrix());
    assert_ne!(a.spec.env_spectrum(), b.spec.env_spectrum());
}

#[test]
fn center_basis_environment() {
    let mut cfg = small_config(8, 2);
    cfg.env_state = EnvState::CenterBasis;
    let inp = realization_inputs(&cfg, 1).unwrap();
    assert_eq!(inp.env_state, PureState::basis(8, 4).unwrap());
}

#[test]
fn plain_topology_ensemble() {
    let cfg = EnsembleConfig {
        topology: Topology::Plain,
        coupled_spectrum: vec![-0.5, 0.5],
        spectator_spectrum: vec![0.0],
        initial_state: CentralState::Basis { index: 0 },
        ..small_config(8, 20)
    };
    let e = generate_ensemble(&cfg, 4.0, Workers::ALL).unwrap();
    assert!(e.members.iter().all(|m| m.dim() == 2 && m.purity() < 1.0));
    let bad = EnsembleConfig { spectator_spectrum: vec![0.0, 0.0], ..cfg };
    assert!(matches!(generate_ensemble(&bad, 1.0, Workers::ALL), Err(Error::Config(_))));
}

#[test]
fn config_hash_tracks_content() {
    let a = small_config(8, 3);
    let mut b = a.clone();
    assert_eq!(a.hash(), b.hash());
    b.lambda = 0.06;
    assert_ne!(a.hash(), b.hash());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn echo_is_unitary(seed in 0u64..1000, t in 0.0f64..30.0, lambda in 0.0f64..1.0) {
        let spec = spectator_spec(6, lambda, seed);
        let m = echo_operator(&spec, t).unwrap();
        prop_assert!(m.adjoint().matmul(&m).max_abs_diff(&ComplexMatrix::identity(24)) < 1e-9);
    }

    #[test]
    fn reduced_states_are_valid(seed in 0u64..1000, t in 0.0f64..30.0, lambda in 0.0f64..1.0) {
        let spec = plain_spec(3, 6, lambda, seed);
        let rc = random_density(3, seed + 1);
        let re = random_density(6, seed + 2);
        for picture in [Picture::Interaction, Picture::Schroedinger] {
            let r = reduced_state(&spec, &rc, &re, t, picture).unwrap();
            prop_assert!(validate_density(r.matrix(), 1e-10).is_ok());
        }
    }

    #[test]
    fn unitary_conjugation_preserves_purity(seed in 0u64..1000, d in 2usize..6) {
        let rho = random_density(d, seed);
        let u = random_unitary(d, seed + 7);
        prop_assert!((rho.conjugate(&u).purity() - rho.purity()).abs() < 1e-12);
    }
}
