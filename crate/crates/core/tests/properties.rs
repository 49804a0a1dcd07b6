use std::sync::OnceLock;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use yangkit::bethe_two::{reconstruct, two_exc_block, two_exc_compare};
use yangkit::catalog::{
    apply_to_density, apply_to_r, build_hamiltonian_density, build_r_matrix, hsu2_density, hsu2_row,
    HamiltonianParams, ModelSpec, Transform,
};
use yangkit::charges::{
    assemble_charge, check_solution_values, emit_integrability_equations, q2q3_norm_density, Ansatz, ChargeDensity,
    EquationSystem,
};
use yangkit::grading::{compatibility_check, grade_r_matrix, graded_permutation, graded_ybe_residual};
use yangkit::spectrum::{
    cluster_distance, conjugation_asymmetry, density_sector_spectrum, full_spectrum, multiset_distance,
    reduced_from_density, sector_basis, sector_spectrum, Boundary, CLUSTER_TOL,
};
use yangkit::tensor::{cplx, eigen_spectrum, embed_local, kron, permutation_operator, real, ComplexMatrix, C64};
use yangkit::verifier::{braiding_unitarity, verification_grid, ybe_residual};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols).prop_map(move |v| {
        ComplexMatrix::from_vec(rows, cols, v.into_iter().map(|(a, b)| cplx(a, b)).collect()).unwrap()
    })
}

fn near_identity(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(n, n).prop_map(move |m| &ComplexMatrix::identity(n) + &m.scale_re(0.3))
}

fn random_spec(model: u8, seed: u64) -> ModelSpec {
    ModelSpec::random(model, None, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn su2_system() -> &'static EquationSystem {
    static SYSTEM: OnceLock<EquationSystem> = OnceLock::new();
    SYSTEM.get_or_init(|| emit_integrability_equations(&Ansatz::Su2xSu2.density(), 6).unwrap())
}

fn cyclic_shift(l: usize) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(3 * l, 3 * l);
    for block in 0..3 {
        for j in 0..l {
            s[(block * l + (j + 1) % l, block * l + j)] = real(1.0);
        }
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn kron_is_associative(a in matrix(2, 3), b in matrix(3, 2), c in matrix(2, 2)) {
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert!(left.approx_eq(&right, 1e-14));
    }

    #[test]
    fn permutation_is_involutive_and_symmetric(d in 1usize..6) {
        let p = permutation_operator(d);
        prop_assert_eq!(&p * &p, ComplexMatrix::identity(d * d));
        prop_assert_eq!(p.transpose(), p);
    }

    #[test]
    fn embedding_spectrum_is_translation_invariant(op in matrix(16, 16), site in 1usize..=3) {
        let here = eigen_spectrum(embed_local(&op, site, 3, true).unwrap().matrix()).unwrap();
        let there = eigen_spectrum(embed_local(&op, site % 3 + 1, 3, true).unwrap().matrix()).unwrap();
        prop_assert!(multiset_distance(&here, &there) < 1e-8);
    }

    #[test]
    fn spectrum_is_similarity_invariant(a in matrix(8, 8), s in near_identity(8)) {
        let si = s.inverse().unwrap();
        let b = &(&s * &a) * &si;
        let d = multiset_distance(&eigen_spectrum(&a).unwrap(), &eigen_spectrum(&b).unwrap());
        prop_assert!(d < 1e-8, "{d}");
    }

    #[test]
    fn hsu2_densities_keep_their_symmetry(model in 1u8..=12, seed in any::<u64>()) {
        let spec = random_spec(model, seed);
        let h = build_hamiltonian_density(&spec).unwrap();
        let rep = yangkit::catalog::symmetry_rep_for(model).unwrap();
        prop_assert!(yangkit::verifier::symmetry_residual(&h, rep) < 1e-11);
    }

    #[test]
    fn charges_self_commute(model in 1u8..=18, seed in any::<u64>()) {
        let h = build_hamiltonian_density(&random_spec(model, seed)).unwrap();
        let q2 = assemble_charge(&ChargeDensity::new(h).unwrap(), 3, true).unwrap();
        prop_assert_eq!(q2.commutator(&q2).unwrap().matrix().max_abs(), 0.0);
    }

    #[test]
    fn integrability_survives_basis_change(model in prop::sample::select(vec![4u8, 9, 13, 16]), v in near_identity(4), seed in any::<u64>()) {
        let h = build_hamiltonian_density(&random_spec(model, seed)).unwrap();
        let hv = apply_to_density(&Transform::BasisChange(v), &h).unwrap();
        let before = q2q3_norm_density(&h, 6).unwrap();
        let after = q2q3_norm_density(&hv, 6).unwrap();
        prop_assert!(before < 1e-9 && after < 1e-9 * hv.max_abs().powi(3).max(1.0), "{before} {after}");
    }

    #[test]
    fn symbolic_and_numeric_norms_agree(x in prop::collection::vec(-1.0f64..1.0, 10)) {
        let values: Vec<C64> = x.iter().map(|&v| real(v)).collect();
        let p = HamiltonianParams::from_array(values.clone().try_into().unwrap());
        let numeric = q2q3_norm_density(&hsu2_density(&p), 6).unwrap();
        let symbolic = check_solution_values(&su2_system().equations, &values);
        prop_assert!((numeric - symbolic).abs() < 1e-9, "{numeric} vs {symbolic}");
    }

    #[test]
    fn derived_r_matrices_solve_ybe(model in 1u8..=12, seed in any::<u64>(), v in near_identity(4)) {
        let r = build_r_matrix(&random_spec(model, seed)).unwrap();
        let grid = verification_grid(&r, 4, seed);
        for t in [Transform::Prp, Transform::Transpose, Transform::BasisChange(v), Transform::normalization(|u| real(1.0) + u * u)] {
            let rt = apply_to_r(&t, &r).unwrap();
            for &(a, b) in &grid {
                prop_assert!(ybe_residual(&rt, a, b).unwrap() < 1e-9, "{}", t.name());
            }
        }
    }

    #[test]
    fn unitarity_scalar_is_even(model in 1u8..=14, seed in any::<u64>(), u in 0.05f64..0.45) {
        let r = build_r_matrix(&random_spec(model, seed)).unwrap();
        if r.pole_distance(real(u)) > 0.05 && r.pole_distance(real(-u)) > 0.05 {
            let (cp, _) = braiding_unitarity(&r, real(u)).unwrap();
            let (cm, _) = braiding_unitarity(&r, real(-u)).unwrap();
            prop_assert!((cp - cm).norm() < 1e-9 * cp.norm().max(1.0));
        }
    }

    #[test]
    fn graded_and_ungraded_ybe_agree(model in 1u8..=14, seed in any::<u64>()) {
        let r = build_r_matrix(&random_spec(model, seed)).unwrap();
        if compatibility_check(&r) {
            let rf = grade_r_matrix(&r).unwrap();
            for (a, b) in verification_grid(&r, 4, seed) {
                prop_assert!(ybe_residual(&r, a, b).unwrap() < 1e-9);
                prop_assert!(graded_ybe_residual(&rf, a, b).unwrap() < 1e-9);
            }
            prop_assert!(rf.at(real(0.0)).unwrap().max_abs_diff(&graded_permutation()) < 1e-12);
        }
    }

    #[test]
    fn sectors_do_not_leak(model in 1u8..=18, seed in any::<u64>(), p in 0usize..=8) {
        let h = build_hamiltonian_density(&random_spec(model, seed)).unwrap();
        let reduced = reduced_from_density(&h, &sector_basis(4, p).unwrap()).unwrap();
        prop_assert!(reduced.leakage < 1e-12);
    }

    #[test]
    fn twist_angle_leaves_spectra_unchanged(model in 8u8..=12, rho in 0.3f64..1.5, phi in -1.0f64..1.0) {
        let base = full_spectrum(&ModelSpec::real(model, &[("rho", rho), ("phi", 0.0)]), 3).unwrap();
        let twisted = full_spectrum(&ModelSpec::real(model, &[("rho", rho), ("phi", phi)]), 3).unwrap();
        for (x, y) in base.iter().zip(&twisted) {
            prop_assert!(cluster_distance(&x.clusters, &y.clusters) < 1e-8);
        }
    }

    #[test]
    fn a_term_leaves_closed_chain_spectra_unchanged(model in 4u8..=7, rho in 0.3f64..1.5, a in -1.0f64..1.0) {
        let spec = |a: f64| ModelSpec::real(model, &[("rho", rho), ("a", a), ("phi", 0.2)]);
        let base = full_spectrum(&spec(0.0), 3).unwrap();
        let shifted = full_spectrum(&spec(a), 3).unwrap();
        for (x, y) in base.iter().zip(&shifted) {
            prop_assert!(cluster_distance(&x.clusters, &y.clusters) < 1e-8);
        }
    }

    #[test]
    fn model8_spectra_are_conjugation_symmetric(rho in 0.3f64..1.5, p in 0usize..=8) {
        let r = sector_spectrum(&ModelSpec::real(8, &[("rho", rho), ("phi", 0.0)]), 4, p, CLUSTER_TOL).unwrap();
        prop_assert!(conjugation_asymmetry(&r) < 1e-8);
    }

    #[test]
    fn models9_10_are_hermitian(model in 9u8..=10, rho in 0.3f64..1.5, p in 0usize..=8) {
        let r = sector_spectrum(&ModelSpec::real(model, &[("rho", rho), ("phi", 0.0)]), 4, p, CLUSTER_TOL).unwrap();
        prop_assert!(r.hermitian);
        prop_assert!(r.clusters.iter().all(|c| c.value.im.abs() < 1e-9));
    }

    #[test]
    fn bethe_block_commutes_with_translation(model in 8u8..=10, l in 3usize..=6, rho in 0.3f64..1.5, phi in -1.0f64..1.0) {
        let p = hsu2_row(&ModelSpec::real(model, &[("rho", rho), ("phi", phi)])).unwrap();
        let b = two_exc_block(&p, l).unwrap().block;
        let t = cyclic_shift(l);
        prop_assert!((&t * &b).approx_eq(&(&b * &t), 1e-14));
        let shifted = &(&t * &b) * &t.transpose();
        prop_assert!(multiset_distance(&eigen_spectrum(&b).unwrap(), &eigen_spectrum(&shifted).unwrap()) < 1e-8);
    }

    #[test]
    fn bethe_states_are_eigenstates(model in 8u8..=10, l in 3usize..=5, rho in 0.3f64..1.5, phi in -1.0f64..1.0) {
        let r = two_exc_compare(&ModelSpec::real(model, &[("rho", rho), ("phi", phi)]), l).unwrap();
        prop_assert!(r.max_residual < 1e-9, "{}", r.max_residual);
        prop_assert!(r.distance < 1e-8, "{}", r.distance);
    }
}

#[test]
fn reconstruction_is_injective() {
    let p = hsu2_row(&ModelSpec::real(9, &[("rho", 1.0), ("phi", 0.0)])).unwrap();
    let block = two_exc_block(&p, 4).unwrap();
    let basis = sector_basis(4, 2).unwrap();
    for col in 0..12 {
        let mut e = vec![real(0.0); 12];
        e[col] = real(1.0);
        let v = reconstruct(&block, &e, &basis);
        assert_eq!(v.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }
}

#[test]
fn graded_boundary_matches_periodic_on_even_states() {
    let h = build_hamiltonian_density(&ModelSpec::real(9, &[("rho", 1.0), ("phi", 0.0)])).unwrap();
    let a = density_sector_spectrum(&h, 9, "m9", 3, 0, CLUSTER_TOL, Boundary::Periodic).unwrap();
    let b = density_sector_spectrum(&h, 9, "m9", 3, 0, CLUSTER_TOL, Boundary::Graded).unwrap();
    assert!(cluster_distance(&a.clusters, &b.clusters) < 1e-12);
}
