//! Invariants checked on randomly drawn inputs.

use num_complex::Complex64;
use proptest::prelude::*;
use torus_vrep::gibbs::{density_matrix, free_energy};
use torus_vrep::inversion::dual_objective;
use torus_vrep::operators::{klmn_estimate_combined, potential_matrix};
use torus_vrep::verify::{check_gibbs_minimality, check_relative_entropy, StateRecipe};
use torus_vrep::*;

fn coeff() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b))
}

fn potential(max_modes: usize) -> impl Strategy<Value = PotentialField> {
    prop::collection::vec(coeff(), 1..=max_modes).prop_map(|c| PotentialField::from_coefficients(c).unwrap())
}

fn setting() -> impl Strategy<Value = (usize, usize, f64, f64)> {
    (1usize..=2, 1usize..=3, 0.1f64..5.0, 0.0f64..1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ensemble_invariants((k, n, beta, g) in setting(), v in potential(2)) {
        let basis = build_basis(k, n).unwrap();
        let w = InteractionSpec::cosine(g).unwrap();
        let ens = forward(&basis, &v, &w, beta, TorusGrid::for_basis(&basis)).unwrap();
        let sum: f64 = ens.weights.values().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        prop_assert!(ens.weights.log_values().iter().all(|l| l.is_finite()));
        prop_assert!(ens.thermodynamic_identity_residual() <= 1e-12);
        prop_assert!(ens.entropy >= -1e-14);
        prop_assert!((ens.one_rdm.trace() - n as f64).abs() <= 1e-10);
        for occ in ens.one_rdm.occupations() {
            prop_assert!((-1e-10..=1.0 + 1e-10).contains(&occ));
        }
        prop_assert_eq!(ens.density.fourier()[0], Complex64::new(n as f64, 0.0));
        prop_assert!(ens.density.min_value() > 0.0);
        prop_assert!(ens.kinetic_energy >= 0.0);
        let bound = 2.0 * ens.kinetic_energy + 1e-8;
        prop_assert!(ens.density.sqrt_seminorm_squared().unwrap() <= bound);
    }

    #[test]
    fn hamiltonian_is_hermitian((k, n, _beta, g) in setting(), v in potential(4)) {
        let basis = build_basis(k, n).unwrap();
        let v = v.with_cutoff(v.cutoff().min(2 * k));
        let h = assemble_hamiltonian(&basis, &v, &InteractionSpec::cosine(g).unwrap()).unwrap();
        prop_assert_eq!(h.hermiticity_defect(), 0.0);
    }

    #[test]
    fn gauge_shift((k, n, beta, g) in setting(), v in potential(2), c in -3.0f64..3.0) {
        let basis = build_basis(k, n).unwrap();
        let w = InteractionSpec::cosine(g).unwrap();
        let a = free_energy(&basis, &v, &w, beta).unwrap();
        let b = free_energy(&basis, &v.shifted(c), &w, beta).unwrap();
        prop_assert!((b - a - n as f64 * c).abs() <= 1e-11 * (1.0 + a.abs()));
    }

    #[test]
    fn pairing_is_potential_energy((k, n, beta, g) in setting(), v in potential(2)) {
        let basis = build_basis(k, n).unwrap();
        let w = InteractionSpec::cosine(g).unwrap();
        let ens = forward(&basis, &v, &w, beta, TorusGrid::for_basis(&basis)).unwrap();
        let gamma = density_matrix(&ens.spectrum, &ens.weights);
        let tr = (&gamma * potential_matrix(&basis, &v).unwrap()).trace();
        prop_assert!((tr.re - ens.density.pairing(&v)).abs() <= 1e-11 * (1.0 + tr.re.abs()));
    }

    #[test]
    fn omega_is_strictly_concave((k, n, beta, g) in setting(), v1 in potential(2), v2 in potential(2)) {
        prop_assume!(v1.combine(1.0, &v2, -1.0).coordinates().iter().any(|x| x.abs() > 0.05));
        let basis = build_basis(k, n).unwrap();
        let w = InteractionSpec::cosine(g).unwrap();
        let mid = v1.combine(0.5, &v2, 0.5);
        let gap = free_energy(&basis, &mid, &w, beta).unwrap()
            - 0.5 * free_energy(&basis, &v1, &w, beta).unwrap()
            - 0.5 * free_energy(&basis, &v2, &w, beta).unwrap();
        prop_assert!(gap > 0.0, "gap {gap:e}");
    }

    #[test]
    fn sandwich_holds_with_estimated_b((k, n, _beta, g) in setting(), v in potential(2), a in 0.1f64..0.9) {
        let basis = build_basis(k, n).unwrap();
        let w = InteractionSpec::cosine(g).unwrap();
        let b = klmn_estimate_combined(&basis, &v, &w, a).unwrap();
        let r = torus_vrep::verify::check_eigenvalue_sandwich(&v, &w, a, b, &basis).unwrap();
        prop_assert!(r.passed, "{:?}", r);
    }

    #[test]
    fn relative_entropy_identity((k, n, beta, g) in setting(), v in potential(2), trace in 0.05f64..2.0, seed in any::<u64>()) {
        let basis = build_basis(k, n).unwrap();
        let w = InteractionSpec::cosine(g).unwrap();
        let r = check_relative_entropy(&v, &w, beta, &basis, StateRecipe::Random { trace, seed }).unwrap();
        prop_assert!(r.passed, "{:?}", r);
    }

    #[test]
    fn gibbs_state_minimizes_helmholtz((k, n, beta, g) in setting(), v in potential(2), seed in any::<u64>()) {
        let basis = build_basis(k, n).unwrap();
        let w = InteractionSpec::cosine(g).unwrap();
        let r = check_gibbs_minimality(&v, &w, beta, &basis, 8, seed).unwrap();
        prop_assert!(r.passed, "{:?}", r);
    }

    #[test]
    fn dual_objective_ignores_constant((k, n, beta, _g) in setting(), v in potential(2), c in -5.0f64..5.0) {
        let basis = build_basis(k, n).unwrap();
        let w = InteractionSpec::none();
        let target = forward(&basis, &PotentialField::from_coefficients(vec![Complex64::new(0.2, 0.1)]).unwrap(), &w, beta, TorusGrid::for_basis(&basis)).unwrap().density;
        let a = dual_objective(&v, &target, beta, &basis, &w).unwrap();
        let b = dual_objective(&v.shifted(c), &target, beta, &basis, &w).unwrap();
        prop_assert_eq!(a.value, b.value);
        prop_assert_eq!(a.gradient, b.gradient);
    }

    #[test]
    fn dual_norm_is_homogeneous(v in potential(4), s in -4.0f64..4.0) {
        let a = dual_norm(&v.scaled(s));
        prop_assert!((a - s.abs() * dual_norm(&v)).abs() <= 1e-12 * (1.0 + a));
    }

    #[test]
    fn sampled_density_round_trip(c in prop::collection::vec(coeff(), 1..4), n in 1usize..4) {
        let mut fourier = vec![Complex64::new(n as f64, 0.0)];
        fourier.extend(c.iter().map(|x| x * 0.1));
        let grid = TorusGrid::new(32).unwrap();
        let d = DensityProfile::new(n, fourier, grid).unwrap();
        let back = DensityProfile::from_grid_samples(n, d.grid_values(), 8).unwrap();
        prop_assert!(back.l2_distance(&d) < 1e-13);
    }

    #[test]
    fn fermionic_anticommutation(i in 0usize..10, j in 0usize..10, bits in 0u64..1024) {
        prop_assume!(i != j);
        let det = Determinant::from_bits(bits);
        let ij = det.create(j).and_then(|(d, s1)| d.create(i).map(|(d, s2)| (d, s1 * s2)));
        let ji = det.create(i).and_then(|(d, s1)| d.create(j).map(|(d, s2)| (d, s1 * s2)));
        match (ij, ji) {
            (Some((a, sa)), Some((b, sb))) => { prop_assert_eq!(a, b); prop_assert_eq!(sa, -sb); }
            (None, None) => {}
            _ => prop_assert!(false, "creation order changed occupancy"),
        }
    }
}
