mod common;

use ccd_lab::capacity::{capacity, capacity_is_maximal, concurrence_spectrum, multiset_distance};
use ccd_lab::ccd::{ccd, polar_time_reversal};
use ccd_lab::linalg::{
    eig_hermitian, exp_i_hermitian, frob, haar_special_unitary, haar_unitary, identity, kron, random_state, task_rng, Tolerances,
};
use ccd_lab::spinchain::{build_hamiltonian, critical_field, SpinChainSpec};
use ccd_lab::spinflip::{concurrence, product_state, spin_flip_matrix, time_antisymmetric_part};
use num_complex::Complex64;
use proptest::prelude::*;

use common::{capacity_oracle, sector_ground_energy, spin_flip_by_kron, xy_field_by_paulis};

fn tol() -> Tolerances {
    Tolerances::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ccd_reconstructs_and_respects_structure(n in 1usize..=5, seed in any::<u64>()) {
        let v = haar_unitary(1 << n, &mut task_rng(seed, 0));
        let f = ccd(&v, n, &tol()).unwrap();
        let rebuilt = (&f.k1 * &f.a * &f.k2).map(|z| z * f.phase);
        prop_assert!(frob(&(rebuilt - &v)) <= 1e-9 * 2f64.powf(n as f64 / 2.0));
        prop_assert!(f.k_residual() <= 1e-9);
        prop_assert!(f.a_form_residual() <= 1e-9);
    }

    #[test]
    fn spectrum_is_invariant_under_local_unitaries(seed in any::<u64>()) {
        let mut rng = task_rng(seed, 1);
        let v = haar_unitary(8, &mut rng);
        let locals: Vec<_> = (0..6).map(|_| haar_special_unitary(2, &mut rng)).collect();
        let left = kron(&kron(&locals[0], &locals[1]).unwrap(), &locals[2]).unwrap();
        let right = kron(&kron(&locals[3], &locals[4]).unwrap(), &locals[5]).unwrap();
        let a = concurrence_spectrum(&v, 3, &tol()).unwrap();
        let b = concurrence_spectrum(&(left * &v * right), 3, &tol()).unwrap();
        prop_assert!(multiset_distance(&a.points, &b.points) <= 1e-8);
    }

    #[test]
    fn capacity_bounds_state_concurrence(n in 2usize..=4, seed in any::<u64>()) {
        let mut rng = task_rng(seed, 2);
        let v = haar_unitary(1 << n, &mut rng);
        let k = capacity(&v, n, &tol()).unwrap().value;
        prop_assert!((0.0..=1.0 + 1e-12).contains(&k));
        // A product state reaches at most the capacity after one application.
        let factors: Vec<_> = (0..n).map(|_| random_state(2, &mut rng)).collect();
        let psi = product_state(&factors);
        prop_assert!(concurrence(&psi).unwrap() <= 1e-10);
        prop_assert!(concurrence(&(&v * psi)).unwrap() <= k + 1e-9);
    }

    #[test]
    fn polar_factors_reconstruct(n in 1usize..=4, seed in any::<u64>()) {
        let v = haar_unitary(1 << n, &mut task_rng(seed, 3));
        let p = polar_time_reversal(&v, n, &tol()).unwrap();
        let lhs = exp_i_hermitian(&p.hp, 1.0, 1e-9).unwrap() * exp_i_hermitian(&p.hk, 1.0, 1e-9).unwrap();
        prop_assert!(frob(&(lhs - &v)) <= 1e-9);
        prop_assert!(p.p_residual <= 1e-9 && p.k_residual <= 1e-9);
    }

    #[test]
    fn time_antisymmetric_evolutions_have_zero_capacity(n in 2usize..=4, seed in any::<u64>()) {
        let mut rng = task_rng(seed, 4);
        let h = time_antisymmetric_part(&ccd_lab::linalg::random_hermitian(1 << n, &mut rng));
        let k = exp_i_hermitian(&h, 1.0, 1e-9).unwrap();
        prop_assert!(capacity(&k, n, &tol()).unwrap().value <= 1e-8);
        prop_assert!(!capacity_is_maximal(&k, n, &tol()).unwrap());
    }
}

#[test]
fn capacity_matches_sampling_oracle() {
    for n in 1..=4usize {
        for i in 0..4 {
            let v = haar_unitary(1 << n, &mut task_rng(40 + n as u64, i));
            let r = capacity(&v, n, &tol()).unwrap();
            let want = capacity_oracle(r.spectrum.capacity_points());
            assert!((r.value - want).abs() <= 1e-6, "n={n}: {} vs {want}", r.value);
        }
    }
}

#[test]
fn spin_flip_matches_kronecker_product() {
    for n in 1..=5 {
        let d = frob(&(spin_flip_matrix(n) - spin_flip_by_kron(n)));
        assert!(d == 0.0, "n={n}: {d}");
    }
}

#[test]
fn field_chain_builder_matches_pauli_sum() {
    for (n, j, g, h) in [(3, 1.0, 0.0, 0.4), (4, 0.7, 0.3, 1.1), (5, -1.2, -0.5, 0.2)] {
        let built = build_hamiltonian(&SpinChainSpec::xy_field(n, j, g, h)).unwrap();
        assert!(frob(&(built - xy_field_by_paulis(n, j, g, h))) <= 1e-13);
    }
}

#[test]
fn xy_crossing_at_four_sites() {
    let h_at = |f: f64| xy_field_by_paulis(4, 1.0, 0.0, f);
    // The zero-magnetization and fully polarized-minus-one sectors cross
    // where their lowest energies meet.
    let gap = |f: f64| sector_ground_energy(&h_at(f), 4, 0).unwrap() - sector_ground_energy(&h_at(f), 4, -2).unwrap();
    let (mut lo, mut hi) = (0.0, 3.0);
    assert!(gap(lo) < 0.0 && gap(hi) > 0.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);
    assert!((oracle - 0.414_213_56).abs() < 1e-7, "{oracle}");
    let found = critical_field(4, 1.0, 0.0, 0.0, 3.0, &tol()).unwrap().unwrap();
    assert!((found - oracle).abs() < 1e-8, "{found} vs {oracle}");
}

#[test]
fn identity_has_zero_capacity_and_doubled_spectrum() {
    for n in 1..=5 {
        let dim = 1usize << n;
        let r = capacity(&identity(dim), n, &tol()).unwrap();
        assert!(r.value.abs() <= 1e-12);
        let ones = vec![Complex64::new(1.0, 0.0); dim];
        assert!(multiset_distance(&r.spectrum.points, &ones) <= 1e-12);
        let e = eig_hermitian(&identity(dim), 1e-12).unwrap();
        assert!(e.values.iter().all(|&x| (x - 1.0).abs() < 1e-14));
    }
}
