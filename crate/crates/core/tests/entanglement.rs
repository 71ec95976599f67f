use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use superrad_core::entanglement::{
    conditional_entropy, embed_basis, negativity, partial_trace, partial_transpose,
    peres_min_eigenvalue, von_neumann_entropy, Factorization,
};
use superrad_core::linalg::hermitian_eigenvalues;
use superrad_core::photonic::v_final_state;
use superrad_core::C64;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn random_matrix(d: usize, s: &[f64], off: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |i, j| {
        let k = off + i * d + j;
        C64::new(s[k % s.len()], s[(7 * k + 3) % s.len()])
    })
}

fn random_density(d: usize, s: &[f64]) -> DMatrix<C64> {
    let a = random_matrix(d, s, 0);
    let r = &a * a.adjoint();
    let t = r.trace();
    r / t
}

fn random_unitary(d: usize, s: &[f64], off: usize) -> DMatrix<C64> {
    (random_matrix(d, s, off) + DMatrix::identity(d, d) * c(0.3))
        .qr()
        .q()
}

fn two_qubits() -> Factorization {
    Factorization::new(vec![2, 3], vec!["A".into(), "B".into()]).unwrap()
}

#[test]
fn bell_state_quantities() {
    let f = Factorization::new(vec![2, 2], vec!["A".into(), "B".into()]).unwrap();
    let mut psi = DVector::zeros(4);
    psi[1] = c(0.5f64.sqrt());
    psi[2] = c(0.5f64.sqrt());
    let rho = &psi * psi.adjoint();
    assert!((peres_min_eigenvalue(&rho, &f, &[0]).unwrap() + 0.5).abs() < 1e-12);
    assert!((negativity(&rho, &f, &[1]).unwrap() - 0.5).abs() < 1e-12);
    let ln2 = 2f64.ln();
    assert!((conditional_entropy(&rho, &f, &[1]).unwrap() + ln2).abs() < 1e-10);
    assert!(von_neumann_entropy(&rho).unwrap().abs() < 1e-10);
}

#[test]
fn entropies_of_reference_states() {
    let mixed = DMatrix::<C64>::identity(3, 3) / c(3.0);
    assert!((von_neumann_entropy(&mixed).unwrap() - 3f64.ln()).abs() < 1e-12);
    let mut two = DMatrix::<C64>::zeros(4, 4);
    two[(0, 0)] = c(0.5);
    two[(3, 3)] = c(0.5);
    assert!((von_neumann_entropy(&two).unwrap() - 2f64.ln()).abs() < 1e-12);
    let mut bad = DMatrix::<C64>::zeros(2, 2);
    bad[(0, 0)] = c(1.1);
    bad[(1, 1)] = c(-0.1);
    assert!(von_neumann_entropy(&bad).is_err());
}

#[test]
fn single_v_atom_negativity_is_one_half() {
    let s = 0.5f64.sqrt();
    let m = v_final_state(1, c(s), c(s)).unwrap();
    let (rho, f) = embed_basis(m.basis(), &m.density_matrix(), m.modes().to_vec()).unwrap();
    assert!((negativity(&rho, &f, &[0]).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn v_negativity_is_monotone_in_n_at_half() {
    let s = 0.5f64.sqrt();
    let mut prev = 0.0;
    for n in 1..=8 {
        let m = v_final_state(n, c(s), c(s)).unwrap();
        let (rho, f) = embed_basis(m.basis(), &m.density_matrix(), m.modes().to_vec()).unwrap();
        let v = negativity(&rho, &f, &[0]).unwrap();
        assert!(v >= prev);
        prev = v;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_transpose_is_an_involution(s in prop::collection::vec(-1.0f64..1.0, 40)) {
        let f = two_qubits();
        let a = random_matrix(6, &s, 0);
        let h = &a + a.adjoint();
        let twice = partial_transpose(&partial_transpose(&h, &f, &[0]).unwrap(), &f, &[0]).unwrap();
        prop_assert!((twice - &h).norm() < 1e-14);
    }

    #[test]
    fn negativity_matches_trace_norm(s in prop::collection::vec(-1.0f64..1.0, 40)) {
        let f = two_qubits();
        let rho = random_density(6, &s);
        let pt = partial_transpose(&rho, &f, &[1]).unwrap();
        let trace_norm: f64 = pt.clone().svd(false, false).singular_values.iter().sum();
        let neg = negativity(&rho, &f, &[1]).unwrap();
        prop_assert!((neg - (trace_norm - 1.0) / 2.0).abs() < 1e-12);
        let sum_neg: f64 = hermitian_eigenvalues(&pt).iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
        prop_assert!((neg - sum_neg).abs() < 1e-12);
    }

    #[test]
    fn negativity_is_local_unitary_invariant(s in prop::collection::vec(-1.0f64..1.0, 40)) {
        let f = two_qubits();
        let rho = random_density(6, &s);
        let u = random_unitary(2, &s, 11).kronecker(&random_unitary(3, &s, 17));
        let rotated = &u * &rho * u.adjoint();
        let a = negativity(&rho, &f, &[0]).unwrap();
        let b = negativity(&rotated, &f, &[0]).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn entropy_is_additive_and_trace_recovers_factors(s in prop::collection::vec(-1.0f64..1.0, 40)) {
        let ra = random_density(2, &s);
        let rb = random_density(3, &s[5..]);
        let prod = ra.kronecker(&rb);
        let total = von_neumann_entropy(&prod).unwrap();
        let parts = von_neumann_entropy(&ra).unwrap() + von_neumann_entropy(&rb).unwrap();
        prop_assert!((total - parts).abs() < 1e-10);
        let (red, rf) = partial_trace(&prod, &two_qubits(), &[1]).unwrap();
        prop_assert_eq!(rf.dims.clone(), vec![2]);
        prop_assert!((red - ra).norm() < 1e-12);
    }

    #[test]
    fn pure_bipartite_conditional_entropy(s in prop::collection::vec(-1.0f64..1.0, 40)) {
        let f = two_qubits();
        let psi = DVector::from_fn(6, |i, _| C64::new(s[i], s[i + 10]));
        let psi = &psi / c(psi.norm());
        let rho = &psi * psi.adjoint();
        let (rb, _) = partial_trace(&rho, &f, &[0]).unwrap();
        let ce = conditional_entropy(&rho, &f, &[0]).unwrap();
        prop_assert!((ce + von_neumann_entropy(&rb).unwrap()).abs() < 1e-9);
    }
}
