use std::f64::consts::FRAC_1_SQRT_2;

use proptest::prelude::*;
use superrad_core::basis::LevelScheme;
use superrad_core::dynamics::symmetric_amplitudes;
use superrad_core::entanglement::{embed_basis, partial_trace};
use superrad_core::linalg::hermitian_eigenvalues;
use superrad_core::photonic::{
    fla_final_mixture, g_value, mode_independence_check, path_count, path_populations,
    v_final_state, ModeIndependence, Witness,
};
use superrad_core::{Error, C64};

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn pair() -> impl Strategy<Value = (C64, C64)> {
    (0.0f64..1.0, 0.0f64..6.3, 0.0f64..6.3).prop_map(|(p, a, b)| {
        (
            C64::from_polar(p.sqrt(), a),
            C64::from_polar((1.0 - p).sqrt(), b),
        )
    })
}

fn equal() -> LevelScheme {
    LevelScheme::four_level_equal(7.0, 1.0, 1.0)
}

#[test]
fn v_state_amplitudes_follow_binomials() {
    let m = v_final_state(2, c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)).unwrap();
    let s = &m.components[0].state;
    let k = 1.0 / 6f64.sqrt();
    for (occ, want) in [([2, 0], k), ([1, 1], 2.0 * k), ([0, 2], k)] {
        assert!((s.amplitude(&occ) - c(want)).norm() < 1e-15);
    }
}

#[test]
fn path_counts_are_binomial() {
    assert_eq!(path_count(4, 2), 6);
    assert_eq!(path_count(8, 3), 56);
    assert_eq!(path_count(3, 5), 0);
}

#[test]
fn single_fla_density_matrix_matches_uniform_mixture() {
    // p = 1/2 over the two final ground states
    let a = C64::new(0.6, 0.0);
    let b = C64::new(0.0, 0.8);
    let m = fla_final_mixture(&equal(), 1, a, b).unwrap();
    assert_eq!(m.components.len(), 2);
    let rho = m.density_matrix();
    let bs = m.basis();
    let i = |o: [u32; 3]| bs.index_of(&o).unwrap();
    let want = [
        (([1, 0, 0], [1, 0, 0]), a * a.conj() / 2.0),
        (([0, 1, 0], [0, 1, 0]), (a * a.conj() + b * b.conj()) / 2.0),
        (([0, 0, 1], [0, 0, 1]), b * b.conj() / 2.0),
        (([1, 0, 0], [0, 1, 0]), a * b.conj() / 2.0),
        (([0, 1, 0], [0, 0, 1]), a * b.conj() / 2.0),
        (([1, 0, 0], [0, 0, 1]), c(0.0)),
    ];
    for ((r, s), v) in want {
        assert!((rho[(i(r), i(s))] - v).norm() < 1e-15, "{r:?} {s:?}");
    }
}

#[test]
fn two_fla_purity_matches_gram_of_closed_form() {
    let a = C64::new(0.5, 0.3);
    let b = C64::new((1.0 - a.norm_sqr()).sqrt(), 0.0);
    let amps = symmetric_amplitudes(2, a, b).unwrap();
    let (a0, a1, a2) = (amps[2], amps[1], amps[0]);
    let r = FRAC_1_SQRT_2;
    // components as maps over (n-, n0, n+)
    let phi: [Vec<([u32; 3], C64)>; 3] = [
        vec![([2, 0, 0], a0), ([1, 1, 0], a1), ([0, 2, 0], a2)],
        vec![
            ([1, 1, 0], a0),
            ([0, 2, 0], a1 * r),
            ([1, 0, 1], a1 * r),
            ([0, 1, 1], a2),
        ],
        vec![([0, 2, 0], a0), ([0, 1, 1], a1), ([0, 0, 2], a2)],
    ];
    let inner = |x: &[([u32; 3], C64)], y: &[([u32; 3], C64)]| -> C64 {
        x.iter()
            .map(|(o, u)| {
                y.iter()
                    .filter(|(p, _)| p == o)
                    .map(|(_, v)| u.conj() * v)
                    .sum::<C64>()
            })
            .sum()
    };
    let mut purity = 0.0;
    for x in &phi {
        for y in &phi {
            purity += inner(x, y).norm_sqr() / 9.0;
        }
    }
    let rho = fla_final_mixture(&equal(), 2, a, b)
        .unwrap()
        .density_matrix();
    let got = (&rho * &rho).trace().re;
    assert!((got - purity).abs() < 1e-12);
}

#[test]
fn unequal_rates_are_rejected() {
    let s = LevelScheme::FourLevel {
        omega0: 7.0,
        delta: 1.0,
        gamma: [[1.0, 0.5], [0.5, 1.0]],
        gamma_plus: 1.0,
        gamma_minus: 1.0,
    };
    assert!(matches!(
        fla_final_mixture(&s, 2, c(1.0), c(0.0)),
        Err(Error::UnequalRates(_))
    ));
}

#[test]
fn single_fla_witness_is_an_overlapping_pair() {
    let m = fla_final_mixture(&equal(), 1, c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)).unwrap();
    match mode_independence_check(&m).unwrap() {
        ModeIndependence::ModeIndependentEntangled {
            witness: Witness::Overlap { overlap, .. },
        } => assert!((overlap - 0.5).abs() < 1e-10),
        other => panic!("{other:?}"),
    }
}

#[test]
fn lambda_limit_components_are_fock_states() {
    let m = fla_final_mixture(&equal(), 2, c(1.0), c(0.0)).unwrap();
    let want = [[2, 0, 0], [1, 1, 0], [0, 2, 0]];
    for (comp, occ) in m.components.iter().zip(want.iter()) {
        assert!(
            (comp.state.amplitude(occ).norm() - 1.0).abs() < 1e-14,
            "{}",
            comp.label
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn imprint_is_independent_of_linewidths(n in 1usize..7, (a, b) in pair(), w1 in 0.1f64..100.0, w2 in 0.1f64..100.0) {
        let amps = symmetric_amplitudes(n, a, b).unwrap();
        let pops = path_populations(n, w1, w2, &amps).unwrap();
        for (p, x) in pops.iter().zip(&amps) {
            prop_assert!((p - x.norm_sqr()).abs() < 1e-10);
        }
    }

    #[test]
    fn g_recursion_closed_form(n in 0usize..9, k in 0usize..9, w1 in 0.2f64..5.0, w2 in 0.2f64..5.0) {
        prop_assume!(k <= n);
        let g = g_value(n, k, w1, w2).unwrap();
        let fact = |m: usize| (1..=m).map(|x| x as f64).product::<f64>();
        let want = 1.0 / (fact(k) * fact(n - k) * w1.powi(k as i32) * w2.powi((n - k) as i32));
        prop_assert!((g - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn fla_mixture_is_a_valid_state(n in 1usize..5, (a, b) in pair()) {
        let m = fla_final_mixture(&equal(), n, a, b).unwrap();
        prop_assert!((m.total_probability() - 1.0).abs() < 1e-12);
        for comp in &m.components {
            prop_assert!((comp.probability - 1.0 / (n as f64 + 1.0)).abs() < 1e-12);
            prop_assert!((comp.state.norm() - 1.0).abs() < 1e-12);
        }
        let rho = m.density_matrix();
        prop_assert!((rho.trace() - c(1.0)).norm() < 1e-12);
        prop_assert!(hermitian_eigenvalues(&rho)[0] > -1e-12);
    }

    #[test]
    fn tracing_w0_of_single_fla_is_diagonal(( a, b) in pair()) {
        let m = fla_final_mixture(&equal(), 1, a, b).unwrap();
        let (rho, f) = embed_basis(m.basis(), &m.density_matrix(), m.modes().to_vec()).unwrap();
        let (red, _) = partial_trace(&rho, &f, &[1]).unwrap();
        for i in 0..red.nrows() {
            for j in 0..red.ncols() {
                if i != j {
                    prop_assert!(red[(i, j)].norm() < 1e-15);
                }
            }
        }
    }
}
