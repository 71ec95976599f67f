use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use superrad_core::basis::{DensityTensor, LevelScheme, OccupationBasis};
use superrad_core::dynamics::{
    coherence_spectrum, detect_peak, integrate, spectrum, steady_state_time, symmetric_init,
    Generator, IntegratorConfig, IntensityModel,
};
use superrad_core::C64;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn v_nondeg() -> LevelScheme {
    LevelScheme::VNondegenerate {
        omega1: 1.6,
        omega2: 1.0,
        gamma1: 1.0,
        gamma2: 0.4,
    }
}

fn v_deg(g: f64, g12: f64) -> LevelScheme {
    LevelScheme::VDegenerate {
        omega0: 3.0,
        gamma: [[g, g12], [g12, g]],
    }
}

fn fla(g12: f64) -> LevelScheme {
    LevelScheme::FourLevel {
        omega0: 7.0,
        delta: 1.0,
        gamma: [[1.0, g12], [g12, 0.8]],
        gamma_plus: 0.5,
        gamma_minus: 0.7,
    }
}

/// Collective lowering `source -> target` built from the occupation table.
fn lowering(b: &OccupationBasis, source: usize, target: usize) -> DMatrix<C64> {
    let d = b.len();
    let mut m = DMatrix::zeros(d, d);
    for j in 0..d {
        let s = b.state(j).to_vec();
        if s[source] == 0 {
            continue;
        }
        let mut t = s.clone();
        t[source] -= 1;
        t[target] += 1;
        let i = b.index_of(&t).unwrap();
        m[(i, j)] = c((s[source] as f64 * (s[target] as f64 + 1.0)).sqrt());
    }
    m
}

/// Dense column-stacked Lindbladian: vec(A X B) = (B^T kron A) vec(X).
fn kron_lindbladian(scheme: &LevelScheme, n: usize) -> DMatrix<C64> {
    let b = OccupationBasis::new(n, scheme.num_levels()).unwrap();
    let d = b.len();
    let e = scheme.level_energies();
    let h = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            c(b.state(i).iter().zip(&e).map(|(k, w)| *k as f64 * w).sum())
        } else {
            c(0.0)
        }
    });
    let id = DMatrix::<C64>::identity(d, d);
    let mut l = (id.kronecker(&h) - h.transpose().kronecker(&id)) * C64::new(0.0, -1.0);
    for ch in scheme.channels() {
        let ops: Vec<_> = ch
            .transitions
            .iter()
            .map(|t| lowering(&b, t.source, t.target))
            .collect();
        for (p, lp) in ops.iter().enumerate() {
            for (q, lq) in ops.iter().enumerate() {
                let g = ch.rates[p][q];
                if g == 0.0 {
                    continue;
                }
                let k = lq.adjoint() * lp;
                l += (lq.conjugate().kronecker(lp)
                    - id.kronecker(&k) * c(0.5)
                    - k.transpose().kronecker(&id) * c(0.5))
                    * c(g);
            }
        }
    }
    l
}

fn vec_of(m: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

#[test]
fn superoperator_matches_kronecker_form() {
    for (scheme, n) in [
        (v_nondeg(), 2),
        (v_deg(1.0, 0.6), 2),
        (fla(0.5), 2),
        (fla(0.0), 1),
    ] {
        let gen = Generator::new(&scheme, n).unwrap();
        let got = gen.superoperator(true);
        let want = kron_lindbladian(&scheme, n);
        let diff = (got - want).iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "{scheme:?}: {diff}");
    }
}

#[test]
fn integrator_matches_matrix_exponential() {
    let scheme = fla(0.85);
    let gen = Generator::new(&scheme, 2).unwrap();
    let rho0 = symmetric_init(&scheme, 2, c(0.6), C64::new(0.0, 0.8)).unwrap();
    let traj = integrate(&gen, &rho0, &IntegratorConfig::new(1.5, 0.5)).unwrap();
    let l = kron_lindbladian(&scheme, 2);
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        let want = (l.clone() * c(*t)).exp() * vec_of(&rho0.data);
        let diff = (vec_of(&rho.data) - want).camax();
        assert!(diff < 1e-9, "t = {t}: {diff}");
    }
}

#[test]
fn two_level_limit_decays_exponentially() {
    let scheme = v_nondeg();
    let gen = Generator::new(&scheme, 1).unwrap();
    let b = gen.basis().clone();
    let mut m = DMatrix::zeros(b.len(), b.len());
    let e1 = b.index_of(&[0, 1, 0]).unwrap();
    m[(e1, e1)] = c(1.0);
    let rho0 = DensityTensor::new(b, m).unwrap();
    let traj = integrate(&gen, &rho0, &IntegratorConfig::new(5.0, 0.25)).unwrap();
    for (t, r) in traj.times.iter().zip(&traj.states) {
        assert!((r.data[(e1, e1)].re - (-t).exp()).abs() < 1e-10);
    }
    let model = IntensityModel::new(&gen);
    let i1: Vec<f64> = traj
        .states
        .iter()
        .map(|r| model.channel_intensities(r)[0])
        .collect();
    let p = detect_peak(&traj.times, &i1).unwrap();
    assert_eq!(p.time, 0.0);
    assert!(!p.interior);
}

#[test]
fn single_degenerate_atom_matches_closed_form_with_half_rate() {
    // The closed-form single-atom equations carry rate G where this generator has 2G.
    let g = 1.0;
    let gen = Generator::new(&v_deg(2.0 * g, 2.0 * g), 1).unwrap();
    let s = gen.superoperator(false);
    let b = gen.basis();
    let d = b.len();
    // closed-form labels (e1, e2, g) -> occupation vectors (e2, e1, g)
    let i1 = b.index_of(&[0, 1, 0]).unwrap();
    let i2 = b.index_of(&[1, 0, 0]).unwrap();
    let ig = b.index_of(&[0, 0, 1]).unwrap();
    let v = |i: usize, j: usize| i + j * d;
    let row = |i: usize, j: usize| -> Vec<(usize, f64)> {
        (0..d * d)
            .filter(|&k| s[(v(i, j), k)].norm() > 0.0)
            .map(|k| {
                assert!(s[(v(i, j), k)].im.abs() < 1e-15);
                (k, s[(v(i, j), k)].re)
            })
            .collect()
    };
    let mut r = row(i1, i1);
    r.sort_by_key(|x| x.0);
    let mut want = vec![(v(i1, i1), -2.0 * g), (v(i1, i2), -g), (v(i2, i1), -g)];
    want.sort_by_key(|x| x.0);
    assert_eq!(r, want);
    let mut r = row(i1, i2);
    r.sort_by_key(|x| x.0);
    let mut want = vec![(v(i1, i2), -2.0 * g), (v(i1, i1), -g), (v(i2, i2), -g)];
    want.sort_by_key(|x| x.0);
    assert_eq!(r, want);
    let mut r = row(i1, ig);
    r.sort_by_key(|x| x.0);
    let mut want = vec![(v(i1, ig), -g), (v(i2, ig), -g)];
    want.sort_by_key(|x| x.0);
    assert_eq!(r, want);
}

#[test]
fn ground_state_is_stationary() {
    for scheme in [v_nondeg(), v_deg(1.0, 1.0), fla(0.85)] {
        let gen = Generator::new(&scheme, 3).unwrap();
        let b = gen.basis().clone();
        let mut occ = vec![0u32; scheme.num_levels()];
        *occ.last_mut().unwrap() = 3;
        let i = b.index_of(&occ).unwrap();
        let mut m = DMatrix::zeros(b.len(), b.len());
        m[(i, i)] = c(1.0);
        let d = gen.rhs(&DensityTensor::new(b, m).unwrap()).unwrap();
        assert_eq!(d.data.camax(), 0.0);
    }
}

#[test]
fn nondegenerate_channels_do_not_couple() {
    let gen = Generator::new(&v_nondeg(), 1).unwrap();
    let s = gen.superoperator(true);
    let b = gen.basis();
    let d = b.len();
    let (i1, i2) = (
        b.index_of(&[0, 1, 0]).unwrap(),
        b.index_of(&[1, 0, 0]).unwrap(),
    );
    let k = i1 + i2 * d;
    let nonzero: Vec<usize> = (0..d * d).filter(|&j| s[(k, j)].norm() > 0.0).collect();
    assert_eq!(nonzero, vec![k]);
    // -i(w1 - w2) - (G1 + G2)/2
    assert!((s[(k, k)] - C64::new(-0.7, -0.6)).norm() < 1e-14);
}

#[test]
fn rotating_frame_strips_free_phases() {
    let scheme = fla(0.85);
    let gen = Generator::new(&scheme, 2).unwrap();
    let rho0 = symmetric_init(&scheme, 2, c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)).unwrap();
    let mut cfg = IntegratorConfig::new(2.0, 0.5);
    let lab = integrate(&gen, &rho0, &cfg).unwrap();
    cfg.rotating_frame = true;
    let rot = integrate(&gen, &rho0, &cfg).unwrap();
    let e = gen.energies();
    for ((t, a), b) in lab.times.iter().zip(&lab.states).zip(&rot.states) {
        for i in 0..gen.dim() {
            for j in 0..gen.dim() {
                let back = b.data[(i, j)] * C64::from_polar(1.0, -(e[i] - e[j]) * t);
                assert!((back - a.data[(i, j)]).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn radiated_energy_balances_energy_loss() {
    let scheme = fla(0.7);
    let gen = Generator::new(&scheme, 3).unwrap();
    let rho0 = symmetric_init(&scheme, 3, c(0.8), c(0.6)).unwrap();
    let dt = 0.002;
    let traj = integrate(&gen, &rho0, &IntegratorConfig::new(4.0, dt)).unwrap();
    let (w, g) = scheme.reference();
    let model = IntensityModel::new(&gen);
    let total: Vec<f64> = traj
        .states
        .iter()
        .map(|r| model.channel_intensities(r).iter().sum())
        .collect();
    let mut integral = 0.0;
    for k in 1..total.len() {
        integral += 0.5 * dt * (total[k] + total[k - 1]);
    }
    let lost = model.energy(&rho0) - model.energy(traj.states.last().unwrap());
    assert!(
        (lost - w * g * integral).abs() < 1e-5,
        "{lost} vs {}",
        w * g * integral
    );
}

#[test]
fn steady_state_time_of_two_level_decay() {
    let gen = Generator::new(&v_nondeg(), 1).unwrap();
    let b = gen.basis().clone();
    let e1 = b.index_of(&[0, 1, 0]).unwrap();
    let mut m = DMatrix::zeros(b.len(), b.len());
    m[(e1, e1)] = c(1.0);
    let rho0 = DensityTensor::new(b.clone(), m).unwrap();
    let traj = integrate(&gen, &rho0, &IntegratorConfig::new(12.0, 0.01)).unwrap();
    let t = steady_state_time(&traj, &gen, 1e-4).unwrap();
    assert!((t - 1e4f64.ln()).abs() <= 0.01, "{t}");

    let g = b.index_of(&[0, 0, 1]).unwrap();
    let mut m = DMatrix::zeros(b.len(), b.len());
    m[(g, g)] = c(1.0);
    let traj = integrate(
        &gen,
        &DensityTensor::new(b, m).unwrap(),
        &IntegratorConfig::new(1.0, 0.1),
    )
    .unwrap();
    assert_eq!(steady_state_time(&traj, &gen, 1e-4), Some(0.0));

    let traj = integrate(&gen, &rho0, &IntegratorConfig::new(2.0, 0.1)).unwrap();
    assert_eq!(steady_state_time(&traj, &gen, 1e-4), None);
}

#[test]
fn no_virtual_transitions_means_no_ground_beating() {
    let scheme = fla(0.0);
    let gen = Generator::new(&scheme, 2).unwrap();
    let rho0 = symmetric_init(&scheme, 2, c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)).unwrap();
    let traj = integrate(&gen, &rho0, &IntegratorConfig::new(30.0, 0.05)).unwrap();
    let b = gen.basis();
    let (g11, g02) = (
        b.index_of(&[0, 0, 1, 1]).unwrap(),
        b.index_of(&[0, 0, 0, 2]).unwrap(),
    );
    let s = coherence_spectrum(&traj, &[(g11, g02)], (15.0, 30.0)).unwrap();
    assert!(s[0].peaks.is_empty());
}

#[test]
fn spectrum_of_constant_and_pure_tone() {
    let times: Vec<f64> = (0..256).map(|k| k as f64 * 0.1).collect();
    let flat = vec![c(0.3); 256];
    let s = spectrum(&times, &flat).unwrap();
    assert!(s.peaks.iter().all(|p| p.omega.abs() <= s.bin_width));
    let tone: Vec<C64> = times
        .iter()
        .map(|t| C64::from_polar(1.0, -2.0 * t))
        .collect();
    let s = spectrum(&times, &tone).unwrap();
    assert!((s.peaks[0].omega + 2.0).abs() <= s.bin_width);
    assert!(spectrum(&times[..4], &tone[..4]).is_err());
}

fn random_state(dim: usize, seed: &[f64]) -> DMatrix<C64> {
    // mixture of two random pure states
    let mk = |off: usize| {
        let v = DVector::from_fn(dim, |i, _| {
            C64::new(
                seed[(i + off) % seed.len()],
                seed[(3 * i + 1 + off) % seed.len()],
            )
        });
        let n = v.norm();
        v / c(n)
    };
    let (a, b) = (mk(0), mk(7));
    a.clone() * a.adjoint() * c(0.7) + b.clone() * b.adjoint() * c(0.3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rhs_is_traceless_and_hermitian(seed in prop::collection::vec(-1.0f64..1.0, 16), g12 in 0.0f64..0.8) {
        for scheme in [v_deg(1.0, g12), fla(g12)] {
            let gen = Generator::new(&scheme, 2).unwrap();
            let rho = DensityTensor::new(gen.basis().clone(), random_state(gen.dim(), &seed)).unwrap();
            let d = gen.rhs(&rho).unwrap();
            prop_assert!(d.trace().norm() < 1e-12);
            prop_assert!(d.hermiticity_error() < 1e-12);
        }
    }

    #[test]
    fn trajectories_keep_invariants(seed in prop::collection::vec(-1.0f64..1.0, 16), g12 in 0.0f64..0.8) {
        let scheme = fla(g12);
        let gen = Generator::new(&scheme, 2).unwrap();
        let rho0 = DensityTensor::new(Arc::clone(gen.basis()), random_state(gen.dim(), &seed)).unwrap();
        let traj = integrate(&gen, &rho0, &IntegratorConfig::new(1.0, 0.1)).unwrap();
        prop_assert!(traj.report.max_trace_error < 1e-9);
        prop_assert!(traj.report.max_hermiticity_error < 1e-10);
        prop_assert!(traj.report.min_eigenvalue.unwrap() > -1e-8);
    }
}
