use proptest::prelude::*;
use superrad_core::fitting::fit_power_law;

fn synth(beta: f64, alpha: f64, c: f64) -> Vec<(f64, f64)> {
    (2..=10)
        .map(|n| (n as f64, beta * (n as f64).powf(alpha) + c))
        .collect()
}

#[test]
fn recovers_exact_power_law() {
    let f = fit_power_law(&synth(2.0, 1.5, 0.3)).unwrap();
    assert!(
        (f.beta - 2.0).abs() < 1e-6 && (f.alpha - 1.5).abs() < 1e-6 && (f.c - 0.3).abs() < 1e-6
    );
    assert!((f.eval(4.0) - 16.3).abs() < 1e-6);
}

#[test]
fn degenerate_inputs_are_reported() {
    let flat: Vec<(f64, f64)> = (1..=6).map(|n| (n as f64, 2.5)).collect();
    assert!(fit_power_law(&flat).is_err());
    assert!(fit_power_law(&[(1.0, 1.0), (0.0, 2.0), (3.0, 3.0), (4.0, 5.0)]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_models_are_recovered(beta in 0.2f64..5.0, alpha in 0.5f64..2.5, c in -1.0f64..1.0) {
        let f = fit_power_law(&synth(beta, alpha, c)).unwrap();
        prop_assert!((f.alpha - alpha).abs() < 1e-6, "{:?}", f);
        prop_assert!((f.beta - beta).abs() < 1e-6 * beta.max(1.0));
        prop_assert!((f.c - c).abs() < 1e-5);
        prop_assert!(f.residual_rms >= 0.0);
    }

    #[test]
    fn scaling_intensities_scales_beta_and_c(k in 0.01f64..100.0, noise in prop::collection::vec(-0.05f64..0.05, 9)) {
        let pts: Vec<(f64, f64)> = synth(1.3, 1.7, 0.4).iter().zip(&noise).map(|(&(n, i), e)| (n, i * (1.0 + e))).collect();
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(n, i)| (n, k * i)).collect();
        let a = fit_power_law(&pts).unwrap();
        let b = fit_power_law(&scaled).unwrap();
        prop_assert!((a.alpha - b.alpha).abs() < 1e-8, "{} vs {}", a.alpha, b.alpha);
        prop_assert!((k * a.beta - b.beta).abs() < 1e-8 * b.beta.abs().max(1.0));
        prop_assert!((k * a.c - b.c).abs() < 1e-8 * (b.c.abs() + b.beta.abs()).max(1.0));
    }
}
