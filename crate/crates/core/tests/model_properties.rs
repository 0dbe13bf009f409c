use dense_ee::model::{
    area_energy_consumption, area_spectral_efficiency, asymptotic_pilot_coefficients,
    energy_efficiency, se_lower_bound, sinr_lower_bound,
};
use dense_ee::optimizer::optimal_pilot_reuse;
use dense_ee::{HardwareModel, OperatingPoint, PropagationModel};
use proptest::prelude::*;

/// Average SINR bound written out term by term.
fn sinr_oracle(m: f64, k: f64, beta: f64, x: f64, alpha: f64) -> f64 {
    let pc = 2.0 / (beta * (alpha - 2.0));
    let inter = 2.0 * k / (alpha - 2.0);
    let coh = (k / beta) * (4.0 / (alpha - 2.0).powi(2) + 1.0 / (alpha - 1.0));
    let own = m / (beta * (alpha - 1.0));
    m / ((k + x) * (1.0 + pc + x) + inter * (1.0 + x) + coh + own)
}

fn point(m: f64, k: f64, beta: f64, rho: f64, lambda: f64) -> OperatingPoint {
    OperatingPoint {
        lambda,
        m,
        k,
        beta,
        rho,
        gamma: 1.0,
    }
}

fn prop_with(alpha: f64) -> PropagationModel {
    PropagationModel {
        alpha,
        ..PropagationModel::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sinr_matches_term_by_term_oracle(
        m in 1.0f64..500.0, k in 1.0f64..40.0, beta in 1.0f64..20.0,
        snr_db in -10.0f64..40.0, alpha in 2.2f64..6.0,
    ) {
        let prop = prop_with(alpha);
        let rho = prop.noise * 10f64.powf(snr_db / 10.0);
        let got = sinr_lower_bound(&point(m, k, beta, rho, 10.0), &prop).unwrap();
        let want = sinr_oracle(m, k, beta, prop.noise / rho, alpha);
        prop_assert!((got - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn dense_limit_equals_pilot_coefficient_form(
        m in 1.0f64..500.0, k in 1.0f64..40.0, beta in 1.0f64..20.0, alpha in 2.2f64..6.0,
    ) {
        let prop = prop_with(alpha);
        let a2 = alpha - 2.0;
        let b1 = k * (4.0 / (a2 * a2) + 1.0 / (alpha - 1.0) + 2.0 / a2) + m / (alpha - 1.0);
        let b2 = k * (1.0 + 2.0 / a2);
        let got = sinr_lower_bound(&point(m, k, beta, f64::INFINITY, f64::INFINITY), &prop).unwrap();
        prop_assert!((got - m / (b2 + b1 / beta)).abs() <= 1e-12 * got);
        let (c1, c2) = asymptotic_pilot_coefficients(m, k, alpha);
        prop_assert!((c1 - b1).abs() <= 1e-12 * b1 && (c2 - b2).abs() <= 1e-12 * b2);
    }

    #[test]
    fn sinr_monotone_in_each_argument(
        m in 2.0f64..400.0, k in 1.0f64..30.0, beta in 1.0f64..15.0,
        snr_db in -10.0f64..30.0, alpha in 2.2f64..6.0,
    ) {
        let prop = prop_with(alpha);
        let rho = prop.noise * 10f64.powf(snr_db / 10.0);
        let s = |m, k, b, r| sinr_lower_bound(&point(m, k, b, r, 10.0), &prop).unwrap();
        let base = s(m, k, beta, rho);
        prop_assert!(s(m * 1.1, k, beta, rho) > base);
        prop_assert!(s(m, k * 1.1, beta, rho) < base);
        prop_assert!(s(m, k, beta * 1.1, rho) > base);
        prop_assert!(s(m, k, beta, rho * 1.1) > base);
    }

    #[test]
    fn optimal_reuse_meets_target(
        m in 20.0f64..500.0, k in 1.0f64..20.0, gamma in 0.2f64..6.0,
        snr_db in 0.0f64..40.0, alpha in 2.5f64..5.0,
    ) {
        let prop = prop_with(alpha);
        let rho = prop.noise * 10f64.powf(snr_db / 10.0);
        if let Ok(sol) = optimal_pilot_reuse(m, k, rho, gamma, &prop) {
            prop_assert!(sol.b1 > 0.0 && sol.b2 > 0.0);
            prop_assert!((sol.beta_star * (m - sol.b2 * gamma) - sol.b1 * gamma).abs()
                <= 1e-9 * sol.b1 * gamma);
            let sinr = sinr_oracle(m, k, sol.beta_star, prop.noise / rho, alpha);
            prop_assert!((sinr - gamma).abs() <= 1e-9 * gamma);
        } else {
            let x = prop.noise / rho;
            prop_assert!(m <= (k + x + 2.0 * k / (alpha - 2.0)) * (1.0 + x) * gamma);
        }
    }

    #[test]
    fn ee_is_ase_over_aec(
        m in 10.0f64..300.0, k in 1.0f64..20.0, beta in 1.0f64..15.0,
        lambda in 0.1f64..200.0, snr_db in -5.0f64..30.0,
    ) {
        let prop = PropagationModel::default();
        let hw = HardwareModel::default();
        prop_assume!(beta * k <= prop.s());
        let pt = point(m, k, beta, prop.noise * 10f64.powf(snr_db / 10.0), lambda);
        let r = energy_efficiency(&pt, &prop, &hw).unwrap();
        let ase = area_spectral_efficiency(&pt, &prop).unwrap();
        let aec = area_energy_consumption(&pt, &prop, &hw).unwrap();
        prop_assert!((r.ee - ase / aec).abs() <= 1e-12 * r.ee);
        prop_assert!(r.se_per_ue <= (1.0 + r.sinr).log2());
        prop_assert!(r.se_per_ue >= 0.0);
    }

    #[test]
    fn aec_is_linear_in_density_without_transmit_energy(
        m in 1.0f64..300.0, k in 1.0f64..20.0, lambda in 0.1f64..100.0,
    ) {
        let prop = PropagationModel::default();
        let hw = HardwareModel::default();
        let pt = OperatingPoint { rho: 0.0, ..point(m, k, 1.0, 1.0, lambda) };
        let aec = area_energy_consumption(&pt, &prop, &hw).unwrap();
        let circuit = hw.c0 + hw.c1 * k + hw.d0 * m + hw.d1 * m * k;
        prop_assert!((aec - lambda * circuit).abs() <= 1e-12 * aec);
    }

    #[test]
    fn se_vanishes_at_full_pilot_load(k in 1u32..400) {
        let prop = PropagationModel::default();
        let beta = prop.s() / f64::from(k);
        prop_assume!(beta >= 1.0);
        let se = se_lower_bound(&point(100.0, f64::from(k), beta, f64::INFINITY, 10.0), &prop).unwrap();
        prop_assert!(se.abs() < 1e-12);
    }
}
