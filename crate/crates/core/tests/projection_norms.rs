use proptest::prelude::*;
use rieszlab::projection_norms::*;
use rieszlab::Complex64;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

const INF: f64 = f64::INFINITY;

/// `ks` log-spaced in `[10, 200]`.
fn log_levels(count: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = (0..count)
        .map(|i| (10f64 * 20f64.powf(i as f64 / (count - 1) as f64)).round() as usize)
        .collect();
    ks.dedup();
    ks
}

/// Laplace's integral `P_l(x) = (1/pi) int_0^pi (x + i sqrt(1 - x^2) cos t)^l dt`.
/// The integrand is a trigonometric polynomial of degree `l`, so the
/// trapezoid rule with more than `l` nodes on the full period is exact.
fn legendre_laplace(l: usize, x: f64) -> f64 {
    let n = 2 * l + 8;
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let t = 2.0 * PI * j as f64 / n as f64;
        acc += Complex64::new(x, s * t.cos()).powu(l as u32);
    }
    acc.re / n as f64
}

#[test]
fn closed_form_values() {
    let h0 = eval_eigenfunction(WitnessFamily::HermiteGround { d: 1 }, 1, &[0.0]).unwrap();
    assert!((h0.re - PI.powf(-0.25)).abs() < 1e-15);
    assert!((h0.re - 0.7511255445).abs() < 1e-10);

    let y00 = eval_eigenfunction(WitnessFamily::ZonalHarmonic, 1, &[0.7, 2.1]).unwrap();
    assert!((y00.re - 0.2820947918).abs() < 1e-10);

    let pole = eval_eigenfunction(WitnessFamily::ZonalHarmonic, 11, &[0.0, 0.0]).unwrap();
    assert!((pole.re - (21.0 / (4.0 * PI)).sqrt()).abs() < 1e-13);
}

#[test]
fn unit_witnesses_have_unit_l2_norm() {
    let families = [
        WitnessFamily::HermiteGround { d: 1 },
        WitnessFamily::HermiteGround { d: 2 },
        WitnessFamily::ZonalHarmonic,
        WitnessFamily::HighestWeight,
    ];
    for fam in families {
        for k in [1, 2, 7, 40, 150] {
            let n = norm_lower_bound(fam, k, 2.0).unwrap();
            assert!((n - 1.0).abs() < 1e-8, "{fam:?} k = {k}: {n}");
        }
    }
}

#[test]
fn sup_norm_examples() {
    let h = norm_lower_bound(WitnessFamily::HermiteGround { d: 1 }, 1, INF).unwrap();
    assert!((h - PI.powf(-0.25)).abs() < 1e-12);
    for k in [1usize, 5, 30, 200] {
        let z = norm_lower_bound(WitnessFamily::ZonalHarmonic, k, INF).unwrap();
        let want = ((2 * k - 1) as f64 / (4.0 * PI)).sqrt();
        assert!((z - want).abs() <= 1e-12 * want, "k = {k}");
    }
}

#[test]
fn zonal_slopes() {
    let ks = log_levels(20);
    let sup = fit_slope(WitnessFamily::ZonalHarmonic, INF, &ks, 0.02).unwrap();
    assert!((sup.alpha_hat - 0.5).abs() <= 0.02, "{sup:?}");
    assert!(sup.saturating && sup.pass);
    assert_eq!(sup.reference_rho, Some(0.5));
    assert!(sup.points >= MIN_FIT_POINTS);

    let l2 = fit_slope(WitnessFamily::ZonalHarmonic, 2.0, &ks, 0.05).unwrap();
    assert!(l2.alpha_hat.abs() <= 1e-12, "{}", l2.alpha_hat);
}

#[test]
fn equator_witnesses() {
    let ks = log_levels(20);
    let hw = fit_slope(WitnessFamily::EquatorHighestWeight, 2.0, &ks, 0.05).unwrap();
    assert_eq!(hw.reference_rho, Some(0.25));
    assert!(hw.saturating && hw.pass, "{hw:?}");
    assert!((hw.alpha_hat - 0.25).abs() <= 0.05);

    // Y_l^0 vanishes on the equator for odd l; only even degrees enter the fit.
    let odd = norm_lower_bound(WitnessFamily::EquatorZonal, 4, 2.0).unwrap();
    assert!(odd < 1e-12);
    let even: Vec<usize> = (11..=199).step_by(10).collect();
    let z = fit_slope(WitnessFamily::EquatorZonal, 2.0, &even, 0.05).unwrap();
    assert!(!z.saturating);
    assert!(z.pass, "{z:?}");
}

#[test]
fn one_dimensional_hermite_sup_decay() {
    // sup |h_n| decays like n^(-1/12)
    let fit = fit_slope(WitnessFamily::HermiteGround { d: 1 }, INF, &log_levels(20), 0.05).unwrap();
    assert!((fit.alpha_hat + 1.0 / 12.0).abs() <= 0.02, "{fit:?}");
    assert_eq!(fit.reference_rho, None);
}

#[test]
fn norms_grow_with_p_on_the_normalized_sphere() {
    let ps = [2.0, 3.0, 4.0, 6.0, 8.0, INF];
    for fam in [WitnessFamily::ZonalHarmonic, WitnessFamily::HighestWeight] {
        for k in [3usize, 12, 40] {
            let mut last = 0.0;
            for &p in &ps {
                let w = if p.is_infinite() { 1.0 } else { (4.0 * PI).powf(-1.0 / p) };
                let v = norm_lower_bound(fam, k, p).unwrap() * w;
                assert!(v >= last * (1.0 - 1e-10), "{fam:?} k = {k} p = {p}");
                last = v;
            }
        }
    }
}

#[test]
fn fits_reject_short_ranges() {
    let err = fit_slope(WitnessFamily::ZonalHarmonic, INF, &[2, 3, 4, 5, 11, 12], 0.05).unwrap_err();
    assert!(matches!(err, NormError::InsufficientPoints { .. }));
    assert!(matches!(norm_lower_bound(WitnessFamily::ZonalHarmonic, 3, 1.5), Err(NormError::InvalidP { .. })));
    assert!(matches!(norm_lower_bound(WitnessFamily::ZonalHarmonic, 0, 2.0), Err(NormError::ZeroLevel)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn zonal_recurrence_matches_laplace_integral(k in 1usize..=50, theta in 0.0f64..PI, phi in 0.0f64..(2.0 * PI)) {
        let l = k - 1;
        let got = eval_eigenfunction(WitnessFamily::ZonalHarmonic, k, &[theta, phi]).unwrap();
        let scale = ((2 * l + 1) as f64 / (4.0 * PI)).sqrt();
        let want = scale * legendre_laplace(l, theta.cos());
        prop_assert!((got.re - want).abs() <= 1e-10 * scale, "l = {}: {} vs {}", l, got.re, want);
        prop_assert!(got.im.abs() <= 1e-14);
    }

    #[test]
    fn highest_weight_matches_closed_form(k in 1usize..=50, theta in 0.0f64..PI, phi in 0.0f64..(2.0 * PI)) {
        let l = k - 1;
        let got = eval_eigenfunction(WitnessFamily::HighestWeight, k, &[theta, phi]).unwrap();
        // |Y_l^l| = sqrt((2l+1)!/(4 pi)) / (2^l l!) sin^l theta
        let lf = l as f64;
        let ln_c = 0.5 * ln_gamma(2.0 * lf + 2.0) - lf * 2f64.ln() - ln_gamma(lf + 1.0) - 0.5 * (4.0 * PI).ln();
        let want = (ln_c + lf * theta.sin().ln()).exp();
        prop_assert!((got.norm() - want).abs() <= 1e-10 * ln_c.exp().max(1.0));
        if got.norm() > 1e-6 {
            // Condon-Shortley phase (-1)^l
            let sign = if l % 2 == 1 { -1.0 } else { 1.0 };
            let unit = Complex64::from_polar(sign, lf * phi);
            prop_assert!((got / got.norm() - unit).norm() < 1e-8);
        }
    }
}
