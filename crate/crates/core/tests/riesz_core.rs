use proptest::prelude::*;
use rieszlab::riesz_core::*;
use rieszlab::Complex64;

const J: usize = 1_000_000;

/// `omega_j^2 = j^{-1/2}` for `j = 1..=J`, index 0 unused.
fn quarter_weights() -> Vec<f64> {
    (0..=J).map(|j| if j == 0 { 0.0 } else { (j as f64).powf(-0.5) }).collect()
}

/// `sum_{j > J} j^{-1/2} / (2 (j - a))` estimated by `int_J^inf x^{-1/2} / (2 (x - a)) dx`.
fn integral_tail(a: f64) -> f64 {
    let (s, t) = (a.sqrt(), (J as f64).sqrt());
    ((t + s) / (t - s)).ln() / (4.0 * s)
}

/// `S(n) = sum_{j != n} omega_j^2 / |2n - 2j| + omega_n^2 / 1`, summed directly up to `J`.
fn direct_s(w2: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for (j, w) in w2.iter().enumerate().skip(1) {
        if j != n {
            s += w / (2.0 * (n as f64 - j as f64).abs());
        }
    }
    s + w2[n]
}

fn oracle_s(w2: &[f64], n: usize) -> f64 {
    direct_s(w2, n) + integral_tail(n as f64)
}

fn ho_ladder() -> SpectralModel {
    SpectralModel::affine(2.0, 0.0)
}

#[test]
fn gap_radii_examples() {
    let r = gap_radii(&SpectralModel::affine(2.0, 0.0), 50).unwrap();
    assert!(r.as_slice().iter().all(|&x| x == 1.0));

    let r = gap_radii(&SpectralModel::sphere(2.0, 0.0), 60).unwrap();
    for k in 2..=60 {
        assert_eq!(r.get(k), Some(k as f64 - 1.0), "k = {k}");
    }

    let r = radii_from_values(&[1.0, 2.0, 10.0], 2).unwrap();
    assert_eq!(r.as_slice(), &[0.5, 0.5]);
}

#[test]
fn gap_radii_reject_non_monotone_spectra() {
    let err = radii_from_values(&[1.0, 3.0, 3.0, 4.0], 3).unwrap_err();
    assert_eq!(err, RieszError::NonMonotoneSpectrum { k: 2 });
    let mu = SpectralModel::tabulated(vec![0.0, 1.0, 0.5], None);
    assert!(gap_radii(&mu, 2).is_err());
}

#[test]
fn zero_weights_give_zero_sigma_and_trivial_cutoff() {
    let mu = ho_ladder();
    let r = gap_radii(&mu, 10).unwrap();
    let om = OmegaModel::zero();
    let s = sigma_tail(&mu, &r, &om, 5, &SigmaOptions::default()).unwrap();
    assert_eq!(s.value, 0.0);
    assert_eq!(s.remainder, 0.0);
    let c = find_cutoff_n0(&mu, &r, &om, 0.5, 100, &SigmaOptions::default()).unwrap();
    assert_eq!(c.n0, 1);
}

#[test]
fn constant_weights_diverge() {
    let mu = ho_ladder();
    let r = gap_radii(&mu, 10).unwrap();
    let om = OmegaModel::power_law(1.0, 0.0, 0.0);
    for n in [1, 10, 100] {
        let s = sigma_tail(&mu, &r, &om, n, &SigmaOptions::default()).unwrap();
        assert!(s.diverged, "N = {n}");
        assert!(s.upper().is_infinite());
    }
    let err = find_cutoff_n0(&mu, &r, &om, 0.5, 100, &SigmaOptions::default()).unwrap_err();
    assert!(matches!(err, RieszError::Diverged { .. }), "{err:?}");
}

#[test]
fn sigma_matches_direct_summation() {
    let mu = ho_ladder();
    let r = gap_radii(&mu, 10).unwrap();
    let om = OmegaModel::power_law(1.0, 0.25, 0.0);
    let w2 = quarter_weights();
    for n in [10usize, 100, 1000] {
        let s = sigma_tail(&mu, &r, &om, n, &SigmaOptions::default()).unwrap();
        // S(n) decreases in n for this model, so the supremum sits at n = N;
        // a window of neighbours and a geometric sweep confirm it.
        let mut probe: Vec<usize> = (n..n + 20).collect();
        probe.extend([2 * n, 5 * n, 10 * n, 50 * n]);
        let sup = probe.iter().map(|&m| oracle_s(&w2, m)).fold(f64::NEG_INFINITY, f64::max);
        assert!(
            (sup - s.value).abs() <= s.remainder,
            "N = {n}: oracle {sup}, engine {} +- {}",
            s.value,
            s.remainder
        );
        assert!(s.remainder < 2e-3);
    }
}

#[test]
fn cutoff_matches_brute_force_scan() {
    let mu = ho_ladder();
    let r = gap_radii(&mu, 10).unwrap();
    let om = OmegaModel::power_law(1.0, 0.25, 0.0);
    let c = find_cutoff_n0(&mu, &r, &om, 0.5, 4096, &SigmaOptions::default()).unwrap();

    let w2 = quarter_weights();
    let top = 4 * c.n0;
    let s: Vec<f64> = (1..=top).map(|n| oracle_s(&w2, n)).collect();
    let mut sup = s.clone();
    for i in (0..top - 1).rev() {
        sup[i] = sup[i].max(sup[i + 1]);
    }
    let oracle = (1..=top).find(|&n| sup[n - 1] <= 0.5).expect("oracle crosses 0.5");
    assert_eq!(c.n0, oracle);
    assert!(c.sigma.upper() <= 0.5);
}

#[test]
fn sigma_decays_along_a_geometric_grid() {
    let mu = ho_ladder();
    let r = gap_radii(&mu, 10).unwrap();
    let om = OmegaModel::power_law(1.0, 0.5, 0.0);
    let opts = SigmaOptions::default();
    let mut last = f64::INFINITY;
    for n in [4usize, 16, 64, 256, 1024, 4096] {
        let s = sigma_tail(&mu, &r, &om, n, &opts).unwrap();
        assert!(s.value <= last + s.remainder, "N = {n}");
        last = s.value;
    }
    assert!(last < 0.01);
}

#[test]
fn b_norm_upper_examples() {
    let mu = ho_ladder();
    let single = OmegaModel::head_only(vec![1.0]);
    let b = b_norm_upper(Complex64::new(3.0, 0.0), &mu, &single, &SigmaOptions::default()).unwrap();
    assert_eq!(b.value, 1.0);

    let om = OmegaModel::power_law(1.0, 0.25, 0.0);
    let b = b_norm_upper(Complex64::new(21.0, 0.0), &mu, &om, &SigmaOptions::default()).unwrap();
    let mut direct = 0.0;
    for j in 1..=J {
        direct += (j as f64).powf(-0.5) / (21.0 - 2.0 * j as f64).abs();
    }
    let oracle = direct + integral_tail(10.5);
    assert!((oracle - b.partial).abs() <= b.remainder, "{oracle} vs {b:?}");
    assert!(oracle <= b.value);
}

#[test]
fn b_norm_upper_decreases_to_zero_on_negative_axis() {
    let mu = ho_ladder();
    let om = OmegaModel::power_law(1.0, 0.25, 0.0);
    let opts = SigmaOptions {
        j_max: 100_000,
        ..SigmaOptions::default()
    };
    let mut last = f64::INFINITY;
    for i in 0..20 {
        let h = 2f64.powi(i);
        let b = b_norm_upper(Complex64::new(-h, 0.0), &mu, &om, &opts).unwrap().value;
        assert!(b < last, "h = {h}");
        last = b;
    }
    assert!(last < 0.01, "{last}");
}

#[test]
fn power_law_admissibility_cases() {
    assert!(power_law_admissible(0.25, 1.0).admissible);
    assert!(!power_law_admissible(0.0, 1.0).admissible);
    assert!(power_law_admissible(0.0, 2.0).admissible);
    let rate = power_law_admissible(0.25, 1.0).rate.unwrap();
    assert_eq!(rate.exponent, 0.5);
    assert_eq!(rate.off_diagonal_log_power, 1);
}

#[test]
fn zero_weight_enclosure_is_degenerate() {
    let mu = ho_ladder();
    let r = gap_radii(&mu, 40).unwrap();
    let opts = EnclosureOptions {
        k_max: Some(20),
        ..EnclosureOptions::default()
    };
    let e = build_enclosure(&mu, &r, &OmegaModel::zero(), &opts).unwrap();
    assert_eq!(e.n0, 1);
    assert_eq!(e.disks.len(), 19);
    for d in &e.disks {
        assert_eq!(d.radius_refined, 0.0);
        assert_eq!(d.flag, DiskFlag::Degenerate);
        assert_eq!(d.center, 2.0 * d.k as f64);
    }
    assert_eq!(e.region_of(Complex64::new(2.0, 0.0)), Region::Box);
    assert_eq!(e.region_of(Complex64::new(10.0, 0.1)), Region::Disk(5));
}

/// Box and half-gap disks are pairwise disjoint.
fn assert_disjoint(e: &EnclosureReport) {
    for w in e.disks.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        assert!(a.center + a.radius_halfgap <= b.center - b.radius_halfgap, "{a:?} {b:?}");
    }
    if let Some(first) = e.disks.first() {
        assert!(e.region.right <= first.center - first.radius_halfgap);
    }
}

#[test]
fn power_law_enclosure_is_disjoint() {
    let mu = ho_ladder();
    let r = gap_radii(&mu, 10).unwrap();
    let e = build_enclosure(&mu, &r, &OmegaModel::power_law(0.5, 0.25, 0.0), &EnclosureOptions::default()).unwrap();
    assert!(e.n0 > 1);
    assert_disjoint(&e);
    let sph = SpectralModel::sphere(2.0, 1.0);
    let r = gap_radii(&sph, 10).unwrap();
    let e = build_enclosure(&sph, &r, &OmegaModel::power_law(1.0, 0.0, 0.0), &EnclosureOptions::default()).unwrap();
    assert_disjoint(&e);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn half_gap_disks_never_overlap(gaps in prop::collection::vec(0.01f64..10.0, 3..40), start in -5.0f64..5.0) {
        let mut vals = vec![start];
        for g in &gaps {
            let next = vals.last().unwrap() + g;
            vals.push(next);
        }
        let kmax = vals.len() - 1;
        let r = radii_from_values(&vals, kmax).unwrap();
        for k in 1..kmax {
            let (rk, rn) = (r.get(k).unwrap(), r.get(k + 1).unwrap());
            prop_assert!(rk > 0.0);
            prop_assert!(rk + rn <= vals[k] - vals[k - 1] + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn cutoff_is_monotone_in_threshold(alpha in 0.4f64..1.0, coeff in 0.2f64..1.0) {
        let mu = ho_ladder();
        let r = gap_radii(&mu, 10).unwrap();
        let om = OmegaModel::power_law(coeff, alpha, 0.0);
        let opts = SigmaOptions { j_max: 100_000, ..SigmaOptions::default() };
        let loose = find_cutoff_n0(&mu, &r, &om, 0.99, 4096, &opts).unwrap().n0;
        let tight = find_cutoff_n0(&mu, &r, &om, 0.2, 4096, &opts).unwrap().n0;
        prop_assert!(loose <= tight);
    }
}
