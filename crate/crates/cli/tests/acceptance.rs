//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p rieszlab-cli --test acceptance`.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rieszlab::linalg::CMat;
use rieszlab::model_catalog::{self, LebesgueIndex, ModelId, Q};
use rieszlab::operator_lab::*;
use rieszlab::projection_norms::{fit_slope, WitnessFamily};
use rieszlab::riesz_core::{self, EnclosureReport, OmegaModel, SigmaOptions, SpectralModel};
use rieszlab::special::principal_pow;
use rieszlab::Complex64;
use rieszlab_cli::commands::median;
use rieszlab_cli::config::{self, RunConfig};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

type Verdict = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, format!("took {:.1}s, limit {}s", t.as_secs_f64(), limit.as_secs()))
}

fn frob(a: &CMat) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

// ---------------------------------------------------------------- 1

/// `(alpha, log power)` at `s = 1/r`, case by case from the theorem statements.
fn expected_exponent(model: ModelId, s: Q) -> (Q, Q) {
    let d = model.dimension() as i64;
    let zero = Q::from_integer(0);
    let two_d = q(2, d);
    match model {
        ModelId::HarmonicOscillator { .. } => {
            let b = q(2, d + 3);
            if s < b {
                (s / 4, zero)
            } else if s == b {
                (q(1, 2 * (d + 3)), q(d + 1, 2 * (d + 3)))
            } else {
                (q(d, 12) * (two_d - s), zero)
            }
        }
        ModelId::Landau { .. } if s <= q(2, d + 1) => (s / 4, zero),
        ModelId::Landau { .. } => (q(d, 4) * (two_d - s), zero),
        ModelId::Sphere { .. } if s <= q(2, d + 1) => (-(q(1, 2) - s / 4 - q(d, 4) * (two_d - s)), zero),
        ModelId::Sphere { .. } => (-(q(1, 2) - q(d, 2) * (two_d - s)), zero),
        ModelId::SphereDeltaCircle { .. } => {
            if s < q(1, d) {
                (-(q(1, 4) + q(d - 2, 4) * s), zero)
            } else if s == q(1, d) {
                (-q(d - 1, 2 * d), q(1, 2))
            } else {
                (-q(d - 1, 2) * s, zero)
            }
        }
    }
}

fn exponent_tables() -> Verdict {
    let start = Instant::now();
    let ho = |d| ModelId::HarmonicOscillator { d };
    let lan = |d| ModelId::Landau { d };
    let sph = |d| ModelId::Sphere { d };
    let del = |d| ModelId::SphereDeltaCircle { d };
    // interior points of every branch plus each breakpoint
    let triples: Vec<(ModelId, Q)> = vec![
        (ho(2), q(1, 4)),
        (ho(2), q(2, 5)),
        (ho(2), q(1, 2)),
        (ho(2), q(3, 4)),
        (ho(3), q(1, 10)),
        (ho(3), q(1, 3)),
        (ho(3), q(1, 2)),
        (ho(3), q(3, 5)),
        (ho(4), q(1, 5)),
        (ho(4), q(2, 7)),
        (ho(5), q(1, 4)),
        (lan(2), q(1, 10)),
        (lan(2), q(1, 2)),
        (lan(2), q(2, 3)),
        (lan(2), q(3, 4)),
        (lan(4), q(1, 3)),
        (lan(4), q(2, 5)),
        (sph(2), q(0, 1)),
        (sph(2), q(1, 3)),
        (sph(2), q(2, 3)),
        (sph(2), q(9, 10)),
        (sph(3), q(0, 1)),
        (sph(3), q(1, 2)),
        (sph(3), q(3, 5)),
        (del(2), q(0, 1)),
        (del(2), q(1, 2)),
        (del(2), q(3, 4)),
        (del(3), q(0, 1)),
        (del(3), q(1, 3)),
        (del(3), q(2, 5)),
    ];
    for &(m, s) in &triples {
        let r = if s == Q::from_integer(0) {
            LebesgueIndex::infinity()
        } else {
            LebesgueIndex::finite(s.recip()).map_err(|e| e.to_string())?
        };
        let range = model_catalog::admissible_range(m).map_err(|e| e.to_string())?;
        ensure(range.contains(r), format!("{m:?} r = {r} outside the admissible range"))?;
        let got = model_catalog::omega_model(m, r).map_err(|e| e.to_string())?;
        let (alpha, beta) = expected_exponent(m, s);
        ensure(
            got.alpha == alpha && got.log_beta == beta && got.admissible,
            format!("{m:?} r = {r}: got ({}, {}), want ({alpha}, {beta})", got.alpha, got.log_beta),
        )?;
    }
    let mut worst: f64 = 0.0;
    let models: Vec<ModelId> = triples.iter().map(|t| t.0).collect();
    for m in models {
        model_catalog::check_table_continuity(m)?;
        for b in model_catalog::rho_branches(m).map_err(|e| e.to_string())? {
            let x = *b.hi.numer() as f64 / *b.hi.denom() as f64;
            if x >= 0.5 || b.lo == b.hi {
                continue;
            }
            let lo = model_catalog::rho_exponent(m, x - 1e-14).map_err(|e| e.to_string())?.rho;
            let hi = model_catalog::rho_exponent(m, x + 1e-14).map_err(|e| e.to_string())?.rho;
            worst = worst.max((lo - hi).abs());
        }
    }
    ensure(worst <= 1e-12, format!("jump {worst:.2e} at a breakpoint"))?;
    within(Duration::from_secs(1), start)?;
    Ok(format!("{} triples exact, max breakpoint jump {worst:.1e}", triples.len()))
}

// ---------------------------------------------------------------- 2

fn random_operator(rng: &mut ChaCha8Rng, dim: usize) -> Result<TruncatedOperator, String> {
    let mut levels = Vec::new();
    let mut mu: f64 = rng.random_range(-1.0..1.0);
    let mut left = dim;
    while left > 0 {
        let m = rng.random_range(1..=4usize).min(left);
        mu += rng.random_range(0.5..2.5);
        levels.push((mu, m));
        left -= m;
    }
    let scale = rng.random_range(0.05..1.0) / (dim as f64).sqrt();
    let v = Mat::from_fn(dim, dim, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale);
    TruncatedOperator::from_parts(&levels, v).map_err(|e| e.to_string())
}

fn random_point(rng: &mut ChaCha8Rng, mu: &[f64]) -> Complex64 {
    loop {
        let z = c(rng.random_range(mu[0] - 4.0..mu[mu.len() - 1] + 4.0), rng.random_range(-4.0..4.0));
        if mu.iter().all(|m| (z - m).norm() > 0.05) {
            return z;
        }
    }
}

fn resolvent_factorization() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20240917);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let dim = if i == 0 { 400 } else { rng.random_range(20..=400) };
        let op = random_operator(&mut rng, dim)?;
        let mu = op.mu_values();
        for _ in 0..10 {
            let z = random_point(&mut rng, &mu);
            let d = resolvent(z, &op, ResolventMethod::Direct).map_err(|e| e.to_string())?;
            let f = resolvent(z, &op, ResolventMethod::Factorized).map_err(|e| e.to_string())?;
            let diff = Mat::from_fn(dim, dim, |a, b| d[(a, b)] - f[(a, b)]);
            worst = worst.max(frob(&diff) / frob(&d));
        }
    }
    ensure(worst <= 1e-9, format!("relative Frobenius gap {worst:.2e} > 1e-9"))?;
    within(Duration::from_secs(60), start)?;
    Ok(format!("200 points on 20 operators, max relative gap {worst:.1e}"))
}

// ---------------------------------------------------------------- 3-6, 9

struct HoRun {
    cfg: RunConfig,
    op: TruncatedOperator,
    enc: EnclosureReport,
    contour: ProjectionSet,
    eigen: ProjectionSet,
    elapsed: Duration,
}

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn level_options(cfg: &RunConfig) -> LevelBlockOptions {
    LevelBlockOptions {
        threshold: cfg.enclosure.threshold,
        epsilon: cfg.enclosure.epsilon,
        circle_samples: cfg.enclosure.circle_samples,
        real_samples: cfg.enclosure.real_samples,
        h_cap_exp: cfg.enclosure.h_cap_exp,
        trust_fraction: cfg.verification.trust_fraction,
    }
}

fn assemble(name: &str) -> Result<(RunConfig, TruncatedOperator, EnclosureReport), String> {
    let cfg = config::load(Some(&config_path(name)), &[]).map_err(|e| e.to_string())?;
    let pot = cfg.potential.clone().ok_or("config has no potential")?;
    let op = perturbation_matrix(cfg.model.id(), &pot, &cfg.truncation()).map_err(|e| e.to_string())?;
    let enc = build_enclosure_level_block(&op, &level_options(&cfg)).map_err(|e| e.to_string())?;
    Ok((cfg, op, enc))
}

fn ho_run() -> Result<HoRun, String> {
    let start = Instant::now();
    let (cfg, op, enc) = assemble("ho2d_gaussian.toml")?;
    let tf = cfg.verification.trust_fraction;
    let contour = compute_projections(&op, &enc, ProjectionMethod::Contour, &cfg.contour, tf).map_err(|e| e.to_string())?;
    let eigen = compute_projections(&op, &enc, ProjectionMethod::Eigen, &cfg.contour, tf).map_err(|e| e.to_string())?;
    Ok(HoRun {
        cfg,
        op,
        enc,
        contour,
        eigen,
        elapsed: start.elapsed(),
    })
}

fn check_ho_setup(run: &HoRun) -> Result<(), String> {
    let want = ModelId::HarmonicOscillator { d: 2 };
    ensure(run.cfg.model.id() == want, "shipped example is not the 2D oscillator".into())?;
    ensure(run.cfg.truncation.levels == 60, "shipped example does not keep 60 levels".into())?;
    let ok = matches!(
        &run.cfg.potential,
        Some(PotentialSpec::Gaussian { amplitude, width, center })
            if *amplitude == [0.0, 3.0] && *width == 1.0 && center.as_ref().is_none_or(|c| c.iter().all(|&v| v == 0.0))
    );
    ensure(ok, "shipped example potential is not 3i exp(-|x|^2)".into())
}

fn projection_agreement(run: &HoRun) -> Verdict {
    check_ho_setup(run)?;
    let mut worst = run.contour.s0.sub(&run.eigen.s0).frobenius();
    ensure(!run.contour.p.is_empty(), "no trusted level above N0".into())?;
    for (k, p) in &run.contour.p {
        let e = run.eigen.p(*k).ok_or(format!("eigen route lacks level {k}"))?;
        worst = worst.max(p.sub(e).frobenius());
    }
    ensure(worst <= 1e-7, format!("Frobenius gap {worst:.2e} > 1e-7"))?;
    ensure(run.elapsed < Duration::from_secs(300), format!("took {:.1}s", run.elapsed.as_secs_f64()))?;
    Ok(format!(
        "N0 = {}, K_trust = {}, max Frobenius gap {worst:.1e} over S0 and {} levels",
        run.enc.n0,
        run.contour.k_trust,
        run.contour.p.len()
    ))
}

fn localization_and_rank(run: &HoRun) -> Verdict {
    let loc = verify_localization(&run.op, &run.enc, run.cfg.verification.trust_fraction).map_err(|e| e.to_string())?;
    ensure(loc.violations.is_empty(), format!("{} violations", loc.violations.len()))?;
    ensure(!loc.levels.is_empty(), "no trusted disks".into())?;
    for l in &loc.levels {
        ensure(l.count_halfgap == l.k, format!("disk {} holds {} eigenvalues", l.k, l.count_halfgap))?;
    }
    for (k, r) in &run.contour.ranks {
        ensure(*r == *k, format!("rank P_{k} = {r}"))?;
    }
    Ok(format!(
        "0 violations, disks k = {}..={} each hold k eigenvalues",
        loc.levels[0].k,
        loc.levels[loc.levels.len() - 1].k
    ))
}

fn bari_bound(run: &HoRun) -> Verdict {
    let nstar = run.enc.n0 + 1;
    let vectors = random_unit_vectors(&run.op, 100, run.cfg.seed, None);
    let mut worst: f64 = 0.0;
    for f in &vectors {
        worst = worst.max(bari_sum(&run.contour, &run.op, f, nstar).map_err(|e| e.to_string())?);
    }
    ensure(worst <= 2.0, format!("bari sum {worst:.3e} > 2"))?;

    let (cfg, op, enc) = assemble("ho2d_free.toml")?;
    let ps = compute_projections(&op, &enc, ProjectionMethod::Contour, &cfg.contour, cfg.verification.trust_fraction)
        .map_err(|e| e.to_string())?;
    let mut free: f64 = 0.0;
    for f in &random_unit_vectors(&op, 100, cfg.seed, None) {
        free = free.max(bari_sum(&ps, &op, f, enc.n0 + 1).map_err(|e| e.to_string())?);
    }
    ensure(free <= 1e-10, format!("V = 0 bari sum {free:.2e}"))?;
    Ok(format!("max over 100 vectors {worst:.2e}; V = 0 gives {free:.1e}"))
}

fn completeness_trend(run: &HoRun) -> Verdict {
    let ver = &run.cfg.verification;
    let probes = random_unit_vectors(&run.op, ver.probes, run.cfg.seed.wrapping_add(1), Some(ver.probe_max_level));
    let mut pts = Vec::new();
    for n in run.enc.n0 + 1..=run.contour.k_trust {
        pts.push(completeness_defect(&run.contour, &run.op, n, &probes).map_err(|e| e.to_string())?);
    }
    ensure(pts.len() >= 2, "sweep has fewer than two points".into())?;
    for w in pts.windows(2) {
        ensure(
            w[1].max_residual <= w[0].max_residual + 1e-10,
            format!("residual rises from n = {} to {}", w[0].n, w[1].n),
        )?;
    }
    let med = median(pts.iter().map(|p| p.defect).collect());
    for p in &pts {
        ensure(
            p.defect <= 2.0 * med && p.defect >= 0.5 * med,
            format!("defect {:.3e} at n = {} vs median {med:.3e}", p.defect, p.n),
        )?;
    }
    Ok(format!(
        "residual {:.2e} -> {:.2e} over n = {}..={}, defect median {med:.3e}",
        pts[0].max_residual,
        pts[pts.len() - 1].max_residual,
        pts[0].n,
        pts[pts.len() - 1].n
    ))
}

// ---------------------------------------------------------------- 7

const J: usize = 1_000_000;

/// `S(n)` for `mu_k = 2k`, `r_k = 1`, `omega_k^2 = k^{-1/2}`: direct sum over
/// `j <= J` plus the integral of the summand over `[J, inf)`.
fn oracle_s(w2: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for (j, w) in w2.iter().enumerate().skip(1) {
        if j != n {
            s += w / (2.0 * (n as f64 - j as f64).abs());
        }
    }
    let (a, t) = ((n as f64).sqrt(), (J as f64).sqrt());
    s + w2[n] + ((t + a) / (t - a)).ln() / (4.0 * a)
}

fn sigma_engine() -> Verdict {
    let mu = SpectralModel::affine(2.0, 0.0);
    let r = riesz_core::gap_radii(&mu, 10).map_err(|e| e.to_string())?;
    let omega = OmegaModel::power_law(1.0, 0.25, 0.0);
    let opts = SigmaOptions {
        j_max: J,
        ..SigmaOptions::default()
    };
    let w2: Vec<f64> = (0..=J).map(|j| if j == 0 { 0.0 } else { (j as f64).powf(-0.5) }).collect();
    let mut notes = Vec::new();
    for n in [10usize, 100, 1000] {
        let s = riesz_core::sigma_tail(&mu, &r, &omega, n, &opts).map_err(|e| e.to_string())?;
        let mut window: Vec<usize> = (n..n + 20).collect();
        window.extend([2 * n, 5 * n, 10 * n, 50 * n]);
        let oracle = window.iter().map(|&m| oracle_s(&w2, m)).fold(f64::NEG_INFINITY, f64::max);
        ensure(
            (oracle - s.value).abs() <= s.remainder,
            format!("N = {n}: oracle {oracle:.6e}, engine {:.6e} +- {:.1e}", s.value, s.remainder),
        )?;
        notes.push(format!("N={n}: {:.4}", s.value));
    }
    let s1 = riesz_core::sigma_tail(&mu, &r, &omega, 1000, &opts).map_err(|e| e.to_string())?;
    let s2 = riesz_core::sigma_tail(&mu, &r, &omega, 2000, &opts).map_err(|e| e.to_string())?;
    let rate = riesz_core::power_law_admissible(0.25, 1.0).rate.ok_or("model not admissible")?;
    let predicted = rate.eval(2000.0) / rate.eval(1000.0);
    let ratio = s2.value / s1.value;
    ensure(
        (ratio / predicted - 1.0).abs() <= 0.15,
        format!("decay ratio {ratio:.4} vs predicted {predicted:.4}"),
    )?;
    Ok(format!(
        "{}; ratio sigma_2000/sigma_1000 = {ratio:.4} vs predicted {predicted:.4}",
        notes.join(", ")
    ))
}

// ---------------------------------------------------------------- 8

fn witness_slopes() -> Verdict {
    let count = 20;
    let mut ks: Vec<usize> = (0..count)
        .map(|i| (10f64 * 20f64.powf(i as f64 / (count - 1) as f64)).round() as usize)
        .collect();
    ks.dedup();
    let sup = fit_slope(WitnessFamily::ZonalHarmonic, f64::INFINITY, &ks, 0.02).map_err(|e| e.to_string())?;
    let l2 = fit_slope(WitnessFamily::ZonalHarmonic, 2.0, &ks, 0.02).map_err(|e| e.to_string())?;
    ensure((sup.alpha_hat - 0.5).abs() <= 0.02, format!("p = inf slope {:.4}", sup.alpha_hat))?;
    ensure(l2.alpha_hat.abs() <= 1e-12, format!("p = 2 slope {:.2e}", l2.alpha_hat))?;
    Ok(format!(
        "p = inf slope {:.4} (+- {:.1e}), p = 2 slope {:.1e}, k in [{}, {}]",
        sup.alpha_hat, sup.stderr, l2.alpha_hat, sup.k_range.0, sup.k_range.1
    ))
}

// ---------------------------------------------------------------- 9

fn branch_and_quadrature(run: &HoRun) -> Verdict {
    let start = Instant::now();
    let op = TruncatedOperator::from_parts(&[(2.0, 1), (4.0, 2)], Mat::zeros(3, 3)).map_err(|e| e.to_string())?;
    let k = k_factor(c(1.0, 0.0), &op).map_err(|e| e.to_string())?;
    ensure((k[0] - c(0.0, -1.0)).norm() <= 1e-15, format!("(-1)^(-1/2) = {}", k[0]))?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10_000 {
        let w = c(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let v = principal_pow(w, -0.5);
        let upper = w.arg() > 0.0 && w.arg() <= PI;
        ensure((v.im < 0.0) == upper, format!("branch sign wrong at w = {w}"))?;
    }

    let mu = run.op.mu_values();
    let a = run.op.diag_a();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let z = random_point(&mut rng, &mu);
        let k = k_factor(z, &run.op).map_err(|e| e.to_string())?;
        for (ki, ai) in k.iter().zip(&a) {
            let want = 1.0 / (z - ai);
            worst = worst.max((ki * ki - want).norm() / want.norm());
        }
    }
    ensure(worst <= 1e-13, format!("K^2 vs (z - A)^-1 gap {worst:.2e}"))?;

    let doubled = ContourNodes {
        circle: 2 * run.cfg.contour.circle,
        panel: 2 * run.cfg.contour.panel,
        ..run.cfg.contour
    };
    let fine = compute_projections(&run.op, &run.enc, ProjectionMethod::Contour, &doubled, run.cfg.verification.trust_fraction)
        .map_err(|e| e.to_string())?;
    let mut shift = run.contour.s0.sub(&fine.s0).opnorm2().map_err(|e| e.to_string())?;
    let mut per_level = BTreeMap::new();
    for (k, p) in &run.contour.p {
        let f = fine.p(*k).ok_or(format!("refined route lacks level {k}"))?;
        let d = p.sub(f).opnorm2().map_err(|e| e.to_string())?;
        per_level.insert(*k, d);
        shift = shift.max(d);
    }
    ensure(shift <= 1e-10, format!("node doubling moves a projection by {shift:.2e}"))?;
    within(Duration::from_secs(30), start)?;
    Ok(format!(
        "(-1)^(-1/2) = -i, 10^4 branch signs, K^2 gap {worst:.1e} on 100 z, doubling shift {shift:.1e}"
    ))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: usize, name: &str, v: Verdict, t: Duration| {
        let (tag, detail) = match v {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {id} [{tag}] {name}: {detail} ({:.2}s)", t.as_secs_f64());
    };
    let timed = |f: &dyn Fn() -> Verdict| {
        let s = Instant::now();
        let v = f();
        (v, s.elapsed())
    };

    let (v, t) = timed(&exponent_tables);
    report(1, "exponent tables", v, t);
    let (v, t) = timed(&resolvent_factorization);
    report(2, "resolvent factorization", v, t);

    let started = Instant::now();
    let run = ho_run();
    let run_time = started.elapsed();
    let with_run = |f: fn(&HoRun) -> Verdict| -> Verdict {
        match &run {
            Ok(r) => f(r),
            Err(e) => Err(format!("oscillator run failed: {e}")),
        }
    };
    let (v, t) = timed(&|| with_run(projection_agreement));
    report(3, "contour vs eigen projections", v, t + run_time);
    let (v, t) = timed(&|| with_run(localization_and_rank));
    report(4, "localization and ranks", v, t);
    let (v, t) = timed(&|| with_run(bari_bound));
    report(5, "Bari bound", v, t);
    let (v, t) = timed(&|| with_run(completeness_trend));
    report(6, "completeness trend", v, t);
    let (v, t) = timed(&sigma_engine);
    report(7, "sigma engine vs brute force", v, t);
    let (v, t) = timed(&witness_slopes);
    report(8, "witness slopes", v, t);
    let (v, t) = timed(&|| with_run(branch_and_quadrature));
    report(9, "branch cut and quadrature", v, t);

    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
