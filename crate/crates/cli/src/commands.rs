use crate::config::{OmegaSource, RunConfig};
use crate::error::CliError;
use crate::output::{num, Artifacts};
use rieszlab::model_catalog::{self, ExponentResult};
use rieszlab::operator_lab::{
    bari_sum, build_enclosure_level_block, completeness_defect, compute_projections, k_trust,
    level_block_norms, level_omega, perturbation_matrix, projection_diagnostics, random_unit_vectors,
    verify_localization, CompletenessPoint, LevelBlockOptions, LevelCheck, LocalizationReport,
    ProjectionCheck, ProjectionMethod, ProjectionSet, TruncatedOperator, Violation,
};
use rieszlab::projection_norms::{fit_slope, norm_table, p_label, SlopeFit};
use rieszlab::riesz_core::{
    build_enclosure, find_cutoff_n0, gap_radii, power_law_admissible, sigma_tail, CutoffRule, DecayRate,
    DiskFlag, EnclosureOptions, EnclosureReport, OmegaModel, Region, SigmaOptions,
};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

/// Result of a subcommand: files to write and whether verification found problems.
#[derive(Debug)]
pub struct Outcome {
    pub artifacts: Artifacts,
    pub findings: bool,
    pub summary: String,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    seed: u64,
    config: &'a RunConfig,
    #[serde(flatten)]
    payload: T,
}

fn envelope<'a, T: Serialize>(sub: &'a str, cfg: &'a RunConfig, payload: T) -> Envelope<'a, T> {
    Envelope {
        tool: "rieszlab",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: sub,
        seed: cfg.seed,
        config: cfg,
        payload,
    }
}

fn sigma_options(cfg: &RunConfig) -> SigmaOptions {
    SigmaOptions {
        j_max: cfg.enclosure.j_max,
        ..SigmaOptions::default()
    }
}

fn exponent(cfg: &RunConfig) -> Result<Option<ExponentResult>, CliError> {
    match cfg.lebesgue_index()? {
        Some(r) => Ok(Some(model_catalog::omega_model(cfg.model.id(), r)?)),
        None => Ok(None),
    }
}

fn assemble(cfg: &RunConfig) -> Result<TruncatedOperator, CliError> {
    let pot = cfg.potential.as_ref().ok_or_else(|| CliError::Config {
        path: "potential".into(),
        reason: "required for matrix assembly".into(),
    })?;
    Ok(perturbation_matrix(cfg.model.id(), pot, &cfg.truncation())?)
}

/// Weight model for the configured source (`op` is required for `matrix`).
fn omega_for(cfg: &RunConfig, exp: Option<&ExponentResult>, op: Option<&TruncatedOperator>) -> Result<OmegaModel, CliError> {
    let o = &cfg.omega;
    let model = match o.source {
        OmegaSource::Catalog => exp
            .ok_or_else(|| CliError::Config {
                path: "model.r".into(),
                reason: "required by omega.source = \"catalog\"".into(),
            })?
            .omega_model(o.scale),
        OmegaSource::PowerLaw => OmegaModel::power_law(o.coeff, o.alpha, o.beta),
        OmegaSource::Zero => OmegaModel::zero(),
        OmegaSource::Explicit => OmegaModel::head_only(o.values.clone()),
        OmegaSource::Matrix => {
            let op = op.ok_or_else(|| CliError::Other("matrix weights need the assembled operator".into()))?;
            OmegaModel::head_only(level_omega(&level_block_norms(op)?))
        }
    };
    model.validate()?;
    Ok(model)
}

fn ratio_json(exp: &ExponentResult) -> Value {
    json!({
        "regime": exp.regime,
        "alpha": exp.alpha.to_string(),
        "alpha_value": exp.alpha_f64(),
        "log_beta": exp.log_beta.to_string(),
        "alpha_effective": exp.alpha_effective.to_string(),
        "alpha_effective_value": exp.alpha_effective_f64(),
        "gamma": exp.gamma,
        "admissible": exp.admissible,
    })
}

#[derive(Serialize)]
struct SigmaRow {
    n: usize,
    sigma: Option<f64>,
    remainder: Option<f64>,
    upper: Option<f64>,
    diverged: Option<bool>,
    error: Option<String>,
}

pub fn check_conditions(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let id = cfg.model.id();
    let r = cfg.lebesgue_index()?.ok_or_else(|| CliError::Config {
        path: "model.r".into(),
        reason: "required by check-conditions".into(),
    })?;
    let range = model_catalog::admissible_range(id)?;
    let exp = model_catalog::omega_model(id, r)?;
    let r_in_range = range.contains(r);
    let omega = omega_for(cfg, Some(&exp), None)?;
    let mu = model_catalog::spectral_model(id, cfg.shift())?;
    let gamma = id.gap_exponent() as f64;

    let (admissible, rate): (bool, Option<DecayRate>) = match cfg.omega.source {
        OmegaSource::Catalog => {
            let a = power_law_admissible(exp.alpha_effective_f64(), gamma);
            (exp.admissible && r_in_range, a.rate.filter(|_| exp.admissible))
        }
        OmegaSource::PowerLaw => {
            let a = power_law_admissible(cfg.omega.alpha, gamma);
            (a.admissible, a.rate)
        }
        _ => (true, None),
    };

    let opts = sigma_options(cfg);
    let nmax = cfg.conditions.sigma_n.iter().copied().max().unwrap_or(1);
    let radii = gap_radii(&mu, nmax + 1)?;
    let mut rows = Vec::new();
    for &n in &cfg.conditions.sigma_n {
        rows.push(match sigma_tail(&mu, &radii, &omega, n, &opts) {
            Ok(s) => SigmaRow {
                n,
                sigma: Some(s.value),
                remainder: Some(s.remainder),
                upper: Some(s.upper()),
                diverged: Some(s.diverged),
                error: None,
            },
            Err(e) => SigmaRow {
                n,
                sigma: None,
                remainder: None,
                upper: None,
                diverged: None,
                error: Some(e.to_string()),
            },
        });
    }
    let cutoff = if admissible {
        match find_cutoff_n0(&mu, &radii, &omega, cfg.enclosure.threshold, cfg.enclosure.n_cap, &opts) {
            Ok(c) => json!({ "N0": c.n0, "sigma_upper": c.sigma.upper(), "threshold": cfg.enclosure.threshold }),
            Err(e) => json!({ "N0": null, "error": e.to_string(), "threshold": cfg.enclosure.threshold }),
        }
    } else {
        json!({ "N0": null, "error": "weights not admissible: sigma_N does not tend to zero" })
    };

    let payload = json!({
        "model": id,
        "r": r.to_string(),
        "r_in_range": r_in_range,
        "admissible_range": {
            "lower_exclusive": range.lower_exclusive.to_string(),
            "includes_infinity": range.includes_infinity,
        },
        "exponent": ratio_json(&exp),
        "omega_source": cfg.omega.source,
        "admissible": admissible,
        "alpha": exp.alpha.to_string(),
        "decay_rate": rate,
        "cutoff": cutoff,
        "sigma_table": rows,
    });
    let mut art = Artifacts::default();
    art.json("conditions.json", &envelope("check-conditions", cfg, &payload))?;
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                opt(r.sigma),
                opt(r.remainder),
                opt(r.upper),
                r.diverged.map(|b| b.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    art.csv("sigma_table.csv", &["n", "sigma", "remainder", "upper", "diverged"], &csv_rows)?;
    Ok(Outcome {
        artifacts: art,
        findings: false,
        summary: format!(
            "{} r={}: alpha={} ({}), admissible={}",
            id.name(),
            r,
            exp.alpha,
            exp.regime,
            admissible
        ),
    })
}

fn enclosure_sigma(cfg: &RunConfig, omega: &OmegaModel, k_max: Option<usize>) -> Result<EnclosureReport, CliError> {
    let e = &cfg.enclosure;
    let mu = model_catalog::spectral_model(cfg.model.id(), cfg.shift())?;
    let opts = EnclosureOptions {
        epsilon: e.epsilon,
        threshold: e.threshold,
        n_cap: e.n_cap,
        h_cap_exp: e.h_cap_exp,
        k_max: k_max.or(e.k_max),
        real_samples: e.real_samples,
        sigma: sigma_options(cfg),
    };
    let radii = gap_radii(&mu, 64)?;
    Ok(build_enclosure(&mu, &radii, omega, &opts)?)
}

fn level_block_options(cfg: &RunConfig) -> LevelBlockOptions {
    let e = &cfg.enclosure;
    LevelBlockOptions {
        threshold: e.threshold,
        epsilon: e.epsilon,
        circle_samples: e.circle_samples,
        real_samples: e.real_samples,
        h_cap_exp: e.h_cap_exp,
        trust_fraction: cfg.verification.trust_fraction,
    }
}

/// Polylines of the box and of each disk (half-gap and, where usable, refined).
fn geometry_rows(enc: &EnclosureReport) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    let b = &enc.region;
    for (x, y) in [
        (b.left, -b.half_height),
        (b.right, -b.half_height),
        (b.right, b.half_height),
        (b.left, b.half_height),
        (b.left, -b.half_height),
    ] {
        rows.push(vec!["box".into(), "0".into(), num(x), num(y)]);
    }
    const SAMPLES: usize = 64;
    for d in &enc.disks {
        let mut circle = |shape: &str, radius: f64| {
            for j in 0..=SAMPLES {
                let t = 2.0 * PI * j as f64 / SAMPLES as f64;
                rows.push(vec![
                    shape.into(),
                    d.k.to_string(),
                    num(d.center + radius * t.cos()),
                    num(radius * t.sin()),
                ]);
            }
        };
        circle("disk_halfgap", d.radius_halfgap);
        if d.flag == DiskFlag::Ok {
            circle("disk_refined", d.radius_refined);
        }
    }
    rows
}

fn flag_counts(enc: &EnclosureReport) -> BTreeMap<&'static str, usize> {
    let mut m = BTreeMap::new();
    for d in &enc.disks {
        let key = match d.flag {
            DiskFlag::Ok => "ok",
            DiskFlag::RefinedExceedsHalfGap => "refined_exceeds_half_gap",
            DiskFlag::Degenerate => "degenerate",
        };
        *m.entry(key).or_insert(0) += 1;
    }
    m
}

pub fn localize(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let op = if cfg.omega.source == OmegaSource::Matrix || cfg.enclosure.cutoff_rule == CutoffRule::LevelBlock {
        Some(assemble(cfg)?)
    } else {
        None
    };
    let exp = exponent(cfg)?;
    let enc = match cfg.enclosure.cutoff_rule {
        CutoffRule::Sigma => {
            let omega = omega_for(cfg, exp.as_ref(), op.as_ref())?;
            enclosure_sigma(cfg, &omega, None)?
        }
        CutoffRule::LevelBlock => {
            let op = op.as_ref().ok_or_else(|| CliError::Other("level_block needs the assembled operator".into()))?;
            build_enclosure_level_block(op, &level_block_options(cfg))?
        }
    };
    let payload = json!({
        "model": cfg.model.id(),
        "omega_source": cfg.omega.source,
        "exponent": exp.as_ref().map(ratio_json),
        "enclosure": enc,
        "disk_flags": flag_counts(&enc),
    });
    let mut art = Artifacts::default();
    art.json("enclosure.json", &envelope("localize", cfg, &payload))?;
    art.csv("geometry.csv", &["shape", "k", "x", "y"], &geometry_rows(&enc))?;
    Ok(Outcome {
        artifacts: art,
        findings: false,
        summary: format!(
            "N0={} h1={} h2={} disks={} (rule {:?})",
            enc.n0,
            enc.h1,
            enc.h2,
            enc.disks.len(),
            enc.cutoff_rule
        ),
    })
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
    pass: bool,
}

#[derive(Serialize)]
struct LocalizationSummary<'a> {
    n0: usize,
    k_trust: usize,
    re_limit: f64,
    total_eigenvalues: usize,
    trusted_eigenvalues: usize,
    in_box: usize,
    box_expected: usize,
    refined_outside: usize,
    clean: bool,
    levels: &'a [LevelCheck],
    violations: &'a [Violation],
}

impl<'a> From<&'a LocalizationReport> for LocalizationSummary<'a> {
    fn from(r: &'a LocalizationReport) -> Self {
        Self {
            n0: r.n0,
            k_trust: r.k_trust,
            re_limit: r.re_limit,
            total_eigenvalues: r.total_eigenvalues,
            trusted_eigenvalues: r.trusted_eigenvalues,
            in_box: r.in_box,
            box_expected: r.box_expected,
            refined_outside: r.refined_outside,
            clean: r.is_clean(),
            levels: &r.levels,
            violations: &r.violations,
        }
    }
}

#[derive(Serialize)]
struct ProjectionSummary {
    method: ProjectionMethod,
    ranks: BTreeMap<usize, usize>,
    box_count: usize,
    nodes_used: BTreeMap<usize, usize>,
    checks: Vec<ProjectionCheck>,
    max_idempotency: f64,
    max_disjointness: f64,
    /// Singular-value ranks equal retained multiplicities (box: levels `<= N0`).
    ranks_match: bool,
}

fn summarize(ps: &ProjectionSet, op: &TruncatedOperator, box_expected: usize) -> Result<ProjectionSummary, CliError> {
    let (checks, disjoint) = projection_diagnostics(ps)?;
    let ranks_match = checks.iter().all(|c| {
        let expected = if c.k == 0 { box_expected } else { op.levels[c.k - 1].mult };
        c.rank_sv == expected
    }) && ps.box_count == box_expected
        && ps.ranks.iter().all(|(k, r)| *r == op.levels[k - 1].mult);
    Ok(ProjectionSummary {
        method: ps.method,
        ranks: ps.ranks.clone(),
        box_count: ps.box_count,
        nodes_used: ps.nodes_used.clone(),
        max_idempotency: checks.iter().map(|c| c.idempotency).fold(0.0, f64::max),
        max_disjointness: disjoint,
        checks,
        ranks_match,
    })
}

/// `||S_n f - f||` non-increasing up to `jitter`, and no defect above twice
/// the median of the sweep (a decaying defect is still bounded).
pub fn completeness_checks(points: &[CompletenessPoint], jitter: f64) -> (bool, bool) {
    let monotone = points
        .windows(2)
        .all(|w| w[1].max_residual <= w[0].max_residual + jitter);
    let med = median(points.iter().map(|p| p.defect).collect());
    let bounded = points.iter().all(|p| p.defect <= 2.0 * med + jitter);
    (monotone, bounded)
}

pub fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let op = assemble(cfg)?;
    let ver = &cfg.verification;
    let kt = k_trust(&op, ver.trust_fraction);
    let enc = match cfg.enclosure.cutoff_rule {
        CutoffRule::Sigma => {
            let omega = OmegaModel::head_only(level_omega(&level_block_norms(&op)?));
            enclosure_sigma(cfg, &omega, Some(kt.max(1)))?
        }
        CutoffRule::LevelBlock => build_enclosure_level_block(&op, &level_block_options(cfg))?,
    };
    let loc = verify_localization(&op, &enc, ver.trust_fraction)?;

    let mut sets = Vec::new();
    for &m in &ver.methods {
        if sets.iter().all(|s: &ProjectionSet| s.method != m) {
            sets.push(compute_projections(&op, &enc, m, &cfg.contour, ver.trust_fraction)?);
        }
    }
    let summaries = sets
        .iter()
        .map(|ps| summarize(ps, &op, loc.box_expected))
        .collect::<Result<Vec<_>, _>>()?;

    let mut checks = vec![Check {
        name: "localization_violations",
        value: loc.violations.len() as f64,
        limit: 0.0,
        pass: loc.is_clean(),
    }];
    for s in &summaries {
        checks.push(Check {
            name: match s.method {
                ProjectionMethod::Contour => "ranks_contour",
                ProjectionMethod::Eigen => "ranks_eigen",
            },
            value: if s.ranks_match { 0.0 } else { 1.0 },
            limit: 0.0,
            pass: s.ranks_match,
        });
    }

    let mut agreement = None;
    if let (Some(a), Some(b)) = (
        sets.iter().find(|s| s.method == ProjectionMethod::Contour),
        sets.iter().find(|s| s.method == ProjectionMethod::Eigen),
    ) {
        let mut per_level = BTreeMap::new();
        per_level.insert(0usize, a.s0.sub(&b.s0).frobenius());
        for (k, p) in &a.p {
            let q = b.p(*k).ok_or_else(|| CliError::Other(format!("eigen route has no projection for level {k}")))?;
            per_level.insert(*k, p.sub(q).frobenius());
        }
        let max = per_level.values().copied().fold(0.0, f64::max);
        checks.push(Check {
            name: "projection_agreement",
            value: max,
            limit: ver.agreement_tol,
            pass: max <= ver.agreement_tol,
        });
        agreement = Some(json!({ "max_frobenius": max, "per_level": per_level }));
    }

    // contour route is primary when present
    let primary = sets
        .iter()
        .find(|s| s.method == ProjectionMethod::Contour)
        .unwrap_or(&sets[0]);
    let nstar = ver.nstar.unwrap_or(enc.n0 + 1);
    let vectors = random_unit_vectors(&op, ver.random_vectors, cfg.seed, None);
    let bari: Vec<f64> = vectors
        .iter()
        .map(|f| bari_sum(primary, &op, f, nstar))
        .collect::<Result<_, _>>()?;
    let bari_max = bari.iter().copied().fold(0.0, f64::max);
    checks.push(Check {
        name: "bari_max",
        value: bari_max,
        limit: ver.bari_bound,
        pass: bari_max <= ver.bari_bound,
    });

    let probes = random_unit_vectors(&op, ver.probes, cfg.seed.wrapping_add(1), Some(ver.probe_max_level));
    let sweep: Vec<CompletenessPoint> = (enc.n0 + 1..=primary.k_trust)
        .map(|n| completeness_defect(primary, &op, n, &probes))
        .collect::<Result<_, _>>()?;
    let (monotone, bounded) = completeness_checks(&sweep, 1e-10);
    checks.push(Check {
        name: "completeness_monotone",
        value: if monotone { 0.0 } else { 1.0 },
        limit: 0.0,
        pass: monotone,
    });
    checks.push(Check {
        name: "completeness_bounded",
        value: if bounded { 0.0 } else { 1.0 },
        limit: 0.0,
        pass: bounded,
    });
    let findings = checks.iter().any(|c| !c.pass);

    let payload = json!({
        "operator": {
            "model": op.model,
            "dim": op.dim(),
            "levels": op.num_levels(),
            "blocks": op.blocks.len(),
            "k_trust": kt,
            "quadrature": op.quadrature,
        },
        "enclosure": enc,
        "localization": LocalizationSummary::from(&loc),
        "projections": summaries,
        "agreement": agreement,
        "bari": {
            "nstar": nstar,
            "vectors": bari.len(),
            "max": bari_max,
            "mean": if bari.is_empty() { 0.0 } else { bari.iter().sum::<f64>() / bari.len() as f64 },
        },
        "completeness": sweep,
        "checks": checks,
        "verdict": if findings { "violations" } else { "clean" },
    });

    let mut art = Artifacts::default();
    art.json("simulation.json", &envelope("simulate", cfg, &payload))?;
    let eig_rows: Vec<Vec<String>> = loc
        .eigenvalues
        .iter()
        .map(|e| {
            let level: i64 = match e.region {
                Region::Box => 0,
                Region::Disk(k) => k as i64,
                Region::Outside => -1,
            };
            vec![num(e.value.re), num(e.value.im), level.to_string(), e.trusted.to_string()]
        })
        .collect();
    art.csv("eigenvalues.csv", &["re", "im", "level_assigned", "trusted"], &eig_rows)?;
    art.csv("geometry.csv", &["shape", "k", "x", "y"], &geometry_rows(&enc))?;
    let comp_rows: Vec<Vec<String>> = sweep
        .iter()
        .map(|p| vec![p.n.to_string(), num(p.defect), num(p.max_residual)])
        .collect();
    art.csv("completeness.csv", &["n", "defect", "max_residual"], &comp_rows)?;
    let bari_rows: Vec<Vec<String>> = bari.iter().enumerate().map(|(i, b)| vec![i.to_string(), num(*b)]).collect();
    art.csv("bari.csv", &["vector", "bari_sum"], &bari_rows)?;

    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    Ok(Outcome {
        artifacts: art,
        findings,
        summary: format!(
            "dim={} N0={} K_trust={} violations={} bari_max={:.3e} {}",
            op.dim(),
            enc.n0,
            kt,
            loc.violations.len(),
            bari_max,
            if failed.is_empty() { "clean".to_string() } else { format!("failed: {}", failed.join(", ")) }
        ),
    })
}

pub fn project_norms(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let fams = cfg.witness_families()?;
    let ps = cfg.p_values()?;
    let ks = cfg.norms.levels();
    let mut rows = Vec::new();
    let mut fits: Vec<SlopeFit> = Vec::new();
    for &f in &fams {
        for rec in norm_table(f, &ks, &ps)? {
            rows.push(vec![rec.k.to_string(), rec.p, num(rec.norm), rec.family]);
        }
        for &p in &ps {
            fits.push(fit_slope(f, p, &ks, cfg.norms.tol)?);
        }
    }
    let findings = fits.iter().any(|f| !f.pass);
    let notes: Vec<String> = fits
        .iter()
        .filter(|f| f.reference_log_power.is_some_and(|l| l != 0.0))
        .map(|f| {
            format!(
                "{} at p = {}: the reference carries a logarithmic factor that a power fit does not resolve",
                f.family, f.p
            )
        })
        .collect();
    let payload = json!({
        "levels": ks,
        "ps": ps.iter().map(|&p| p_label(p)).collect::<Vec<_>>(),
        "fits": fits,
        "notes": notes,
        "verdict": if findings { "violations" } else { "pass" },
    });
    let mut art = Artifacts::default();
    art.csv("norms.csv", &["k", "p", "norm", "family"], &rows)?;
    art.json("norm_fits.json", &envelope("project-norms", cfg, &payload))?;
    let passed = fits.iter().filter(|f| f.pass).count();
    Ok(Outcome {
        artifacts: art,
        findings,
        summary: format!("{} norms, {}/{} slope fits pass", rows.len(), passed, fits.len()),
    })
}

const SECTIONS: [(&str, &str); 4] = [
    ("conditions", "conditions.json"),
    ("enclosure", "enclosure.json"),
    ("simulation", "simulation.json"),
    ("norms", "norm_fits.json"),
];

fn headline(section: &str, v: &Value) -> Value {
    let g = |p: &str| v.pointer(p).cloned().unwrap_or(Value::Null);
    match section {
        "conditions" => json!({ "admissible": g("/admissible"), "alpha": g("/alpha"), "N0": g("/cutoff/N0") }),
        "enclosure" => json!({ "N0": g("/enclosure/N0"), "h1": g("/enclosure/h1"), "h2": g("/enclosure/h2") }),
        "simulation" => json!({
            "verdict": g("/verdict"),
            "violations": v.pointer("/localization/violations").and_then(Value::as_array).map(Vec::len),
            "bari_max": g("/bari/max"),
            "agreement": g("/agreement/max_frobenius"),
        }),
        "norms" => json!({ "verdict": g("/verdict") }),
        _ => Value::Null,
    }
}

/// Merge whatever earlier subcommands left in `dir` into `summary.json`.
pub fn report(cfg: Option<&RunConfig>, dir: &Path) -> Result<Outcome, CliError> {
    let mut sections = serde_json::Map::new();
    let mut heads = serde_json::Map::new();
    let mut findings = false;
    for (name, file) in SECTIONS {
        let path = dir.join(file);
        if !path.exists() {
            continue;
        }
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
        if v.pointer("/verdict").and_then(Value::as_str) == Some("violations") {
            findings = true;
        }
        heads.insert(name.into(), headline(name, &v));
        sections.insert(name.into(), v);
    }
    if sections.is_empty() {
        return Err(CliError::Other(format!("no earlier outputs found in {}", dir.display())));
    }
    let names: Vec<String> = sections.keys().cloned().collect();
    let doc = json!({
        "tool": "rieszlab",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": "report",
        "seed": cfg.map(|c| c.seed),
        "config": cfg,
        "headline": heads,
        "sections": sections,
    });
    let mut art = Artifacts::default();
    art.json("summary.json", &doc)?;
    Ok(Outcome {
        artifacts: art,
        findings,
        summary: format!("merged {}", names.join(", ")),
    })
}

