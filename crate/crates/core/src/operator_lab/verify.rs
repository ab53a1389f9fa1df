use super::projections::{block_eigens, k_trust, level_projection, trusted_circles, ProjectionSet};
use super::{BlockMatrix, LabError, TruncatedOperator};
use crate::riesz_core::{EnclosureReport, Region};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub value: Complex64,
    pub region: Region,
    /// `Re <= mu_{K_trust} + r_{K_trust}`.
    pub trusted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub value: Complex64,
    pub nearest_level: usize,
    /// Distance to the nearest unperturbed level.
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelCheck {
    pub k: usize,
    /// Retained multiplicity of level `k`.
    pub expected: usize,
    pub count_halfgap: usize,
    /// `None` when the refined radius is not below the half-gap.
    pub count_refined: Option<usize>,
    pub radius_refined: Option<f64>,
    /// Largest `|lambda - mu_k|` among eigenvalues in the half-gap disk.
    pub max_shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub n0: usize,
    pub k_trust: usize,
    pub re_limit: f64,
    pub total_eigenvalues: usize,
    pub trusted_eigenvalues: usize,
    pub in_box: usize,
    /// Sum of retained multiplicities of levels `k <= N0`.
    pub box_expected: usize,
    pub levels: Vec<LevelCheck>,
    pub violations: Vec<Violation>,
    /// Trusted eigenvalues in neither the box nor a refined disk (refined disks
    /// only exist where they are smaller than the half-gap ones).
    pub refined_outside: usize,
    pub eigenvalues: Vec<EigenRecord>,
}

impl LocalizationReport {
    /// No violations and every trusted disk holds its multiplicity.
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
            && self.in_box == self.box_expected
            && self.levels.iter().all(|l| l.count_halfgap == l.expected)
    }
}

/// Classify the computed spectrum of `op` against the enclosure.
pub fn verify_localization(
    op: &TruncatedOperator,
    enclosure: &EnclosureReport,
    trust_fraction: f64,
) -> Result<LocalizationReport, LabError> {
    let kt = k_trust(op, trust_fraction);
    let circles = if kt > enclosure.n0 {
        trusted_circles(op, enclosure, kt)?
    } else {
        Vec::new()
    };
    let re_limit = circles
        .last()
        .map_or(enclosure.region.right, |c| c.center + c.radius);
    let eig = block_eigens(op)?;
    let mut records = Vec::new();
    let mut levels: Vec<LevelCheck> = circles
        .iter()
        .map(|c| {
            let disk = enclosure.disk(c.k);
            let refined = disk.and_then(|d| (d.radius_refined < c.radius).then_some(d.radius_refined));
            LevelCheck {
                k: c.k,
                expected: op.levels[c.k - 1].mult,
                count_halfgap: 0,
                count_refined: refined.map(|_| 0),
                radius_refined: refined,
                max_shift: 0.0,
            }
        })
        .collect();
    let mut violations = Vec::new();
    let mut in_box = 0;
    let mut refined_outside = 0;
    for &lam in eig.iter().flat_map(|e| &e.values) {
        let trusted = lam.re <= re_limit;
        let mut region = Region::Outside;
        if enclosure.region.contains(lam) {
            region = Region::Box;
        } else if let Some(i) = circles.iter().position(|c| c.contains(lam)) {
            region = Region::Disk(circles[i].k);
        }
        records.push(EigenRecord {
            value: lam,
            region,
            trusted,
        });
        if !trusted {
            continue;
        }
        match region {
            Region::Box => in_box += 1,
            Region::Disk(k) => {
                let lc = &mut levels[k - enclosure.n0 - 1];
                lc.count_halfgap += 1;
                let d = (lam - op.levels[k - 1].mu).norm();
                lc.max_shift = lc.max_shift.max(d);
                match (lc.radius_refined, lc.count_refined.as_mut()) {
                    (Some(rr), Some(cnt)) if d < rr => *cnt += 1,
                    _ => refined_outside += 1,
                }
            }
            Region::Outside => {
                let (nearest, dist) = op
                    .levels
                    .iter()
                    .map(|l| (l.k, (lam - l.mu).norm()))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap_or((0, f64::INFINITY));
                violations.push(Violation {
                    value: lam,
                    nearest_level: nearest,
                    distance: dist,
                });
                refined_outside += 1;
            }
        }
    }
    let box_expected = op
        .levels
        .iter()
        .filter(|l| l.k <= enclosure.n0)
        .map(|l| l.mult)
        .sum();
    Ok(LocalizationReport {
        n0: enclosure.n0,
        k_trust: kt,
        re_limit,
        total_eigenvalues: records.len(),
        trusted_eigenvalues: records.iter().filter(|r| r.trusted).count(),
        in_box,
        box_expected,
        levels,
        violations,
        refined_outside,
        eigenvalues: records,
    })
}

/// Quality of one computed projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionCheck {
    /// `0` for `S0`.
    pub k: usize,
    pub idempotency: f64,
    /// Number of singular values above 1/2.
    pub rank_sv: usize,
    /// Largest singular value below 1/2 (`0` if none).
    pub sv_below_half: f64,
    pub trace: Complex64,
}

/// Idempotency and singular-value rank of each projection, and the largest
/// `||P_j P_k||` over distinct pairs (including `S0`).
pub fn projection_diagnostics(ps: &ProjectionSet) -> Result<(Vec<ProjectionCheck>, f64), LabError> {
    let all: Vec<(usize, &BlockMatrix)> = std::iter::once((0, &ps.s0))
        .chain(ps.p.iter().map(|(k, p)| (*k, p)))
        .collect();
    let mut checks = Vec::new();
    for &(k, p) in &all {
        let sv = p.singular_values()?;
        checks.push(ProjectionCheck {
            k,
            idempotency: p.mul(p).sub(p).opnorm2()?,
            rank_sv: sv.iter().filter(|&&s| s > 0.5).count(),
            sv_below_half: sv.iter().copied().filter(|&s| s <= 0.5).fold(0.0, f64::max),
            trace: p.trace(),
        });
    }
    let mut disjoint: f64 = 0.0;
    for (i, (_, a)) in all.iter().enumerate() {
        for (_, b) in all.iter().skip(i + 1) {
            disjoint = disjoint.max(a.mul(b).opnorm2()?).max(b.mul(a).opnorm2()?);
        }
    }
    Ok((checks, disjoint))
}

/// `sum_{Nstar <= n <= K_trust} |<(P_n - P_n^0) f, f>|`.
pub fn bari_sum(
    ps: &ProjectionSet,
    op: &TruncatedOperator,
    f: &[Complex64],
    nstar: usize,
) -> Result<f64, LabError> {
    if nstar <= ps.n0 {
        return Err(LabError::InvalidArgument {
            reason: format!("Nstar = {nstar} must exceed N0 = {}", ps.n0),
        });
    }
    if nstar > ps.k_trust {
        return Err(LabError::TrustExhausted {
            n0: ps.n0,
            k_trust: ps.k_trust,
        });
    }
    if f.len() != op.dim() || f.iter().all(|x| x.norm() == 0.0) {
        return Err(LabError::InvalidArgument {
            reason: "f must be a nonzero vector of the operator dimension".into(),
        });
    }
    let mut total = 0.0;
    for (&n, p) in ps.p.range(nstar..=ps.k_trust) {
        let pn = p.quad_form(f);
        let p0: Complex64 = (0..op.dim())
            .filter(|&i| op.level_of[i] == n)
            .map(|i| Complex64::from(f[i].norm_sqr()))
            .sum();
        total += (pn - p0).norm();
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompletenessPoint {
    pub n: usize,
    /// `||S_n^0 - S_n||_2`.
    pub defect: f64,
    /// `max ||S_n f - f||` over the probes.
    pub max_residual: f64,
}

/// Distance of `S_n` from the unperturbed projection onto levels `<= n`, and
/// how well `S_n` reproduces the probe vectors.
pub fn completeness_defect(
    ps: &ProjectionSet,
    op: &TruncatedOperator,
    n: usize,
    probes: &[Vec<Complex64>],
) -> Result<CompletenessPoint, LabError> {
    let s = ps.s_n(n)?;
    let s0 = level_projection(op, 1, n);
    let defect = s0.sub(&s).opnorm2()?;
    let max_residual = probes
        .iter()
        .map(|f| {
            s.apply(f)
                .iter()
                .zip(f)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    Ok(CompletenessPoint {
        n,
        defect,
        max_residual,
    })
}

/// Seeded complex Gaussian unit vectors, optionally supported on levels `<= max_level`.
pub fn random_unit_vectors(
    op: &TruncatedOperator,
    count: usize,
    seed: u64,
    max_level: Option<usize>,
) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = max_level.unwrap_or(usize::MAX);
    (0..count)
        .map(|_| {
            let mut f: Vec<Complex64> = op
                .level_of
                .iter()
                .map(|&k| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    if k <= cap {
                        Complex64::new(re, im)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            let norm = f.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                f.iter_mut().for_each(|x| *x /= norm);
            }
            f
        })
        .collect()
}
