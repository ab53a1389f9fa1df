use super::resolvent::{resolvent_blocks, ResolventMethod};
use super::{BlockMatrix, LabError, TruncatedOperator};
use crate::linalg::{self, CMat};
use crate::quadrature::gauss_legendre;
use crate::riesz_core::{radii_from_values, EnclosureReport};
use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Levels with `mu_k <= DEFAULT_TRUST_FRACTION * mu_max` are considered
/// unaffected by truncation.
pub const DEFAULT_TRUST_FRACTION: f64 = 0.5;

/// Target size of the trapezoid / panel truncation error.
const QUAD_TARGET: f64 = 1e-17;
/// Relative distance below which an eigenvalue counts as lying on a contour.
const HIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMethod {
    Contour,
    Eigen,
}

/// Contour quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourNodes {
    /// Minimum trapezoid nodes per circle; raised per block when an
    /// eigenvalue sits close to the circle.
    pub circle: usize,
    /// Gauss–Legendre nodes per panel of the box boundary.
    pub panel: usize,
    /// Minimum panels per box side.
    pub min_panels: usize,
    /// Hard cap on nodes per circle.
    pub max_circle: usize,
}

impl Default for ContourNodes {
    fn default() -> Self {
        Self {
            circle: 64,
            panel: 16,
            min_panels: 2,
            max_circle: 1 << 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub k: usize,
    pub center: f64,
    pub radius: f64,
}

impl Circle {
    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }
}

/// `S0` (box) and `P_k` (circles, `N0 < k <= K_trust`) on the symmetry blocks.
#[derive(Debug, Clone)]
pub struct ProjectionSet {
    pub method: ProjectionMethod,
    pub n0: usize,
    pub k_trust: usize,
    pub circles: Vec<Circle>,
    pub s0: BlockMatrix,
    pub p: BTreeMap<usize, BlockMatrix>,
    /// Eigenvalues of `T` strictly inside each circle.
    pub ranks: BTreeMap<usize, usize>,
    /// Eigenvalues of `T` inside the box.
    pub box_count: usize,
    /// Largest node count used on each circle (key `0`: total box nodes).
    pub nodes_used: BTreeMap<usize, usize>,
}

impl ProjectionSet {
    pub fn p(&self, k: usize) -> Option<&BlockMatrix> {
        self.p.get(&k)
    }

    /// `S_n = S0 + sum_{N0 < k <= n} P_k`.
    pub fn s_n(&self, n: usize) -> Result<BlockMatrix, LabError> {
        if n > self.k_trust {
            return Err(LabError::TrustExhausted {
                n0: self.n0,
                k_trust: self.k_trust,
            });
        }
        let mut s = self.s0.clone();
        for (_, p) in self.p.range(..=n) {
            s = s.add(p);
        }
        Ok(s)
    }
}

/// Unperturbed projection onto the levels in `lo..=hi`, on the blocks of `op`.
pub(crate) fn level_projection(op: &TruncatedOperator, lo: usize, hi: usize) -> BlockMatrix {
    let mut out = BlockMatrix::zeros(&op.blocks, op.dim());
    for (b, idx) in op.blocks.iter().enumerate() {
        if idx.iter().any(|&i| (lo..=hi).contains(&op.level_of[i])) {
            let m = Mat::from_fn(idx.len(), idx.len(), |a, c| {
                if a == c && (lo..=hi).contains(&op.level_of[idx[a]]) {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            out.set(b, m);
        }
    }
    out
}

/// Largest `k` with `mu_k <= fraction * mu_max`.
pub fn k_trust(op: &TruncatedOperator, fraction: f64) -> usize {
    let mu_max = op.levels.last().map_or(0.0, |l| l.mu);
    op.levels
        .iter()
        .filter(|l| l.mu <= fraction * mu_max)
        .map(|l| l.k)
        .max()
        .unwrap_or(0)
}

/// Eigendecomposition of one symmetry block.
#[derive(Debug, Clone)]
pub(crate) struct EigenBlock {
    pub values: Vec<Complex64>,
    pub right: CMat,
    /// `right^{-1}`; its rows are the left eigenvectors.
    pub left: CMat,
}

pub(crate) fn block_eigens(op: &TruncatedOperator) -> Result<Vec<EigenBlock>, LabError> {
    op.blocks
        .iter()
        .map(|idx| {
            let (values, right) = linalg::eigen(op.t_block(idx).as_ref())?;
            let left = linalg::inverse(right.as_ref())?;
            Ok(EigenBlock { values, right, left })
        })
        .collect()
}

/// Circles `N0 < k <= K_trust`, taken from the enclosure where present and
/// from the half-gaps of `op` otherwise.
pub(crate) fn trusted_circles(
    op: &TruncatedOperator,
    enclosure: &EnclosureReport,
    k_trust: usize,
) -> Result<Vec<Circle>, LabError> {
    if k_trust == 0 {
        return Ok(Vec::new());
    }
    let radii = radii_from_values(&op.mu_values(), k_trust)?;
    Ok(((enclosure.n0 + 1)..=k_trust)
        .map(|k| {
            let center = op.levels[k - 1].mu;
            let radius = enclosure
                .disk(k)
                .map_or_else(|| radii.get(k).unwrap_or(0.0), |d| d.radius_halfgap);
            Circle { k, center, radius }
        })
        .collect())
}

fn trust_check(op: &TruncatedOperator, enclosure: &EnclosureReport, fraction: f64) -> Result<usize, LabError> {
    let kt = k_trust(op, fraction);
    if kt <= enclosure.n0 {
        return Err(LabError::TrustExhausted {
            n0: enclosure.n0,
            k_trust: kt,
        });
    }
    Ok(kt)
}

/// Riesz projections of the finite section for the box and the trusted circles.
pub fn compute_projections(
    op: &TruncatedOperator,
    enclosure: &EnclosureReport,
    method: ProjectionMethod,
    nodes: &ContourNodes,
    trust_fraction: f64,
) -> Result<ProjectionSet, LabError> {
    let kt = trust_check(op, enclosure, trust_fraction)?;
    let circles = trusted_circles(op, enclosure, kt)?;
    let eig = block_eigens(op)?;
    let bx = enclosure.region;
    let mut ranks = BTreeMap::new();
    for c in &circles {
        let n = eig.iter().flat_map(|e| &e.values).filter(|&&l| c.contains(l)).count();
        ranks.insert(c.k, n);
    }
    let box_count = eig.iter().flat_map(|e| &e.values).filter(|&&l| bx.contains(l)).count();

    let mut set = ProjectionSet {
        method,
        n0: enclosure.n0,
        k_trust: kt,
        circles: circles.clone(),
        s0: BlockMatrix::zeros(&op.blocks, op.dim()),
        p: BTreeMap::new(),
        ranks,
        box_count,
        nodes_used: BTreeMap::new(),
    };
    match method {
        ProjectionMethod::Eigen => {
            for (b, e) in eig.iter().enumerate() {
                let pick = |inside: &dyn Fn(Complex64) -> bool| -> Option<CMat> {
                    let sel: Vec<usize> = (0..e.values.len()).filter(|&i| inside(e.values[i])).collect();
                    if sel.is_empty() {
                        return None;
                    }
                    let n = e.values.len();
                    Some(Mat::from_fn(n, n, |r, c| {
                        sel.iter().map(|&i| e.right[(r, i)] * e.left[(i, c)]).sum()
                    }))
                };
                if let Some(m) = pick(&|l| bx.contains(l)) {
                    set.s0.set(b, m);
                }
                for c in &circles {
                    if let Some(m) = pick(&|l| c.contains(l)) {
                        set.p
                            .entry(c.k)
                            .or_insert_with(|| BlockMatrix::zeros(&op.blocks, op.dim()))
                            .set(b, m);
                    }
                }
            }
            for c in &circles {
                set.p
                    .entry(c.k)
                    .or_insert_with(|| BlockMatrix::zeros(&op.blocks, op.dim()));
            }
        }
        ProjectionMethod::Contour => {
            for c in &circles {
                let (p, used) = circle_projection(op, &eig, c, nodes)?;
                set.p.insert(c.k, p);
                set.nodes_used.insert(c.k, used);
            }
            let (s0, used) = box_projection(op, &eig, enclosure, nodes)?;
            set.s0 = s0;
            set.nodes_used.insert(0, used);
        }
    }
    Ok(set)
}

/// Trapezoid nodes for which `q^n <= QUAD_TARGET`, `q` the worst
/// inside/outside modulus ratio of the block's eigenvalues.
fn circle_node_count(values: &[Complex64], c: &Circle, nodes: &ContourNodes) -> Result<usize, LabError> {
    let mut q: f64 = 0.0;
    for &l in values {
        let rho = (l - c.center).norm() / c.radius;
        if (rho - 1.0).abs() < HIT_TOL {
            return Err(LabError::ContourHitsEigenvalue { k: c.k, z: l });
        }
        q = q.max(rho.min(1.0 / rho));
    }
    let need = if q > 0.0 {
        (QUAD_TARGET.ln() / q.ln()).ceil() as usize
    } else {
        0
    };
    let n = need.max(nodes.circle).next_multiple_of(4);
    if n > nodes.max_circle {
        return Err(LabError::ContourHitsEigenvalue {
            k: c.k,
            z: values
                .iter()
                .copied()
                .min_by(|a, b| {
                    ((a - c.center).norm() - c.radius)
                        .abs()
                        .total_cmp(&((b - c.center).norm() - c.radius).abs())
                })
                .unwrap_or_default(),
        });
    }
    Ok(n)
}

/// `(1/2 pi i) oint R(z) dz` on a circle: with `z = c + r e^{i theta}` this
/// is the mean of `R(z_j) r e^{i theta_j}` over equispaced `theta_j`.
fn circle_projection(
    op: &TruncatedOperator,
    eig: &[EigenBlock],
    c: &Circle,
    nodes: &ContourNodes,
) -> Result<(BlockMatrix, usize), LabError> {
    let mut out = BlockMatrix::zeros(&op.blocks, op.dim());
    let mut used = 0;
    for (b, idx) in op.blocks.iter().enumerate() {
        let n = circle_node_count(&eig[b].values, c, nodes)?;
        used = used.max(n);
        let sub = single_block(op, b);
        let mut acc = Mat::<Complex64>::zeros(idx.len(), idx.len());
        for j in 0..n {
            // half-step offset keeps nodes off the real axis
            let th = 2.0 * PI * (j as f64 + 0.5) / n as f64;
            let e = Complex64::from_polar(c.radius, th);
            let r = resolvent_blocks(c.center + e, &sub, ResolventMethod::Direct)?;
            if let Some(m) = &r.blocks[0] {
                linalg::add_scaled(&mut acc, e / n as f64, m);
            }
        }
        out.set(b, acc);
    }
    Ok((out, used))
}

/// `op` restricted to block `b`, as a one-block operator sharing levels.
fn single_block(op: &TruncatedOperator, b: usize) -> TruncatedOperator {
    let idx = &op.blocks[b];
    TruncatedOperator {
        model: op.model,
        potential: None,
        levels: op.levels.clone(),
        level_of: idx.iter().map(|&i| op.level_of[i]).collect(),
        labels: idx.iter().map(|&i| op.labels[i]).collect(),
        v: Mat::from_fn(idx.len(), idx.len(), |a, c| op.v[(idx[a], idx[c])]),
        blocks: vec![(0..idx.len()).collect()],
        quadrature: op.quadrature.clone(),
    }
}

fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let t = ((z - a) * d.conj()).re / d.norm_sqr();
    (z - (a + d * t.clamp(0.0, 1.0))).norm()
}

/// Composite Gauss–Legendre panels on the box boundary, bisected until each
/// panel's half-length is at most half the distance from its midpoint to the
/// block spectrum.
fn box_projection(
    op: &TruncatedOperator,
    eig: &[EigenBlock],
    enclosure: &EnclosureReport,
    nodes: &ContourNodes,
) -> Result<(BlockMatrix, usize), LabError> {
    let bx = enclosure.region;
    let (l, r, h) = (bx.left, bx.right, bx.half_height);
    let corners = [
        Complex64::new(l, -h),
        Complex64::new(r, -h),
        Complex64::new(r, h),
        Complex64::new(l, h),
    ];
    let scale = (r - l).max(2.0 * h);
    let rule = gauss_legendre(nodes.panel);
    let mut out = BlockMatrix::zeros(&op.blocks, op.dim());
    let mut total = 0;
    for (b, idx) in op.blocks.iter().enumerate() {
        let vals = &eig[b].values;
        let mut panels = Vec::new();
        for s in 0..4 {
            let (a, e) = (corners[s], corners[(s + 1) % 4]);
            for &lam in vals {
                if segment_distance(lam, a, e) < HIT_TOL * scale {
                    return Err(LabError::ContourHitsEigenvalue { k: 0, z: lam });
                }
            }
            let m = nodes.min_panels.max(1);
            let mut stack: Vec<(Complex64, Complex64, u32)> = (0..m)
                .rev()
                .map(|i| {
                    let t0 = i as f64 / m as f64;
                    let t1 = (i + 1) as f64 / m as f64;
                    (a + (e - a) * t0, a + (e - a) * t1, 0)
                })
                .collect();
            while let Some((p0, p1, depth)) = stack.pop() {
                let mid = (p0 + p1) * 0.5;
                let half = (p1 - p0).norm() * 0.5;
                let dist = vals.iter().map(|&v| (v - mid).norm()).fold(f64::INFINITY, f64::min);
                if half > 0.5 * dist && depth < 60 {
                    stack.push((mid, p1, depth + 1));
                    stack.push((p0, mid, depth + 1));
                } else {
                    panels.push((p0, p1));
                }
            }
        }
        let sub = single_block(op, b);
        let mut acc = Mat::<Complex64>::zeros(idx.len(), idx.len());
        for (p0, p1) in &panels {
            let half = (p1 - p0) * 0.5;
            let mid = (p0 + p1) * 0.5;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let z = mid + half * *x;
                let res = resolvent_blocks(z, &sub, ResolventMethod::Direct)?;
                if let Some(m) = &res.blocks[0] {
                    linalg::add_scaled(&mut acc, half * *w, m);
                }
            }
        }
        total += panels.len() * nodes.panel;
        let mut s0 = Mat::zeros(idx.len(), idx.len());
        linalg::add_scaled(&mut s0, Complex64::new(0.0, -1.0 / (2.0 * PI)), &acc);
        out.set(b, s0);
    }
    Ok((out, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riesz_core::{BoxRegion, CutoffRule};

    fn enclosure(n0: usize, right: f64) -> EnclosureReport {
        EnclosureReport {
            n0,
            h1: 1.0,
            h2: 1.0,
            epsilon: 0.1,
            threshold: 0.5,
            cutoff_rule: CutoffRule::Sigma,
            sigma_n0: None,
            region: BoxRegion {
                left: -1.0,
                right,
                half_height: 1.0,
            },
            disks: vec![],
        }
    }

    #[test]
    fn unperturbed_projections_are_exact() {
        let mus: Vec<(f64, usize)> = (1..=8).map(|k| (2.0 * k as f64, k)).collect();
        let dim = 36;
        let op = TruncatedOperator::from_parts(&mus, Mat::zeros(dim, dim)).unwrap();
        let enc = enclosure(1, 3.0);
        for method in [ProjectionMethod::Contour, ProjectionMethod::Eigen] {
            let ps = compute_projections(&op, &enc, method, &ContourNodes::default(), 0.5).unwrap();
            assert_eq!(ps.k_trust, 4);
            for k in 2..=4 {
                let exact = level_projection(&op, k, k);
                assert!(ps.p(k).unwrap().sub(&exact).frobenius() < 1e-10, "{method:?} {k}");
                assert_eq!(ps.ranks[&k], k);
            }
            assert!(ps.s0.sub(&level_projection(&op, 1, 1)).frobenius() < 1e-10);
        }
    }

    #[test]
    fn trust_exhausted() {
        let mus: Vec<(f64, usize)> = (1..=4).map(|k| (k as f64, 1)).collect();
        let op = TruncatedOperator::from_parts(&mus, Mat::zeros(4, 4)).unwrap();
        let r = compute_projections(&op, &enclosure(3, 3.5), ProjectionMethod::Eigen, &ContourNodes::default(), 0.5);
        assert!(matches!(r, Err(LabError::TrustExhausted { .. })));
    }
}
