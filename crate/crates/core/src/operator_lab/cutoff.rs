//! Cutoff and box search driven by the assembled matrix.
//!
//! With `N_jl = ||P_j V P_l||` and `D = diag(|z - mu_j|^{-1/2})`,
//! `||B(z)|| <= beta(z) := ||D N D||`. Where `beta < 1` on a closed contour the
//! family `A + tV`, `0 <= t <= 1`, has no spectrum on it, so eigenvalue
//! counts inside are those of `A`.

use super::projections::k_trust;
use super::{LabError, TruncatedOperator};
use crate::linalg;
use crate::riesz_core::{
    radii_from_values, BoxRegion, CutoffRule, EnclosureReport, RieszError,
};
use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LevelBlockOptions {
    /// Bound required on the trusted circles.
    pub threshold: f64,
    pub epsilon: f64,
    pub circle_samples: usize,
    pub real_samples: usize,
    pub h_cap_exp: u32,
    pub trust_fraction: f64,
}

impl Default for LevelBlockOptions {
    fn default() -> Self {
        Self {
            threshold: crate::riesz_core::DEFAULT_THRESHOLD,
            epsilon: 0.1,
            circle_samples: 64,
            real_samples: 129,
            h_cap_exp: 40,
            trust_fraction: super::DEFAULT_TRUST_FRACTION,
        }
    }
}

/// `N_jl = ||P_j V P_l||_2` (levels `j, l` zero-based in the matrix).
pub fn level_block_norms(op: &TruncatedOperator) -> Result<Mat<f64>, LabError> {
    let nl = op.num_levels();
    let mut n = Mat::<f64>::zeros(nl, nl);
    for idx in &op.blocks {
        let mut by_level: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &i in idx {
            by_level.entry(op.level_of[i]).or_default().push(i);
        }
        for (&j, rows) in &by_level {
            for (&l, cols) in &by_level {
                let val = if rows.len() == 1 && cols.len() == 1 {
                    op.v[(rows[0], cols[0])].norm()
                } else {
                    let sub = Mat::from_fn(rows.len(), cols.len(), |a, b| op.v[(rows[a], cols[b])]);
                    linalg::opnorm2(sub.as_ref())?
                };
                let slot = &mut n[(j - 1, l - 1)];
                *slot = slot.max(val);
            }
        }
    }
    Ok(n)
}

/// Matrix surrogate `omega_j = sqrt(max_l max(N_jl, N_lj))`. Since
/// `N_jl <= omega_j omega_l`, `||B(z)|| <= sum_j omega_j^2 / |z - mu_j|`.
pub fn level_omega(norms: &Mat<f64>) -> Vec<f64> {
    (0..norms.nrows())
        .map(|j| {
            (0..norms.ncols())
                .map(|l| norms[(j, l)].max(norms[(l, j)]))
                .fold(0.0, f64::max)
                .sqrt()
        })
        .collect()
}

struct Beta<'a> {
    mu: Vec<f64>,
    norms: &'a Mat<f64>,
}

impl Beta<'_> {
    /// `||D N D||`; the Schur test bound is returned when it already clears `target`.
    fn eval(&self, z: Complex64, target: f64) -> Result<f64, LabError> {
        let d: Vec<f64> = self.mu.iter().map(|m| (z - m).norm().powf(-0.5)).collect();
        let n = d.len();
        let m = Mat::from_fn(n, n, |i, j| d[i] * self.norms[(i, j)] * d[j]);
        let row = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).sum::<f64>()).fold(0.0, f64::max);
        let col = (0..n).map(|j| (0..n).map(|i| m[(i, j)]).sum::<f64>()).fold(0.0, f64::max);
        let schur = (row * col).sqrt();
        if schur < target {
            return Ok(schur);
        }
        Ok(linalg::real_opnorm2(m.as_ref())?)
    }
}

fn samples(a: f64, b: f64, count: usize) -> impl Iterator<Item = f64> {
    let n = count.max(2);
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

/// Enclosure whose `N0` is the smallest `N` with `beta <= threshold` on every
/// half-gap circle `N < k <= K_trust`, and whose box sides satisfy `beta < 1`.
pub fn build_enclosure_level_block(
    op: &TruncatedOperator,
    opts: &LevelBlockOptions,
) -> Result<EnclosureReport, LabError> {
    let norms = level_block_norms(op)?;
    let omega = level_omega(&norms);
    let beta = Beta {
        mu: op.mu_values(),
        norms: &norms,
    };
    let kt = k_trust(op, opts.trust_fraction);
    if kt == 0 {
        return Err(LabError::TrustExhausted { n0: 0, k_trust: 0 });
    }
    let mu = op.mu_values();
    let radii = radii_from_values(&mu, kt)?;

    let mut n0 = 1;
    for k in (2..=kt).rev() {
        let (c, r) = (mu[k - 1], radii.get(k).unwrap_or(0.0));
        let mut ok = true;
        for j in 0..opts.circle_samples {
            let th = 2.0 * PI * (j as f64 + 0.5) / opts.circle_samples as f64;
            if beta.eval(c + Complex64::from_polar(r, th), opts.threshold)? > opts.threshold {
                ok = false;
                break;
            }
        }
        if !ok {
            n0 = k;
            break;
        }
    }
    let right = mu[n0 - 1] + radii.get(n0).unwrap_or(0.0);

    let search = |which: &'static str, pred: &dyn Fn(f64) -> Result<bool, LabError>| {
        for i in 0..=opts.h_cap_exp {
            let h = 2f64.powi(i as i32);
            if pred(h)? {
                return Ok(h);
            }
        }
        Err(LabError::Riesz(RieszError::BoxSearchFailed {
            which,
            cap_exp: opts.h_cap_exp,
        }))
    };
    let h1 = search("h1", &|h| Ok(beta.eval(Complex64::new(-h, 0.0), 1.0)? < 1.0))?;
    let h2 = search("h2", &|h| {
        for x in samples(-h1, right, opts.real_samples) {
            for z in [Complex64::new(x, h), Complex64::new(x, -h)] {
                if beta.eval(z, 1.0)? >= 1.0 {
                    return Ok(false);
                }
            }
        }
        for y in samples(-h, h, opts.real_samples) {
            for x in [-h1, right] {
                if beta.eval(Complex64::new(x, y), 1.0)? >= 1.0 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    })?;
    let disks = EnclosureReport::make_disks(
        &mu,
        &radii,
        |k| omega.get(k - 1).copied().unwrap_or(0.0),
        n0,
        kt,
        opts.epsilon,
    );
    Ok(EnclosureReport {
        n0,
        h1,
        h2,
        epsilon: opts.epsilon,
        threshold: opts.threshold,
        cutoff_rule: CutoffRule::LevelBlock,
        sigma_n0: None,
        region: BoxRegion {
            left: -h1,
            right,
            half_height: h2,
        },
        disks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_perturbation_norms() {
        let mut v = Mat::zeros(3, 3);
        v[(0, 0)] = Complex64::new(0.0, 0.3);
        v[(1, 2)] = Complex64::new(0.4, 0.0);
        let op = TruncatedOperator::from_parts(&[(1.0, 1), (3.0, 2)], v).unwrap();
        let n = level_block_norms(&op).unwrap();
        assert!((n[(0, 0)] - 0.3).abs() < 1e-15);
        assert!((n[(1, 1)] - 0.4).abs() < 1e-14);
        assert_eq!(n[(0, 1)], 0.0);
        let w = level_omega(&n);
        assert!((w[1] - 0.4f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn unperturbed_cutoff_is_one() {
        let levels: Vec<(f64, usize)> = (1..=10).map(|k| (2.0 * k as f64, 1)).collect();
        let op = TruncatedOperator::from_parts(&levels, Mat::zeros(10, 10)).unwrap();
        let e = build_enclosure_level_block(&op, &LevelBlockOptions::default()).unwrap();
        assert_eq!(e.n0, 1);
        assert_eq!(e.disks.len(), 4);
        assert_eq!(e.cutoff_rule, CutoffRule::LevelBlock);
    }
}
