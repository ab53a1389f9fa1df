use super::sigma::cutoff_with_engine;
use super::sums::SumEngine;
use super::{gap_radii, GapRadii, OmegaModel, RieszError, SigmaOptions, SpectralModel};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnclosureOptions {
    pub epsilon: f64,
    pub threshold: f64,
    pub n_cap: usize,
    /// Box half-widths are searched on `1, 2, 4, ..., 2^h_cap_exp`.
    pub h_cap_exp: u32,
    /// Last level that receives a disk; `None` means `N0 + 32`.
    pub k_max: Option<usize>,
    /// Uniform samples of the real interval when checking the box top/bottom.
    pub real_samples: usize,
    pub sigma: SigmaOptions,
}

impl Default for EnclosureOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            threshold: super::DEFAULT_THRESHOLD,
            n_cap: 4096,
            h_cap_exp: 40,
            k_max: None,
            real_samples: 129,
            sigma: SigmaOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffRule {
    /// `N0` from `sigma_N <= threshold` on the weight model.
    Sigma,
    /// `N0` from level-block norms of the assembled matrix.
    LevelBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiskFlag {
    Ok,
    /// `(1 + eps) omega_k^2 >= r_k`: the refined disk is not used.
    RefinedExceedsHalfGap,
    /// `omega_k = 0`: the refined disk degenerates to the point `mu_k`.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub k: usize,
    pub center: f64,
    pub radius_halfgap: f64,
    pub radius_refined: f64,
    pub flag: DiskFlag,
}

/// `(left, right] x [-half_height, half_height]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub left: f64,
    pub right: f64,
    pub half_height: f64,
}

impl BoxRegion {
    pub fn contains(&self, z: Complex64) -> bool {
        z.re > self.left && z.re <= self.right && z.im.abs() <= self.half_height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Box,
    Disk(usize),
    Outside,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnclosureReport {
    #[serde(rename = "N0")]
    pub n0: usize,
    pub h1: f64,
    pub h2: f64,
    pub epsilon: f64,
    pub threshold: f64,
    pub cutoff_rule: CutoffRule,
    pub sigma_n0: Option<f64>,
    #[serde(rename = "box")]
    pub region: BoxRegion,
    pub disks: Vec<Disk>,
}

impl EnclosureReport {
    pub fn disk(&self, k: usize) -> Option<&Disk> {
        self.disks.iter().find(|d| d.k == k)
    }

    /// Box or open half-gap disk containing `z`.
    pub fn region_of(&self, z: Complex64) -> Region {
        if self.region.contains(z) {
            return Region::Box;
        }
        for d in &self.disks {
            if (z - d.center).norm() < d.radius_halfgap {
                return Region::Disk(d.k);
            }
        }
        Region::Outside
    }

    /// Disks for `n0 < k <= k_max` with refined radii `(1 + eps) omega_k^2`.
    pub fn make_disks(
        mu: &[f64],
        radii: &GapRadii,
        omega: impl Fn(usize) -> f64,
        n0: usize,
        k_max: usize,
        epsilon: f64,
    ) -> Vec<Disk> {
        ((n0 + 1)..=k_max)
            .filter_map(|k| {
                let center = *mu.get(k - 1)?;
                let rh = radii.get(k)?;
                let w = omega(k);
                let rr = (1.0 + epsilon) * w * w;
                let flag = if rr == 0.0 {
                    DiskFlag::Degenerate
                } else if rr >= rh {
                    DiskFlag::RefinedExceedsHalfGap
                } else {
                    DiskFlag::Ok
                };
                Some(Disk {
                    k,
                    center,
                    radius_halfgap: rh,
                    radius_refined: rr,
                    flag,
                })
            })
            .collect()
    }
}

/// Smallest `h = 2^i <= 2^cap` with `pred(h)`.
pub(crate) fn doubling_search(
    cap: u32,
    which: &'static str,
    mut pred: impl FnMut(f64) -> Result<bool, RieszError>,
) -> Result<f64, RieszError> {
    for i in 0..=cap {
        let h = 2f64.powi(i as i32);
        if pred(h)? {
            return Ok(h);
        }
    }
    Err(RieszError::BoxSearchFailed { which, cap_exp: cap })
}

/// Real sample points of `[left, right]`: uniform grid plus the given extras.
pub(crate) fn real_samples(left: f64, right: f64, count: usize, extra: &[f64]) -> Vec<f64> {
    let n = count.max(2);
    let mut xs: Vec<f64> = (0..n)
        .map(|i| left + (right - left) * i as f64 / (n - 1) as f64)
        .collect();
    xs.extend(extra.iter().copied().filter(|&x| x >= left && x <= right));
    xs
}

/// Box `Pi_0` and disks around `mu_k`, `k > N0`:
/// `N0` is the smallest `N` with `sigma_N <= threshold`; `h1` the smallest
/// power of two with `||B(-h1)|| < 1`; `h2` the smallest power of two with
/// `||B(x +- i h2)|| < 1` at every sample `x` of `[-h1, mu_N0 + r_N0]`.
pub fn build_enclosure(
    mu: &SpectralModel,
    r: &GapRadii,
    omega: &OmegaModel,
    opts: &EnclosureOptions,
) -> Result<EnclosureReport, RieszError> {
    let engine = SumEngine::new(mu, omega, opts.sigma.j_max)?;
    let cut = cutoff_with_engine(&engine, mu, r, omega, opts.threshold, opts.n_cap, &opts.sigma)?;
    let n0 = cut.n0;
    let k_max = opts.k_max.unwrap_or(n0 + 32).max(n0);
    let radii = if r.len() >= k_max.max(n0) {
        r.clone()
    } else {
        gap_radii(mu, k_max.max(n0))?
    };
    let mu_vals = mu.values(k_max.max(n0) + 1)?;
    let right = mu_vals[n0 - 1] + radii.get(n0).unwrap_or(0.0);

    let h1 = doubling_search(opts.h_cap_exp, "h1", |h| {
        Ok(engine.bound(Complex64::new(-h, 0.0))?.value < 1.0)
    })?;
    let extra: Vec<f64> = mu_vals[..=n0.min(mu_vals.len() - 1)].to_vec();
    let xs = real_samples(-h1, right, opts.real_samples, &extra);
    let h2 = doubling_search(opts.h_cap_exp, "h2", |h| {
        for &x in &xs {
            if engine.bound(Complex64::new(x, h))?.value >= 1.0 {
                return Ok(false);
            }
        }
        Ok(true)
    })?;
    let disks =
        EnclosureReport::make_disks(&mu_vals, &radii, |k| omega.value_or_zero(k), n0, k_max, opts.epsilon);
    Ok(EnclosureReport {
        n0,
        h1,
        h2,
        epsilon: opts.epsilon,
        threshold: opts.threshold,
        cutoff_rule: CutoffRule::Sigma,
        sigma_n0: Some(cut.sigma.upper()),
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
    fn unperturbed_enclosure_is_minimal() {
        let mu = SpectralModel::affine(2.0, 0.0);
        let r = gap_radii(&mu, 8).unwrap();
        let e = build_enclosure(&mu, &r, &OmegaModel::zero(), &EnclosureOptions::default()).unwrap();
        assert_eq!(e.n0, 1);
        assert_eq!((e.h1, e.h2), (1.0, 1.0));
        assert!(e.disks.iter().all(|d| d.flag == DiskFlag::Degenerate));
        assert_eq!(e.region_of(Complex64::new(2.0, 0.0)), Region::Box);
        assert_eq!(e.region_of(Complex64::new(6.2, 0.3)), Region::Disk(3));
        assert_eq!(e.region_of(Complex64::new(5.0, 0.0)), Region::Outside);
    }

    #[test]
    fn report_serializes_expected_fields() {
        let mu = SpectralModel::affine(2.0, 0.0);
        let r = gap_radii(&mu, 8).unwrap();
        let om = OmegaModel::power_law(0.3, 0.4, 0.0);
        let opts = EnclosureOptions {
            k_max: Some(12),
            ..Default::default()
        };
        let e = build_enclosure(&mu, &r, &om, &opts).unwrap();
        let v = serde_json::to_value(&e).unwrap();
        for key in ["N0", "h1", "h2", "epsilon", "disks"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let d = &v["disks"][0];
        for key in ["k", "center", "radius_halfgap", "radius_refined"] {
            assert!(d.get(key).is_some(), "{key}");
        }
    }
}
