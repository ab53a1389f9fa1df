//! Gap radii, subordination sequences and the tail quantity `sigma_N`, plus
//! the spectral enclosure (box `Pi_0` and disks around `mu_k`) derived from
//! the resolvent bound `||B(z)|| <= sum_j omega_j^2 / |z - mu_j|`.

mod enclosure;
mod sigma;
mod sums;

pub use enclosure::{
    build_enclosure, BoxRegion, CutoffRule, Disk, DiskFlag, EnclosureOptions, EnclosureReport,
    Region,
};
pub use sigma::{
    b_norm_upper, find_cutoff_n0, power_law_admissible, sigma_tail, Admissibility, BoundValue,
    CutoffResult, DecayRate, SigmaEstimate, SigmaOptions,
};
pub use sums::SumEngine;

use serde::{Deserialize, Serialize};

/// Default summation horizon `J_max` for models with an analytic tail.
pub const DEFAULT_J_MAX: usize = 1_000_000;
/// Default cutoff threshold for `sigma_N` (and `||B||` on the box boundary).
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RieszError {
    #[error("spectrum is not strictly increasing at k = {k}")]
    NonMonotoneSpectrum { k: usize },
    #[error("invalid spectral model: {reason}")]
    InvalidSpectrum { reason: String },
    #[error("invalid omega model: {reason}")]
    InvalidOmega { reason: String },
    #[error("z coincides with mu_{k}")]
    OnSpectrum { k: usize },
    #[error("sigma_N diverges (tail exponent {exponent}, last-decade growth {growth:.3e})")]
    Diverged { exponent: f64, growth: f64 },
    #[error("no N <= {n_cap} satisfies sigma_N <= threshold (sigma at cap = {sigma_at_cap:.6e})")]
    NotReached { n_cap: usize, sigma_at_cap: f64 },
    #[error("no {which} <= 2^{cap_exp} makes the resolvent bound drop below 1")]
    BoxSearchFailed { which: &'static str, cap_exp: u32 },
    #[error("omega model has no tail: values beyond k = {available} are required")]
    TailModelMissing { available: usize },
    #[error("gap radii known up to k = {have}, but k = {needed} is required")]
    RadiiTooShort { needed: usize, have: usize },
    #[error("spectral table has {have} entries, {needed} are required")]
    SpectrumExhausted { needed: usize, have: usize },
    #[error("invalid argument: {reason}")]
    InvalidArgument { reason: String },
}

/// `mu_k = coeff * k^exponent` beyond a tabulated head.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTail {
    pub coeff: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "ladder", rename_all = "snake_case")]
pub enum Ladder {
    /// `mu_k = slope * k + intercept`.
    Affine { slope: f64, intercept: f64 },
    /// `mu_k = (k - 1)(k - 2 + d)`, the Laplace–Beltrami ladder on `S^d`.
    Sphere { d: f64 },
    /// Explicit values `mu_1, ..., mu_m`, optionally continued by a power law.
    Tabulated {
        head: Vec<f64>,
        tail: Option<PowerTail>,
    },
}

/// Unperturbed eigenvalues `mu_k` (`k >= 1`, strictly increasing) together
/// with the declared gap bound `mu_{k+1} - mu_k >= gap_constant * k^(gap_exponent - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    pub ladder: Ladder,
    pub shift: f64,
    pub gap_constant: f64,
    pub gap_exponent: f64,
}

impl SpectralModel {
    pub fn affine(slope: f64, intercept: f64) -> Self {
        Self {
            ladder: Ladder::Affine { slope, intercept },
            shift: 0.0,
            gap_constant: slope,
            gap_exponent: 1.0,
        }
    }

    pub fn sphere(d: f64, shift: f64) -> Self {
        Self {
            ladder: Ladder::Sphere { d },
            shift,
            gap_constant: 2.0,
            gap_exponent: 2.0,
        }
    }

    /// Tabulated head; gap bound parameters are inferred from the table
    /// (minimum observed gap, exponent 1) unless a tail is supplied.
    pub fn tabulated(head: Vec<f64>, tail: Option<PowerTail>) -> Self {
        let min_gap = head
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let (gap_constant, gap_exponent) = match tail {
            Some(t) if t.exponent >= 1.0 => (min_gap.min(t.coeff * t.exponent), t.exponent),
            _ => (if min_gap.is_finite() { min_gap } else { 1.0 }, 1.0),
        };
        Self {
            ladder: Ladder::Tabulated { head, tail },
            shift: 0.0,
            gap_constant,
            gap_exponent,
        }
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    /// Number of available eigenvalues, `None` when the ladder is infinite.
    pub fn len(&self) -> Option<usize> {
        match &self.ladder {
            Ladder::Tabulated { head, tail: None } => Some(head.len()),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// `mu_k` including the shift; `None` beyond a finite table or for `k = 0`.
    pub fn mu(&self, k: usize) -> Option<f64> {
        if k == 0 {
            return None;
        }
        let kf = k as f64;
        let base = match &self.ladder {
            Ladder::Affine { slope, intercept } => slope * kf + intercept,
            Ladder::Sphere { d } => (kf - 1.0) * (kf - 2.0 + d),
            Ladder::Tabulated { head, tail } => {
                if k <= head.len() {
                    head[k - 1]
                } else {
                    let t = tail.as_ref()?;
                    t.coeff * kf.powf(t.exponent)
                }
            }
        };
        Some(base + self.shift)
    }

    /// First `kmax` eigenvalues.
    pub fn values(&self, kmax: usize) -> Result<Vec<f64>, RieszError> {
        (1..=kmax)
            .map(|k| {
                self.mu(k).ok_or(RieszError::SpectrumExhausted {
                    needed: kmax,
                    have: k - 1,
                })
            })
            .collect()
    }

    /// `(m, g)` with `mu_t >= m t^g` for all real `t >= j` on the analytic
    /// continuation of the ladder. `None` for finite tables.
    pub fn power_lower_bound(&self, j: usize) -> Option<(f64, f64)> {
        let jf = (j.max(1)) as f64;
        match &self.ladder {
            Ladder::Affine { slope, intercept } => {
                let c = intercept + self.shift;
                Some((slope + c.min(0.0) / jf, 1.0))
            }
            Ladder::Sphere { d } => {
                let b = d - 3.0;
                let c = 2.0 - d + self.shift;
                Some((1.0 + b.min(0.0) / jf + c.min(0.0) / (jf * jf), 2.0))
            }
            Ladder::Tabulated { tail, .. } => {
                let t = tail.as_ref()?;
                Some((t.coeff + self.shift.min(0.0) / jf.powf(t.exponent), t.exponent))
            }
        }
    }

    pub fn validate(&self) -> Result<(), RieszError> {
        let bad = |reason: &str| RieszError::InvalidSpectrum {
            reason: reason.to_string(),
        };
        if !self.shift.is_finite() {
            return Err(bad("shift must be finite"));
        }
        match &self.ladder {
            Ladder::Affine { slope, intercept } => {
                if !(slope.is_finite() && *slope > 0.0 && intercept.is_finite()) {
                    return Err(bad("affine ladder needs a positive finite slope"));
                }
            }
            Ladder::Sphere { d } => {
                if !(d.is_finite() && *d > 1.0) {
                    return Err(bad("sphere ladder needs d > 1"));
                }
            }
            Ladder::Tabulated { head, tail } => {
                if head.iter().any(|v| !v.is_finite()) {
                    return Err(bad("tabulated eigenvalues must be finite"));
                }
                if let Some(k) = head.windows(2).position(|w| w[1] <= w[0]) {
                    return Err(RieszError::NonMonotoneSpectrum { k: k + 1 });
                }
                if let Some(t) = tail {
                    if !(t.coeff > 0.0 && t.exponent > 0.0) {
                        return Err(bad("power tail needs positive coefficient and exponent"));
                    }
                    let k = head.len();
                    if k > 0 && t.coeff * ((k + 1) as f64).powf(t.exponent) <= head[k - 1] {
                        return Err(RieszError::NonMonotoneSpectrum { k });
                    }
                }
            }
        }
        match self.mu(1) {
            Some(m) if m > 0.0 => Ok(()),
            Some(_) => Err(bad("mu_1 must be positive (use the shift)")),
            None => Err(bad("spectral table is empty")),
        }
    }
}

/// Half-gap radii `r_1 = (mu_2 - mu_1)/2`, `r_k = min(mu_k - mu_{k-1}, mu_{k+1} - mu_k)/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRadii {
    radii: Vec<f64>,
}

impl GapRadii {
    /// `r_k` for `1 <= k <= len()`.
    pub fn get(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.radii.get(i)).copied()
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.radii
    }
}

/// Gap radii `r_1..r_kmax`; needs `mu_1..mu_{kmax+1}`.
pub fn gap_radii(mu: &SpectralModel, kmax: usize) -> Result<GapRadii, RieszError> {
    if kmax == 0 {
        return Err(RieszError::InvalidArgument {
            reason: "gap radii need kmax >= 1".into(),
        });
    }
    let vals = mu.values(kmax + 1)?;
    radii_from_values(&vals[..], kmax)
}

/// Gap radii from an explicit eigenvalue list `mu_1..mu_m` (`kmax < m`).
pub fn radii_from_values(vals: &[f64], kmax: usize) -> Result<GapRadii, RieszError> {
    if vals.len() < kmax + 1 || kmax == 0 {
        return Err(RieszError::SpectrumExhausted {
            needed: kmax + 1,
            have: vals.len(),
        });
    }
    let mut radii = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        let up = vals[k] - vals[k - 1];
        if !(up > 0.0) {
            return Err(RieszError::NonMonotoneSpectrum { k });
        }
        let r = if k == 1 {
            up / 2.0
        } else {
            up.min(vals[k - 1] - vals[k - 2]) / 2.0
        };
        radii.push(r);
    }
    Ok(GapRadii { radii })
}

/// `omega_k = coeff * k^(-alpha) * (ln k)^beta` beyond the head.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaTail {
    pub coeff: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl OmegaTail {
    pub fn value(&self, k: usize) -> f64 {
        let kf = k as f64;
        let log = if self.beta == 0.0 {
            1.0
        } else {
            kf.ln().max(0.0).powf(self.beta)
        };
        self.coeff * kf.powf(-self.alpha) * log
    }
}

/// Subordination weights `omega_k >= 0`: explicit head, optional power-law tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaModel {
    pub head: Vec<f64>,
    pub tail: Option<OmegaTail>,
}

impl OmegaModel {
    pub fn zero() -> Self {
        Self {
            head: Vec::new(),
            tail: Some(OmegaTail {
                coeff: 0.0,
                alpha: 0.0,
                beta: 0.0,
            }),
        }
    }

    pub fn power_law(coeff: f64, alpha: f64, beta: f64) -> Self {
        Self {
            head: Vec::new(),
            tail: Some(OmegaTail { coeff, alpha, beta }),
        }
    }

    pub fn head_only(head: Vec<f64>) -> Self {
        Self { head, tail: None }
    }

    pub fn with_tail(head: Vec<f64>, tail: OmegaTail) -> Self {
        Self {
            head,
            tail: Some(tail),
        }
    }

    /// `omega_k`, `None` beyond a head-only model.
    pub fn value(&self, k: usize) -> Option<f64> {
        if k == 0 {
            return None;
        }
        if k <= self.head.len() {
            Some(self.head[k - 1])
        } else {
            self.tail.map(|t| t.value(k))
        }
    }

    /// `omega_k`, zero beyond a head-only model (finite-rank perturbations).
    pub fn value_or_zero(&self, k: usize) -> f64 {
        self.value(k).unwrap_or(0.0)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.head.iter().all(|&v| v == 0.0) && self.tail.is_none_or(|t| t.coeff == 0.0)
    }

    /// Relative mismatch between the last head entry and the tail formula at
    /// the same index; large values usually indicate a mis-specified tail.
    pub fn tail_mismatch(&self) -> Option<f64> {
        let t = self.tail?;
        let k = self.head.len();
        if k == 0 {
            return None;
        }
        let h = self.head[k - 1];
        let f = t.value(k);
        let scale = h.abs().max(f.abs());
        if scale == 0.0 {
            Some(0.0)
        } else {
            Some((h - f).abs() / scale)
        }
    }

    pub fn validate(&self) -> Result<(), RieszError> {
        if let Some(k) = self.head.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(RieszError::InvalidOmega {
                reason: format!("omega_{} must be finite and non-negative", k + 1),
            });
        }
        if let Some(t) = self.tail {
            if !(t.coeff.is_finite() && t.coeff >= 0.0 && t.alpha.is_finite() && t.beta >= 0.0)
            {
                return Err(RieszError::InvalidOmega {
                    reason: "tail needs coeff >= 0, finite alpha and beta >= 0".into(),
                });
            }
        }
        Ok(())
    }
}
