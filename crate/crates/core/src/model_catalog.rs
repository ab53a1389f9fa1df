//! Reference models and their exact exponent tables.
//!
//! Exponents are affine in `x = 1/p` on each branch, so branches are stored as
//! `intercept + slope * x` over rational intervals. The same tables evaluate
//! in exact rationals (for checking) and in `f64` (for numerics). Lebesgue
//! indices are paired through `1/(2r) = 1/2 - 1/p`.

use crate::riesz_core::{OmegaModel, SpectralModel};
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub type Q = Ratio<i64>;

/// Constant absorbed into `alpha` when a logarithmic factor is present.
pub const LOG_ABSORPTION: (i64, i64) = (1, 100);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CatalogError {
    #[error("unsupported model: {reason}")]
    BadModel { reason: String },
    #[error("{what} = {value} outside the admissible domain")]
    OutOfDomain { what: &'static str, value: String },
    #[error("multiplicity of level {k} overflows 128 bits")]
    Overflow { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelId {
    /// `-Delta + |x|^2` on `R^d`.
    HarmonicOscillator { d: u32 },
    /// Landau Hamiltonian `(-i nabla + A)^2` on `R^d`, constant field, `d` even.
    Landau { d: u32 },
    /// `-Delta` on the sphere `S^d` perturbed by an `L^r` potential.
    Sphere { d: u32 },
    /// `-Delta` on `S^d` perturbed by `W delta_Sigma`, `Sigma` a hypersurface.
    SphereDeltaCircle { d: u32 },
}

impl ModelId {
    pub fn dimension(&self) -> u32 {
        match *self {
            ModelId::HarmonicOscillator { d }
            | ModelId::Landau { d }
            | ModelId::Sphere { d }
            | ModelId::SphereDeltaCircle { d } => d,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelId::HarmonicOscillator { .. } => "harmonic_oscillator",
            ModelId::Landau { .. } => "landau",
            ModelId::Sphere { .. } => "sphere",
            ModelId::SphereDeltaCircle { .. } => "sphere_delta_circle",
        }
    }

    /// Structural validity (exponent tables additionally need HO `d >= 2`).
    pub fn validate(&self) -> Result<(), CatalogError> {
        let bad = |r: &str| {
            Err(CatalogError::BadModel {
                reason: r.to_string(),
            })
        };
        match *self {
            ModelId::HarmonicOscillator { d } if d == 0 || d > 64 => {
                bad("harmonic oscillator needs 1 <= d <= 64")
            }
            ModelId::Landau { d } if d == 0 || d % 2 == 1 || d > 64 => {
                bad("Landau Hamiltonian needs even d >= 2")
            }
            ModelId::Sphere { d } | ModelId::SphereDeltaCircle { d } if !(2..=64).contains(&d) => {
                bad("sphere models need 2 <= d <= 64")
            }
            _ => Ok(()),
        }
    }

    fn validate_exponents(&self) -> Result<(), CatalogError> {
        self.validate()?;
        if let ModelId::HarmonicOscillator { d: 1 } = self {
            return Err(CatalogError::BadModel {
                reason: "exponent tables for the oscillator need d >= 2".into(),
            });
        }
        Ok(())
    }

    /// Gap growth exponent `gamma` (`mu_{k+1} - mu_k >= c k^(gamma - 1)`).
    pub fn gap_exponent(&self) -> u32 {
        match self {
            ModelId::HarmonicOscillator { .. } | ModelId::Landau { .. } => 1,
            ModelId::Sphere { .. } | ModelId::SphereDeltaCircle { .. } => 2,
        }
    }

    /// `||P_k|| <= C k^(factor * rho)`: 1/2 for the Euclidean models, 1 on spheres.
    fn norm_factor(&self) -> Q {
        match self {
            ModelId::HarmonicOscillator { .. } | ModelId::Landau { .. } => Q::new(1, 2),
            ModelId::Sphere { .. } | ModelId::SphereDeltaCircle { .. } => Q::one(),
        }
    }

    /// Default spectral shift making `mu_1 > 0`.
    pub fn default_shift(&self) -> f64 {
        match self {
            ModelId::Sphere { .. } | ModelId::SphereDeltaCircle { .. } => 1.0,
            _ => 0.0,
        }
    }
}

/// Arithmetic needed to evaluate the tables in either `f64` or `Q`.
pub trait Scalar:
    Copy
    + PartialOrd
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_q(q: Q) -> Self;
}

impl Scalar for f64 {
    fn from_q(q: Q) -> Self {
        *q.numer() as f64 / *q.denom() as f64
    }
}

impl Scalar for Q {
    fn from_q(q: Q) -> Self {
        q
    }
}

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

/// One affine branch on an interval of the variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub lo: Q,
    pub hi: Q,
    pub lo_closed: bool,
    pub hi_closed: bool,
    pub intercept: Q,
    pub slope: Q,
    pub log_power: Q,
    pub label: &'static str,
}

impl Branch {
    fn contains<T: Scalar>(&self, x: T) -> bool {
        let (lo, hi) = (T::from_q(self.lo), T::from_q(self.hi));
        let above = if self.lo_closed { x >= lo } else { x > lo };
        let below = if self.hi_closed { x <= hi } else { x < hi };
        above && below
    }

    pub fn eval<T: Scalar>(&self, x: T) -> T {
        T::from_q(self.intercept) + T::from_q(self.slope) * x
    }

    fn nonempty(&self) -> bool {
        self.lo < self.hi || (self.lo == self.hi && self.lo_closed && self.hi_closed)
    }
}

#[allow(clippy::too_many_arguments)]
fn br(
    lo: Q,
    hi: Q,
    lo_closed: bool,
    hi_closed: bool,
    intercept: Q,
    slope: Q,
    log_power: Q,
    label: &'static str,
) -> Branch {
    Branch {
        lo,
        hi,
        lo_closed,
        hi_closed,
        intercept,
        slope,
        log_power,
        label,
    }
}

/// Branches of `rho(p)` in the variable `x = 1/p in [0, 1/2]`.
pub fn rho_branches(model: ModelId) -> Result<Vec<Branch>, CatalogError> {
    model.validate_exponents()?;
    let d = model.dimension() as i64;
    let half = q(1, 2);
    let z = Q::zero();
    let b = match model {
        ModelId::HarmonicOscillator { .. } => {
            let x1 = half - q(1, d);
            let xs = half - q(1, d + 3);
            // -[1 - d(1/2 - x)] = (d/2 - 1) - d x
            let b1 = br(z, x1, true, true, q(d, 2) - 1, qi(-d), z, "low_integrability");
            let b2 = br(x1, xs, true, false, (q(d, 2) - 1) / 3, q(-d, 3), z, "intermediate");
            let crit = br(xs, xs, true, true, -half, Q::one(), xs, "critical");
            let b3 = br(xs, half, false, true, -half, Q::one(), z, "near_l2");
            vec![b1, b2, crit, b3]
        }
        ModelId::Landau { .. } => {
            let x1 = half - q(1, d + 1);
            let b1 = br(z, x1, true, true, q(d, 2) - 1, qi(-d), z, "low_integrability");
            let b2 = br(x1, half, true, true, -half, Q::one(), z, "near_l2");
            vec![b1, b2]
        }
        ModelId::Sphere { .. } => {
            let x1 = half - q(1, d + 1);
            // -1/2 + d(1/2 - x)
            let b1 = br(z, x1, true, true, q(d - 1, 2), qi(-d), z, "low_integrability");
            // (d-1)/2 (1/2 - x)
            let b2 = br(x1, half, true, true, q(d - 1, 4), q(-(d - 1), 2), z, "near_l2");
            vec![b1, b2]
        }
        ModelId::SphereDeltaCircle { .. } => {
            let xs = half - q(1, 2 * d);
            // (d-1)/2 (1 - 2x)
            let b1 = br(z, xs, true, false, q(d - 1, 2), qi(-(d - 1)), z, "low_integrability");
            let crit = br(xs, xs, true, true, q(d - 1, 2), qi(-(d - 1)), half, "critical");
            // (d-1)/4 - (d-2)/2 x
            let b2 = br(xs, half, false, true, q(d - 1, 4), q(-(d - 2), 2), z, "near_l2");
            vec![b1, crit, b2]
        }
    };
    Ok(b.into_iter().filter(|b| b.nonempty()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoValue<T> {
    /// Tabulated exponent `rho(p)`.
    pub rho: T,
    /// Growth exponent of `||P_k||_{L^2 -> L^p}`: `rho/2` (Euclidean) or `rho` (spheres).
    pub norm_exponent: T,
    /// Power of `log k` multiplying the norm bound (non-zero only at critical points).
    pub log_power: T,
    pub branch: &'static str,
}

/// `rho(p)` at `inv_p = 1/p in [0, 1/2]`.
pub fn rho_exponent<T: Scalar>(model: ModelId, inv_p: T) -> Result<RhoValue<T>, CatalogError> {
    let branches = rho_branches(model)?;
    let factor = T::from_q(model.norm_factor());
    let b = branches
        .iter()
        .find(|b| b.contains(inv_p))
        .ok_or_else(|| CatalogError::OutOfDomain {
            what: "1/p",
            value: format!("{inv_p:?}"),
        })?;
    let rho = b.eval(inv_p);
    Ok(RhoValue {
        rho,
        norm_exponent: factor * rho,
        log_power: T::from_q(b.log_power),
        branch: b.label,
    })
}

/// Lebesgue exponent `r in [1, inf]`, stored exactly as `1/r` (`0` is `r = inf`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LebesgueIndex {
    inv: Q,
}

impl LebesgueIndex {
    pub fn infinity() -> Self {
        Self { inv: Q::zero() }
    }

    pub fn finite(r: Q) -> Result<Self, CatalogError> {
        if r < Q::one() {
            return Err(CatalogError::OutOfDomain {
                what: "r",
                value: r.to_string(),
            });
        }
        Ok(Self { inv: r.recip() })
    }

    pub fn from_int(r: i64) -> Result<Self, CatalogError> {
        Self::finite(qi(r))
    }

    /// From a float; `inf` maps to `r = inf`, finite values are rationalized.
    pub fn from_f64(r: f64) -> Result<Self, CatalogError> {
        if r == f64::INFINITY {
            return Ok(Self::infinity());
        }
        let rq = Ratio::<i64>::approximate_float(r).ok_or(CatalogError::OutOfDomain {
            what: "r",
            value: r.to_string(),
        })?;
        Self::finite(rq)
    }

    pub fn inv(&self) -> Q {
        self.inv
    }

    pub fn is_infinite(&self) -> bool {
        self.inv.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_infinite() {
            f64::INFINITY
        } else {
            f64::from_q(self.inv.recip())
        }
    }

    /// Paired `1/p = (1 - 1/r)/2`.
    pub fn paired_inv_p(&self) -> Q {
        (Q::one() - self.inv) / 2
    }
}

impl std::fmt::Display for LebesgueIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.inv.recip())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentResult {
    pub regime: String,
    /// `omega_j <= C j^-alpha (log j)^log_beta`.
    pub alpha: Q,
    pub log_beta: Q,
    /// `alpha` minus the absorption constant when `log_beta > 0`.
    pub alpha_effective: Q,
    pub gamma: u32,
    pub admissible: bool,
}

impl ExponentResult {
    pub fn alpha_f64(&self) -> f64 {
        f64::from_q(self.alpha)
    }

    pub fn alpha_effective_f64(&self) -> f64 {
        f64::from_q(self.alpha_effective)
    }

    /// Weight model `omega_j = scale * j^-alpha_eff` used for numerics.
    pub fn omega_model(&self, scale: f64) -> OmegaModel {
        OmegaModel::power_law(scale, self.alpha_effective_f64(), 0.0)
    }
}

/// Subordination exponent for `V in L^r` (or `W in L^r(Sigma)`).
pub fn omega_model(model: ModelId, r: LebesgueIndex) -> Result<ExponentResult, CatalogError> {
    model.validate_exponents()?;
    if r.inv > Q::one() || r.inv < Q::zero() {
        return Err(CatalogError::OutOfDomain {
            what: "r",
            value: r.to_string(),
        });
    }
    let x = r.paired_inv_p();
    let v = rho_exponent(model, x)?;
    let alpha = -v.norm_exponent;
    let log_beta = v.log_power;
    let alpha_effective = if log_beta > Q::zero() {
        alpha - q(LOG_ABSORPTION.0, LOG_ABSORPTION.1)
    } else {
        alpha
    };
    let gamma = model.gap_exponent();
    let admissible = alpha_effective * 2 + qi(gamma as i64) > Q::one();
    Ok(ExponentResult {
        regime: v.branch.to_string(),
        alpha,
        log_beta,
        alpha_effective,
        gamma,
        admissible,
    })
}

/// Admissible `r`: `lower < r`, with `r = inf` included or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RRange {
    pub lower_exclusive: Q,
    pub includes_infinity: bool,
}

impl RRange {
    pub fn contains(&self, r: LebesgueIndex) -> bool {
        if r.is_infinite() {
            return self.includes_infinity;
        }
        r.inv.recip() > self.lower_exclusive
    }
}

pub fn admissible_range(model: ModelId) -> Result<RRange, CatalogError> {
    model.validate_exponents()?;
    let d = model.dimension() as i64;
    Ok(match model {
        ModelId::HarmonicOscillator { .. } | ModelId::Landau { .. } => RRange {
            lower_exclusive: q(d, 2),
            includes_infinity: false,
        },
        ModelId::Sphere { .. } => RRange {
            lower_exclusive: q(d, 2),
            includes_infinity: true,
        },
        ModelId::SphereDeltaCircle { .. } => RRange {
            lower_exclusive: qi(d - 1),
            includes_infinity: true,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Multiplicity {
    Finite(u128),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub k: usize,
    pub mu: f64,
    pub multiplicity: Multiplicity,
}

fn binomial(n: u128, r: u128, k: usize) -> Result<u128, CatalogError> {
    let r = r.min(n - r.min(n));
    let mut c: u128 = 1;
    for i in 1..=r {
        c = c
            .checked_mul(n - r + i)
            .ok_or(CatalogError::Overflow { k })?
            / i;
    }
    Ok(c)
}

/// Multiplicity of level `k` (`k >= 1`).
pub fn multiplicity(model: ModelId, k: usize) -> Result<Multiplicity, CatalogError> {
    model.validate()?;
    if k == 0 {
        return Err(CatalogError::OutOfDomain {
            what: "k",
            value: "0".into(),
        });
    }
    let d = model.dimension() as u128;
    let kk = k as u128;
    Ok(match model {
        ModelId::Landau { .. } => Multiplicity::Infinite,
        // C(k - 2 + d, d - 1)
        ModelId::HarmonicOscillator { .. } => Multiplicity::Finite(binomial(kk + d - 2, d - 1, k)?),
        // (2k - 3 + d) C(k - 3 + d, d - 2) / (d - 1)
        ModelId::Sphere { .. } | ModelId::SphereDeltaCircle { .. } => {
            let c = binomial(kk + d - 3, d - 2, k)?;
            let num = c
                .checked_mul(2 * kk + d - 3)
                .ok_or(CatalogError::Overflow { k })?;
            Multiplicity::Finite(num / (d - 1))
        }
    })
}

/// Unperturbed eigenvalue ladder; `shift` defaults to [`ModelId::default_shift`].
pub fn spectral_model(model: ModelId, shift: Option<f64>) -> Result<SpectralModel, CatalogError> {
    model.validate()?;
    let d = model.dimension() as f64;
    let s = shift.unwrap_or_else(|| model.default_shift());
    Ok(match model {
        ModelId::HarmonicOscillator { .. } => SpectralModel::affine(2.0, d - 2.0).with_shift(s),
        ModelId::Landau { .. } => SpectralModel::affine(2.0, d / 2.0 - 2.0).with_shift(s),
        ModelId::Sphere { .. } | ModelId::SphereDeltaCircle { .. } => SpectralModel::sphere(d, s),
    })
}

/// Levels `1..=kmax` with eigenvalues and multiplicities.
pub fn spectrum(model: ModelId, kmax: usize, shift: Option<f64>) -> Result<Vec<Level>, CatalogError> {
    let sm = spectral_model(model, shift)?;
    (1..=kmax)
        .map(|k| {
            Ok(Level {
                k,
                mu: sm.mu(k).expect("closed-form ladder"),
                multiplicity: multiplicity(model, k)?,
            })
        })
        .collect()
}

/// Consistency of a branch table: adjacent branches agree exactly at shared
/// endpoints, and every point of `[0, 1/2]` is covered.
pub fn check_table_continuity(model: ModelId) -> Result<(), String> {
    let b = rho_branches(model).map_err(|e| e.to_string())?;
    let half = q(1, 2);
    if b.first().map(|x| x.lo) != Some(Q::zero()) || b.last().map(|x| x.hi) != Some(half) {
        return Err(format!("{}: table does not span [0, 1/2]", model.name()));
    }
    for w in b.windows(2) {
        if w[0].hi != w[1].lo {
            return Err(format!("{}: gap between branches at {}", model.name(), w[0].hi));
        }
        if !(w[0].hi_closed || w[1].lo_closed) {
            return Err(format!("{}: point {} uncovered", model.name(), w[0].hi));
        }
        let x = w[0].hi;
        if w[0].eval(x) != w[1].eval(x) {
            return Err(format!(
                "{}: jump at 1/p = {x}: {} vs {}",
                model.name(),
                w[0].eval(x),
                w[1].eval(x)
            ));
        }
    }
    Ok(())
}
