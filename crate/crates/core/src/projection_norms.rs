//! `L^p` norms of explicit unit eigenfunctions ("witnesses") of the reference
//! models, and log-log slope fits of their growth in the level index.
//!
//! A witness `u` in the range of `P_k^0` gives `||P_k^0||_{L^2 -> L^p} >= ||u||_p`,
//! so every number produced here is a lower bound for the projection norm.

use crate::model_catalog::{self, CatalogError, ModelId};
use crate::quadrature::{integrate_panels, QuadratureError};
use crate::special::{assoc_legendre, hermite_function, legendre_polynomials, spherical_harmonic};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Levels below this are left out of slope fits.
pub const MIN_FIT_LEVEL: usize = 10;
pub const MIN_FIT_POINTS: usize = 8;
const REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NormError {
    #[error("invalid witness family: {reason}")]
    BadFamily { reason: String },
    #[error("point has {got} coordinates, family needs {want}")]
    BadPoint { got: usize, want: usize },
    #[error("p = {p} outside [2, inf]")]
    InvalidP { p: f64 },
    #[error("k must be at least 1")]
    ZeroLevel,
    #[error("non-finite value for level {k}")]
    Overflow { k: usize },
    #[error(transparent)]
    QuadratureFailure(#[from] QuadratureError),
    #[error("slope fit needs {need} usable points, have {have}")]
    InsufficientPoints { have: usize, need: usize },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// Unit eigenfunctions of level `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WitnessFamily {
    /// `h_{k-1}(x_1) h_0(x_2) ... h_0(x_d)` on `R^d`.
    HermiteGround { d: u32 },
    /// `Y_{k-1}^0` on `S^2`.
    ZonalHarmonic,
    /// `Y_{k-1}^{k-1}` on `S^2`.
    HighestWeight,
    /// `Y_{k-1}^0` restricted to the equator.
    EquatorZonal,
    /// `Y_{k-1}^{k-1}` restricted to the equator.
    EquatorHighestWeight,
}

impl WitnessFamily {
    pub fn name(&self) -> String {
        match self {
            WitnessFamily::HermiteGround { d } => format!("hermite_ground_d{d}"),
            WitnessFamily::ZonalHarmonic => "zonal".into(),
            WitnessFamily::HighestWeight => "highest_weight".into(),
            WitnessFamily::EquatorZonal => "equator_zonal".into(),
            WitnessFamily::EquatorHighestWeight => "equator_highest_weight".into(),
        }
    }

    fn validate(&self) -> Result<(), NormError> {
        match self {
            WitnessFamily::HermiteGround { d } if *d == 0 || *d > 16 => Err(NormError::BadFamily {
                reason: format!("dimension {d} not in 1..=16"),
            }),
            _ => Ok(()),
        }
    }

    /// Model whose exponent table the family is compared with (`None` for the
    /// one-dimensional oscillator, which has no table).
    pub fn reference_model(&self) -> Option<ModelId> {
        match self {
            WitnessFamily::HermiteGround { d } if *d >= 2 => Some(ModelId::HarmonicOscillator { d: *d }),
            WitnessFamily::HermiteGround { .. } => None,
            WitnessFamily::ZonalHarmonic | WitnessFamily::HighestWeight => Some(ModelId::Sphere { d: 2 }),
            WitnessFamily::EquatorZonal | WitnessFamily::EquatorHighestWeight => {
                Some(ModelId::SphereDeltaCircle { d: 2 })
            }
        }
    }

    /// Branch of the reference table on which the family is extremal.
    fn saturated_branch(&self) -> Option<&'static str> {
        match self {
            WitnessFamily::HermiteGround { .. } => Some("near_l2"),
            WitnessFamily::ZonalHarmonic => Some("low_integrability"),
            WitnessFamily::HighestWeight | WitnessFamily::EquatorHighestWeight => Some("near_l2"),
            WitnessFamily::EquatorZonal => None,
        }
    }

    fn point_dim(&self) -> usize {
        match self {
            WitnessFamily::HermiteGround { d } => *d as usize,
            WitnessFamily::ZonalHarmonic | WitnessFamily::HighestWeight => 2,
            WitnessFamily::EquatorZonal | WitnessFamily::EquatorHighestWeight => 1,
        }
    }
}

fn check_p(p: f64) -> Result<(), NormError> {
    if p >= 2.0 && !p.is_nan() {
        Ok(())
    } else {
        Err(NormError::InvalidP { p })
    }
}

fn finite(k: usize, v: f64) -> Result<f64, NormError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NormError::Overflow { k })
    }
}

/// Value of the level-`k` witness at `point`: `x in R^d`, `[theta, phi]` on
/// `S^2`, or `[phi]` on the equator.
pub fn eval_eigenfunction(family: WitnessFamily, k: usize, point: &[f64]) -> Result<Complex64, NormError> {
    family.validate()?;
    if k == 0 {
        return Err(NormError::ZeroLevel);
    }
    if point.len() != family.point_dim() {
        return Err(NormError::BadPoint {
            got: point.len(),
            want: family.point_dim(),
        });
    }
    let l = k - 1;
    let v = match family {
        WitnessFamily::HermiteGround { .. } => {
            let mut v = hermite_function(l, point[0]);
            for &x in &point[1..] {
                v *= hermite_function(0, x);
            }
            Complex64::new(v, 0.0)
        }
        WitnessFamily::ZonalHarmonic => spherical_harmonic(l, 0, point[0], point[1]),
        WitnessFamily::HighestWeight => spherical_harmonic(l, l as i64, point[0], point[1]),
        WitnessFamily::EquatorZonal => spherical_harmonic(l, 0, PI / 2.0, point[0]),
        WitnessFamily::EquatorHighestWeight => spherical_harmonic(l, l as i64, PI / 2.0, point[0]),
    };
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(NormError::Overflow { k })
    }
}

/// `|u|` of the witness as a function of the single non-trivial coordinate,
/// its integration range, the measure factor and the oscillation count.
struct Profile<'a> {
    f: Box<dyn Fn(f64) -> f64 + 'a>,
    /// Jacobian (including symmetry multiplicity) of the measure.
    weight: Box<dyn Fn(f64) -> f64 + 'a>,
    a: f64,
    b: f64,
    panels: usize,
}

fn profile(family: WitnessFamily, l: usize) -> Profile<'static> {
    let lf = l as f64;
    match family {
        WitnessFamily::HermiteGround { .. } => Profile {
            f: Box::new(move |x| hermite_function(l, x).abs()),
            weight: Box::new(|_| 2.0),
            a: 0.0,
            b: (2.0 * lf + 1.0).sqrt() + 8.0,
            panels: 2 * (l + 4),
        },
        WitnessFamily::ZonalHarmonic => {
            let c = ((2.0 * lf + 1.0) / (4.0 * PI)).sqrt();
            Profile {
                f: Box::new(move |t| c * legendre_polynomials(l + 1, t.cos())[l].abs()),
                weight: Box::new(|t| 4.0 * PI * t.sin()),
                a: 0.0,
                b: PI / 2.0,
                panels: 2 * (l + 4),
            }
        }
        WitnessFamily::HighestWeight => Profile {
            f: Box::new(move |t| assoc_legendre(l, l as i64, t.cos()).abs()),
            weight: Box::new(|t| 4.0 * PI * t.sin()),
            a: 0.0,
            b: PI / 2.0,
            panels: 2 * (l + 4),
        },
        WitnessFamily::EquatorZonal | WitnessFamily::EquatorHighestWeight => {
            let m = if family == WitnessFamily::EquatorZonal { 0 } else { l as i64 };
            let v = assoc_legendre(l, m, 0.0).abs();
            Profile {
                f: Box::new(move |_| v),
                weight: Box::new(|_| 1.0),
                a: 0.0,
                b: 2.0 * PI,
                panels: 1,
            }
        }
    }
}

/// Maximum of `f` on `[a, b]`: uniform grid, then golden-section refinement
/// around the three best grid points.
fn grid_max(f: &dyn Fn(f64) -> f64, a: f64, b: f64, count: usize) -> f64 {
    let n = count.max(3);
    let h = (b - a) / (n - 1) as f64;
    let vals: Vec<f64> = (0..n).map(|i| f(a + h * i as f64)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    let mut best = vals[order[0]];
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for &i in order.iter().take(3) {
        let (mut lo, mut hi) = ((a + h * (i as f64 - 1.0)).max(a), (a + h * (i as f64 + 1.0)).min(b));
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..80 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = f(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = f(x1);
            }
        }
        best = best.max(f1).max(f2).max(f(lo)).max(f(hi));
    }
    best
}

fn hermite_ground_lp(p: f64) -> f64 {
    // ||h_0||_p^p = pi^{-p/4} sqrt(2 pi / p)
    if p.is_infinite() {
        PI.powf(-0.25)
    } else {
        (PI.powf(-p / 4.0) * (2.0 * PI / p).sqrt()).powf(1.0 / p)
    }
}

/// `||u_k||_{L^p}` for the unit witness of level `k`, `p in [2, inf]`
/// (`f64::INFINITY` for the sup norm). Sphere norms use surface measure.
pub fn norm_lower_bound(family: WitnessFamily, k: usize, p: f64) -> Result<f64, NormError> {
    family.validate()?;
    check_p(p)?;
    if k == 0 {
        return Err(NormError::ZeroLevel);
    }
    let l = k - 1;
    let prof = profile(family, l);
    let factor = match family {
        WitnessFamily::HermiteGround { d } => hermite_ground_lp(p).powi(d as i32 - 1),
        _ => 1.0,
    };
    let core = if p.is_infinite() {
        grid_max(&*prof.f, prof.a, prof.b, 16 * prof.panels + 16)
    } else if matches!(family, WitnessFamily::EquatorZonal | WitnessFamily::EquatorHighestWeight) {
        (prof.f)(0.0) * (2.0 * PI).powf(1.0 / p)
    } else {
        let integrand = |x: f64| {
            let v = (prof.f)(x);
            if v == 0.0 {
                0.0
            } else {
                (p * v.ln()).exp() * (prof.weight)(x)
            }
        };
        let breaks: Vec<f64> = (0..=prof.panels)
            .map(|i| prof.a + (prof.b - prof.a) * i as f64 / prof.panels as f64)
            .collect();
        // magnitude from a coarse midpoint sum sets the absolute tolerance
        let coarse: f64 = (0..8 * prof.panels)
            .map(|i| {
                let h = (prof.b - prof.a) / (8 * prof.panels) as f64;
                integrand(prof.a + h * (i as f64 + 0.5)) * h
            })
            .sum();
        let total = integrate_panels(&integrand, &breaks, REL_TOL * coarse.max(f64::MIN_POSITIVE))?;
        total.powf(1.0 / p)
    };
    finite(k, core * factor)
}

/// One row of a norm table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub k: usize,
    /// `"inf"` or the decimal value of `p`.
    pub p: String,
    pub norm: f64,
    pub family: String,
}

pub fn p_label(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

pub fn norm_table(family: WitnessFamily, ks: &[usize], ps: &[f64]) -> Result<Vec<NormRecord>, NormError> {
    let mut out = Vec::with_capacity(ks.len() * ps.len());
    for &p in ps {
        for &k in ks {
            out.push(NormRecord {
                k,
                p: p_label(p),
                norm: norm_lower_bound(family, k, p)?,
                family: family.name(),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub family: String,
    pub p: String,
    pub alpha_hat: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub k_range: (usize, usize),
    pub points: usize,
    /// Norm growth exponent from the catalog at this `p`.
    pub reference_rho: Option<f64>,
    pub reference_log_power: Option<f64>,
    pub reference_branch: Option<String>,
    /// The family is extremal on the active branch: the slope should match,
    /// otherwise it only has to stay below.
    pub saturating: bool,
    pub tol: f64,
    pub pass: bool,
}

/// Least-squares slope of `ln ||u_k||_p` against `ln k` over `ks`
/// (levels below [`MIN_FIT_LEVEL`] and vanishing norms are skipped).
pub fn fit_slope(family: WitnessFamily, p: f64, ks: &[usize], tol: f64) -> Result<SlopeFit, NormError> {
    family.validate()?;
    check_p(p)?;
    let mut pts = Vec::new();
    for &k in ks.iter().filter(|&&k| k >= MIN_FIT_LEVEL) {
        let v = norm_lower_bound(family, k, p)?;
        if v > 0.0 {
            pts.push(((k as f64).ln(), v.ln(), k));
        }
    }
    if pts.len() < MIN_FIT_POINTS {
        return Err(NormError::InsufficientPoints {
            have: pts.len(),
            need: MIN_FIT_POINTS,
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();

    let reference = match family.reference_model() {
        Some(m) => Some(model_catalog::rho_exponent::<f64>(m, if p.is_infinite() { 0.0 } else { 1.0 / p })?),
        None => None,
    };
    let saturating = reference
        .as_ref()
        .is_some_and(|r| family.saturated_branch() == Some(r.branch));
    let pass = match &reference {
        Some(r) if saturating => (slope - r.norm_exponent).abs() <= tol,
        Some(r) => slope <= r.norm_exponent + stderr + tol,
        None => true,
    };
    Ok(SlopeFit {
        family: family.name(),
        p: p_label(p),
        alpha_hat: slope,
        stderr,
        intercept,
        k_range: (pts[0].2, pts[pts.len() - 1].2),
        points: pts.len(),
        reference_rho: reference.as_ref().map(|r| r.norm_exponent),
        reference_log_power: reference.as_ref().map(|r| r.log_power),
        reference_branch: reference.map(|r| r.branch.to_string()),
        saturating,
        tol,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_normalization() {
        for fam in [
            WitnessFamily::HermiteGround { d: 1 },
            WitnessFamily::HermiteGround { d: 3 },
            WitnessFamily::ZonalHarmonic,
            WitnessFamily::HighestWeight,
        ] {
            for k in [1, 7, 40] {
                let v = norm_lower_bound(fam, k, 2.0).unwrap();
                assert!((v - 1.0).abs() < 1e-10, "{fam:?} {k} {v}");
            }
        }
    }

    #[test]
    fn sup_norms() {
        let h = norm_lower_bound(WitnessFamily::HermiteGround { d: 1 }, 1, f64::INFINITY).unwrap();
        assert!((h - PI.powf(-0.25)).abs() < 1e-12);
        let z = norm_lower_bound(WitnessFamily::ZonalHarmonic, 11, f64::INFINITY).unwrap();
        assert!((z - (21.0 / (4.0 * PI)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            norm_lower_bound(WitnessFamily::ZonalHarmonic, 3, 1.5),
            Err(NormError::InvalidP { .. })
        ));
        assert!(matches!(
            fit_slope(WitnessFamily::ZonalHarmonic, 4.0, &[10, 11, 12], 0.05),
            Err(NormError::InsufficientPoints { .. })
        ));
        assert!(eval_eigenfunction(WitnessFamily::ZonalHarmonic, 2, &[0.1]).is_err());
    }
}
