use super::sums::SumEngine;
use super::{gap_radii, GapRadii, OmegaModel, RieszError, SpectralModel, DEFAULT_J_MAX};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Summation and supremum horizons for `sigma_N`.
///
/// For an analytic tail the supremum over `n >= N` is taken over
/// `N <= n <= max(horizon_factor * N, 2 * head length, min_horizon)`; beyond
/// that the power-law tail makes `S(n)` decay monotonically, so the window
/// captures the supremum for every admissible power law. Head-only models
/// use the exact window `N <= n <= max(N, head length + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaOptions {
    pub j_max: usize,
    pub horizon_factor: usize,
    pub min_horizon: usize,
}

impl Default for SigmaOptions {
    fn default() -> Self {
        Self {
            j_max: DEFAULT_J_MAX,
            horizon_factor: 4,
            min_horizon: 64,
        }
    }
}

impl SigmaOptions {
    pub fn horizon(&self, omega: &OmegaModel, n: usize) -> usize {
        match omega.tail {
            None => n.max(omega.head.len() + 1),
            Some(_) => (self.horizon_factor * n)
                .max(2 * omega.head.len())
                .max(self.min_horizon)
                .max(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaEstimate {
    pub n: usize,
    /// Largest partial value `S(n)` over the supremum window.
    pub value: f64,
    /// Upper bound on everything omitted (multipole truncation and `j > J`).
    pub remainder: f64,
    pub diverged: bool,
    pub horizon: usize,
    pub argmax: usize,
    /// Share of `S(N)` contributed by the last decade `J/10 < j <= J`.
    pub last_decade_growth: f64,
}

impl SigmaEstimate {
    /// `value + remainder`, an upper bound for `sigma_N` on the window.
    pub fn upper(&self) -> f64 {
        self.value + self.remainder
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    /// `partial + remainder`; a valid upper bound for the full series.
    pub value: f64,
    pub partial: f64,
    pub remainder: f64,
    pub diverged: bool,
}

/// Rate of decay of `sigma_N` for `omega_n ~ n^-alpha`, gaps `~ n^(gamma-1)`.
/// Off-diagonal part: `n^-(2 alpha + gamma - 1) log n` for `alpha <= 1/2`,
/// `n^-gamma` otherwise; diagonal part `omega_n^2 / r_n ~ n^-(2 alpha + gamma - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRate {
    pub exponent: f64,
    pub off_diagonal_exponent: f64,
    pub off_diagonal_log_power: u32,
    pub diagonal_exponent: f64,
}

impl DecayRate {
    pub fn eval(&self, n: f64) -> f64 {
        n.powf(-self.off_diagonal_exponent) * n.ln().powi(self.off_diagonal_log_power as i32)
            + n.powf(-self.diagonal_exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub rate: Option<DecayRate>,
}

/// Power-law admissibility: `sigma_N -> 0` iff `2 alpha + gamma > 1`.
pub fn power_law_admissible(alpha: f64, gamma: f64) -> Admissibility {
    let e = 2.0 * alpha + gamma - 1.0;
    if !(e > 0.0) {
        return Admissibility {
            admissible: false,
            rate: None,
        };
    }
    let (off, log) = if alpha <= 0.5 { (e, 1) } else { (gamma, 0) };
    Admissibility {
        admissible: true,
        rate: Some(DecayRate {
            exponent: e,
            off_diagonal_exponent: off,
            off_diagonal_log_power: log,
            diagonal_exponent: e,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffResult {
    pub n0: usize,
    pub sigma: SigmaEstimate,
}

#[derive(Debug, Clone, Copy)]
struct Point {
    partial: f64,
    remainder: f64,
}

impl SumEngine {
    /// `sum_j omega_j^2 / |z - mu_j|` with the remainder folded in.
    pub fn bound(&self, z: Complex64) -> Result<BoundValue, RieszError> {
        let (p, err) = self.partial(z, None)?;
        let rem = err + self.tail_remainder(z);
        Ok(BoundValue {
            value: p + rem,
            partial: p,
            remainder: rem,
            diverged: self.divergent_exponent().is_some(),
        })
    }

    fn point(&self, omega: &OmegaModel, radii: &GapRadii, n: usize) -> Result<Point, RieszError> {
        let z = Complex64::new(self.mu(n), 0.0);
        let (p, err) = self.partial(z, Some(n))?;
        let w = omega.value_or_zero(n);
        let r = radii.get(n).ok_or(RieszError::RadiiTooShort {
            needed: n,
            have: radii.len(),
        })?;
        Ok(Point {
            partial: p + w * w / r,
            remainder: err + self.tail_remainder(z),
        })
    }

    fn last_decade_growth(&self, n: usize, total: f64) -> f64 {
        let j = self.horizon();
        if j < 10 || total <= 0.0 {
            return 0.0;
        }
        let z = Complex64::new(self.mu(n), 0.0);
        self.direct_range(z, Some(n), j / 10 + 1, j) / total
    }
}

fn radii_covering(mu: &SpectralModel, r: &GapRadii, need: usize) -> Result<GapRadii, RieszError> {
    if r.len() >= need {
        Ok(r.clone())
    } else {
        gap_radii(mu, need)
    }
}

fn check_tail(omega: &OmegaModel, engine: &SumEngine, need: usize) -> Result<(), RieszError> {
    if omega.tail.is_some() && need > engine.horizon() {
        return Err(RieszError::InvalidArgument {
            reason: format!(
                "supremum window up to {need} exceeds summation horizon {}",
                engine.horizon()
            ),
        });
    }
    Ok(())
}

/// `sigma_N = sup_{n >= N} ( sum_{j != n} omega_j^2/|mu_n - mu_j| + omega_n^2/r_n )`.
///
/// Radii beyond the supplied range are computed from `mu`.
pub fn sigma_tail(
    mu: &SpectralModel,
    r: &GapRadii,
    omega: &OmegaModel,
    n: usize,
    opts: &SigmaOptions,
) -> Result<SigmaEstimate, RieszError> {
    if n == 0 {
        return Err(RieszError::InvalidArgument {
            reason: "sigma_N needs N >= 1".into(),
        });
    }
    let engine = SumEngine::new(mu, omega, opts.j_max)?;
    let horizon = opts.horizon(omega, n);
    check_tail(omega, &engine, horizon)?;
    let radii = radii_covering(mu, r, horizon)?;
    sigma_from_engine(&engine, mu, omega, &radii, n, horizon)
}

pub(crate) fn sigma_from_engine(
    engine: &SumEngine,
    mu: &SpectralModel,
    omega: &OmegaModel,
    radii: &GapRadii,
    n: usize,
    horizon: usize,
) -> Result<SigmaEstimate, RieszError> {
    let mut best = f64::NEG_INFINITY;
    let mut argmax = n;
    let mut rem: f64 = 0.0;
    let mut first = 0.0;
    for m in n..=horizon {
        let p = if m <= engine.horizon() {
            engine.point(omega, radii, m)?
        } else if omega.tail.is_none() {
            // finitely many weights: every term decreases once n > J
            let z = mu.mu(m).ok_or(RieszError::SpectrumExhausted {
                needed: m,
                have: m - 1,
            })?;
            Point {
                partial: engine.direct_range(Complex64::new(z, 0.0), None, 1, engine.horizon()),
                remainder: 0.0,
            }
        } else {
            return Err(RieszError::InvalidArgument {
                reason: format!("supremum window {m} beyond summation horizon"),
            });
        };
        if m == n {
            first = p.partial;
        }
        if p.partial > best {
            best = p.partial;
            argmax = m;
        }
        rem = rem.max(p.remainder);
    }
    let diverged = engine.divergent_exponent().is_some();
    Ok(SigmaEstimate {
        n,
        value: best,
        remainder: if diverged { f64::INFINITY } else { rem },
        diverged,
        horizon,
        argmax,
        last_decade_growth: if n <= engine.horizon() {
            engine.last_decade_growth(n, first)
        } else {
            0.0
        },
    })
}

/// Smallest `N <= n_cap` with `sigma_N <= threshold` (remainder included).
pub fn find_cutoff_n0(
    mu: &SpectralModel,
    r: &GapRadii,
    omega: &OmegaModel,
    threshold: f64,
    n_cap: usize,
    opts: &SigmaOptions,
) -> Result<CutoffResult, RieszError> {
    let engine = SumEngine::new(mu, omega, opts.j_max)?;
    cutoff_with_engine(&engine, mu, r, omega, threshold, n_cap, opts)
}

pub(crate) fn cutoff_with_engine(
    engine: &SumEngine,
    mu: &SpectralModel,
    r: &GapRadii,
    omega: &OmegaModel,
    threshold: f64,
    n_cap: usize,
    opts: &SigmaOptions,
) -> Result<CutoffResult, RieszError> {
    if let Some(exponent) = engine.divergent_exponent() {
        let growth = engine.last_decade_growth(1, engine.partial(Complex64::new(engine.mu(1), 0.0), Some(1))?.0);
        return Err(RieszError::Diverged { exponent, growth });
    }
    if omega.tail.is_none() {
        return cutoff_head_only(engine, mu, r, omega, threshold, n_cap);
    }
    let top = opts.horizon(omega, n_cap);
    check_tail(omega, engine, top)?;
    let radii = radii_covering(mu, r, top)?;
    let mut cache: Vec<Option<f64>> = vec![None; top + 1];
    let mut total = |m: usize| -> Result<f64, RieszError> {
        if let Some(v) = cache[m] {
            return Ok(v);
        }
        let p = engine.point(omega, &radii, m)?;
        let v = p.partial + p.remainder;
        cache[m] = Some(v);
        Ok(v)
    };
    'outer: for n in 1..=n_cap {
        let h = opts.horizon(omega, n);
        for m in n..=h {
            if total(m)? > threshold {
                continue 'outer;
            }
        }
        let sigma = sigma_from_engine(engine, mu, omega, &radii, n, h)?;
        return Ok(CutoffResult { n0: n, sigma });
    }
    let sigma = sigma_from_engine(engine, mu, omega, &radii, n_cap, opts.horizon(omega, n_cap))?;
    Err(RieszError::NotReached {
        n_cap,
        sigma_at_cap: sigma.upper(),
    })
}

/// Head-only weights: for `n > J` every term is `omega_j^2/(mu_n - mu_j)`,
/// decreasing in `n`, so the supremum window ends at `J + 1`.
fn cutoff_head_only(
    engine: &SumEngine,
    mu: &SpectralModel,
    r: &GapRadii,
    omega: &OmegaModel,
    threshold: f64,
    n_cap: usize,
) -> Result<CutoffResult, RieszError> {
    let j = engine.horizon();
    let top = n_cap.max(j + 1);
    let radii = radii_covering(mu, r, top)?;
    let mu_vals = mu.values(top)?;
    let mut vals = Vec::with_capacity(top);
    for n in 1..=top {
        let z = Complex64::new(mu_vals[n - 1], 0.0);
        let s = if n <= j {
            let p = engine.point(omega, &radii, n)?;
            p.partial + p.remainder
        } else {
            engine.direct_range(z, None, 1, j)
        };
        vals.push(s);
    }
    // suffix maxima over n..=top
    let mut suffix = vals.clone();
    for i in (0..top.saturating_sub(1)).rev() {
        suffix[i] = suffix[i].max(suffix[i + 1]);
    }
    let mk = |n: usize| {
        let argmax = (n..=top)
            .max_by(|&a, &b| vals[a - 1].total_cmp(&vals[b - 1]))
            .unwrap_or(n);
        SigmaEstimate {
            n,
            value: suffix[n - 1],
            remainder: 0.0,
            diverged: false,
            horizon: top,
            argmax,
            last_decade_growth: 0.0,
        }
    };
    for n in 1..=n_cap {
        if suffix[n - 1] <= threshold {
            return Ok(CutoffResult { n0: n, sigma: mk(n) });
        }
    }
    Err(RieszError::NotReached {
        n_cap,
        sigma_at_cap: suffix[n_cap - 1],
    })
}

/// Upper bound for `||B(z)||`: `sum_j omega_j^2/|z - mu_j|` plus the tail remainder.
pub fn b_norm_upper(
    z: Complex64,
    mu: &SpectralModel,
    omega: &OmegaModel,
    opts: &SigmaOptions,
) -> Result<BoundValue, RieszError> {
    SumEngine::new(mu, omega, opts.j_max)?.bound(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_term_bound() {
        let mu = SpectralModel::affine(2.0, 0.0);
        let om = OmegaModel::head_only(vec![1.0]);
        let b = b_norm_upper(Complex64::new(3.0, 0.0), &mu, &om, &SigmaOptions::default()).unwrap();
        assert_eq!(b.value, 1.0);
    }

    #[test]
    fn constant_weights_diverge() {
        let mu = SpectralModel::affine(2.0, 0.0);
        let om = OmegaModel::power_law(1.0, 0.0, 0.0);
        let r = gap_radii(&mu, 10).unwrap();
        let s = sigma_tail(&mu, &r, &om, 10, &SigmaOptions::default()).unwrap();
        assert!(s.diverged);
        assert!(matches!(
            find_cutoff_n0(&mu, &r, &om, 0.5, 100, &SigmaOptions::default()),
            Err(RieszError::Diverged { .. })
        ));
    }

    #[test]
    fn zero_weights_give_first_level() {
        let mu = SpectralModel::affine(2.0, 0.0);
        let r = gap_radii(&mu, 4).unwrap();
        let c = find_cutoff_n0(&mu, &r, &OmegaModel::zero(), 0.5, 100, &SigmaOptions::default())
            .unwrap();
        assert_eq!(c.n0, 1);
        assert_eq!(c.sigma.upper(), 0.0);
    }

    #[test]
    fn on_spectrum_rejected() {
        let mu = SpectralModel::affine(2.0, 0.0);
        let om = OmegaModel::head_only(vec![1.0, 1.0]);
        assert_eq!(
            b_norm_upper(Complex64::new(4.0, 0.0), &mu, &om, &SigmaOptions::default()),
            Err(RieszError::OnSpectrum { k: 2 })
        );
    }

    #[test]
    fn admissibility_boundary() {
        assert!(!power_law_admissible(0.0, 1.0).admissible);
        assert!(power_law_admissible(0.01, 1.0).admissible);
        assert!(power_law_admissible(-0.25, 2.0).admissible);
        let r = power_law_admissible(0.75, 1.0).rate.unwrap();
        assert_eq!(r.off_diagonal_exponent, 1.0);
        assert_eq!(r.off_diagonal_log_power, 0);
        assert_eq!(r.diagonal_exponent, 1.5);
    }
}
