//! Fast evaluation of `sum_j omega_j^2 / |z - mu_j|` over `j <= J` with a
//! certified remainder for `j > J`.
//!
//! Terms with `mu_j < 2|z|` are summed directly. The far field uses the
//! Legendre generating function
//! `1/|z - mu| = (1/mu) sum_l P_l(cos theta) (|z|/mu)^l`, `cos theta = Re z/|z|`,
//! with moments precomputed on a dyadic grid of start indices, so every
//! evaluation costs `O(#{j : mu_j < 2|z|} + ORDER)`.

use super::{OmegaModel, RieszError, SpectralModel};
use num_complex::Complex64;
use statrs::function::gamma::gamma_ui;

const ORDER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tail {
    Zero,
    Divergent {
        exponent: f64,
    },
    Summable {
        c2: f64,
        s: f64,
        b: f64,
        m: f64,
        mu_next: f64,
        j: f64,
    },
}

#[derive(Debug, Clone)]
pub struct SumEngine {
    mu: Vec<f64>,
    w: Vec<f64>,
    starts: Vec<usize>,
    moments: Vec<[f64; ORDER]>,
    tail: Tail,
}

/// `int_J^inf t^{-s} (ln t)^b dt` for `s > 1`, `b >= 0`.
pub(crate) fn log_power_tail_integral(j: f64, s: f64, b: f64) -> f64 {
    let l = j.ln();
    if b == 0.0 {
        return j.powf(1.0 - s) / (s - 1.0);
    }
    // substitute u = ln t: int_L^inf e^{-(s-1)u} u^b du = Gamma(b+1, (s-1)L) / (s-1)^{b+1}
    gamma_ui(b + 1.0, (s - 1.0) * l) / (s - 1.0).powf(b + 1.0)
}

impl SumEngine {
    /// Prepare sums over `j <= J`, where `J` is the head length for head-only
    /// `omega`, otherwise `max(j_max, head length)` with an analytic tail beyond.
    pub fn new(mu: &SpectralModel, omega: &OmegaModel, j_max: usize) -> Result<Self, RieszError> {
        mu.validate()?;
        omega.validate()?;
        let j = match omega.tail {
            None => omega.head.len(),
            Some(_) => j_max.max(omega.head.len()),
        };
        let mut tail = Tail::Zero;
        if let Some(t) = omega.tail {
            if t.coeff > 0.0 {
                let (m, g) = mu.power_lower_bound(j).ok_or(RieszError::SpectrumExhausted {
                    needed: j + 1,
                    have: mu.len().unwrap_or(0),
                })?;
                let s = 2.0 * t.alpha + g;
                let b = 2.0 * t.beta;
                if s <= 1.0 {
                    tail = Tail::Divergent { exponent: s };
                } else {
                    if (j as f64).ln() <= b / s {
                        return Err(RieszError::InvalidArgument {
                            reason: format!("summation horizon {j} too short for log power {b}"),
                        });
                    }
                    tail = Tail::Summable {
                        c2: t.coeff * t.coeff,
                        s,
                        b,
                        m,
                        mu_next: 0.0,
                        j: j as f64,
                    };
                }
            }
        }
        let need = if matches!(tail, Tail::Summable { .. }) { j + 1 } else { j };
        let mu_vals = mu.values(need.max(1))?;
        if let Tail::Summable { mu_next, .. } = &mut tail {
            *mu_next = mu_vals[j];
        }
        let w: Vec<f64> = (1..=j)
            .map(|k| {
                let v = omega.value_or_zero(k);
                v * v
            })
            .collect();

        let mut starts = Vec::new();
        let mut g = 1usize;
        while g <= j {
            starts.push(g);
            g *= 2;
        }
        let mut moments = vec![[0.0; ORDER]; starts.len()];
        for (i, &st) in starts.iter().enumerate().rev() {
            let end = starts.get(i + 1).map(|&n| n - 1).unwrap_or(j);
            let ref_mu = mu_vals[st - 1];
            let mut acc = [0.0; ORDER];
            for k in st..=end {
                let wk = w[k - 1];
                if wk == 0.0 {
                    continue;
                }
                let mk = mu_vals[k - 1];
                let q = ref_mu / mk;
                let mut term = wk / mk;
                for a in acc.iter_mut() {
                    *a += term;
                    term *= q;
                    if term == 0.0 {
                        break;
                    }
                }
            }
            if let Some(next) = moments.get(i + 1).copied() {
                let q = ref_mu / mu_vals[starts[i + 1] - 1];
                let mut f = 1.0;
                for (a, n) in acc.iter_mut().zip(next.iter()) {
                    *a += f * n;
                    f *= q;
                }
            }
            moments[i] = acc;
        }
        Ok(Self {
            mu: mu_vals,
            w,
            starts,
            moments,
            tail,
        })
    }

    /// Summation horizon `J`.
    pub fn horizon(&self) -> usize {
        self.w.len()
    }

    pub fn mu(&self, k: usize) -> f64 {
        self.mu[k - 1]
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.w[k - 1]
    }

    /// Tail exponent `2 alpha + gamma` when the analytic tail does not converge.
    pub fn divergent_exponent(&self) -> Option<f64> {
        match self.tail {
            Tail::Divergent { exponent } => Some(exponent),
            _ => None,
        }
    }

    /// `(sum over j <= J, j != exclude, of w_j / |z - mu_j|, truncation error bound)`.
    pub fn partial(&self, z: Complex64, exclude: Option<usize>) -> Result<(f64, f64), RieszError> {
        let a = z.norm();
        let skip = exclude.unwrap_or(0);
        let split = self
            .starts
            .iter()
            .position(|&st| st > skip && self.mu[st - 1] >= 2.0 * a);
        let direct_end = split.map(|i| self.starts[i] - 1).unwrap_or(self.w.len());
        let mut sum = 0.0;
        for k in 1..=direct_end {
            if k == skip {
                continue;
            }
            let wk = self.w[k - 1];
            if wk == 0.0 {
                continue;
            }
            let d = (z - self.mu[k - 1]).norm();
            if d == 0.0 {
                return Err(RieszError::OnSpectrum { k });
            }
            sum += wk / d;
        }
        let mut err = 0.0;
        if let Some(i) = split {
            let mom = &self.moments[i];
            let t = a / self.mu[self.starts[i] - 1];
            let c = if a > 0.0 { z.re / a } else { 1.0 };
            let (mut p0, mut p1) = (1.0, c);
            let mut tl = 1.0;
            let mut far = mom[0];
            for (l, m) in mom.iter().enumerate().skip(1) {
                tl *= t;
                if tl == 0.0 {
                    break;
                }
                far += p1 * tl * m;
                let lf = l as f64;
                let p2 = ((2.0 * lf + 1.0) * c * p1 - lf * p0) / (lf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            sum += far;
            err = mom[0] * t.powi(ORDER as i32) / (1.0 - t);
        }
        Ok((sum, err))
    }

    /// Direct sum over `lo <= j <= hi` (clamped to the horizon).
    pub fn direct_range(&self, z: Complex64, exclude: Option<usize>, lo: usize, hi: usize) -> f64 {
        let hi = hi.min(self.w.len());
        (lo.max(1)..=hi)
            .filter(|&k| Some(k) != exclude)
            .map(|k| {
                let wk = self.w[k - 1];
                if wk == 0.0 {
                    0.0
                } else {
                    wk / (z - self.mu[k - 1]).norm()
                }
            })
            .sum()
    }

    /// Upper bound for `sum_{j > J} omega_j^2 / |z - mu_j|`.
    pub fn tail_remainder(&self, z: Complex64) -> f64 {
        match self.tail {
            Tail::Zero => 0.0,
            Tail::Divergent { .. } => f64::INFINITY,
            Tail::Summable {
                c2,
                s,
                b,
                m,
                mu_next,
                j,
            } => {
                // |z - mu_t| >= mu_t - max(Re z, 0) >= kappa mu_t for t > J
                let kappa = 1.0 - z.re.max(0.0) / mu_next;
                if kappa <= 0.0 || m <= 0.0 {
                    return f64::INFINITY;
                }
                c2 * log_power_tail_integral(j, s, b) / (kappa * m)
            }
        }
    }
}
