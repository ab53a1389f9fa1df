//! Gauss rules and an adaptive Gauss–Kronrod integrator.
//!
//! Hermite and Laguerre rules return *scaled* weights `w_i e^{x_i^2}` and
//! `w_i e^{s_i}`; the recurrence-built basis functions already carry the
//! Gaussian factor, so raw weights (which underflow for a few hundred nodes)
//! are never needed.

use crate::linalg;
use crate::special::{hermite_functions, laguerre_functions, legendre_polynomials};
use faer::Mat;

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("Jacobi eigenproblem failed for {n}-point rule")]
    RuleConstruction { n: usize },
    #[error("adaptive integration on [{a}, {b}] did not reach tolerance (estimate {estimate:.3e})")]
    NotConverged { a: f64, b: f64, estimate: f64 },
    #[error("integrand is not finite on [{a}, {b}]")]
    NonFinite { a: f64, b: f64 },
}

fn jacobi_nodes(diag: &[f64], off: &[f64]) -> Result<Vec<f64>, QuadratureError> {
    let n = diag.len();
    let j = Mat::from_fn(n, n, |r, c| {
        if r == c {
            diag[r]
        } else if r + 1 == c {
            off[r]
        } else if c + 1 == r {
            off[c]
        } else {
            0.0
        }
    });
    linalg::symmetric_eigenvalues(j.as_ref()).map_err(|_| QuadratureError::RuleConstruction { n })
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let p = legendre_polynomials(n + 1, x);
            let (pn, pn1) = (p[n], p[n - 1]);
            let dp = nf * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let p = legendre_polynomials(n + 1, x);
        let dp = nf * (x * p[n] - p[n - 1]) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

/// Gauss–Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Rule {
    let r = gauss_legendre(n);
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    Rule {
        nodes: r.nodes.iter().map(|x| m + h * x).collect(),
        weights: r.weights.iter().map(|w| h * w).collect(),
    }
}

/// `n`-point Gauss–Hermite rule for weight `e^{-x^2}`; weights are returned
/// multiplied by `e^{x_i^2}`, so `sum_i w_i h_a(x_i) h_b(x_i) = delta_ab` for
/// Hermite functions with `a + b < 2n`.
pub fn gauss_hermite_scaled(n: usize) -> Result<Rule, QuadratureError> {
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let mut nodes = jacobi_nodes(&diag, &off)?;
    let nf = n as f64;
    for x in nodes.iter_mut() {
        for _ in 0..4 {
            let h = hermite_functions(n + 1, *x);
            let d = (2.0 * nf).sqrt() * h[n - 1] - *x * h[n];
            if d == 0.0 {
                break;
            }
            *x -= h[n] / d;
        }
    }
    nodes.sort_by(f64::total_cmp);
    let weights = nodes
        .iter()
        .map(|&x| 1.0 / hermite_functions(n, x).iter().map(|v| v * v).sum::<f64>())
        .collect();
    Ok(Rule { nodes, weights })
}

/// `n`-point Gauss–Laguerre rule for weight `e^{-s}` on `(0, inf)`, weights
/// multiplied by `e^{s_i}`.
pub fn gauss_laguerre_scaled(n: usize) -> Result<Rule, QuadratureError> {
    let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + 1.0).collect();
    let off: Vec<f64> = (1..n).map(|k| k as f64).collect();
    let mut nodes = jacobi_nodes(&diag, &off)?;
    let nf = n as f64;
    for s in nodes.iter_mut() {
        for _ in 0..4 {
            let l = laguerre_functions(0, n + 1, *s);
            // s L_n' = n (L_n - L_{n-1}); the common e^{-s/2} cancels in the ratio
            let d = nf * (l[n] - l[n - 1]) / *s;
            if d == 0.0 {
                break;
            }
            *s -= l[n] / d;
        }
    }
    nodes.sort_by(f64::total_cmp);
    let weights = nodes
        .iter()
        .map(|&s| 1.0 / laguerre_functions(0, n, s).iter().map(|v| v * v).sum::<f64>())
        .collect();
    Ok(Rule { nodes, weights })
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod value, error estimate and the Kronrod integral of `|f|`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for i in 0..7 {
        let dx = h * XGK[i];
        let (f1, f2) = (f(c - dx), f(c + dx));
        k += WGK[i] * (f1 + f2);
        abs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    (k * h, ((k - g) * h).abs(), abs * h.abs())
}

/// Subdivision budget of [`integrate_adaptive`].
const MAX_INTERVALS: usize = 2000;

/// Globally adaptive Gauss–Kronrod (7/15) integration to absolute tolerance
/// `tol`: the interval with the largest error estimate is bisected until the
/// total estimate meets `tol` or the rounding level of the integrand. When the
/// budget runs out the result is still accepted if the estimate is below
/// `1e-10` of the integral of `|f|`, since the remainder is then evaluation noise.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, QuadratureError> {
    // (a, b, value, error, abs)
    let mut parts = Vec::new();
    let eval = |a: f64, b: f64| {
        let (v, e, s) = gk15(f, a, b);
        if v.is_finite() && e.is_finite() {
            Ok((a, b, v, e, s))
        } else {
            Err(QuadratureError::NonFinite { a, b })
        }
    };
    parts.push(eval(a, b)?);
    loop {
        let err: f64 = parts.iter().map(|p| p.3).sum();
        let abs: f64 = parts.iter().map(|p| p.4).sum();
        let value = || parts.iter().map(|p| p.2).sum::<f64>();
        if err <= tol.max(50.0 * f64::EPSILON * abs) {
            return Ok(value());
        }
        let (i, worst) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, p)| (i, *p))
            .expect("at least one interval");
        let width_floor = 1e-14 * (worst.0.abs() + worst.1.abs()).max(1.0);
        if parts.len() >= MAX_INTERVALS || (worst.1 - worst.0).abs() < width_floor {
            if err <= 1e-10 * abs {
                return Ok(value());
            }
            return Err(QuadratureError::NotConverged { a, b, estimate: err });
        }
        let m = 0.5 * (worst.0 + worst.1);
        parts[i] = eval(worst.0, m)?;
        parts.push(eval(m, worst.1)?);
    }
}

/// Sum of adaptive integrals over consecutive breakpoints.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: &F,
    breaks: &[f64],
    tol: f64,
) -> Result<f64, QuadratureError> {
    let panels = breaks.len().saturating_sub(1).max(1) as f64;
    breaks
        .windows(2)
        .map(|w| integrate_adaptive(f, w[0], w[1], tol / panels))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let r = gauss_legendre(10);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_rule_orthonormality() {
        let n = 40;
        let r = gauss_hermite_scaled(n).unwrap();
        let hs: Vec<Vec<f64>> = r.nodes.iter().map(|&x| hermite_functions(n, x)).collect();
        for a in [0, 5, 39] {
            for b in [0, 5, 39] {
                let s: f64 = hs.iter().zip(&r.weights).map(|(h, w)| w * h[a] * h[b]).sum();
                let e = if a == b { 1.0 } else { 0.0 };
                assert!((s - e).abs() < 1e-12, "{a} {b} {s}");
            }
        }
    }

    #[test]
    fn laguerre_rule_integrates_exponential_moments() {
        let r = gauss_laguerre_scaled(20).unwrap();
        // int_0^inf s^3 e^{-s} ds = 6
        let s: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| w * x.powi(3) * (-x).exp())
            .sum();
        assert!((s - 6.0).abs() < 1e-11);
    }

    #[test]
    fn adaptive_handles_kinks() {
        let v = integrate_adaptive(&|x: f64| x.abs().powf(2.5), -1.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0 / 3.5).abs() < 1e-11);
    }
}
