//! Orthonormal special-function families evaluated by three-term recurrences.
//!
//! All families carry an explicit exponent so that values far in the
//! classically forbidden region underflow gracefully instead of producing
//! `0 * inf` artifacts midway through the recurrence.

use num_complex::Complex64;
use std::f64::consts::PI;

const RESCALE_ABOVE: f64 = 1e150;
const RESCALE_FACTOR_LN: f64 = 345.387_763_949_107; // ln(1e150)

/// `w^s` on the principal branch `-pi < arg w <= pi`.
///
/// `atan2` returns `-pi` for a negative real part with a negative-zero
/// imaginary part; that value is folded onto `+pi` so the cut is approached
/// from above, matching `(-1)^(-1/2) = -i`.
pub fn principal_pow(w: Complex64, s: f64) -> Complex64 {
    let r = w.norm();
    if r == 0.0 {
        return if s > 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(f64::INFINITY, 0.0)
        };
    }
    let mut arg = w.im.atan2(w.re);
    if arg <= -PI {
        arg = PI;
    }
    Complex64::from_polar(r.powf(s), s * arg)
}

/// Hermite functions `h_0(x), ..., h_{count-1}(x)`, orthonormal in `L^2(R)`.
pub fn hermite_functions(count: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; count];
    if count == 0 {
        return out;
    }
    // h_n = m_n * exp(scale)
    let mut scale = -0.5 * x * x;
    let mut prev = 0.0_f64;
    let mut cur = PI.powf(-0.25);
    out[0] = cur * scale.exp();
    for n in 0..count - 1 {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE {
            cur /= RESCALE_ABOVE;
            prev /= RESCALE_ABOVE;
            scale += RESCALE_FACTOR_LN;
        }
        out[n + 1] = cur * scale.exp();
    }
    out
}

/// Single Hermite function `h_n(x)`.
pub fn hermite_function(n: usize, x: f64) -> f64 {
    hermite_functions(n + 1, x)[n]
}

/// Fully normalized associated Legendre functions `Pbar_l^m(x)` for
/// `l = m..=lmax` (entry `l - m`), with the Condon–Shortley phase, such that
/// `Y_l^m = Pbar_l^m(cos theta) e^{i m phi}` is a unit vector in `L^2(S^2)`.
pub fn assoc_legendre_column(m: usize, lmax: usize, x: f64) -> Vec<f64> {
    if lmax < m {
        return Vec::new();
    }
    let mut out = vec![0.0; lmax - m + 1];
    let sin2 = (1.0 - x * x).max(0.0);
    // log |Pbar_m^m| = 0.5 ln(1/4pi) + sum_{i=1}^m 0.5 ln((2i+1)/(2i)) + (m/2) ln(1-x^2)
    let mut log_mm = 0.5 * (1.0 / (4.0 * PI)).ln();
    for i in 1..=m {
        let fi = i as f64;
        log_mm += 0.5 * ((2.0 * fi + 1.0) / (2.0 * fi)).ln();
    }
    let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
    if m > 0 && sin2 == 0.0 {
        return out;
    }
    let mut scale = log_mm + if m > 0 { 0.5 * m as f64 * sin2.ln() } else { 0.0 };
    let mut prev = 0.0_f64;
    let mut cur = sign;
    out[0] = cur * scale.exp();
    let mf = m as f64;
    for l in (m + 1)..=lmax {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = if l >= m + 2 {
            let l1 = lf - 1.0;
            ((l1 * l1 - mf * mf) / (4.0 * l1 * l1 - 1.0)).sqrt()
        } else {
            0.0
        };
        let next = a * (x * cur - b * prev);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE {
            cur /= RESCALE_ABOVE;
            prev /= RESCALE_ABOVE;
            scale += RESCALE_FACTOR_LN;
        }
        out[l - m] = cur * scale.exp();
    }
    out
}

/// `Pbar_l^m(x)` for signed `m`, using `Y_l^{-m} = (-1)^m conj(Y_l^m)`.
pub fn assoc_legendre(l: usize, m: i64, x: f64) -> f64 {
    let am = m.unsigned_abs() as usize;
    if am > l {
        return 0.0;
    }
    let v = assoc_legendre_column(am, l, x)[l - am];
    if m < 0 && am % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Spherical harmonic `Y_l^m(theta, phi)` (colatitude `theta`).
pub fn spherical_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> Complex64 {
    let p = assoc_legendre(l, m, theta.cos());
    Complex64::from_polar(1.0, m as f64 * phi) * p
}

/// Ordinary Legendre polynomials `P_0(x), ..., P_{count-1}(x)`.
pub fn legendre_polynomials(count: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; count];
    if count == 0 {
        return out;
    }
    out[0] = 1.0;
    if count > 1 {
        out[1] = x;
    }
    for l in 1..count.saturating_sub(1) {
        let lf = l as f64;
        out[l + 1] = ((2.0 * lf + 1.0) * x * out[l] - lf * out[l - 1]) / (lf + 1.0);
    }
    out
}

/// Normalized generalized Laguerre functions
/// `phi_n^a(s) = sqrt(n!/(n+a)!) s^{a/2} L_n^a(s) e^{-s/2}`, `n < count`,
/// orthonormal in `L^2((0, inf), ds)`.
pub fn laguerre_functions(a: usize, count: usize, s: f64) -> Vec<f64> {
    let mut out = vec![0.0; count];
    if count == 0 {
        return out;
    }
    let af = a as f64;
    if s == 0.0 {
        if a > 0 {
            return out;
        }
        // phi_n^0(0) = L_n(0) = 1
        out.iter_mut().for_each(|v| *v = 1.0);
        return out;
    }
    let mut scale = -0.5 * ln_factorial(a) + 0.5 * af * s.ln() - 0.5 * s;
    let mut prev = 0.0_f64;
    let mut cur = 1.0_f64;
    out[0] = scale.exp();
    for n in 0..count - 1 {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 + af - s) * cur - (nf * (nf + af)).sqrt() * prev)
            / ((nf + 1.0) * (nf + 1.0 + af)).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE {
            cur /= RESCALE_ABOVE;
            prev /= RESCALE_ABOVE;
            scale += RESCALE_FACTOR_LN;
        }
        out[n + 1] = cur * scale.exp();
    }
    out
}

/// `ln(n!)` summed directly for small `n`, Stirling series beyond.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 64 {
        (2..=n).map(|i| (i as f64).ln()).sum()
    } else {
        statrs::function::gamma::ln_gamma(n as f64 + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn principal_branch_on_negative_axis() {
        let v = principal_pow(Complex64::new(-1.0, 0.0), -0.5);
        assert!((v - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        let v = principal_pow(Complex64::new(-1.0, -0.0), -0.5);
        assert!((v - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn hermite_low_orders_closed_form() {
        let x = 0.7_f64;
        let h = hermite_functions(3, x);
        let g = PI.powf(-0.25) * (-0.5 * x * x).exp();
        assert!((h[0] - g).abs() < 1e-15);
        assert!((h[1] - 2.0_f64.sqrt() * x * g).abs() < 1e-15);
        assert!((h[2] - (2.0 * x * x - 1.0) / 2.0_f64.sqrt() * g).abs() < 1e-15);
    }

    #[test]
    fn hermite_far_tail_does_not_overflow() {
        let h = hermite_functions(400, 45.0);
        assert!(h.iter().all(|v| v.is_finite()));
        // beyond the turning point sqrt(2n+1) ~ 28 the functions are tiny
        assert!(h[399].abs() < 1e-30);
    }

    #[test]
    fn legendre_sectoral_closed_forms() {
        let x = 0.3_f64;
        let s = (1.0 - x * x).sqrt();
        let c = assoc_legendre_column(1, 2, x);
        // Y_1^1 = -sqrt(3/8pi) sin(theta) e^{i phi}
        assert!((c[0] + (3.0 / (8.0 * PI)).sqrt() * s).abs() < 1e-15);
        // Y_2^1 = -sqrt(15/8pi) sin cos e^{i phi}
        assert!((c[1] + (15.0 / (8.0 * PI)).sqrt() * s * x).abs() < 1e-14);
        let z = assoc_legendre_column(0, 2, x);
        assert!((z[2] - (5.0 / (16.0 * PI)).sqrt() * (3.0 * x * x - 1.0)).abs() < 1e-14);
        assert!((assoc_legendre(2, -1, x) - (15.0 / (8.0 * PI)).sqrt() * s * x).abs() < 1e-14);
    }

    #[test]
    fn laguerre_low_orders_closed_form() {
        let s = 1.3_f64;
        let f = laguerre_functions(2, 2, s);
        let e = (-0.5 * s).exp();
        assert!((f[0] - (0.5_f64).sqrt() * s * e).abs() < 1e-15);
        // L_1^2 = 3 - s, normalization sqrt(1/3!)
        assert!((f[1] - (1.0 / 6.0_f64).sqrt() * s * (3.0 - s) * e).abs() < 1e-15);
    }
}
