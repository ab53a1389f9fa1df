use super::{LabError, LevelInfo, QuadratureInfo, TruncatedOperator};
use crate::linalg::{self, CMat};
use crate::model_catalog::{self, ModelId, Multiplicity};
use crate::quadrature::{gauss_hermite_scaled, gauss_laguerre_scaled, gauss_legendre, Rule};
use crate::special::{assoc_legendre_column, hermite_functions, laguerre_functions, legendre_polynomials};
use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const RESOLUTION_TOL: f64 = 1e-8;
/// Floor on nodes per axis; non-polynomial potentials are only integrated
/// approximately and small truncations would otherwise leak across sectors.
const MIN_NODES: usize = 128;

/// Potentials supported by the assemblers. Amplitudes are `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PotentialSpec {
    Zero,
    Constant {
        amplitude: [f64; 2],
    },
    /// `a exp(-|x - c|^2 / width^2)` on `R^d`.
    Gaussian {
        amplitude: [f64; 2],
        width: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// `a P_degree(cos theta)` on `S^2`.
    ZonalLegendre { amplitude: [f64; 2], degree: usize },
    /// `a exp(kappa (cos angle(x, axis) - 1))` on `S^2`; axis `[theta, phi]`, default north pole.
    Cap {
        amplitude: [f64; 2],
        kappa: f64,
        #[serde(default)]
        axis: Option<[f64; 2]>,
    },
    /// `W delta_Sigma` with constant `W` on the equator of `S^2`.
    DeltaEquator { amplitude: [f64; 2] },
}

impl PotentialSpec {
    pub fn amplitude(&self) -> Complex64 {
        match self {
            PotentialSpec::Zero => Complex64::new(0.0, 0.0),
            PotentialSpec::Constant { amplitude }
            | PotentialSpec::Gaussian { amplitude, .. }
            | PotentialSpec::ZonalLegendre { amplitude, .. }
            | PotentialSpec::Cap { amplitude, .. }
            | PotentialSpec::DeltaEquator { amplitude } => Complex64::new(amplitude[0], amplitude[1]),
        }
    }

    /// Same shape, amplitude multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut p = self.clone();
        match &mut p {
            PotentialSpec::Zero => {}
            PotentialSpec::Constant { amplitude }
            | PotentialSpec::Gaussian { amplitude, .. }
            | PotentialSpec::ZonalLegendre { amplitude, .. }
            | PotentialSpec::Cap { amplitude, .. }
            | PotentialSpec::DeltaEquator { amplitude } => {
                amplitude[0] *= s;
                amplitude[1] *= s;
            }
        }
        p
    }

    fn euclidean(&self, x: &[f64]) -> Complex64 {
        match self {
            PotentialSpec::Zero => Complex64::new(0.0, 0.0),
            PotentialSpec::Constant { .. } => self.amplitude(),
            PotentialSpec::Gaussian { width, center, .. } => {
                let r2: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(i, xi)| {
                        let c = center.as_ref().and_then(|c| c.get(i)).copied().unwrap_or(0.0);
                        (xi - c) * (xi - c)
                    })
                    .sum();
                self.amplitude() * (-r2 / (width * width)).exp()
            }
            _ => Complex64::new(f64::NAN, 0.0),
        }
    }

    fn spherical(&self, theta: f64, phi: f64) -> Complex64 {
        match self {
            PotentialSpec::Zero => Complex64::new(0.0, 0.0),
            PotentialSpec::Constant { .. } => self.amplitude(),
            PotentialSpec::ZonalLegendre { degree, .. } => {
                self.amplitude() * legendre_polynomials(degree + 1, theta.cos())[*degree]
            }
            PotentialSpec::Cap { kappa, axis, .. } => {
                let [t0, p0] = axis.unwrap_or([0.0, 0.0]);
                let c = theta.cos() * t0.cos() + theta.sin() * t0.sin() * (phi - p0).cos();
                self.amplitude() * (kappa * (c - 1.0)).exp()
            }
            _ => Complex64::new(f64::NAN, 0.0),
        }
    }

    fn is_radial(&self) -> bool {
        match self {
            PotentialSpec::Zero | PotentialSpec::Constant { .. } => true,
            PotentialSpec::Gaussian { center, .. } => {
                center.as_ref().is_none_or(|c| c.iter().all(|&v| v == 0.0))
            }
            _ => false,
        }
    }

    fn validate(&self) -> Result<(), LabError> {
        let bad = |r: &str| {
            Err(LabError::UnsupportedPotential {
                reason: r.to_string(),
            })
        };
        let a = self.amplitude();
        if !(a.re.is_finite() && a.im.is_finite()) {
            return bad("amplitude must be finite");
        }
        match self {
            PotentialSpec::Gaussian { width, .. } if !(*width > 0.0 && width.is_finite()) => {
                bad("gaussian width must be positive")
            }
            PotentialSpec::Cap { kappa, .. } if !(*kappa >= 0.0 && kappa.is_finite()) => {
                bad("cap concentration must be non-negative")
            }
            _ => Ok(()),
        }
    }
}

/// Truncation and quadrature parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Truncation {
    /// Number of retained levels `N`.
    pub levels: usize,
    /// Angular sectors kept per Landau level (`m = 0, -1, ..., -(M-1)`).
    pub landau_sectors: usize,
    /// Extra quadrature nodes beyond the polynomial-exactness minimum.
    pub quad_margin: usize,
    pub shift: Option<f64>,
    /// Rotate each oscillator level into angular-momentum eigenvectors.
    pub angular_adapt: bool,
    /// Entries below this fraction of `max |V_ij|` are treated as zero.
    pub prune_tol: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            levels: 20,
            landau_sectors: 12,
            quad_margin: 16,
            shift: None,
            angular_adapt: true,
            prune_tol: 1e-13,
        }
    }
}

fn level_infos(model: ModelId, trunc: &Truncation) -> Result<Vec<LevelInfo>, LabError> {
    let spec = model_catalog::spectrum(model, trunc.levels, trunc.shift)?;
    let mut off = 0;
    spec.into_iter()
        .map(|l| {
            let mult = match l.multiplicity {
                Multiplicity::Finite(m) => usize::try_from(m).map_err(|_| LabError::InvalidArgument {
                    reason: format!("level {} too degenerate to assemble", l.k),
                })?,
                Multiplicity::Infinite => trunc.landau_sectors,
            };
            let info = LevelInfo {
                k: l.k,
                mu: l.mu,
                offset: off,
                mult,
            };
            off += mult;
            Ok(info)
        })
        .collect()
}

fn underflow(detail: String) -> LabError {
    LabError::QuadratureUnderflow {
        row: 0,
        col: 0,
        detail,
    }
}

/// Whether [`perturbation_matrix`] can assemble `potential` for `model`.
pub fn check_supported(model: ModelId, potential: &PotentialSpec) -> Result<(), LabError> {
    model.validate()?;
    potential.validate()?;
    let unsupported = |r: &str| {
        Err(LabError::UnsupportedPotential {
            reason: format!("{r} for {}", model.name()),
        })
    };
    let model_err = |r: &str| Err(LabError::UnsupportedModel { reason: r.into() });
    match (model, potential) {
        (ModelId::HarmonicOscillator { d }, _) if d > 2 => {
            model_err(&format!("oscillator assembly is implemented for d <= 2, got d = {d}"))
        }
        (ModelId::Landau { d }, _) if d != 2 => model_err("Landau assembly is implemented for d = 2"),
        (ModelId::Sphere { d }, _) | (ModelId::SphereDeltaCircle { d }, _) if d != 2 => {
            model_err("sphere assembly is implemented for d = 2")
        }
        (_, PotentialSpec::Zero)
        | (ModelId::HarmonicOscillator { .. }, PotentialSpec::Constant { .. } | PotentialSpec::Gaussian { .. })
        | (ModelId::Sphere { .. }, PotentialSpec::Constant { .. } | PotentialSpec::ZonalLegendre { .. } | PotentialSpec::Cap { .. })
        | (ModelId::SphereDeltaCircle { .. }, PotentialSpec::DeltaEquator { .. }) => Ok(()),
        (ModelId::Landau { .. }, PotentialSpec::Constant { .. } | PotentialSpec::Gaussian { .. }) => {
            if potential.is_radial() {
                Ok(())
            } else {
                unsupported("only radial potentials are supported")
            }
        }
        _ => unsupported("potential type not applicable"),
    }
}

/// Assemble `V_ij = <V phi_j, phi_i>` in the eigenbasis of the model operator.
pub fn perturbation_matrix(
    model: ModelId,
    potential: &PotentialSpec,
    trunc: &Truncation,
) -> Result<TruncatedOperator, LabError> {
    if trunc.levels < 2 {
        return Err(LabError::InvalidArgument {
            reason: "at least two levels are required".into(),
        });
    }
    check_supported(model, potential)?;
    let levels = level_infos(model, trunc)?;
    let dim: usize = levels.iter().map(|l| l.mult).sum();
    let (v, labels, quad) = match (model, potential) {
        (_, PotentialSpec::Zero) => (
            Mat::zeros(dim, dim),
            vec![0; dim],
            QuadratureInfo {
                rule: "none".into(),
                nodes: vec![],
                pruned_norm: 0.0,
            },
        ),
        (ModelId::HarmonicOscillator { d: 1 }, _) => oscillator_1d(potential, trunc)?,
        (ModelId::HarmonicOscillator { .. }, _) => oscillator_2d(potential, trunc, &levels)?,
        (ModelId::Landau { .. }, _) => landau_2d(potential, trunc)?,
        (ModelId::Sphere { .. }, _) => sphere_2d(potential, trunc)?,
        (ModelId::SphereDeltaCircle { .. }, _) => delta_equator(potential, trunc),
    };
    let mut level_of = Vec::with_capacity(dim);
    for l in &levels {
        level_of.extend(std::iter::repeat_n(l.k, l.mult));
    }
    let mut op = TruncatedOperator {
        model: Some(model),
        potential: Some(potential.clone()),
        levels,
        level_of,
        labels,
        v,
        blocks: Vec::new(),
        quadrature: quad,
    };
    op.split_blocks(trunc.prune_tol);
    Ok(op)
}

fn hermite_table(rule: &Rule, count: usize) -> Mat<f64> {
    let g = rule.nodes.len();
    let mut h = Mat::zeros(g, count);
    for (q, &x) in rule.nodes.iter().enumerate() {
        for (n, v) in hermite_functions(count, x).into_iter().enumerate() {
            h[(q, n)] = v;
        }
    }
    h
}

/// Compare the one-dimensional Gaussian moment against its closed form.
fn check_gaussian_resolution(rule: &Rule, width: f64, center: f64) -> Result<(), LabError> {
    let w2 = width * width;
    let exact = (w2 / (w2 + 1.0)).sqrt() * (-center * center / (w2 + 1.0)).exp();
    let h0 = PI.powf(-0.25);
    let approx: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| w * (-(x - center).powi(2) / w2).exp() * (h0 * (-0.5 * x * x).exp()).powi(2))
        .sum();
    if (approx - exact).abs() > RESOLUTION_TOL * exact.max(1e-300) {
        return Err(underflow(format!(
            "gaussian of width {width} not resolved by {} Gauss-Hermite nodes (moment {approx:.3e} vs {exact:.3e})",
            rule.nodes.len()
        )));
    }
    Ok(())
}

fn gaussian_checks(potential: &PotentialSpec, rule: &Rule, dims: usize) -> Result<(), LabError> {
    if let PotentialSpec::Gaussian { width, center, .. } = potential {
        for i in 0..dims {
            let c = center.as_ref().and_then(|c| c.get(i)).copied().unwrap_or(0.0);
            check_gaussian_resolution(rule, *width, c)?;
        }
    }
    Ok(())
}

fn oscillator_1d(
    potential: &PotentialSpec,
    trunc: &Truncation,
) -> Result<(CMat, Vec<i64>, QuadratureInfo), LabError> {
    let n = trunc.levels;
    let g = (2 * n + trunc.quad_margin).max(MIN_NODES);
    let rule = gauss_hermite_scaled(g)?;
    gaussian_checks(potential, &rule, 1)?;
    let h = hermite_table(&rule, n);
    let wv: Vec<Complex64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| potential.euclidean(&[x]) * w)
        .collect();
    let v = Mat::from_fn(n, n, |i, j| {
        (0..g).map(|q| wv[q] * (h[(q, i)] * h[(q, j)])).sum()
    });
    Ok((
        v,
        vec![0; n],
        QuadratureInfo {
            rule: "gauss_hermite".into(),
            nodes: vec![g],
            pruned_norm: 0.0,
        },
    ))
}

/// Two-dimensional oscillator; level `k` holds `h_a(x) h_b(y)`, `a + b = k - 1`,
/// ordered by `a`. The tensor quadrature is contracted one axis at a time.
fn oscillator_2d(
    potential: &PotentialSpec,
    trunc: &Truncation,
    levels: &[LevelInfo],
) -> Result<(CMat, Vec<i64>, QuadratureInfo), LabError> {
    let n = trunc.levels;
    let g = (2 * n + trunc.quad_margin).max(MIN_NODES);
    let rule = gauss_hermite_scaled(g)?;
    gaussian_checks(potential, &rule, 2)?;
    let h = hermite_table(&rule, n);
    let dim: usize = levels.iter().map(|l| l.mult).sum();
    let flat = |a: usize, b: usize| {
        let k = a + b + 1;
        k * (k - 1) / 2 + a
    };

    // stage 1: f[a][(c, q2)] = sum_q1 w_q1 V(x_q1, x_q2) h_a(x_q1) h_c(x_q1)
    let mut f_re: Vec<Mat<f64>> = (0..n).map(|_| Mat::zeros(n, g)).collect();
    let mut f_im: Vec<Mat<f64>> = (0..n).map(|_| Mat::zeros(n, g)).collect();
    for q2 in 0..g {
        let y = rule.nodes[q2];
        let mut wr = Mat::zeros(g, n);
        let mut wi = Mat::zeros(g, n);
        for q1 in 0..g {
            let val = potential.euclidean(&[rule.nodes[q1], y]) * rule.weights[q1];
            for c in 0..n {
                wr[(q1, c)] = val.re * h[(q1, c)];
                wi[(q1, c)] = val.im * h[(q1, c)];
            }
        }
        let pr = h.transpose() * &wr;
        let pi = h.transpose() * &wi;
        for a in 0..n {
            for c in 0..n {
                f_re[a][(c, q2)] = pr[(a, c)];
                f_im[a][(c, q2)] = pi[(a, c)];
            }
        }
    }

    // stage 2: V[(a,b),(c,e)] = sum_q2 f[a][(c,q2)] w_q2 h_b(x_q2) h_e(x_q2)
    let mut v = Mat::<Complex64>::zeros(dim, dim);
    for a in 0..n {
        let nb = n - a;
        let hp = Mat::from_fn(g, nb * n, |q, col| {
            let (b, e) = (col / n, col % n);
            rule.weights[q] * h[(q, b)] * h[(q, e)]
        });
        let pr = &f_re[a] * &hp;
        let pi = &f_im[a] * &hp;
        for b in 0..nb {
            let row = flat(a, b);
            for c in 0..n {
                for e in 0..(n - c) {
                    let col = b * n + e;
                    v[(row, flat(c, e))] = Complex64::new(pr[(c, col)], pi[(c, col)]);
                }
            }
        }
    }

    let mut labels = vec![0i64; dim];
    if trunc.angular_adapt {
        rotate_to_angular_momentum(&mut v, levels, &mut labels)?;
    } else {
        for a in 0..n {
            for b in 0..(n - a) {
                labels[flat(a, b)] = a as i64 - b as i64;
            }
        }
    }
    Ok((
        v,
        labels,
        QuadratureInfo {
            rule: "gauss_hermite_tensor".into(),
            nodes: vec![g, g],
            pruned_norm: 0.0,
        },
    ))
}

/// Within level `k` (states `|a, k-1-a>`), `L_z = i(a_x a_y^+ - a_x^+ a_y)`
/// is tridiagonal; its eigenvectors diagonalize every rotation-invariant `V`
/// into angular-momentum sectors.
fn rotate_to_angular_momentum(
    v: &mut CMat,
    levels: &[LevelInfo],
    labels: &mut [i64],
) -> Result<(), LabError> {
    let mut us = Vec::with_capacity(levels.len());
    for l in levels {
        let k = l.mult;
        let lz = Mat::from_fn(k, k, |r, c| {
            let b_of = |a: usize| (k - 1 - a) as f64;
            if r + 1 == c {
                // <a-1, b+1 | L | a, b> with a = c
                let a = c as f64;
                Complex64::new(0.0, (a * (b_of(c) + 1.0)).sqrt())
            } else if c + 1 == r {
                let a = c as f64;
                Complex64::new(0.0, -((a + 1.0) * b_of(c)).sqrt())
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let (vals, u) = linalg::hermitian_eigen(lz.as_ref())?;
        for (i, m) in vals.iter().enumerate() {
            labels[l.offset + i] = m.round() as i64;
        }
        us.push(u);
    }
    let src = v.clone();
    for (ki, lk) in levels.iter().enumerate() {
        for (li, ll) in levels.iter().enumerate() {
            let sub = src
                .as_ref()
                .submatrix(lk.offset, ll.offset, lk.mult, ll.mult)
                .to_owned();
            let rot = us[ki].adjoint() * &sub * &us[li];
            v.as_mut()
                .submatrix_mut(lk.offset, ll.offset, lk.mult, ll.mult)
                .copy_from(&rot);
        }
    }
    Ok(())
}

/// Landau Hamiltonian on `R^2` (unit field), symmetric gauge. Level `k`
/// keeps sectors `m = 0, -1, ..., -(M-1)` with radial part
/// `phi_{k-1}^{|m|}(r^2/2) / sqrt(2 pi)`; radial potentials couple only
/// equal sectors.
fn landau_2d(
    potential: &PotentialSpec,
    trunc: &Truncation,
) -> Result<(CMat, Vec<i64>, QuadratureInfo), LabError> {
    let k = trunc.levels;
    let m = trunc.landau_sectors;
    if m == 0 {
        return Err(LabError::InvalidArgument {
            reason: "landau_sectors must be positive".into(),
        });
    }
    let g = (k + m + trunc.quad_margin).max(MIN_NODES);
    let rule = gauss_laguerre_scaled(g)?;
    let vals: Vec<Complex64> = rule
        .nodes
        .iter()
        .map(|&s| potential.euclidean(&[(2.0 * s).sqrt(), 0.0]))
        .collect();
    if let PotentialSpec::Gaussian { width, .. } = potential {
        // int_0^inf e^{-2s/w^2} e^{-s} ds = 1/(1 + 2/w^2)
        let exact = 1.0 / (1.0 + 2.0 / (width * width));
        let approx: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&s, &w)| w * (-2.0 * s / (width * width)).exp() * (-s).exp())
            .sum();
        if (approx - exact).abs() > RESOLUTION_TOL * exact {
            return Err(underflow(format!(
                "gaussian of width {width} not resolved by {g} Gauss-Laguerre nodes"
            )));
        }
    }
    let dim = k * m;
    let mut v = Mat::<Complex64>::zeros(dim, dim);
    let mut labels = vec![0i64; dim];
    for a in 0..m {
        let phi: Vec<Vec<f64>> = rule.nodes.iter().map(|&s| laguerre_functions(a, k, s)).collect();
        for n1 in 0..k {
            labels[n1 * m + a] = -(a as i64);
            for n2 in 0..k {
                let s: Complex64 = (0..g)
                    .map(|q| vals[q] * (rule.weights[q] * phi[q][n1] * phi[q][n2]))
                    .sum();
                v[(n1 * m + a, n2 * m + a)] = s;
            }
        }
    }
    Ok((
        v,
        labels,
        QuadratureInfo {
            rule: "gauss_laguerre_radial".into(),
            nodes: vec![g],
            pruned_norm: 0.0,
        },
    ))
}

/// `Pbar_l^m(x_q)` for all `|m| <= lmax`, `|m| <= l <= lmax`; indexed `[m + lmax][q][l]`.
fn legendre_tables(nodes: &[f64], lmax: usize) -> Vec<Vec<Vec<f64>>> {
    let mut out = vec![vec![vec![0.0; lmax + 1]; nodes.len()]; 2 * lmax + 1];
    for mabs in 0..=lmax {
        let sign = if mabs % 2 == 1 { -1.0 } else { 1.0 };
        for (q, &x) in nodes.iter().enumerate() {
            let col = assoc_legendre_column(mabs, lmax, x);
            for l in mabs..=lmax {
                out[lmax + mabs][q][l] = col[l - mabs];
                out[lmax - mabs][q][l] = sign * col[l - mabs];
            }
        }
    }
    out
}

fn sphere_flat(l: usize, m: i64) -> usize {
    l * l + (m + l as i64) as usize
}

/// `S^2` with `Y_l^m`, level `k = l + 1`; Gauss–Legendre in `cos theta`,
/// trapezoid in `phi`.
fn sphere_2d(
    potential: &PotentialSpec,
    trunc: &Truncation,
) -> Result<(CMat, Vec<i64>, QuadratureInfo), LabError> {
    let n = trunc.levels;
    let lmax = n - 1;
    let extra = match potential {
        PotentialSpec::ZonalLegendre { degree, .. } => degree.div_ceil(2),
        _ => 0,
    };
    let nt = (n + trunc.quad_margin / 2 + extra).max(MIN_NODES / 2);
    let np = (2 * n + trunc.quad_margin / 2 + 1 + 2 * extra).max(MIN_NODES + 1);
    let gl = gauss_legendre(nt);
    let thetas: Vec<f64> = gl.nodes.iter().map(|x| x.acos()).collect();
    let phis: Vec<f64> = (0..np).map(|j| 2.0 * PI * j as f64 / np as f64).collect();
    let samples: Vec<Vec<Complex64>> = thetas
        .iter()
        .map(|&t| phis.iter().map(|&p| potential.spherical(t, p)).collect())
        .collect();

    if let PotentialSpec::Cap { kappa, .. } = potential {
        let exact = if *kappa == 0.0 {
            4.0 * PI
        } else {
            2.0 * PI * (-(-2.0 * kappa).exp_m1()) / kappa
        };
        let amp = potential.amplitude();
        let approx: Complex64 = samples
            .iter()
            .zip(&gl.weights)
            .map(|(row, w)| row.iter().sum::<Complex64>() * (w * 2.0 * PI / np as f64))
            .sum();
        if (approx - amp * exact).norm() > RESOLUTION_TOL * (amp.norm() * exact) {
            return Err(underflow(format!(
                "cap with kappa = {kappa} not resolved by {nt} x {np} nodes"
            )));
        }
    }

    // vhat[q][delta + 2 lmax] = (2 pi / np) sum_j V(theta_q, phi_j) e^{i delta phi_j}
    let nd = 4 * lmax + 1;
    let mut vhat = vec![vec![Complex64::new(0.0, 0.0); nd]; nt];
    for q in 0..nt {
        for (di, slot) in vhat[q].iter_mut().enumerate() {
            let delta = di as f64 - 2.0 * lmax as f64;
            *slot = samples[q]
                .iter()
                .zip(&phis)
                .map(|(v, &p)| v * Complex64::from_polar(1.0, delta * p))
                .sum::<Complex64>()
                * (2.0 * PI / np as f64);
        }
    }
    let vmax = vhat.iter().map(|r| r[2 * lmax].norm()).fold(0.0, f64::max);
    let active: Vec<bool> = (0..nd)
        .map(|di| vhat.iter().any(|r| r[di].norm() > 1e-14 * vmax.max(1e-300)))
        .collect();
    let ptab = legendre_tables(&gl.nodes, lmax);
    let dim = n * n;
    let mut v = Mat::<Complex64>::zeros(dim, dim);
    let li = lmax as i64;
    for m in -li..=li {
        for m2 in -li..=li {
            let di = (m2 - m + 2 * li) as usize;
            if !active[di] {
                continue;
            }
            let g: Vec<Complex64> = (0..nt).map(|q| vhat[q][di] * gl.weights[q]).collect();
            let pa = &ptab[(m + li) as usize];
            let pb = &ptab[(m2 + li) as usize];
            for l in m.unsigned_abs() as usize..=lmax {
                for l2 in m2.unsigned_abs() as usize..=lmax {
                    let s: Complex64 = (0..nt).map(|q| g[q] * (pa[q][l] * pb[q][l2])).sum();
                    v[(sphere_flat(l, m), sphere_flat(l2, m2))] = s;
                }
            }
        }
    }
    let labels = (0..n)
        .flat_map(|l| (-(l as i64)..=l as i64).collect::<Vec<_>>())
        .collect();
    Ok((
        v,
        labels,
        QuadratureInfo {
            rule: "gauss_legendre_x_trapezoid".into(),
            nodes: vec![nt, np],
            pruned_norm: 0.0,
        },
    ))
}

/// `<W delta_equator Y_l'^m', Y_l^m> = 2 pi W delta_{m m'} Pbar_l^m(0) Pbar_l'^m(0)`.
fn delta_equator(potential: &PotentialSpec, trunc: &Truncation) -> (CMat, Vec<i64>, QuadratureInfo) {
    let n = trunc.levels;
    let lmax = n - 1;
    let w = potential.amplitude() * (2.0 * PI);
    let ptab = legendre_tables(&[0.0], lmax);
    let dim = n * n;
    let mut v = Mat::<Complex64>::zeros(dim, dim);
    let li = lmax as i64;
    for m in -li..=li {
        let p = &ptab[(m + li) as usize][0];
        for l in m.unsigned_abs() as usize..=lmax {
            for l2 in m.unsigned_abs() as usize..=lmax {
                v[(sphere_flat(l, m), sphere_flat(l2, m))] = w * (p[l] * p[l2]);
            }
        }
    }
    let labels = (0..n)
        .flat_map(|l| (-(l as i64)..=l as i64).collect::<Vec<_>>())
        .collect();
    (
        v,
        labels,
        QuadratureInfo {
            rule: "equator_closed_form".into(),
            nodes: vec![],
            pruned_norm: 0.0,
        },
    )
}
