//! Localization of spectra and Riesz-basis diagnostics for non-self-adjoint
//! perturbations `T = A + V` of self-adjoint operators with discrete spectrum.
//!
//! * [`riesz_core`]: gap radii, the tail quantity `sigma_N`, resolvent-norm
//!   bounds and the spectral enclosure (box plus disks).
//! * [`model_catalog`]: exact exponent tables for the reference models
//!   (harmonic oscillator, Landau Hamiltonian, Laplace–Beltrami on spheres).
//! * [`operator_lab`]: finite-section matrices, resolvents, Riesz projections
//!   by contour quadrature and by eigendecomposition, and their verification.
//! * [`projection_norms`]: explicit eigenfunction witnesses for
//!   `L^2 -> L^p` projection-norm growth.

pub mod linalg;
pub mod model_catalog;
pub mod operator_lab;
pub mod projection_norms;
pub mod quadrature;
pub mod riesz_core;
pub mod special;

pub use num_complex::Complex64;
