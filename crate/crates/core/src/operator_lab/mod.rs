//! Finite sections `T_N = A_N + V_N` of the reference models, resolvents in
//! direct and factorized form, Riesz projections (contour quadrature and
//! eigendecomposition) and numerical checks of localization, Bari-type sums
//! and uniform boundedness of partial sums.

mod assembly;
mod blocks;
mod cutoff;
mod projections;
mod resolvent;
mod verify;

pub use assembly::{check_supported, perturbation_matrix, PotentialSpec, Truncation};
pub use blocks::BlockMatrix;
pub use cutoff::{build_enclosure_level_block, level_block_norms, level_omega, LevelBlockOptions};
pub use projections::{
    compute_projections, k_trust, Circle, ContourNodes, ProjectionMethod, ProjectionSet,
    DEFAULT_TRUST_FRACTION,
};
pub use resolvent::{b_matrix, k_factor, resolvent, ResolventMethod};
pub use verify::{
    bari_sum, completeness_defect, projection_diagnostics, random_unit_vectors,
    verify_localization, CompletenessPoint, EigenRecord, LevelCheck, LocalizationReport,
    ProjectionCheck, Violation,
};

use crate::linalg::{CMat, LinalgError};
use crate::model_catalog::{CatalogError, ModelId};
use crate::quadrature::QuadratureError;
use crate::riesz_core::RieszError;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Riesz(#[from] RieszError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("unsupported model for matrix assembly: {reason}")]
    UnsupportedModel { reason: String },
    #[error("unsupported potential: {reason}")]
    UnsupportedPotential { reason: String },
    #[error("quadrature cannot resolve the potential at entry ({row}, {col}): {detail}")]
    QuadratureUnderflow {
        row: usize,
        col: usize,
        detail: String,
    },
    #[error("z = {z} is numerically in the spectrum of the truncated operator")]
    SingularShift { z: Complex64 },
    #[error("I - B(z) is singular at z = {z}")]
    FactorizationInvalid { z: Complex64 },
    #[error("contour of level {k} passes through an eigenvalue near z = {z}")]
    ContourHitsEigenvalue { k: usize, z: Complex64 },
    #[error("no trusted level above N0 = {n0} (K_trust = {k_trust})")]
    TrustExhausted { n0: usize, k_trust: usize },
    #[error("invalid argument: {reason}")]
    InvalidArgument { reason: String },
}

/// One unperturbed level of the finite section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelInfo {
    pub k: usize,
    pub mu: f64,
    /// Offset of the level's first basis vector in the flat index.
    pub offset: usize,
    /// Retained multiplicity (capped for infinitely degenerate levels).
    pub mult: usize,
}

/// Quadrature used to assemble `V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureInfo {
    pub rule: String,
    pub nodes: Vec<usize>,
    /// Frobenius norm of entries dropped as numerically zero when splitting into blocks.
    pub pruned_norm: f64,
}

/// Finite section of `T = A + V` in the eigenbasis of `A`, level by level.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    pub model: Option<ModelId>,
    pub potential: Option<PotentialSpec>,
    pub levels: Vec<LevelInfo>,
    /// Level number `k` of each basis vector.
    pub level_of: Vec<usize>,
    /// Symmetry label of each basis vector (angular momentum where applicable).
    pub labels: Vec<i64>,
    /// `V_ij = <V phi_j, phi_i>`.
    pub v: CMat,
    /// Index sets on which `T` is block diagonal.
    pub blocks: Vec<Vec<usize>>,
    pub quadrature: QuadratureInfo,
}

impl TruncatedOperator {
    /// Operator from explicit levels `(mu_k, mult_k)` and a dense `V`.
    pub fn from_parts(levels: &[(f64, usize)], v: CMat) -> Result<Self, LabError> {
        let dim: usize = levels.iter().map(|l| l.1).sum();
        if v.nrows() != dim || v.ncols() != dim {
            return Err(LabError::InvalidArgument {
                reason: format!("V is {}x{}, levels span {dim}", v.nrows(), v.ncols()),
            });
        }
        if levels.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(LabError::InvalidArgument {
                reason: "level energies must be strictly increasing".into(),
            });
        }
        let mut infos = Vec::new();
        let mut level_of = Vec::new();
        let mut off = 0;
        for (i, &(mu, m)) in levels.iter().enumerate() {
            infos.push(LevelInfo {
                k: i + 1,
                mu,
                offset: off,
                mult: m,
            });
            level_of.extend(std::iter::repeat_n(i + 1, m));
            off += m;
        }
        let mut op = Self {
            model: None,
            potential: None,
            levels: infos,
            level_of,
            labels: vec![0; dim],
            v,
            blocks: Vec::new(),
            quadrature: QuadratureInfo {
                rule: "explicit".into(),
                nodes: Vec::new(),
                pruned_norm: 0.0,
            },
        };
        op.split_blocks(0.0);
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.level_of.len()
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, k: usize) -> Option<&LevelInfo> {
        k.checked_sub(1).and_then(|i| self.levels.get(i))
    }

    /// `mu` of the level of each basis vector.
    pub fn diag_a(&self) -> Vec<f64> {
        self.level_of.iter().map(|&k| self.levels[k - 1].mu).collect()
    }

    pub fn mu_values(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.mu).collect()
    }

    /// Dense `T = diag(mu) + V`.
    pub fn t_matrix(&self) -> CMat {
        let mut t = self.v.clone();
        for (i, mu) in self.diag_a().into_iter().enumerate() {
            t[(i, i)] += mu;
        }
        t
    }

    /// `T` restricted to one block.
    pub fn t_block(&self, block: &[usize]) -> CMat {
        let diag = self.diag_a();
        CMat::from_fn(block.len(), block.len(), |a, b| {
            let (i, j) = (block[a], block[b]);
            let mut v = self.v[(i, j)];
            if i == j {
                v += diag[i];
            }
            v
        })
    }

    /// Zero entries below `rel_tol * max|V_ij|` and group the basis into
    /// connected components of the remaining sparsity pattern.
    pub fn split_blocks(&mut self, rel_tol: f64) {
        let n = self.dim();
        let vmax = self.v.norm_max();
        let tol = rel_tol * vmax;
        let mut pruned = 0.0;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for i in 0..n {
            for j in 0..n {
                let a = self.v[(i, j)].norm();
                if a == 0.0 {
                    continue;
                }
                if a <= tol {
                    pruned += a * a;
                    self.v[(i, j)] = Complex64::new(0.0, 0.0);
                } else if i != j {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        self.blocks = groups.into_values().collect();
        self.quadrature.pruned_norm = pruned.sqrt();
    }
}
