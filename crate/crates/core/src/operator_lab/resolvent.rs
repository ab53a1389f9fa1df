use super::{BlockMatrix, LabError, TruncatedOperator};
use crate::linalg::{self, CMat, LinalgError};
use crate::riesz_core::RieszError;
use crate::special::principal_pow;
use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolventMethod {
    /// `(z - T)^{-1}` by LU.
    Direct,
    /// `K (I - B)^{-1} K`.
    Factorized,
}

/// Diagonal of `K(z) = (z - A)^{-1/2}`, one entry per basis vector.
pub fn k_factor(z: Complex64, op: &TruncatedOperator) -> Result<Vec<Complex64>, LabError> {
    let per_level: Vec<Complex64> = op
        .levels
        .iter()
        .map(|l| {
            let w = z - l.mu;
            if w.norm() == 0.0 {
                Err(LabError::Riesz(RieszError::OnSpectrum { k: l.k }))
            } else {
                Ok(principal_pow(w, -0.5))
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(op.level_of.iter().map(|&k| per_level[k - 1]).collect())
}

/// `B(z) = K(z) V K(z)`.
pub fn b_matrix(z: Complex64, op: &TruncatedOperator) -> Result<CMat, LabError> {
    let k = k_factor(z, op)?;
    Ok(Mat::from_fn(op.dim(), op.dim(), |i, j| k[i] * op.v[(i, j)] * k[j]))
}

fn block_b(k: &[Complex64], op: &TruncatedOperator, idx: &[usize]) -> CMat {
    Mat::from_fn(idx.len(), idx.len(), |a, b| {
        let (i, j) = (idx[a], idx[b]);
        k[i] * op.v[(i, j)] * k[j]
    })
}

/// Resolvent `(z - T)^{-1}` restricted to the symmetry blocks of `op`.
pub(crate) fn resolvent_blocks(
    z: Complex64,
    op: &TruncatedOperator,
    method: ResolventMethod,
) -> Result<BlockMatrix, LabError> {
    let mut out = BlockMatrix::zeros(&op.blocks, op.dim());
    match method {
        ResolventMethod::Direct => {
            for (b, idx) in op.blocks.iter().enumerate() {
                let mut m = -op.t_block(idx);
                for i in 0..idx.len() {
                    m[(i, i)] += z;
                }
                let inv = linalg::inverse(m.as_ref()).map_err(|e| match e {
                    LinalgError::Singular { .. } => LabError::SingularShift { z },
                    e => e.into(),
                })?;
                out.set(b, inv);
            }
        }
        ResolventMethod::Factorized => {
            let k = k_factor(z, op)?;
            for (b, idx) in op.blocks.iter().enumerate() {
                let mut m = -block_b(&k, op, idx);
                for i in 0..idx.len() {
                    m[(i, i)] += 1.0;
                }
                let inv = linalg::inverse(m.as_ref()).map_err(|e| match e {
                    LinalgError::Singular { .. } => LabError::FactorizationInvalid { z },
                    e => e.into(),
                })?;
                let r = Mat::from_fn(idx.len(), idx.len(), |a, c| k[idx[a]] * inv[(a, c)] * k[idx[c]]);
                out.set(b, r);
            }
        }
    }
    Ok(out)
}

/// Dense resolvent `(z - T)^{-1}` of the finite section.
pub fn resolvent(
    z: Complex64,
    op: &TruncatedOperator,
    method: ResolventMethod,
) -> Result<CMat, LabError> {
    Ok(resolvent_blocks(z, op, method)?.to_dense())
}
