use crate::linalg::{self, CMat, LinalgError};
use faer::Mat;
use num_complex::Complex64;

/// Block-diagonal matrix on a fixed partition of `0..dim`; absent blocks are zero.
#[derive(Debug, Clone)]
pub struct BlockMatrix {
    pub dim: usize,
    pub index: Vec<Vec<usize>>,
    pub blocks: Vec<Option<CMat>>,
}

impl BlockMatrix {
    pub fn zeros(index: &[Vec<usize>], dim: usize) -> Self {
        Self {
            dim,
            index: index.to_vec(),
            blocks: vec![None; index.len()],
        }
    }

    pub fn identity(index: &[Vec<usize>], dim: usize) -> Self {
        Self {
            dim,
            index: index.to_vec(),
            blocks: index.iter().map(|b| Some(linalg::identity(b.len()))).collect(),
        }
    }

    pub fn set(&mut self, b: usize, m: CMat) {
        self.blocks[b] = Some(m);
    }

    pub fn add_to(&mut self, b: usize, m: &CMat) {
        match &mut self.blocks[b] {
            Some(x) => *x += m,
            None => self.blocks[b] = Some(m.clone()),
        }
    }

    pub fn to_dense(&self) -> CMat {
        let mut out = Mat::zeros(self.dim, self.dim);
        for (idx, blk) in self.index.iter().zip(&self.blocks) {
            if let Some(m) = blk {
                for (a, &i) in idx.iter().enumerate() {
                    for (b, &j) in idx.iter().enumerate() {
                        out[(i, j)] = m[(a, b)];
                    }
                }
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .map(|m| {
                let f = m.norm_l2();
                f * f
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn opnorm2(&self) -> Result<f64, LinalgError> {
        let mut best: f64 = 0.0;
        for m in self.blocks.iter().flatten() {
            best = best.max(linalg::opnorm2(m.as_ref())?);
        }
        Ok(best)
    }

    /// All singular values, descending.
    pub fn singular_values(&self) -> Result<Vec<f64>, LinalgError> {
        let mut s = Vec::new();
        for m in self.blocks.iter().flatten() {
            s.extend(linalg::singular_values(m.as_ref())?);
        }
        s.sort_by(|a, b| b.total_cmp(a));
        Ok(s)
    }

    pub fn trace(&self) -> Complex64 {
        self.blocks
            .iter()
            .flatten()
            .map(|m| (0..m.nrows()).map(|i| m[(i, i)]).sum::<Complex64>())
            .sum()
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Option<&CMat>, Option<&CMat>) -> Option<CMat>) -> Self {
        debug_assert_eq!(self.index.len(), other.index.len());
        Self {
            dim: self.dim,
            index: self.index.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a.as_ref(), b.as_ref()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| match (a, b) {
            (Some(a), Some(b)) => Some(a - b),
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(-b),
            (None, None) => None,
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| match (a, b) {
            (Some(a), Some(b)) => Some(a + b),
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (None, None) => None,
        })
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| match (a, b) {
            (Some(a), Some(b)) => Some(a * b),
            _ => None,
        })
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        for (idx, blk) in self.index.iter().zip(&self.blocks) {
            if let Some(m) = blk {
                for (a, &i) in idx.iter().enumerate() {
                    let mut s = Complex64::new(0.0, 0.0);
                    for (b, &j) in idx.iter().enumerate() {
                        s += m[(a, b)] * x[j];
                    }
                    y[i] = s;
                }
            }
        }
        y
    }

    /// `<P f, f> = f^* P f`.
    pub fn quad_form(&self, f: &[Complex64]) -> Complex64 {
        let pf = self.apply(f);
        pf.iter().zip(f).map(|(a, b)| b.conj() * a).sum()
    }
}
