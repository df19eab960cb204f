use serde::{Deserialize, Serialize};

use crate::error::{Axis, Error, Result};

/// Differences with an L2 norm at or below this are treated as "no change".
pub const DEFAULT_DIRECTION_EPS: f64 = 1e-8;

/// L2-normalized embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    /// Normalizes `values` to unit length.
    pub fn new<T: Into<f64> + Copy>(values: &[T]) -> Result<Self> {
        let values: Vec<f64> = values.iter().map(|&v| v.into()).collect();
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if values.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(EmbeddingVector {
            values: values.into_iter().map(|v| v / norm).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn ensure_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::shape(Axis::Channels, self.dim(), other.dim()));
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `100 * cos` between `e_gt - e_over` and `e_gen - e_over`.
pub fn clip_dir(
    e_gt: &EmbeddingVector,
    e_over: &EmbeddingVector,
    e_gen: &EmbeddingVector,
) -> Result<f64> {
    clip_dir_with_eps(e_gt, e_over, e_gen, DEFAULT_DIRECTION_EPS)
}

pub fn clip_dir_with_eps(
    e_gt: &EmbeddingVector,
    e_over: &EmbeddingVector,
    e_gen: &EmbeddingVector,
    eps: f64,
) -> Result<f64> {
    e_gt.ensure_same_dim(e_over)?;
    e_gt.ensure_same_dim(e_gen)?;
    clip_dir_raw(&e_gt.values, &e_over.values, &e_gen.values, eps)
}

/// The directional score on arbitrary (not necessarily unit) vectors of equal length.
pub fn clip_dir_raw(gt: &[f64], over: &[f64], gen: &[f64], eps: f64) -> Result<f64> {
    if over.len() != gt.len() {
        return Err(Error::shape(Axis::Channels, gt.len(), over.len()));
    }
    if gen.len() != gt.len() {
        return Err(Error::shape(Axis::Channels, gt.len(), gen.len()));
    }
    let d_gt: Vec<f64> = gt.iter().zip(over).map(|(a, b)| a - b).collect();
    let d_gen: Vec<f64> = gen.iter().zip(over).map(|(a, b)| a - b).collect();
    let n_gt = dot(&d_gt, &d_gt).sqrt();
    let n_gen = dot(&d_gen, &d_gen).sqrt();
    if n_gt <= eps {
        return Err(Error::NoGroundTruthChange);
    }
    if n_gen <= eps {
        return Err(Error::NoGeneratedChange);
    }
    let cos = dot(&d_gt, &d_gen) / (n_gt * n_gen);
    Ok(100.0 * cos.clamp(-1.0, 1.0))
}

/// `100 * (a . b)` for unit vectors.
pub fn cosine_sim(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    a.ensure_same_dim(b)?;
    Ok(100.0 * dot(&a.values, &b.values).clamp(-1.0, 1.0))
}
