//! Unit-normalized appearance embeddings.

use crate::error::{Error, Result};

pub const DEFAULT_EMBEDDING_DIM: usize = 512;

/// Norms below this cannot be normalized.
pub const MIN_NORM: f64 = 1e-12;

/// A unit-L2 embedding. Construct through [`FeatureVec::normalize`] so the
/// invariant holds for every stored value.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVec(Vec<f64>);

impl FeatureVec {
    pub fn normalize(raw: Vec<f64>) -> Result<Self> {
        let norm = l2_norm(&raw);
        if !norm.is_finite() || norm < MIN_NORM {
            return Err(Error::ZeroNorm(norm));
        }
        Ok(FeatureVec(raw.into_iter().map(|v| v / norm).collect()))
    }

    /// Normalizes and checks the dimension against the configured one.
    pub fn normalize_dim(raw: Vec<f64>, dim: usize) -> Result<Self> {
        if raw.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: raw.len() });
        }
        Self::normalize(raw)
    }

    /// Wraps values that are already unit-norm within `1e-6`.
    pub(crate) fn from_unit(values: Vec<f64>) -> Self {
        debug_assert!((l2_norm(&values) - 1.0).abs() <= 1e-6);
        FeatureVec(values)
    }

    /// Standard basis vector `e_axis`.
    pub fn basis(dim: usize, axis: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[axis] = 1.0;
        FeatureVec(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &FeatureVec) -> Result<f64> {
        check_dims(self, other)?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_dims(f: &FeatureVec, g: &FeatureVec) -> Result<()> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: g.dim() });
    }
    Ok(())
}

/// `1 - <f, g>`, clamped into `[0, 2]`.
pub fn cosine_distance(f: &FeatureVec, g: &FeatureVec) -> Result<f64> {
    Ok((1.0 - f.dot(g)?).clamp(0.0, 2.0))
}

/// Blends a newly observed feature into a track's stored feature:
/// `normalize(beta * new + (1 - beta) * track)`.
pub fn accumulate(f_track: &FeatureVec, f_new: &FeatureVec, beta: f64) -> Result<FeatureVec> {
    check_dims(f_track, f_new)?;
    if beta == 0.0 {
        return Ok(f_track.clone());
    }
    if beta == 1.0 {
        return Ok(f_new.clone());
    }
    let blended: Vec<f64> =
        f_track.0.iter().zip(&f_new.0).map(|(t, n)| beta * n + (1.0 - beta) * t).collect();
    FeatureVec::normalize(blended).map_err(|_| Error::UndefinedUpdate)
}
