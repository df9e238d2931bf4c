use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// N points in R^D stored row-major. All entries are finite, N >= 2 and D >= 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    data: Vec<T>,
    n_points: usize,
    dim: usize,
}

impl<T: Scalar> PointCloud<T> {
    pub fn new(data: Vec<T>, n_points: usize, dim: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidPointCloud(format!(
                "need at least 2 points, got {n_points}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidPointCloud(
                "dimension must be at least 1".into(),
            ));
        }
        if data.len() != n_points * dim {
            return Err(Error::InvalidPointCloud(format!(
                "{} values cannot fill a {n_points}x{dim} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPointCloud(format!(
                "non-finite value at row {}, column {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self {
            data,
            n_points,
            dim,
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidPointCloud("ragged rows".into()));
        }
        Self::new(rows.concat(), rows.len(), dim)
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Copy with every coordinate shifted by seeded uniform noise in [-eps, eps].
    ///
    /// Opt-in remedy for dumps with coincident rows (dead units produce identical
    /// activations). The result is f64 so tiny offsets survive on f32 inputs.
    pub fn jittered(&self, eps: f64, seed: u64) -> Result<PointCloud<f64>> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "jitter must be finite and positive, got {eps}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = self
            .data
            .iter()
            .map(|v| v.widen() + rng.random_range(-eps..=eps))
            .collect();
        PointCloud::new(data, self.n_points, self.dim)
    }

    pub fn to_f64(&self) -> PointCloud<f64> {
        PointCloud {
            data: self.data.iter().map(|v| v.widen()).collect(),
            n_points: self.n_points,
            dim: self.dim,
        }
    }
}
