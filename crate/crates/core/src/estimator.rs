//! Maximum-likelihood intrinsic dimension from nearest-neighbor distance ratios.
//!
//! For a point with sorted neighbor distances `T_1 <= ... <= T_k`, the local
//! estimate is the inverse of the mean log-ratio `ln(T_k / T_j)` over
//! `j = 1..k-1`. Local estimates are pooled either by averaging their inverses
//! ([`Aggregation::Mackay`], the default) or by a plain arithmetic mean
//! ([`Aggregation::Levina`]).

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::neighbors::{knn_distances, knn_distances_subsampled, NeighborTable};
use crate::scalar::Scalar;

pub const DEFAULT_K: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Inverse of the mean of inverse local estimates.
    #[default]
    Mackay,
    /// Arithmetic mean of local estimates.
    Levina,
}

impl std::str::FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mackay" => Ok(Aggregation::Mackay),
            "levina" => Ok(Aggregation::Levina),
            other => Err(Error::InvalidConfig(format!(
                "unknown aggregation {other:?} (expected mackay or levina)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsample {
    pub m: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub rounds: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jitter {
    pub eps: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub k: usize,
    pub aggregation: Aggregation,
    pub subsample: Option<Subsample>,
    pub bootstrap: Option<Bootstrap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter: Option<Jitter>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            aggregation: Aggregation::Mackay,
            subsample: None,
            bootstrap: None,
            jitter: None,
        }
    }
}

impl EstimatorConfig {
    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidK(self.k, 2));
        }
        if let Some(b) = self.bootstrap {
            if b.rounds == 0 {
                return Err(Error::InvalidConfig(
                    "bootstrap rounds must be at least 1".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdEstimate {
    pub value: f64,
    #[serde(default)]
    pub n_used: usize,
    #[serde(default)]
    pub config: EstimatorConfig,
    /// Population standard deviation of the bootstrap replicates.
    #[serde(default)]
    pub spread: Option<f64>,
}

/// Local MLE dimension from the first `k` entries of one sorted neighbor row.
pub fn local_mle<F: Float>(row: &[F], k: usize) -> Result<F> {
    local_mle_at(row, k, 0)
}

fn local_mle_at<F: Float>(row: &[F], k: usize, row_index: usize) -> Result<F> {
    if k < 2 {
        return Err(Error::InvalidK(k, 2));
    }
    if row.len() < k {
        return Err(Error::InvalidConfig(format!(
            "neighbor row has {} entries, k = {k}",
            row.len()
        )));
    }
    let row = &row[..k];
    if !(row[0] > F::zero()) {
        return Err(Error::InvalidConfig(
            "neighbor distances must be positive".into(),
        ));
    }
    let far = row[k - 1];
    if far == row[0] {
        return Err(Error::DegenerateRow { row: row_index, k });
    }
    let log_sum = row[..k - 1]
        .iter()
        .fold(F::zero(), |acc, &t| acc + (far / t).ln());
    let steps = F::from(k - 1).expect("k fits in a float");
    Ok(steps / log_sum)
}

/// Pool local estimates into one global dimension.
pub fn aggregate<F: Float>(locals: &[F], mode: Aggregation) -> Result<F> {
    if locals.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = F::from(locals.len()).expect("length fits in a float");
    Ok(match mode {
        Aggregation::Mackay => n / locals.iter().fold(F::zero(), |acc, &v| acc + v.recip()),
        Aggregation::Levina => locals.iter().fold(F::zero(), |acc, &v| acc + v) / n,
    })
}

/// Local estimates for every row of a neighbor table.
pub fn local_estimates(table: &NeighborTable, k: usize) -> Result<Vec<f64>> {
    table
        .rows()
        .zip(table.query_indices())
        .map(|(row, &idx)| local_mle_at(row, k, idx))
        .collect()
}

/// Estimate the intrinsic dimension of a point cloud.
pub fn estimate_id<T: Scalar>(
    points: &PointCloud<T>,
    config: &EstimatorConfig,
) -> Result<IdEstimate> {
    config.validate()?;
    let table = match config.jitter {
        Some(j) => neighbor_table(&points.jittered(j.eps, j.seed)?, config)?,
        None => neighbor_table(points, config)?,
    };
    let locals = local_estimates(&table, config.k)?;
    let value = aggregate(&locals, config.aggregation)?;
    let spread = config
        .bootstrap
        .map(|b| bootstrap_spread(&locals, config.aggregation, b));
    Ok(IdEstimate {
        value,
        n_used: locals.len(),
        config: config.clone(),
        spread,
    })
}

fn neighbor_table<T: Scalar>(
    points: &PointCloud<T>,
    config: &EstimatorConfig,
) -> Result<NeighborTable> {
    match config.subsample {
        Some(s) => knn_distances_subsampled(points, config.k, s.m, s.seed),
        None => knn_distances(points, config.k),
    }
}

/// Resample query rows with replacement; round `r` draws from a generator
/// seeded with `seed + r`, so replicates do not depend on scheduling.
fn bootstrap_spread(locals: &[f64], mode: Aggregation, b: Bootstrap) -> f64 {
    let n = locals.len();
    let replicates: Vec<f64> = (0..b.rounds)
        .into_par_iter()
        .map(|round| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed.wrapping_add(round as u64));
            let sample: Vec<f64> = (0..n).map(|_| locals[rng.random_range(0..n)]).collect();
            aggregate(&sample, mode).expect("bootstrap sample is nonempty")
        })
        .collect();
    let mean = replicates.iter().sum::<f64>() / b.rounds as f64;
    let var = replicates.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / b.rounds as f64;
    var.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Values below were evaluated independently with Python's math.log.
    const INV_LN3: f64 = 0.910_239_226_626_837_4;
    const INV_LN2: f64 = std::f64::consts::LOG2_E;

    #[test]
    fn local_mle_two_neighbors() {
        assert!((local_mle(&[1.0, 3.0], 2).unwrap() - INV_LN3).abs() < 1e-15);
        assert!((local_mle(&[1.0, 2.0], 2).unwrap() - INV_LN2).abs() < 1e-15);
    }

    #[test]
    fn local_mle_degenerate() {
        assert!(matches!(
            local_mle(&[2.0, 2.0], 2),
            Err(Error::DegenerateRow { k: 2, .. })
        ));
        assert!(matches!(
            local_mle(&[1.0_f64, 2.0], 1),
            Err(Error::InvalidK(1, 2))
        ));
        assert!(local_mle(&[1.0_f64], 2).is_err());
    }

    #[test]
    fn local_mle_generic_over_f32() {
        let v = local_mle(&[1.0_f32, 2.0], 2).unwrap();
        assert!((f64::from(v) - INV_LN2).abs() < 1e-6);
    }

    #[test]
    fn aggregate_modes() {
        let locals = [5.0, 5.0, 5.0];
        // 1/5 is inexact in binary, so the harmonic route lands within an ulp.
        assert!((aggregate(&locals, Aggregation::Mackay).unwrap() - 5.0).abs() < 1e-14);
        assert_eq!(aggregate(&locals, Aggregation::Levina).unwrap(), 5.0);
        assert!(matches!(
            aggregate::<f64>(&[], Aggregation::Mackay),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn aggregate_hand_oracle() {
        let locals = [INV_LN3, INV_LN2, 2.466_303_462_376_431_7];
        let m = aggregate(&locals, Aggregation::Mackay).unwrap();
        let l = aggregate(&locals, Aggregation::Levina).unwrap();
        assert!((m - 1.365_358_839_940_256_3).abs() < 1e-12);
        assert!((l - 1.606_412_576_630_744_4).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(EstimatorConfig::with_k(1).validate().is_err());
        let c = EstimatorConfig {
            bootstrap: Some(Bootstrap { rounds: 0, seed: 0 }),
            ..EstimatorConfig::default()
        };
        assert!(c.validate().is_err());
        assert_eq!(
            "levina".parse::<Aggregation>().unwrap(),
            Aggregation::Levina
        );
        assert!("median".parse::<Aggregation>().is_err());
    }

    #[test]
    fn degenerate_row_reports_point_index() {
        // Point 1 sits midway between 0 and 2: both neighbors at distance 1.
        let c = PointCloud::new(vec![0.0_f64, 1.0, 2.0, 10.0], 4, 1).unwrap();
        let err = estimate_id(&c, &EstimatorConfig::with_k(2)).unwrap_err();
        assert!(matches!(err, Error::DegenerateRow { row: 1, k: 2 }));
    }

    #[test]
    fn bootstrap_is_seeded() {
        let xs: Vec<f64> = (0..60)
            .map(|i| (i as f64).powf(1.3) + (i % 5) as f64 * 0.01)
            .collect();
        let c = PointCloud::new(xs, 60, 1).unwrap();
        let mut cfg = EstimatorConfig::with_k(5);
        cfg.bootstrap = Some(Bootstrap {
            rounds: 16,
            seed: 3,
        });
        let a = estimate_id(&c, &cfg).unwrap();
        let b = estimate_id(&c, &cfg).unwrap();
        assert_eq!(a, b);
        let s = a.spread.unwrap();
        assert!(s > 0.0 && s.is_finite());
        cfg.bootstrap = Some(Bootstrap {
            rounds: 16,
            seed: 4,
        });
        assert_ne!(estimate_id(&c, &cfg).unwrap().spread, Some(s));
    }
}
