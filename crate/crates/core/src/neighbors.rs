//! Exact k-nearest-neighbor distances by blocked brute force.
//!
//! Every pairwise distance is the Euclidean norm of the coordinate difference,
//! accumulated in f64 sequentially over dimensions. Rows are independent, so the
//! output is bit-identical for any number of worker threads.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const QUERY_BLOCK: usize = 32;
const CANDIDATE_BLOCK: usize = 256;

/// Sorted k smallest distances from each query point to every other point.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    dists: Vec<f64>,
    k: usize,
    query_indices: Vec<usize>,
}

impl NeighborTable {
    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.query_indices.len()
    }

    /// Distances for the `r`-th query row, ascending.
    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.dists[r * self.k..(r + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.dists.chunks_exact(self.k)
    }

    /// Point index (into the source cloud) of each query row.
    pub fn query_indices(&self) -> &[usize] {
        &self.query_indices
    }
}

/// Exact k nearest neighbor distances for every point.
pub fn knn_distances<T: Scalar>(points: &PointCloud<T>, k: usize) -> Result<NeighborTable> {
    check_k(points.n_points(), k)?;
    knn_for_queries(points, k, (0..points.n_points()).collect())
}

/// Exact k nearest neighbor distances for `m` query rows sampled without
/// replacement; every point remains a candidate neighbor.
///
/// Queries are drawn with `rand::seq::index::sample` from a `ChaCha8Rng` seeded via
/// `seed_from_u64(seed)` and emitted in ascending point order, so `m = N`
/// reproduces [`knn_distances`].
pub fn knn_distances_subsampled<T: Scalar>(
    points: &PointCloud<T>,
    k: usize,
    m: usize,
    seed: u64,
) -> Result<NeighborTable> {
    let n = points.n_points();
    check_k(n, k)?;
    if m == 0 || m > n {
        return Err(Error::SubsampleTooLarge { m, n_points: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queries = index::sample(&mut rng, n, m).into_vec();
    queries.sort_unstable();
    knn_for_queries(points, k, queries)
}

fn check_k(n_points: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidK(k, 1));
    }
    if k > n_points - 1 {
        return Err(Error::KTooLarge { k, n_points });
    }
    Ok(())
}

#[inline]
fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    let mut acc = 0.0_f64;
    for (x, y) in a.iter().zip(b) {
        let diff = x.widen() - y.widen();
        acc += diff * diff;
    }
    acc
}

/// Bounded list of the k best (squared distance, index) pairs, kept sorted.
struct TopK {
    items: Vec<(f64, usize)>,
    k: usize,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self {
            items: Vec::with_capacity(k + 1),
            k,
        }
    }

    #[inline]
    fn worst(&self) -> Option<(f64, usize)> {
        if self.items.len() < self.k {
            None
        } else {
            self.items.last().copied()
        }
    }

    #[inline]
    fn offer(&mut self, dist: f64, idx: usize) {
        if let Some(worst) = self.worst() {
            if (dist, idx) >= worst {
                return;
            }
        }
        let pos = self
            .items
            .partition_point(|&(d, i)| d < dist || (d == dist && i < idx));
        self.items.insert(pos, (dist, idx));
        self.items.truncate(self.k);
    }
}

fn knn_for_queries<T: Scalar>(
    points: &PointCloud<T>,
    k: usize,
    queries: Vec<usize>,
) -> Result<NeighborTable> {
    let n = points.n_points();

    let blocks: Vec<Vec<(f64, usize)>> = queries
        .par_chunks(QUERY_BLOCK)
        .map(|block| {
            let mut best: Vec<TopK> = block.iter().map(|_| TopK::new(k)).collect();
            for start in (0..n).step_by(CANDIDATE_BLOCK) {
                let end = (start + CANDIDATE_BLOCK).min(n);
                for (slot, &q) in best.iter_mut().zip(block) {
                    let query = points.row(q);
                    for c in start..end {
                        if c == q {
                            continue;
                        }
                        let d = squared_distance(query, points.row(c));
                        slot.offer(d, c);
                    }
                }
            }
            best.into_iter().flat_map(|t| t.items).collect()
        })
        .collect();

    let mut dists = Vec::with_capacity(queries.len() * k);
    for (pos, (sq, idx)) in blocks.into_iter().flatten().enumerate() {
        if sq == 0.0 {
            let q = queries[pos / k];
            return Err(Error::DuplicatePoints {
                first: q.min(idx),
                second: q.max(idx),
            });
        }
        dists.push(sq.sqrt());
    }

    Ok(NeighborTable {
        dists,
        k,
        query_indices: queries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> PointCloud<f64> {
        PointCloud::new(xs.to_vec(), xs.len(), 1).unwrap()
    }

    #[test]
    fn three_points_on_a_line() {
        let t = knn_distances(&line(&[0.0, 1.0, 3.0]), 2).unwrap();
        assert_eq!(t.row(0), &[1.0, 3.0]);
        assert_eq!(t.row(1), &[1.0, 2.0]);
        assert_eq!(t.row(2), &[2.0, 3.0]);
    }

    #[test]
    fn unit_square_corners() {
        let c = PointCloud::from_rows(&[
            vec![0.0_f32, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        let t = knn_distances(&c, 1).unwrap();
        assert!(t.rows().all(|r| r == [1.0]));
    }

    #[test]
    fn duplicates_are_rejected() {
        let err = knn_distances(&line(&[0.0, 0.0, 1.0]), 1).unwrap_err();
        assert!(matches!(
            err,
            Error::DuplicatePoints {
                first: 0,
                second: 1
            }
        ));
    }

    #[test]
    fn k_bounds() {
        let c = line(&[0.0, 1.0, 3.0]);
        assert!(matches!(
            knn_distances(&c, 3),
            Err(Error::KTooLarge { k: 3, n_points: 3 })
        ));
        assert!(matches!(knn_distances(&c, 0), Err(Error::InvalidK(0, 1))));
        assert!(matches!(
            knn_distances_subsampled(&c, 1, 4, 0),
            Err(Error::SubsampleTooLarge { .. })
        ));
    }

    #[test]
    fn full_subsample_matches_full_table() {
        let xs: Vec<f64> = (0..40)
            .map(|i| (i as f64 * 0.37).sin() * 10.0 + i as f64)
            .collect();
        let c = line(&xs);
        let full = knn_distances(&c, 5).unwrap();
        let sub = knn_distances_subsampled(&c, 5, 40, 123).unwrap();
        assert_eq!(full, sub);
    }

    #[test]
    fn subsample_selection_depends_on_seed() {
        let xs: Vec<f64> = (0..100)
            .map(|i| i as f64 * 1.5 + (i % 7) as f64 * 0.1)
            .collect();
        let c = line(&xs);
        let a = knn_distances_subsampled(&c, 3, 20, 1).unwrap();
        let b = knn_distances_subsampled(&c, 3, 20, 1).unwrap();
        let other = knn_distances_subsampled(&c, 3, 20, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.query_indices(), other.query_indices());
        assert!(a.query_indices().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn ties_keep_lowest_index() {
        let mut top = TopK::new(2);
        top.offer(1.0, 5);
        top.offer(1.0, 3);
        top.offer(1.0, 4);
        assert_eq!(top.items, vec![(1.0, 3), (1.0, 4)]);
    }
}
