use idprof_core::{knn_distances, knn_distances_subsampled, PointCloud};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian_cloud(n: usize, d: usize, seed: u64) -> PointCloud<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * d)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    PointCloud::new(data, n, d).unwrap()
}

/// Straight double loop: every pair, full sort, first k.
fn naive_knn(c: &PointCloud<f64>, k: usize) -> Vec<Vec<f64>> {
    let n = c.n_points();
    (0..n)
        .map(|i| {
            let mut row: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let mut s = 0.0;
                    for t in 0..c.dim() {
                        let diff = c.row(i)[t] - c.row(j)[t];
                        s += diff * diff;
                    }
                    (s, j)
                })
                .collect();
            row.sort_by(|a, b| a.partial_cmp(b).unwrap());
            row.into_iter().take(k).map(|(s, _)| s.sqrt()).collect()
        })
        .collect()
}

fn rotate_translate(c: &PointCloud<f64>, seed: u64) -> PointCloud<f64> {
    let d = c.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
    let q = DMatrix::from_row_slice(d, d, &g).qr().q();
    let shift: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
    let mut out = Vec::with_capacity(c.n_points() * d);
    for row in c.rows() {
        for r in 0..d {
            let mut acc = shift[r];
            for (col, x) in row.iter().enumerate() {
                acc += q[(r, col)] * x;
            }
            out.push(acc);
        }
    }
    PointCloud::new(out, c.n_points(), d).unwrap()
}

#[test]
fn blocked_knn_equals_double_loop() {
    for seed in 0..8 {
        let n = 30 + 60 * seed as usize;
        let c = gaussian_cloud(n, 1 + seed as usize * 3, seed);
        let k = 1 + (seed as usize * 5) % 20;
        let table = knn_distances(&c, k).unwrap();
        let oracle = naive_knn(&c, k);
        for (i, row) in table.rows().enumerate() {
            assert_eq!(row, oracle[i].as_slice(), "seed {seed} row {i}");
            assert!(row.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}

#[test]
fn f32_input_is_widened_before_accumulating() {
    let c64 = gaussian_cloud(120, 7, 99);
    let c32 = PointCloud::new(c64.as_slice().iter().map(|&v| v as f32).collect(), 120, 7).unwrap();
    let widened = c32.to_f64();
    assert_eq!(
        knn_distances(&c32, 6).unwrap(),
        knn_distances(&widened, 6).unwrap()
    );
}

#[test]
fn isometry_preserves_table() {
    let c = gaussian_cloud(300, 12, 5);
    let moved = rotate_translate(&c, 6);
    let a = knn_distances(&c, 10).unwrap();
    let b = knn_distances(&moved, 10).unwrap();
    for (x, y) in a.rows().flatten().zip(b.rows().flatten()) {
        assert!((x - y).abs() <= 1e-9 * x, "{x} vs {y}");
    }
}

#[test]
fn scaling_scales_table() {
    let c = gaussian_cloud(200, 9, 8);
    let factor = 3.7;
    let scaled =
        PointCloud::new(c.as_slice().iter().map(|v| v * factor).collect(), 200, 9).unwrap();
    let a = knn_distances(&c, 8).unwrap();
    let b = knn_distances(&scaled, 8).unwrap();
    for (x, y) in a.rows().flatten().zip(b.rows().flatten()) {
        assert!((x * factor - y).abs() <= 1e-12 * y);
    }
}

#[test]
fn thread_count_does_not_change_bits() {
    let c = gaussian_cloud(400, 20, 11);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| knn_distances(&c, 15).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

#[test]
fn subsampled_rows_match_full_rows() {
    let c = gaussian_cloud(1000, 5, 2);
    let full = knn_distances(&c, 10).unwrap();
    let a = knn_distances_subsampled(&c, 10, 200, 17).unwrap();
    assert_eq!(a, knn_distances_subsampled(&c, 10, 200, 17).unwrap());
    assert_ne!(
        a.query_indices(),
        knn_distances_subsampled(&c, 10, 200, 18)
            .unwrap()
            .query_indices()
    );
    for (r, &q) in a.query_indices().iter().enumerate() {
        assert_eq!(a.row(r), full.row(q));
    }
}
