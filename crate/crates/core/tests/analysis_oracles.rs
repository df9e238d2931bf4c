use idprof_core::analysis::ModelPeak;
use idprof_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sample covariance over product of sample standard deviations (n - 1 denominators).
fn covariance_oracle(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (n - 1.0);
    let sx = (xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let sy = (ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    cov / (sx * sy)
}

/// Solve the 2x2 normal equations by Cramer's rule.
fn normal_equations(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sy: f64 = ys.iter().sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let det = n * sxx - sx * sx;
    let intercept = (sy * sxx - sx * sxy) / det;
    let slope = (n * sxy - sx * sy) / det;
    (slope, intercept)
}

#[test]
fn pearson_and_fit_match_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let n = rng.random_range(5..60);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..40.0)).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| 2.0 * x + rng.random_range(-15.0..15.0))
            .collect();
        assert!((pearson_r(&xs, &ys).unwrap() - covariance_oracle(&xs, &ys)).abs() <= 1e-12);
        let fit = linear_fit(&xs, &ys).unwrap();
        let (slope, intercept) = normal_equations(&xs, &ys);
        assert!((fit.slope - slope).abs() <= 1e-10 * slope.abs().max(1.0));
        assert!((fit.intercept - intercept).abs() <= 1e-10 * intercept.abs().max(1.0));
    }
}

fn record(id: &str, domain: Domain, d_data: f64, dmax: &[f64]) -> DatasetRecord {
    DatasetRecord {
        dataset_id: id.into(),
        domain,
        d_data: IdEstimate {
            value: d_data,
            n_used: 0,
            config: EstimatorConfig::default(),
            spread: None,
        },
        peaks: dmax
            .iter()
            .enumerate()
            .map(|(i, &d)| ModelPeak {
                architecture: format!("arch{i}"),
                run: None,
                peak: PeakSummary {
                    i_star: 2,
                    d_max: d,
                    rel_depth: 0.5,
                },
            })
            .collect(),
    }
}

#[test]
fn exactly_doubled_peaks_correlate_perfectly() {
    let recs = vec![
        record("a", Domain::Natural, 10.0, &[18.0, 22.0]),
        record("b", Domain::Natural, 13.0, &[26.0, 25.0, 27.0]),
        record("c", Domain::Medical, 4.0, &[8.0]),
        record("d", Domain::Medical, 7.5, &[14.0, 16.0]),
    ];
    let rep = correlate_peak_vs_data(&recs).unwrap();
    assert!((rep.r - 1.0).abs() <= 1e-12);
    assert!((rep.fit.slope - 2.0).abs() <= 1e-12);
    assert!(rep.fit.intercept.abs() <= 1e-12);
    assert_eq!(rep.pooled.n_points, 8);
    assert!(rep.pooled.r < rep.r);
    assert_eq!(rep.points[1].std_dmax, (2.0_f64 / 3.0).sqrt());
}
