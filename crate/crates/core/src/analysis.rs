//! Cross-model and cross-dataset statistics over peak summaries.
//!
//! All `±` intervals are population standard deviations. For natural-image
//! datasets, repeated runs (class pairings) of one architecture are averaged
//! first; the per-architecture values are then averaged across architectures.

use std::collections::BTreeMap;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::IdEstimate;
use crate::profile::PeakSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Natural,
    Medical,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Natural => "natural",
            Domain::Medical => "medical",
        }
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" => Ok(Domain::Natural),
            "medical" => Ok(Domain::Medical),
            other => Err(Error::Records(format!("unknown domain {other:?}"))),
        }
    }
}

/// Peak of one trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPeak {
    pub architecture: String,
    /// Run label (e.g. the class pairing) distinguishing repeated trainings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<String>,
    #[serde(flatten)]
    pub peak: PeakSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub dataset_id: String,
    pub domain: Domain,
    pub d_data: IdEstimate,
    pub peaks: Vec<ModelPeak>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakAggregate {
    pub dataset_id: String,
    pub domain: Domain,
    /// Number of averaged units (architectures for natural data, models otherwise).
    pub n_models: usize,
    pub mean_dmax: f64,
    pub std_dmax: f64,
    pub mean_rel_depth: f64,
    pub std_rel_depth: f64,
    pub d_data: f64,
}

/// Mean and spread of the per-dataset means within one domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainAggregate {
    pub domain: Domain,
    pub n_datasets: usize,
    pub mean_dmax: f64,
    pub std_dmax: f64,
    pub mean_rel_depth: f64,
    pub std_rel_depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub datasets: Vec<PeakAggregate>,
    pub domains: Vec<DomainAggregate>,
}

/// Arithmetic mean and population standard deviation (two-pass).
pub fn mean_std<F: Float>(values: &[F]) -> Result<(F, F)> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = F::from(values.len()).expect("length fits in a float");
    let mean = values.iter().fold(F::zero(), |acc, &v| acc + v) / n;
    let var = values
        .iter()
        .fold(F::zero(), |acc, &v| acc + (v - mean) * (v - mean))
        / n;
    Ok((mean, var.sqrt()))
}

/// `(d_max, rel_depth)` per averaging unit of one record.
fn units(record: &DatasetRecord) -> Result<Vec<(f64, f64)>> {
    if record.peaks.is_empty() {
        return Err(Error::EmptyRecord(record.dataset_id.clone()));
    }
    if record.domain == Domain::Medical {
        return Ok(record
            .peaks
            .iter()
            .map(|p| (p.peak.d_max, p.peak.rel_depth))
            .collect());
    }
    // First-appearance order keeps floating-point sums reproducible.
    let mut order: Vec<&str> = Vec::new();
    let mut runs: BTreeMap<&str, Vec<&PeakSummary>> = BTreeMap::new();
    for p in &record.peaks {
        let arch = p.architecture.as_str();
        if !runs.contains_key(arch) {
            order.push(arch);
        }
        runs.entry(arch).or_default().push(&p.peak);
    }
    Ok(order
        .into_iter()
        .map(|arch| {
            let peaks = &runs[arch];
            let n = peaks.len() as f64;
            let dmax = peaks.iter().map(|p| p.d_max).sum::<f64>() / n;
            let rel = peaks.iter().map(|p| p.rel_depth).sum::<f64>() / n;
            (dmax, rel)
        })
        .collect())
}

fn aggregate_record(record: &DatasetRecord) -> Result<PeakAggregate> {
    let units = units(record)?;
    let dmax: Vec<f64> = units.iter().map(|u| u.0).collect();
    let rel: Vec<f64> = units.iter().map(|u| u.1).collect();
    let (mean_dmax, std_dmax) = mean_std(&dmax)?;
    let (mean_rel_depth, std_rel_depth) = mean_std(&rel)?;
    Ok(PeakAggregate {
        dataset_id: record.dataset_id.clone(),
        domain: record.domain,
        n_models: units.len(),
        mean_dmax,
        std_dmax,
        mean_rel_depth,
        std_rel_depth,
        d_data: record.d_data.value,
    })
}

fn aggregate_domains(datasets: &[PeakAggregate]) -> Vec<DomainAggregate> {
    [Domain::Natural, Domain::Medical]
        .into_iter()
        .filter_map(|domain| {
            let members: Vec<&PeakAggregate> =
                datasets.iter().filter(|a| a.domain == domain).collect();
            if members.is_empty() {
                return None;
            }
            let dmax: Vec<f64> = members.iter().map(|a| a.mean_dmax).collect();
            let rel: Vec<f64> = members.iter().map(|a| a.mean_rel_depth).collect();
            let (mean_dmax, std_dmax) = mean_std(&dmax).expect("nonempty");
            let (mean_rel_depth, std_rel_depth) = mean_std(&rel).expect("nonempty");
            Some(DomainAggregate {
                domain,
                n_datasets: members.len(),
                mean_dmax,
                std_dmax,
                mean_rel_depth,
                std_rel_depth,
            })
        })
        .collect()
}

/// Per-dataset peak statistics and their domain-level averages.
pub fn aggregate_peaks(records: &[DatasetRecord]) -> Result<AggregateReport> {
    let datasets = records
        .iter()
        .map(aggregate_record)
        .collect::<Result<Vec<_>>>()?;
    let domains = aggregate_domains(&datasets);
    Ok(AggregateReport { datasets, domains })
}

fn check_pair<F: Float>(xs: &[F], ys: &[F]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

fn centered_moments<F: Float>(xs: &[F], ys: &[F]) -> (F, F, F, F, F) {
    let n = F::from(xs.len()).expect("length fits in a float");
    let mx = xs.iter().fold(F::zero(), |a, &v| a + v) / n;
    let my = ys.iter().fold(F::zero(), |a, &v| a + v) / n;
    let (mut sxx, mut syy, mut sxy) = (F::zero(), F::zero(), F::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
        sxy = sxy + dx * dy;
    }
    (mx, my, sxx, syy, sxy)
}

/// Sample Pearson correlation coefficient, clamped to [-1, 1].
pub fn pearson_r<F: Float>(xs: &[F], ys: &[F]) -> Result<F> {
    check_pair(xs, ys)?;
    let (_, _, sxx, syy, sxy) = centered_moments(xs, ys);
    if !(sxx > F::zero()) {
        return Err(Error::ZeroVariance("xs"));
    }
    if !(syy > F::zero()) {
        return Err(Error::ZeroVariance("ys"));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-F::one()).min(F::one()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit<F> {
    pub slope: F,
    pub intercept: F,
}

/// Ordinary least squares `y = slope * x + intercept`. Constant `ys` are fine.
pub fn linear_fit<F: Float>(xs: &[F], ys: &[F]) -> Result<LinearFit<F>> {
    check_pair(xs, ys)?;
    let (mx, my, sxx, _, sxy) = centered_moments(xs, ys);
    if !(sxx > F::zero()) {
        return Err(Error::ZeroVariance("xs"));
    }
    let slope = sxy / sxx;
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPoint {
    pub dataset_id: String,
    pub domain: Domain,
    pub d_data: f64,
    pub d_data_spread: Option<f64>,
    pub mean_dmax: f64,
    pub std_dmax: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledCorrelation {
    pub n_points: usize,
    pub r: f64,
    pub fit: LinearFit<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub points: Vec<CorrelationPoint>,
    pub r: f64,
    pub fit: LinearFit<f64>,
    /// Same statistics over every individual model peak instead of dataset means.
    pub pooled: PooledCorrelation,
}

/// Correlate model-averaged peak ID against dataset ID, one point per dataset.
pub fn correlate_peak_vs_data(records: &[DatasetRecord]) -> Result<CorrelationReport> {
    if records.len() < 3 {
        return Err(Error::TooFewDatasets(records.len()));
    }
    let report = aggregate_peaks(records)?;
    let points: Vec<CorrelationPoint> = report
        .datasets
        .iter()
        .zip(records)
        .map(|(agg, rec)| CorrelationPoint {
            dataset_id: agg.dataset_id.clone(),
            domain: agg.domain,
            d_data: agg.d_data,
            d_data_spread: rec.d_data.spread,
            mean_dmax: agg.mean_dmax,
            std_dmax: agg.std_dmax,
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.d_data).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_dmax).collect();

    let (pooled_x, pooled_y): (Vec<f64>, Vec<f64>) = records
        .iter()
        .flat_map(|rec| rec.peaks.iter().map(|p| (rec.d_data.value, p.peak.d_max)))
        .unzip();

    Ok(CorrelationReport {
        r: pearson_r(&xs, &ys)?,
        fit: linear_fit(&xs, &ys)?,
        pooled: PooledCorrelation {
            n_points: pooled_x.len(),
            r: pearson_r(&pooled_x, &pooled_y)?,
            fit: linear_fit(&pooled_x, &pooled_y)?,
        },
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub train_size: u64,
    #[serde(flatten)]
    pub aggregate: DomainAggregate,
}

/// Domain-level aggregates for each training-set size, ordered by size then domain.
pub fn sweep_report(groups: &BTreeMap<u64, Vec<DatasetRecord>>) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for (&train_size, records) in groups {
        if records.is_empty() {
            return Err(Error::EmptyGroup(train_size));
        }
        let report = aggregate_peaks(records)?;
        rows.extend(report.domains.into_iter().map(|aggregate| SweepRow {
            train_size,
            aggregate,
        }));
    }
    Ok(rows)
}
