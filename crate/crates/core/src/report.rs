//! On-disk report documents (JSON) and tables (CSV), and loading of record
//! directories for the cross-dataset commands.
//!
//! A record directory holds JSON files distinguished by their `"kind"`:
//!
//! * `"profile"`: a [`ProfileReport`] for one trained model;
//! * `"estimate"`: an [`EstimateReport`] carrying `dataset_id` and `domain`,
//!   which supplies that dataset's input-space ID;
//! * `"record"`: a complete [`DatasetRecord`].
//!
//! Files are read in file-name order and datasets are emitted sorted by id.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    AggregateReport, CorrelationReport, DatasetRecord, Domain, ModelPeak, SweepRow,
};
use crate::error::{Error, Result};
use crate::estimator::IdEstimate;
use crate::profile::{IdCurve, LayerManifest, PeakSummary};

pub const PROFILE_KIND: &str = "profile";
pub const ESTIMATE_KIND: &str = "estimate";
pub const RECORD_KIND: &str = "record";

pub const STD_NOTE: &str = "intervals are population standard deviations";
pub const RUN_NOTE: &str =
    "natural-domain runs are averaged within each architecture before averaging across architectures";
pub const CORRELATION_NOTE: &str =
    "r and fit use one model-averaged point per dataset; 'pooled' uses every model peak";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub kind: String,
    /// File name of the estimated dump.
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    pub estimate: IdEstimate,
}

impl EstimateReport {
    pub fn new(source: &Path, estimate: IdEstimate) -> Self {
        Self {
            kind: ESTIMATE_KIND.into(),
            source: file_name(source),
            dataset_id: None,
            domain: None,
            estimate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub kind: String,
    pub model_id: String,
    pub dataset_id: String,
    pub architecture: String,
    pub train_size: u64,
    pub task: String,
    pub curve: IdCurve,
    pub peak: Option<PeakSummary>,
    pub warnings: Vec<String>,
}

impl ProfileReport {
    pub fn new(manifest: &LayerManifest, curve: IdCurve, peak: Option<PeakSummary>) -> Self {
        let warnings = curve
            .failures()
            .map(|p| {
                let f = p.failure.as_ref().expect("filtered on failure");
                format!("layer {} ({}) excluded: {}", p.index, p.name, f.message)
            })
            .collect();
        Self {
            kind: PROFILE_KIND.into(),
            model_id: manifest.model_id.clone(),
            dataset_id: manifest.dataset_id.clone(),
            architecture: manifest.architecture().to_string(),
            train_size: manifest.metadata.train_size,
            task: manifest.metadata.task.clone(),
            curve,
            peak,
            warnings,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordFile {
    pub kind: String,
    #[serde(flatten)]
    pub record: DatasetRecord,
}

/// A report body with explanatory notes attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotated<T> {
    pub notes: Vec<String>,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Annotated<T> {
    pub fn new(notes: &[&str], body: T) -> Self {
        Self {
            notes: notes.iter().map(|s| s.to_string()).collect(),
            body,
        }
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn json_files(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|entry| entry.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    Ok(files)
}

#[derive(Default)]
struct Partial {
    domain: Option<Domain>,
    d_data: Option<IdEstimate>,
    peaks: Vec<ModelPeak>,
    complete: bool,
}

/// Assemble one [`DatasetRecord`] per dataset from a record directory.
pub fn load_records(dir: &Path) -> Result<Vec<DatasetRecord>> {
    let mut datasets: BTreeMap<String, Partial> = BTreeMap::new();
    for path in json_files(dir)? {
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let kind = value
            .get("kind")
            .and_then(|k| k.as_str())
            .unwrap_or_default();
        let name = file_name(&path);
        match kind {
            PROFILE_KIND => {
                let p: ProfileReport = serde_json::from_value(value)?;
                let peak = p.peak.ok_or_else(|| {
                    Error::Records(format!("{name}: profile has no peak (every layer failed)"))
                })?;
                let entry = datasets.entry(p.dataset_id.clone()).or_default();
                if entry.complete {
                    return Err(Error::Records(format!(
                        "{name}: dataset {:?} already given as a full record",
                        p.dataset_id
                    )));
                }
                entry.peaks.push(ModelPeak {
                    architecture: p.architecture,
                    run: Some(p.task),
                    peak,
                });
            }
            ESTIMATE_KIND => {
                let e: EstimateReport = serde_json::from_value(value)?;
                let (Some(id), Some(domain)) = (e.dataset_id, e.domain) else {
                    return Err(Error::Records(format!(
                        "{name}: estimate lacks dataset_id or domain"
                    )));
                };
                let entry = datasets.entry(id.clone()).or_default();
                if entry.d_data.is_some() {
                    return Err(Error::Records(format!("{name}: second d_data for {id:?}")));
                }
                entry.domain = Some(domain);
                entry.d_data = Some(e.estimate);
            }
            RECORD_KIND => {
                let r: RecordFile = serde_json::from_value(value)?;
                let id = r.record.dataset_id.clone();
                let entry = datasets.entry(id.clone()).or_default();
                if entry.d_data.is_some() || !entry.peaks.is_empty() {
                    return Err(Error::Records(format!(
                        "{name}: dataset {id:?} given twice"
                    )));
                }
                *entry = Partial {
                    domain: Some(r.record.domain),
                    d_data: Some(r.record.d_data),
                    peaks: r.record.peaks,
                    complete: true,
                };
            }
            other => {
                return Err(Error::Records(format!("{name}: unknown kind {other:?}")));
            }
        }
    }

    datasets
        .into_iter()
        .map(|(dataset_id, p)| {
            let (Some(domain), Some(d_data)) = (p.domain, p.d_data) else {
                return Err(Error::Records(format!(
                    "dataset {dataset_id:?} has peaks but no d_data estimate"
                )));
            };
            if p.peaks.is_empty() {
                return Err(Error::EmptyRecord(dataset_id));
            }
            Ok(DatasetRecord {
                dataset_id,
                domain,
                d_data,
                peaks: p.peaks,
            })
        })
        .collect()
}

/// Record directories under `root`, keyed by the training-set size parsed from
/// the digits of each subdirectory name (`500`, `N500`, `n_500`, ...).
pub fn load_sweep(root: &Path) -> Result<BTreeMap<u64, Vec<DatasetRecord>>> {
    let mut groups = BTreeMap::new();
    for entry in fs::read_dir(root).map_err(|e| Error::io(root, e))? {
        let path = entry.map_err(|e| Error::io(root, e))?.path();
        if !path.is_dir() {
            continue;
        }
        let name = file_name(&path);
        let digits: String = name.chars().filter(char::is_ascii_digit).collect();
        let n: u64 = digits.parse().map_err(|_| {
            Error::Records(format!(
                "cannot read a training-set size from directory {name:?}"
            ))
        })?;
        if groups.insert(n, load_records(&path)?).is_some() {
            return Err(Error::Records(format!(
                "training-set size {n} appears twice"
            )));
        }
    }
    if groups.is_empty() {
        return Err(Error::Records(format!(
            "no size subdirectories under {}",
            root.display()
        )));
    }
    Ok(groups)
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn curve_csv(curve: &IdCurve) -> Result<String> {
    let rows = curve
        .points
        .iter()
        .map(|p| {
            vec![
                p.index.to_string(),
                p.name.clone(),
                p.relative_depth.to_string(),
                opt(p.estimate.as_ref().map(|e| e.value)),
                opt(p.estimate.as_ref().and_then(|e| e.spread)),
                p.failure.as_ref().map_or("ok".into(), |f| f.code.clone()),
            ]
        })
        .collect();
    csv_string(
        &["index", "name", "relative_depth", "id", "spread", "status"],
        rows,
    )
}

/// One row per dataset, then one row per domain average.
pub fn aggregate_csv(report: &AggregateReport) -> Result<String> {
    let mut rows: Vec<Vec<String>> = report
        .datasets
        .iter()
        .map(|a| {
            vec![
                "dataset".into(),
                a.dataset_id.clone(),
                a.domain.as_str().into(),
                a.n_models.to_string(),
                a.mean_dmax.to_string(),
                a.std_dmax.to_string(),
                a.mean_rel_depth.to_string(),
                a.std_rel_depth.to_string(),
                a.d_data.to_string(),
            ]
        })
        .collect();
    rows.extend(report.domains.iter().map(|d| {
        vec![
            "domain".into(),
            String::new(),
            d.domain.as_str().into(),
            d.n_datasets.to_string(),
            d.mean_dmax.to_string(),
            d.std_dmax.to_string(),
            d.mean_rel_depth.to_string(),
            d.std_rel_depth.to_string(),
            String::new(),
        ]
    }));
    csv_string(
        &[
            "scope",
            "dataset_id",
            "domain",
            "n",
            "dmax_mean",
            "dmax_std_pop",
            "rel_depth_mean",
            "rel_depth_std_pop",
            "d_data",
        ],
        rows,
    )
}

pub fn correlation_csv(report: &CorrelationReport) -> Result<String> {
    let rows = report
        .points
        .iter()
        .map(|p| {
            vec![
                p.dataset_id.clone(),
                p.domain.as_str().into(),
                p.d_data.to_string(),
                opt(p.d_data_spread),
                p.mean_dmax.to_string(),
                p.std_dmax.to_string(),
            ]
        })
        .collect();
    csv_string(
        &[
            "dataset_id",
            "domain",
            "d_data",
            "d_data_spread",
            "dmax_mean",
            "dmax_std_pop",
        ],
        rows,
    )
}

/// One row per (training-set size, domain).
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let body = rows
        .iter()
        .map(|r| {
            let a = &r.aggregate;
            vec![
                r.train_size.to_string(),
                a.domain.as_str().into(),
                a.n_datasets.to_string(),
                a.mean_dmax.to_string(),
                a.std_dmax.to_string(),
                a.mean_rel_depth.to_string(),
                a.std_rel_depth.to_string(),
            ]
        })
        .collect();
    csv_string(
        &[
            "train_size",
            "domain",
            "n_datasets",
            "dmax_mean",
            "dmax_std_pop",
            "rel_depth_mean",
            "rel_depth_std_pop",
        ],
        body,
    )
}
