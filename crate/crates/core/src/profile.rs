//! Layer-wise intrinsic dimension curves of one trained model.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{EstimatorConfig, IdEstimate};
use crate::npy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestMetadata {
    pub train_size: u64,
    /// Class pair or task label.
    pub task: String,
    pub input_dims: u64,
    pub class_count: u64,
    /// Architecture shared by repeated runs; defaults to the model id when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub architecture: Option<String>,
    /// Producer-specific fields (sample-order hash, activation convention, ...).
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerEntry {
    pub index: usize,
    pub name: String,
    pub dump: PathBuf,
}

/// Ordered per-layer activation dumps of one model over one sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerManifest {
    pub model_id: String,
    pub dataset_id: String,
    #[serde(rename = "L")]
    pub layer_count: usize,
    pub metadata: ManifestMetadata,
    pub layers: Vec<LayerEntry>,
    /// Directory that relative dump paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl LayerManifest {
    pub fn architecture(&self) -> &str {
        self.metadata
            .architecture
            .as_deref()
            .unwrap_or(&self.model_id)
    }

    pub fn dump_path(&self, layer: &LayerEntry) -> PathBuf {
        if layer.dump.is_absolute() {
            layer.dump.clone()
        } else {
            self.base_dir.join(&layer.dump)
        }
    }

    /// Structural checks that do not touch the dumps.
    pub fn validate_schema(&self) -> Result<()> {
        if self.layer_count < 2 {
            return Err(Error::Schema(format!(
                "L = {} but at least 2 layers are required",
                self.layer_count
            )));
        }
        if self.layers.len() != self.layer_count {
            return Err(Error::Schema(format!(
                "L = {} but {} layers are listed",
                self.layer_count,
                self.layers.len()
            )));
        }
        for (pos, layer) in self.layers.iter().enumerate() {
            if layer.index != pos + 1 {
                return Err(Error::Schema(format!(
                    "layer indices must run 1..={} in order; entry {} has index {}",
                    self.layer_count,
                    pos + 1,
                    layer.index
                )));
            }
        }
        Ok(())
    }

    /// Row count shared by all dumps, checked from their headers.
    pub fn check_dumps(&self) -> Result<usize> {
        let mut expected = None;
        for layer in &self.layers {
            let path = self.dump_path(layer);
            if !path.is_file() {
                return Err(Error::MissingDump(path));
            }
            let header = npy::read_header(&path).map_err(|e| e.at_layer(layer.index))?;
            match expected {
                None => expected = Some(header.rows),
                Some(rows) if rows != header.rows => {
                    return Err(Error::RowCountMismatch {
                        index: layer.index,
                        expected: rows,
                        found: header.rows,
                    })
                }
                Some(_) => {}
            }
        }
        Ok(expected.unwrap_or(0))
    }
}

/// Parse a manifest, validate it and cross-check its dumps.
pub fn load_manifest(path: &Path) -> Result<LayerManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut manifest: LayerManifest =
        serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?;
    manifest.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    manifest.validate_schema()?;
    manifest.check_dumps()?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerFailure {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub index: usize,
    pub name: String,
    pub relative_depth: f64,
    /// `None` when estimation failed on this layer; see `failure`.
    pub estimate: Option<IdEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<LayerFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdCurve {
    pub model_id: String,
    pub dataset_id: String,
    #[serde(rename = "L")]
    pub layer_count: usize,
    pub points: Vec<CurvePoint>,
}

impl IdCurve {
    /// Curve with one fully specified value per layer, `L = values.len()`.
    pub fn from_values(model_id: &str, dataset_id: &str, values: &[f64]) -> Self {
        let l = values.len();
        let points = values
            .iter()
            .enumerate()
            .map(|(pos, &value)| CurvePoint {
                index: pos + 1,
                name: format!("layer{}", pos + 1),
                relative_depth: (pos + 1) as f64 / l as f64,
                estimate: Some(IdEstimate {
                    value,
                    n_used: 0,
                    config: EstimatorConfig::default(),
                    spread: None,
                }),
                failure: None,
            })
            .collect();
        Self {
            model_id: model_id.into(),
            dataset_id: dataset_id.into(),
            layer_count: l,
            points,
        }
    }

    /// `(index, value)` for every layer with an estimate.
    pub fn values(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.points
            .iter()
            .filter_map(|p| p.estimate.as_ref().map(|e| (p.index, e.value)))
    }

    pub fn failures(&self) -> impl Iterator<Item = &CurvePoint> {
        self.points.iter().filter(|p| p.failure.is_some())
    }
}

/// Estimate each layer's intrinsic dimension in manifest order.
///
/// Estimator failures on a single layer (duplicates, degenerate rows) are
/// recorded on that curve point and the layer is left out of the peak search.
/// I/O and format errors abort with the layer index attached.
pub fn compute_curve(manifest: &LayerManifest, config: &EstimatorConfig) -> Result<IdCurve> {
    manifest.validate_schema()?;
    config.validate()?;
    let l = manifest.layer_count;
    let mut points = Vec::with_capacity(l);
    for layer in &manifest.layers {
        let path = manifest.dump_path(layer);
        if !path.is_file() {
            return Err(Error::MissingDump(path));
        }
        let cloud = npy::read_npy(&path).map_err(|e| e.at_layer(layer.index))?;
        if config.k + 1 > cloud.n_points() {
            return Err(Error::KTooLarge {
                k: config.k,
                n_points: cloud.n_points(),
            }
            .at_layer(layer.index));
        }
        let (estimate, failure) = match cloud.estimate_id(config) {
            Ok(est) => (Some(est), None),
            Err(e @ (Error::DuplicatePoints { .. } | Error::DegenerateRow { .. })) => (
                None,
                Some(LayerFailure {
                    code: e.code().to_string(),
                    message: e.to_string(),
                }),
            ),
            Err(e) => return Err(e.at_layer(layer.index)),
        };
        points.push(CurvePoint {
            index: layer.index,
            name: layer.name.clone(),
            relative_depth: layer.index as f64 / l as f64,
            estimate,
            failure,
        });
    }
    Ok(IdCurve {
        model_id: manifest.model_id.clone(),
        dataset_id: manifest.dataset_id.clone(),
        layer_count: l,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakSummary {
    pub i_star: usize,
    pub d_max: f64,
    pub rel_depth: f64,
}

/// Earliest layer attaining the maximum estimate.
pub fn find_peak(curve: &IdCurve) -> Result<PeakSummary> {
    let mut best: Option<(usize, f64)> = None;
    for (index, value) in curve.values() {
        match best {
            Some((_, v)) if value <= v => {}
            _ => best = Some((index, value)),
        }
    }
    let (i_star, d_max) = best.ok_or(Error::EmptyCurve)?;
    Ok(PeakSummary {
        i_star,
        d_max,
        rel_depth: i_star as f64 / curve.layer_count as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tie_goes_to_earliest_layer() {
        let p = find_peak(&IdCurve::from_values("m", "d", &[3.0, 7.0, 7.0, 2.0])).unwrap();
        assert_eq!(
            p,
            PeakSummary {
                i_star: 2,
                d_max: 7.0,
                rel_depth: 0.5
            }
        );
    }

    #[test]
    fn increasing_curve_peaks_at_last_layer() {
        let p = find_peak(&IdCurve::from_values("m", "d", &[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(p.i_star, 3);
        assert_eq!(p.rel_depth, 1.0);
    }

    #[test]
    fn failed_layers_are_skipped() {
        let mut c = IdCurve::from_values("m", "d", &[3.0, 9.0, 4.0]);
        c.points[1].estimate = None;
        c.points[1].failure = Some(LayerFailure {
            code: "DegenerateRow".into(),
            message: String::new(),
        });
        assert_eq!(find_peak(&c).unwrap().i_star, 3);
        for p in &mut c.points {
            p.estimate = None;
        }
        assert!(matches!(find_peak(&c), Err(Error::EmptyCurve)));
    }

    #[test]
    fn schema_checks() {
        let json = r#"{"model_id":"m","dataset_id":"d","L":3,
            "metadata":{"train_size":10,"task":"0-1","input_dims":4,"class_count":2,"order_hash":"ab"},
            "layers":[{"index":1,"name":"a","dump":"a.npy"},{"index":3,"name":"c","dump":"c.npy"}]}"#;
        let m: LayerManifest = serde_json::from_str(json).unwrap();
        assert_eq!(m.metadata.extra["order_hash"], "ab");
        assert!(matches!(m.validate_schema(), Err(Error::Schema(_))));

        let mut fixed = m.clone();
        fixed.layers.push(LayerEntry {
            index: 3,
            name: "c".into(),
            dump: "c.npy".into(),
        });
        fixed.layers[1].index = 2;
        fixed.validate_schema().unwrap();

        let mut single = fixed.clone();
        single.layer_count = 1;
        single.layers.truncate(1);
        assert!(matches!(single.validate_schema(), Err(Error::Schema(_))));
        assert_eq!(fixed.architecture(), "m");
    }

    proptest! {
        #[test]
        fn peak_matches_linear_scan(values in prop::collection::vec(0u8..6, 1..30)) {
            let vals: Vec<f64> = values.iter().map(|&v| f64::from(v)).collect();
            let curve = IdCurve::from_values("m", "d", &vals);
            let peak = find_peak(&curve).unwrap();

            let mut oracle = 0;
            for i in 1..vals.len() {
                if vals[i] > vals[oracle] {
                    oracle = i;
                }
            }
            prop_assert_eq!(peak.i_star, oracle + 1);
            prop_assert_eq!(peak.d_max, vals.iter().cloned().fold(f64::MIN, f64::max));
            prop_assert_eq!(peak.rel_depth, (oracle + 1) as f64 / vals.len() as f64);
        }
    }
}
