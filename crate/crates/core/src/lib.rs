//! Intrinsic dimension of point clouds and of neural network representations.
//!
//! The nearest-neighbor maximum-likelihood estimator ([`estimator`]) runs on
//! exact kNN distances ([`neighbors`]). [`profile`] turns a manifest of per-layer
//! activation dumps into an ID-versus-depth curve and locates its peak;
//! [`analysis`] aggregates peaks across models and datasets and correlates them
//! with input-space ID. [`synth`] generates clouds of known dimension.
//!
//! Point clouds are generic over the element type ([`Scalar`]: `f32` or `f64`);
//! distances are always accumulated in `f64`.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cloud;
pub mod error;
pub mod estimator;
pub mod neighbors;
pub mod npy;
pub mod plot;
pub mod profile;
pub mod report;
pub mod scalar;
pub mod synth;

pub use analysis::{
    aggregate_peaks, correlate_peak_vs_data, linear_fit, pearson_r, sweep_report, AggregateReport,
    CorrelationReport, DatasetRecord, Domain, LinearFit, ModelPeak, PeakAggregate,
};
pub use cloud::PointCloud;
pub use error::{Error, Result};
pub use estimator::{
    aggregate, estimate_id, local_mle, Aggregation, Bootstrap, EstimatorConfig, IdEstimate, Jitter,
    Subsample,
};
pub use neighbors::{knn_distances, knn_distances_subsampled, NeighborTable};
pub use npy::DynPointCloud;
pub use profile::{compute_curve, find_peak, load_manifest, IdCurve, LayerManifest, PeakSummary};
pub use scalar::Scalar;
pub use synth::{layered_stack, ManifoldKind, ManifoldSpec, StackSpec};

pub type PointCloud32 = PointCloud<f32>;
pub type PointCloud64 = PointCloud<f64>;
pub type LinearFit64 = LinearFit<f64>;
