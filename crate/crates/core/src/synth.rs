//! Seeded point clouds with known intrinsic dimension.
//!
//! All randomness comes from one `ChaCha8Rng` per cloud, seeded with
//! `seed_from_u64(seed)`. Draws happen in a fixed order: the embedding matrix
//! (row-major, standard normals) when one is needed, then the points row by row,
//! then the noise row by row. ChaCha output and the `rand_distr` samplers are
//! platform-independent, so clouds are bit-identical everywhere.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::npy;
use crate::profile::{LayerEntry, LayerManifest, ManifestMetadata};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    Hypercube,
    Hypersphere,
    SwissRoll,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    pub kind: ManifoldKind,
    pub intrinsic_dim: usize,
    pub ambient_dim: usize,
    pub n_points: usize,
    #[serde(default)]
    pub noise_sigma: f64,
    pub seed: u64,
}

impl ManifoldSpec {
    pub fn new(
        kind: ManifoldKind,
        intrinsic_dim: usize,
        ambient_dim: usize,
        n_points: usize,
        seed: u64,
    ) -> Self {
        Self {
            kind,
            intrinsic_dim,
            ambient_dim,
            n_points,
            noise_sigma: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.intrinsic_dim;
        let invalid = |msg: String| Err(Error::SpecInvalid(msg));
        if d == 0 {
            return invalid("intrinsic dimension must be at least 1".into());
        }
        if d > self.ambient_dim {
            return invalid(format!(
                "intrinsic dimension {d} exceeds ambient {}",
                self.ambient_dim
            ));
        }
        if self.n_points < d + 2 {
            return invalid(format!(
                "need at least {} points, got {}",
                d + 2,
                self.n_points
            ));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return invalid(format!(
                "noise sigma must be finite and >= 0, got {}",
                self.noise_sigma
            ));
        }
        match self.kind {
            ManifoldKind::Hypercube => Ok(()),
            ManifoldKind::Hypersphere if self.ambient_dim < d + 1 => invalid(format!(
                "S^{d} lives in R^{}; ambient dimension {} is too small",
                d + 1,
                self.ambient_dim
            )),
            ManifoldKind::Hypersphere => Ok(()),
            ManifoldKind::SwissRoll if d != 2 => invalid(format!(
                "the swiss roll is 2-dimensional, got intrinsic_dim {d}"
            )),
            ManifoldKind::SwissRoll if self.ambient_dim < 3 => {
                invalid("the swiss roll needs ambient dimension >= 3".into())
            }
            ManifoldKind::SwissRoll => Ok(()),
        }
    }
}

/// Random `ambient x intrinsic` matrix with orthonormal columns (thin QR of a
/// Gaussian matrix).
pub fn orthonormal_embedding(ambient: usize, intrinsic: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let entries: Vec<f64> = (0..ambient * intrinsic)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    DMatrix::from_row_slice(ambient, intrinsic, &entries)
        .qr()
        .q()
}

/// Maps `n x m` row-major coordinates into R^D through `basis` (identity when
/// absent, i.e. `m == D`), then adds isotropic noise.
fn embed<T: Scalar>(
    coords: Vec<f64>,
    m: usize,
    spec: &ManifoldSpec,
    rng: &mut ChaCha8Rng,
    basis: Option<DMatrix<f64>>,
) -> Result<PointCloud<T>> {
    let n = spec.n_points;
    let big_d = spec.ambient_dim;
    let mut out = match basis {
        None => coords,
        Some(q) => {
            let mut out = Vec::with_capacity(n * big_d);
            for row in coords.chunks_exact(m) {
                for r in 0..big_d {
                    let mut acc = 0.0;
                    for (c, x) in row.iter().enumerate() {
                        acc += q[(r, c)] * x;
                    }
                    out.push(acc);
                }
            }
            out
        }
    };
    if spec.noise_sigma > 0.0 {
        let noise = Normal::new(0.0, spec.noise_sigma).expect("sigma validated");
        for v in &mut out {
            *v += noise.sample(rng);
        }
    }
    PointCloud::new(out.into_iter().map(T::narrow).collect(), n, big_d)
}

fn basis_for(m: usize, spec: &ManifoldSpec, rng: &mut ChaCha8Rng) -> Option<DMatrix<f64>> {
    (m != spec.ambient_dim).then(|| orthonormal_embedding(spec.ambient_dim, m, rng))
}

fn check_kind(spec: &ManifoldSpec, kind: ManifoldKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::SpecInvalid(format!(
            "expected kind {kind:?}, got {:?}",
            spec.kind
        )));
    }
    spec.validate()
}

/// Uniform points in `[0, 1]^d`, isometrically embedded in R^D.
pub fn hypercube<T: Scalar>(spec: &ManifoldSpec) -> Result<PointCloud<T>> {
    check_kind(spec, ManifoldKind::Hypercube)?;
    let d = spec.intrinsic_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let basis = basis_for(d, spec, &mut rng);
    let coords = (0..spec.n_points * d)
        .map(|_| rng.random::<f64>())
        .collect();
    embed(coords, d, spec, &mut rng, basis)
}

/// Uniform points on the unit sphere S^d in R^(d+1), isometrically embedded in R^D.
pub fn hypersphere<T: Scalar>(spec: &ManifoldSpec) -> Result<PointCloud<T>> {
    check_kind(spec, ManifoldKind::Hypersphere)?;
    let m = spec.intrinsic_dim + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let basis = basis_for(m, spec, &mut rng);
    let mut coords = Vec::with_capacity(spec.n_points * m);
    for _ in 0..spec.n_points {
        let v: Vec<f64> = loop {
            let v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
            if v.iter().any(|x| *x != 0.0) {
                break v;
            }
        };
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        coords.extend(v.into_iter().map(|x| x / norm));
    }
    embed(coords, m, spec, &mut rng, basis)
}

/// The roll `(t cos t, h, t sin t)` with `t` uniform in `[1.5 pi, 4.5 pi]` and
/// `h` uniform in `[0, 21]`, embedded in R^D.
pub fn swiss_roll<T: Scalar>(spec: &ManifoldSpec) -> Result<PointCloud<T>> {
    check_kind(spec, ManifoldKind::SwissRoll)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let basis = basis_for(3, spec, &mut rng);
    let mut coords = Vec::with_capacity(spec.n_points * 3);
    for _ in 0..spec.n_points {
        let t = 1.5 * PI * (1.0 + 2.0 * rng.random::<f64>());
        let h = 21.0 * rng.random::<f64>();
        coords.extend([t * t.cos(), h, t * t.sin()]);
    }
    embed(coords, 3, spec, &mut rng, basis)
}

pub fn generate<T: Scalar>(spec: &ManifoldSpec) -> Result<PointCloud<T>> {
    match spec.kind {
        ManifoldKind::Hypercube => hypercube(spec),
        ManifoldKind::Hypersphere => hypersphere(spec),
        ManifoldKind::SwissRoll => swiss_roll(spec),
    }
}

/// Per-layer hypercube dumps with prescribed intrinsic dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackSpec {
    pub id_sequence: Vec<usize>,
    pub n_points: usize,
    pub ambient_dim: usize,
    pub seed: u64,
}

/// Writes `layer_XX.npy` for each entry of `id_sequence` (layer `i` seeded with
/// `seed + i`) plus `manifest.json` into `out_dir`. Returns the manifest path.
pub fn layered_stack(spec: &StackSpec, out_dir: &Path) -> Result<PathBuf> {
    if spec.id_sequence.is_empty() {
        return Err(Error::SpecInvalid("id_sequence is empty".into()));
    }
    let layer_specs: Vec<ManifoldSpec> = spec
        .id_sequence
        .iter()
        .enumerate()
        .map(|(pos, &d)| {
            ManifoldSpec::new(
                ManifoldKind::Hypercube,
                d,
                spec.ambient_dim,
                spec.n_points,
                spec.seed.wrapping_add(pos as u64 + 1),
            )
        })
        .collect();
    for s in &layer_specs {
        s.validate()?;
    }

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut layers = Vec::with_capacity(layer_specs.len());
    for (pos, s) in layer_specs.iter().enumerate() {
        let index = pos + 1;
        let file = format!("layer_{index:02}.npy");
        let cloud: PointCloud<f64> = hypercube(s)?;
        npy::write_npy(&out_dir.join(&file), &cloud)?;
        layers.push(LayerEntry {
            index,
            name: format!("block{index}_d{}", s.intrinsic_dim),
            dump: file.into(),
        });
    }

    let manifest = LayerManifest {
        model_id: "synthetic".into(),
        dataset_id: "synthetic".into(),
        layer_count: layers.len(),
        metadata: ManifestMetadata {
            train_size: spec.n_points as u64,
            task: format!("ground-truth ids {:?}", spec.id_sequence),
            input_dims: spec.ambient_dim as u64,
            class_count: 2,
            architecture: None,
            extra: Default::default(),
        },
        layers,
        base_dir: out_dir.to_path_buf(),
    };
    let path = out_dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// A synthesis job as read from a JSON spec file: either a single manifold
/// (`kind` = `hypercube` | `hypersphere` | `swiss_roll`) or a `layered_stack`.
#[derive(Debug, Clone, PartialEq)]
pub enum SynthRequest {
    Manifold(ManifoldSpec),
    Stack(StackSpec),
}

impl SynthRequest {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut value: serde_json::Value = serde_json::from_str(text)?;
        let kind = value
            .get("kind")
            .and_then(|k| k.as_str())
            .ok_or_else(|| Error::SpecInvalid("spec needs a string \"kind\"".into()))?;
        if kind == "layered_stack" {
            value
                .as_object_mut()
                .expect("object has a kind")
                .remove("kind");
            Ok(SynthRequest::Stack(serde_json::from_value(value)?))
        } else {
            Ok(SynthRequest::Manifold(serde_json::from_value(value)?))
        }
    }
}
