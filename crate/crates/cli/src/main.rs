use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use idprof_core::report::{self, Annotated, EstimateReport, ProfileReport};
use idprof_core::synth::{self, SynthRequest};
use idprof_core::{
    aggregate_peaks, compute_curve, correlate_peak_vs_data, find_peak, load_manifest, npy, plot,
    sweep_report, Aggregation, Bootstrap, Domain, Error, EstimatorConfig, Jitter, PointCloud,
    Result, Subsample,
};
use serde::Serialize;

/// Intrinsic dimension estimation and layer-wise representation profiling.
#[derive(Debug, Parser)]
#[command(name = "idprof", version)]
struct Cli {
    /// Cap on worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the intrinsic dimension of one NPY matrix (rows are points).
    Estimate {
        /// 2-D float32/float64 NPY file.
        npy: PathBuf,
        #[command(flatten)]
        estimator: EstimatorArgs,
        /// Tag the estimate as the input-space ID of this dataset.
        #[arg(long, requires = "domain")]
        dataset_id: Option<String>,
        /// Domain of the dataset named by --dataset-id.
        #[arg(long, value_enum, requires = "dataset_id")]
        domain: Option<DomainArg>,
        /// Directory for estimate.json; prints to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate every layer listed in a manifest and locate the peak.
    Profile {
        /// Manifest JSON.
        manifest: PathBuf,
        #[command(flatten)]
        estimator: EstimatorArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Per-dataset and per-domain peak statistics from a record directory.
    Aggregate {
        /// Directory of profile / estimate / record JSON files.
        records: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Correlate model-averaged peak ID with dataset ID across datasets.
    Correlate {
        /// Directory of profile / estimate / record JSON files.
        records: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Domain-level peak statistics for each training-set size.
    Sweep {
        /// Directory with one record subdirectory per training-set size (e.g. N500/).
        root: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Generate point clouds of known intrinsic dimension.
    Synth {
        /// JSON spec: a manifold (hypercube, hypersphere, swiss_roll) or a layered_stack.
        spec: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct EstimatorArgs {
    /// Number of nearest neighbors.
    #[arg(long, default_value_t = idprof_core::estimator::DEFAULT_K)]
    k: usize,
    /// Aggregation of local estimates.
    #[arg(long = "agg", value_enum, default_value_t = AggArg::Mackay)]
    aggregation: AggArg,
    /// Estimate from M query points sampled without replacement.
    #[arg(long, value_name = "M")]
    subsample: Option<usize>,
    /// Bootstrap rounds over query points for a spread estimate.
    #[arg(long, value_name = "R")]
    bootstrap: Option<usize>,
    /// Add uniform noise in [-EPS, EPS] to every coordinate before estimation.
    #[arg(long, value_name = "EPS")]
    jitter: Option<f64>,
    /// Seed for subsampling, bootstrap and jitter.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl EstimatorArgs {
    fn config(&self) -> EstimatorConfig {
        EstimatorConfig {
            k: self.k,
            aggregation: match self.aggregation {
                AggArg::Mackay => Aggregation::Mackay,
                AggArg::Levina => Aggregation::Levina,
            },
            subsample: self.subsample.map(|m| Subsample { m, seed: self.seed }),
            bootstrap: self.bootstrap.map(|rounds| Bootstrap {
                rounds,
                seed: self.seed,
            }),
            jitter: self.jitter.map(|eps| Jitter {
                eps,
                seed: self.seed,
            }),
        }
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Output formats to write.
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "json,csv,svg"
    )]
    format: Vec<Format>,
}

impl OutputArgs {
    fn wants(&self, f: Format) -> bool {
        self.format.contains(&f)
    }

    fn prepare(&self) -> Result<&Path> {
        fs::create_dir_all(&self.out).map_err(|e| io_error(&self.out, e))?;
        Ok(&self.out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AggArg {
    Mackay,
    Levina,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DomainArg {
    Natural,
    Medical,
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    report::write_text(&dir.join(name), text)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Estimate {
            npy,
            estimator,
            dataset_id,
            domain,
            out,
        } => {
            let cloud = npy::read_npy(&npy)?;
            let estimate = cloud.estimate_id(&estimator.config())?;
            let mut doc = EstimateReport::new(&npy, estimate);
            doc.dataset_id = dataset_id;
            doc.domain = domain.map(|d| match d {
                DomainArg::Natural => Domain::Natural,
                DomainArg::Medical => Domain::Medical,
            });
            let json = report::to_json(&doc)?;
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
                    write(&dir, "estimate.json", &json)?;
                }
                None => print!("{json}"),
            }
        }
        Command::Profile {
            manifest,
            estimator,
            output,
        } => {
            let manifest = load_manifest(&manifest)?;
            let curve = compute_curve(&manifest, &estimator.config())?;
            let peak = match find_peak(&curve) {
                Ok(p) => Some(p),
                Err(Error::EmptyCurve) => None,
                Err(e) => return Err(e),
            };
            let doc = ProfileReport::new(&manifest, curve, peak);
            for w in &doc.warnings {
                eprintln!("warning: {w}");
            }
            let dir = output.prepare()?;
            if output.wants(Format::Json) {
                write(dir, "profile.json", &report::to_json(&doc)?)?;
            }
            if output.wants(Format::Csv) {
                write(dir, "curve.csv", &report::curve_csv(&doc.curve)?)?;
            }
            if output.wants(Format::Svg) {
                write(dir, "curve.svg", &plot::curve_svg(&doc.curve))?;
            }
            if doc.peak.is_none() {
                return Err(Error::EmptyCurve);
            }
        }
        Command::Aggregate { records, output } => {
            let records = report::load_records(&records)?;
            let agg = aggregate_peaks(&records)?;
            write_aggregate(&output, &agg)?;
        }
        Command::Correlate { records, output } => {
            let records = report::load_records(&records)?;
            let agg = aggregate_peaks(&records)?;
            let corr = correlate_peak_vs_data(&records)?;
            write_aggregate(&output, &agg)?;
            let dir = output.prepare()?;
            if output.wants(Format::Json) {
                let doc = Annotated::new(
                    &[report::STD_NOTE, report::RUN_NOTE, report::CORRELATION_NOTE],
                    &corr,
                );
                write(dir, "correlation.json", &report::to_json(&doc)?)?;
            }
            if output.wants(Format::Csv) {
                write(dir, "correlation.csv", &report::correlation_csv(&corr)?)?;
            }
            if output.wants(Format::Svg) {
                write(dir, "correlation.svg", &plot::scatter_svg(&corr))?;
            }
        }
        Command::Sweep { root, output } => {
            let groups = report::load_sweep(&root)?;
            let rows = sweep_report(&groups)?;
            let dir = output.prepare()?;
            if output.wants(Format::Json) {
                let doc = Annotated::new(
                    &[report::STD_NOTE, report::RUN_NOTE],
                    SweepDoc { rows: &rows },
                );
                write(dir, "sweep.json", &report::to_json(&doc)?)?;
            }
            if output.wants(Format::Csv) {
                write(dir, "sweep.csv", &report::sweep_csv(&rows)?)?;
            }
        }
        Command::Synth { spec, out } => {
            let text = fs::read_to_string(&spec).map_err(|e| io_error(&spec, e))?;
            match SynthRequest::from_json(&text)? {
                SynthRequest::Manifold(m) => {
                    let cloud: PointCloud<f64> = synth::generate(&m)?;
                    fs::create_dir_all(&out).map_err(|e| io_error(&out, e))?;
                    npy::write_npy(&out.join("points.npy"), &cloud)?;
                }
                SynthRequest::Stack(s) => {
                    synth::layered_stack(&s, &out)?;
                }
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepDoc<'a> {
    rows: &'a [idprof_core::analysis::SweepRow],
}

fn write_aggregate(output: &OutputArgs, agg: &idprof_core::AggregateReport) -> Result<()> {
    let dir = output.prepare()?;
    if output.wants(Format::Json) {
        let doc = Annotated::new(&[report::STD_NOTE, report::RUN_NOTE], agg);
        write(dir, "peaks.json", &report::to_json(&doc)?)?;
    }
    if output.wants(Format::Csv) {
        write(dir, "peaks.csv", &report::aggregate_csv(agg)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: &'a str,
    message: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!(
                "{{\"error\":\"ThreadPool\",\"message\":{:?}}}",
                e.to_string()
            );
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let doc = ErrorDoc {
                error: e.code(),
                message: e.to_string(),
            };
            eprintln!(
                "{}",
                serde_json::to_string(&doc).expect("error doc serializes")
            );
            ExitCode::FAILURE
        }
    }
}
