//! Command-line frontend for the mlbp pipeline: feature extraction into CSV
//! stores, query classification, cross-validation, benchmarking, and a label
//! inspector.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use mlbp::classify::{knn_classify, KnnConfig, Metric};
use mlbp::error::Error;
use mlbp::eval::{benchmark_runtime, cross_validate};
use mlbp::lbp::{extract, histogram_features, label_image, NeighborhoodSpec};
use mlbp::preprocess::PreprocessConfig;
use mlbp::store::{
    read_features, read_manifest, scan_directory, write_features, FeatureStore, Manifest, StoreRow,
};
use mlbp::{defaults, load_image};

#[derive(Parser)]
#[command(
    name = "mlbp",
    version,
    about = "Texture classification with modified local binary patterns and a Tanimoto KNN"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract features for a dataset (manifest CSV or class-per-directory
    /// tree) into a feature store CSV
    Extract(ExtractArgs),
    /// Classify query images against a feature store
    Classify(ClassifyArgs),
    /// Stratified k-fold cross-validation over a store, manifest, or directory
    Crossval(CrossvalArgs),
    /// Per-image runtime benchmark of the extraction pipeline
    Bench(BenchArgs),
    /// Dump the per-pixel label grid and histogram of one image (no
    /// preprocessing applied)
    Inspect(InspectArgs),
}

/// Circular neighborhood flags shared by all subcommands.
#[derive(Args, Clone)]
struct NeighborhoodArgs {
    /// Number of circular neighbors P [default: 8]
    #[arg(long)]
    neighbors: Option<usize>,
    /// Sampling radius R [default: 1]
    #[arg(long)]
    radius: Option<f64>,
    /// Uniformity threshold U_T [default: floor(P/4)]
    #[arg(long)]
    uniformity_threshold: Option<u32>,
}

impl NeighborhoodArgs {
    fn any_given(&self) -> bool {
        self.neighbors.is_some() || self.radius.is_some() || self.uniformity_threshold.is_some()
    }

    fn spec(&self) -> Result<NeighborhoodSpec, Error> {
        let neighbors = self.neighbors.unwrap_or(defaults::NEIGHBORS);
        let radius = self.radius.unwrap_or(defaults::RADIUS);
        match self.uniformity_threshold {
            Some(threshold) => NeighborhoodSpec::new(neighbors, radius, threshold),
            None => NeighborhoodSpec::with_default_threshold(neighbors, radius),
        }
    }
}

/// Preprocessing flags shared by the pipeline subcommands.
#[derive(Args, Clone)]
struct PrepArgs {
    /// Canonical frame side W; images are resized to W x W [default: 128]
    #[arg(long)]
    size: Option<usize>,
    /// Gaussian smoothing sigma [default: 1]
    #[arg(long)]
    sigma: Option<f64>,
    /// Disable Gaussian smoothing
    #[arg(long)]
    no_smooth: bool,
}

impl PrepArgs {
    fn any_given(&self) -> bool {
        self.size.is_some() || self.sigma.is_some() || self.no_smooth
    }

    fn config(&self) -> PreprocessConfig {
        PreprocessConfig {
            target_size: self.size.unwrap_or(defaults::TARGET_SIZE),
            gaussian_sigma: self.sigma.unwrap_or(defaults::GAUSSIAN_SIGMA),
            kernel_radius: defaults::KERNEL_RADIUS,
            smoothing_enabled: !self.no_smooth,
        }
    }
}

#[derive(Args, Clone)]
struct KnnArgs {
    /// Vote size T of the nearest-neighbor classifier [default: 3]
    #[arg(long)]
    knn: Option<usize>,
    /// Distance metric: tanimoto or euclidean [default: tanimoto]
    #[arg(long, value_parser = parse_metric)]
    metric: Option<Metric>,
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse::<Metric>().map_err(|e| e.to_string())
}

impl KnnArgs {
    fn config(&self) -> KnnConfig {
        KnnConfig {
            neighbors: self.knn.unwrap_or(defaults::KNN_NEIGHBORS),
            metric: self.metric.unwrap_or(Metric::Tanimoto),
        }
    }
}

#[derive(Args)]
struct ExtractArgs {
    /// Manifest CSV (`path,label`) or class-per-directory dataset root
    input: PathBuf,
    /// Feature store CSV to write [default: features.csv]
    #[arg(long, default_value = "features.csv")]
    output: PathBuf,
    /// Skip images that fail to load instead of aborting
    #[arg(long)]
    skip_errors: bool,
    #[command(flatten)]
    neighborhood: NeighborhoodArgs,
    #[command(flatten)]
    prep: PrepArgs,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Feature store CSV with training samples
    store: PathBuf,
    /// Query image paths
    #[arg(required = true)]
    queries: Vec<PathBuf>,
    #[command(flatten)]
    knn: KnnArgs,
    #[command(flatten)]
    neighborhood: NeighborhoodArgs,
    #[command(flatten)]
    prep: PrepArgs,
}

#[derive(Args)]
struct CrossvalArgs {
    /// Feature store CSV, manifest CSV, or dataset directory
    input: PathBuf,
    /// Number of folds [default: 10]
    #[arg(long)]
    folds: Option<usize>,
    /// Fold-shuffle seed [default: 42]
    #[arg(long)]
    seed: Option<u64>,
    /// Evaluate the full grid T in {1,3,5} x {tanimoto,euclidean}
    #[arg(long)]
    sweep: bool,
    /// Also write the report to this file
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    knn: KnnArgs,
    #[command(flatten)]
    neighborhood: NeighborhoodArgs,
    #[command(flatten)]
    prep: PrepArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Image paths to benchmark
    #[arg(required = true)]
    images: Vec<PathBuf>,
    /// Timing repetitions per image [default: 1]
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[command(flatten)]
    neighborhood: NeighborhoodArgs,
    #[command(flatten)]
    prep: PrepArgs,
}

#[derive(Args)]
struct InspectArgs {
    /// Image to inspect
    image: PathBuf,
    #[command(flatten)]
    neighborhood: NeighborhoodArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help/version requests are successes, everything else is usage
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// 1 for misuse of flags and parameters, 2 for bad data on disk.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_)
        | Error::InvalidFolds(_)
        | Error::NotEnoughTrainingSamples { .. }
        | Error::EmptyTrainingSet
        | Error::DimensionMismatch { .. }
        | Error::NegativeEntry { .. }
        | Error::CoordinateOutOfRange { .. }
        | Error::NotInterior { .. } => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Extract(args) => cmd_extract(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Crossval(args) => cmd_crossval(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Inspect(args) => cmd_inspect(args),
    }
}

/// Loads a manifest from either a CSV file or a directory tree, reporting
/// scan warnings on stderr.
fn load_manifest(input: &Path) -> Result<Manifest, Error> {
    if input.is_dir() {
        let (manifest, warnings) = scan_directory(input)?;
        for warning in warnings {
            eprintln!("warning: {warning}");
        }
        Ok(manifest)
    } else {
        read_manifest(input)
    }
}

/// Extracts features for every manifest entry, in parallel, keeping output
/// rows in manifest order. With `skip_errors`, failed images are reported
/// and dropped; otherwise the first failure aborts.
fn extract_rows(
    manifest: &Manifest,
    spec: &NeighborhoodSpec,
    prep: &PreprocessConfig,
    skip_errors: bool,
) -> Result<Vec<StoreRow>, Error> {
    let results: Vec<(usize, Result<StoreRow, Error>)> = manifest
        .entries
        .par_iter()
        .enumerate()
        .map(|(index, entry)| {
            let row = load_image(&entry.path).and_then(|img| {
                extract(&img, spec, prep).map(|features| StoreRow {
                    id: index as u64,
                    label: entry.label.clone(),
                    features: features.values().to_vec(),
                })
            });
            (index, row)
        })
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    for (index, result) in results {
        match result {
            Ok(row) => rows.push(row),
            Err(err) if skip_errors => {
                eprintln!(
                    "warning: skipping {}: {err}",
                    manifest.entries[index].path.display()
                );
            }
            Err(err) => return Err(err),
        }
    }
    Ok(rows)
}

fn cmd_extract(args: ExtractArgs) -> Result<(), Error> {
    let spec = args.neighborhood.spec()?;
    let prep = args.prep.config();
    let manifest = load_manifest(&args.input)?;
    let rows = extract_rows(&manifest, &spec, &prep, args.skip_errors)?;
    let store = FeatureStore { spec, prep, rows };
    write_features(&args.output, &store)?;
    println!(
        "wrote {} feature rows ({} images) to {}",
        store.rows.len(),
        manifest.entries.len(),
        args.output.display()
    );
    Ok(())
}

/// Rejects explicitly-given descriptor flags that contradict a store header.
fn check_store_flags(
    store: &FeatureStore,
    neighborhood: &NeighborhoodArgs,
    prep: &PrepArgs,
) -> Result<(), Error> {
    if neighborhood.any_given() {
        let requested = neighborhood.spec()?;
        if requested != store.spec {
            return Err(Error::SpecMismatch(format!(
                "flags request P={} R={:?} UT={}, store was built with P={} R={:?} UT={}",
                requested.neighbors(),
                requested.radius(),
                requested.uniformity_threshold(),
                store.spec.neighbors(),
                store.spec.radius(),
                store.spec.uniformity_threshold()
            )));
        }
    }
    if prep.any_given() && prep.config() != store.prep {
        return Err(Error::SpecMismatch(
            "preprocessing flags disagree with the store header".into(),
        ));
    }
    Ok(())
}

fn cmd_classify(args: ClassifyArgs) -> Result<(), Error> {
    let store = read_features(&args.store, None)?;
    check_store_flags(&store, &args.neighborhood, &args.prep)?;
    if store.rows.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let samples = store.samples();
    let cfg = args.knn.config();
    for query in &args.queries {
        let img = load_image(query)?;
        let features = extract(&img, &store.spec, &store.prep)?;
        let prediction = knn_classify(&samples, features.values(), &cfg)?;
        let neighbors = prediction
            .neighbor_ids
            .iter()
            .zip(&prediction.neighbor_distances)
            .map(|(id, d)| format!("{id}={d:.6}"))
            .collect::<Vec<_>>()
            .join(" ");
        println!("{}\t{}\t{}", query.display(), prediction.label, neighbors);
    }
    Ok(())
}

/// Turns any crossval input (store, manifest, or directory) into samples
/// plus the descriptor configuration that produced them.
fn load_samples(
    args: &CrossvalArgs,
) -> Result<(Vec<mlbp::Sample>, NeighborhoodSpec, PreprocessConfig), Error> {
    let looks_like_store = args.input.is_file()
        && fs::read_to_string(&args.input)
            .map(|text| text.starts_with("# mlbp"))
            .unwrap_or(false);
    if looks_like_store {
        let store = read_features(&args.input, None)?;
        check_store_flags(&store, &args.neighborhood, &args.prep)?;
        return Ok((store.samples(), store.spec.clone(), store.prep.clone()));
    }
    let spec = args.neighborhood.spec()?;
    let prep = args.prep.config();
    let manifest = load_manifest(&args.input)?;
    let rows = extract_rows(&manifest, &spec, &prep, false)?;
    let samples = rows
        .into_iter()
        .map(|r| mlbp::Sample::new(r.id, r.label, r.features))
        .collect();
    Ok((samples, spec, prep))
}

fn cmd_crossval(args: CrossvalArgs) -> Result<(), Error> {
    let (samples, spec, prep) = load_samples(&args)?;
    let folds = args.folds.unwrap_or(defaults::FOLDS);
    let seed = args.seed.unwrap_or(defaults::SEED);

    let mut report_text = String::new();
    if args.sweep {
        let _ = writeln!(
            report_text,
            "sweep: {} folds, seed {}, {} samples",
            folds,
            seed,
            samples.len()
        );
        let _ = writeln!(
            report_text,
            "{:<10} {:>2} {:>14}",
            "metric", "T", "mean_accuracy"
        );
        for metric in [Metric::Tanimoto, Metric::Euclidean] {
            for t in [1usize, 3, 5] {
                let cfg = KnnConfig {
                    neighbors: t,
                    metric,
                };
                let report = cross_validate(&samples, folds, &cfg, seed)?;
                let _ = writeln!(
                    report_text,
                    "{:<10} {:>2} {:>14.4}",
                    metric.name(),
                    t,
                    report.mean_accuracy
                );
            }
        }
    } else {
        let mut report = cross_validate(&samples, folds, &args.knn.config(), seed)?;
        report.descriptor = Some(spec);
        report.preprocess = Some(prep);
        report_text = report.render_table();
    }

    print!("{report_text}");
    if let Some(path) = &args.output {
        fs::write(path, &report_text).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), Error> {
    let spec = args.neighborhood.spec()?;
    let prep = args.prep.config();
    let report = benchmark_runtime(&args.images, &spec, &prep, args.reps)?;
    let n = report.extract.per_image_ms.len();
    println!(
        "extract: mean {:.3} ms, median {:.3} ms, max {:.3} ms over {} timings",
        report.extract.mean_ms, report.extract.median_ms, report.extract.max_ms, n
    );
    println!(
        "decode:  mean {:.3} ms, median {:.3} ms, max {:.3} ms (file read, timed separately)",
        report.load.mean_ms, report.load.median_ms, report.load.max_ms
    );
    println!(
        "reference budget: 519 ms per query image; mean extract is {:.1}% of it",
        report.extract.mean_ms / 519.0 * 100.0
    );
    Ok(())
}

fn cmd_inspect(args: InspectArgs) -> Result<(), Error> {
    let spec = args.neighborhood.spec()?;
    let img = load_image(&args.image)?;
    let labels = label_image(&img, &spec)?;
    let features = histogram_features(&labels, &spec)?;

    let width = if spec.nonuniform_label() >= 10 { 2 } else { 1 };
    for y in 0..labels.height() {
        let row = (0..labels.width())
            .map(|x| format!("{:>width$}", labels.get(x, y)))
            .collect::<Vec<_>>()
            .join(" ");
        println!("{row}");
    }
    let histogram = features
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| format!("f{i}={v}"))
        .collect::<Vec<_>>()
        .join(" ");
    println!("{histogram}");
    Ok(())
}
