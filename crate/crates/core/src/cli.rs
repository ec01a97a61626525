//! Command-line driver: every pipeline stage as a subcommand, plus a
//! `pipeline` command that wires them end-to-end from a flat JSON config
//! and records a manifest sufficient to reproduce each stage in isolation.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{
    concat_features, cross_validate, train_svm, write_cv_report_json, write_model_json,
    LabeledDataset, ModelRecord,
};
use crate::complex::vietoris_rips;
use crate::error::{Error, Result};
use crate::persistence::{
    diagrams, read_diagrams_csv, write_diagrams_csv, PersistenceDiagram,
};
use crate::pointcloud::{
    load_point_cloud, pairwise_distances, sample_circle, sample_wedge_with_counts,
    save_point_cloud, subsample, PointCloud, SubsampleStrategy,
};
use crate::stats::{permutation_test, preprocess_exclusion, ExclusionMode, Statistic};
use crate::summaries::{
    death_vector, diff_vectors, landscape, mean_vectors, truncate_death_vector,
    vectorize_landscape, write_death_csv, write_diagram_scatter_csv, write_landscape_grid_csv,
    write_landscape_json, write_landscape_polyline_csv, DeathVector, FeatureKind, FeatureVector,
};
use crate::util::atomic_write;

/// Scale convention for reported filtration values. Internally every
/// filtration value is a diameter (largest pairwise distance in the
/// simplex); `radius` halves values on output, matching the ball-radius
/// convention some other tools use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Diameter,
    Radius,
}

impl Scale {
    fn as_str(self) -> &'static str {
        match self {
            Scale::Diameter => "diameter",
            Scale::Radius => "radius",
        }
    }
}

fn parse_scale(s: &str) -> Result<Scale> {
    match s {
        "diameter" => Ok(Scale::Diameter),
        "radius" => Ok(Scale::Radius),
        other => Err(Error::argument(format!(
            "unknown scale {:?}; expected diameter or radius",
            other
        ))),
    }
}

#[derive(Parser)]
#[command(
    name = "topovec",
    version,
    about = "Topological feature pipeline: point clouds -> persistence diagrams -> \
             landscape/death-vector summaries -> permutation tests and SVM classification"
)]
struct Cli {
    /// Master RNG seed (generation, subsampling, tests, CV).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for batch stages; 0 means one per core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Reporting convention for filtration values.
    #[arg(long, global = true, value_enum)]
    scale: Option<Scale>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a synthetic point cloud and write it as CSV.
    Generate(GenerateArgs),
    /// Compute Vietoris-Rips persistence diagrams for point-cloud CSVs.
    Persist(PersistArgs),
    /// Turn diagram CSVs into death vectors, landscapes, and plot data.
    Summarize(SummarizeArgs),
    /// Two-sample permutation test between groups of diagram files.
    Test(TestArgs),
    /// Train and cross-validate a linear SVM on two groups of diagrams.
    Classify(ClassifyArgs),
    /// Run generate -> persist -> summarize -> test -> classify from a config.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[command(subcommand)]
    shape: ShapeCmd,
}

#[derive(Subcommand)]
enum ShapeCmd {
    /// Noisy circle, optionally with uniform background outliers.
    Circle {
        /// Points on the circle.
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Gaussian radial noise standard deviation.
        #[arg(long, default_value_t = 0.0)]
        noise_sd: f64,
        /// Extra uniform points in the sample's bounding box.
        #[arg(long, default_value_t = 0)]
        outliers: usize,
        #[arg(long, default_value = "circle.csv")]
        out: PathBuf,
    },
    /// Wedge of k circles joined at one point (2 circles in the plane,
    /// 3 or more in 3-space).
    Wedge {
        /// Number of circles.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Points per circle.
        #[arg(long = "n-per", default_value_t = 50)]
        n_per: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.0)]
        noise_sd: f64,
        #[arg(long, default_value_t = 0)]
        outliers: usize,
        #[arg(long, default_value = "wedge.csv")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct PersistArgs {
    /// Point-cloud CSV files (one x,y[,z,…] row per point).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,

    /// Largest simplex dimension in the filtration.
    #[arg(long, default_value_t = 2)]
    max_dim: usize,

    /// Filtration cutoff; defaults to each cloud's largest pairwise distance.
    #[arg(long)]
    max_value: Option<f64>,

    /// Highest homology degree to report.
    #[arg(long, default_value_t = 1)]
    degrees: usize,

    /// Subsample each cloud to this many points before building the filtration.
    #[arg(long)]
    subsample: Option<usize>,

    #[arg(long, value_enum, default_value_t = StrategyArg::Maxmin)]
    subsample_strategy: StrategyArg,

    /// Inputs have a header row to skip.
    #[arg(long)]
    header: bool,

    /// Also write the sorted filtration itself as <stem>.filt.csv.
    #[arg(long)]
    export_filtration: bool,

    /// Output directory (default: next to each input).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Random,
    Maxmin,
}

impl From<StrategyArg> for SubsampleStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Random => SubsampleStrategy::Random,
            StrategyArg::Maxmin => SubsampleStrategy::MaxMin,
        }
    }
}

/// Landscape evaluation grid: t = a, a+delta, …, a+m·delta for λ_1…λ_k.
#[derive(Args, Clone, Copy)]
struct GridOpts {
    /// Number of landscape functions kept in the vector.
    #[arg(long, default_value_t = 60)]
    k: usize,

    /// Grid start.
    #[arg(long, default_value_t = 0.0)]
    a: f64,

    /// Grid spacing.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,

    /// Number of grid steps (m+1 points).
    #[arg(long, default_value_t = 400)]
    m: usize,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Diagram CSV files.
    inputs: Vec<PathBuf>,

    /// Group-A diagram files; with --group-b, also writes mean/difference grids.
    #[arg(long, num_args = 1..)]
    group_a: Vec<PathBuf>,

    /// Group-B diagram files.
    #[arg(long, num_args = 1..)]
    group_b: Vec<PathBuf>,

    /// Homology degree the landscape summaries are built from.
    #[arg(long, default_value_t = 1)]
    landscape_degree: usize,

    #[command(flatten)]
    grid: GridOpts,

    /// Output directory (default: next to each input; group means go to ".").
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct TestArgs {
    /// Group-A diagram files.
    #[arg(long, num_args = 1.., required = true)]
    group_a: Vec<PathBuf>,

    /// Group-B diagram files.
    #[arg(long, num_args = 1.., required = true)]
    group_b: Vec<PathBuf>,

    /// Feature vector fed to the test.
    #[arg(long, value_enum, default_value_t = TestFeature::Landscape)]
    feature: TestFeature,

    /// l2_mean_diff or sup_mean_diff.
    #[arg(long, default_value = "l2_mean_diff")]
    statistic: String,

    /// Monte Carlo draws when the split count exceeds the exhaustive cap.
    #[arg(long, default_value_t = 1000)]
    permutations: u64,

    /// Noisiest death-vector coordinates to exclude (death feature only).
    #[arg(long, default_value_t = 3)]
    drop_death_coords: usize,

    /// Leading landscape functions to exclude (landscape feature only).
    #[arg(long, default_value_t = 20)]
    drop_landscape_functions: usize,

    #[arg(long, default_value_t = 1)]
    landscape_degree: usize,

    #[command(flatten)]
    grid: GridOpts,

    /// Result JSON path.
    #[arg(long, default_value = "result.json")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TestFeature {
    Death,
    Landscape,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Group-A diagram files (label 0).
    #[arg(long, num_args = 1.., required = true)]
    group_a: Vec<PathBuf>,

    /// Group-B diagram files (label 1).
    #[arg(long, num_args = 1.., required = true)]
    group_b: Vec<PathBuf>,

    /// Use landscape features only, without the death-vector prefix.
    #[arg(long)]
    no_death_vector: bool,

    #[arg(long, default_value_t = 10)]
    folds: usize,

    #[arg(long, default_value_t = 1e-3)]
    lambda: f64,

    /// Training passes over the data (T = epochs · n SGD steps).
    #[arg(long, default_value_t = 100)]
    epochs: usize,

    #[arg(long, default_value_t = 1)]
    landscape_degree: usize,

    #[command(flatten)]
    grid: GridOpts,

    /// Cross-validation report JSON path.
    #[arg(long, default_value = "cv_report.json")]
    report: PathBuf,

    /// Model JSON path (trained on the full dataset).
    #[arg(long, default_value = "model.json")]
    model: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    /// Flat JSON configuration file.
    #[arg(long)]
    config: PathBuf,

    /// Override the config's output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,

    /// Override the config's Monte Carlo permutation count.
    #[arg(long)]
    permutations: Option<u64>,

    /// Override the config's fold count.
    #[arg(long)]
    folds: Option<usize>,

    /// Override the config's test statistic.
    #[arg(long)]
    statistic: Option<String>,

    /// Override the config's test feature (death | landscape).
    #[arg(long)]
    feature: Option<String>,
}

/// Parse arguments, dispatch, and map failures to the documented exit codes.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational =
                matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if informational { 0 } else { 1 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    let scale = cli.scale.unwrap_or(Scale::Diameter);
    match cli.cmd {
        Cmd::Generate(args) => cmd_generate(args, seed),
        Cmd::Persist(args) => cmd_persist(args, seed, scale, cli.jobs),
        Cmd::Summarize(args) => cmd_summarize(args, cli.jobs),
        Cmd::Test(args) => cmd_test(args, seed),
        Cmd::Classify(args) => cmd_classify(args, seed),
        Cmd::Pipeline(args) => cmd_pipeline(args, cli.seed, cli.scale, cli.jobs),
    }
}

/// Run `work` on a thread pool sized by --jobs (0 = rayon default).
fn with_pool<T: Send>(jobs: usize, work: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == 0 {
        return Ok(work());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::argument(format!("cannot build {jobs}-thread pool: {e}")))?;
    Ok(pool.install(work))
}

/// Apply `f` to every input in parallel. Failures are reported per file and
/// the remaining files still run; the first failure is then returned so the
/// process exits nonzero.
fn run_batch<T, F>(inputs: &[PathBuf], jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Path) -> Result<T> + Sync,
{
    let results: Vec<(usize, std::result::Result<T, Error>)> = with_pool(jobs, || {
        inputs
            .par_iter()
            .enumerate()
            .map(|(i, p)| (i, f(p)))
            .collect()
    })?;
    let mut out = Vec::with_capacity(results.len());
    let mut first_err = None;
    for (i, r) in results {
        match r {
            Ok(v) => out.push(v),
            Err(e) => {
                eprintln!("error[{}]: {e}", inputs[i].display());
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

fn output_path(out_dir: Option<&Path>, input: &Path, suffix: &str) -> PathBuf {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    let stem = stem.strip_suffix(".dgm").unwrap_or(&stem).to_string();
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| input.parent().map(Path::to_path_buf))
        .unwrap_or_default();
    dir.join(format!("{stem}{suffix}"))
}

fn cmd_generate(args: GenerateArgs, seed: u64) -> Result<()> {
    let (cloud, out) = match args.shape {
        ShapeCmd::Circle { n, radius, noise_sd, outliers, out } => {
            (sample_circle(n, radius, noise_sd, outliers, seed)?, out)
        }
        ShapeCmd::Wedge { k, n_per, radius, noise_sd, outliers, out } => {
            let counts = vec![n_per; k.max(1)];
            (sample_wedge_with_counts(&counts, radius, noise_sd, outliers, seed)?, out)
        }
    };
    save_point_cloud(&cloud, &out)?;
    eprintln!("wrote {} points to {}", cloud.len(), out.display());
    Ok(())
}

/// Shared by `persist` and `pipeline`: subsample, build VR, compute diagrams,
/// report on the requested scale. Returns the diagrams and the cutoff used.
#[allow(clippy::too_many_arguments)]
fn persist_cloud(
    cloud: &PointCloud,
    max_dim: usize,
    max_value: Option<f64>,
    degrees: usize,
    sub: Option<(usize, SubsampleStrategy, u64)>,
    scale: Scale,
) -> Result<(Vec<PersistenceDiagram>, f64, Option<crate::complex::Filtration>)> {
    let reduced;
    let cloud = match sub {
        Some((m, strategy, sub_seed)) => {
            reduced = subsample(cloud, m, strategy, sub_seed)?;
            &reduced
        }
        None => cloud,
    };
    let dm = pairwise_distances(cloud);
    let cutoff = max_value.unwrap_or_else(|| dm.max_distance());
    let filtration = vietoris_rips(&dm, max_dim, cutoff)?;
    let mut diags = diagrams(&filtration, degrees)?;
    if scale == Scale::Radius {
        for d in &mut diags {
            for p in &mut d.points {
                p.0 /= 2.0;
                p.1 /= 2.0;
            }
            for b in &mut d.essentials {
                *b /= 2.0;
            }
        }
    }
    Ok((diags, cutoff, Some(filtration)))
}

fn cmd_persist(args: PersistArgs, seed: u64, scale: Scale, jobs: usize) -> Result<()> {
    let sub_strategy: SubsampleStrategy = args.subsample_strategy.into();
    run_batch(&args.inputs, jobs, |input| {
        let cloud = load_point_cloud(input, args.header)?;
        let idx = args.inputs.iter().position(|p| p == input).unwrap_or(0);
        let sub = args
            .subsample
            .map(|m| (m, sub_strategy, derive_seed(seed, STREAM_SUBSAMPLE + idx as u64)));
        let (diags, _, filtration) =
            persist_cloud(&cloud, args.max_dim, args.max_value, args.degrees, sub, scale)?;
        let out = output_path(args.out_dir.as_deref(), input, ".dgm.csv");
        write_diagrams_csv(&diags, &out)?;
        if args.export_filtration {
            let fpath = output_path(args.out_dir.as_deref(), input, ".filt.csv");
            filtration
                .expect("filtration is always built here")
                .write_debug_csv(&fpath)?;
        }
        eprintln!("persisted {} -> {}", input.display(), out.display());
        Ok(())
    })?;
    Ok(())
}

/// Landscape of one degree from a diagram file's diagrams, as a grid vector.
fn landscape_vector_of(
    diags: &[PersistenceDiagram],
    degree: usize,
    grid: GridOpts,
) -> Result<FeatureVector> {
    let empty = PersistenceDiagram::empty(degree);
    let diagram = diags.iter().find(|d| d.degree == degree).unwrap_or(&empty);
    vectorize_landscape(&landscape(diagram), grid.k, grid.a, grid.delta, grid.m)
}

fn degree_zero(diags: &[PersistenceDiagram]) -> PersistenceDiagram {
    diags
        .iter()
        .find(|d| d.degree == 0)
        .cloned()
        .unwrap_or_else(|| PersistenceDiagram::empty(0))
}

fn cmd_summarize(args: SummarizeArgs, jobs: usize) -> Result<()> {
    let mut inputs = args.inputs.clone();
    inputs.extend(args.group_a.iter().cloned());
    inputs.extend(args.group_b.iter().cloned());
    if inputs.is_empty() {
        return Err(Error::argument("no diagram files given"));
    }
    let grid = args.grid;
    let degree = args.landscape_degree;
    let out_dir = args.out_dir.clone();
    run_batch(&inputs, jobs, |input| {
        let diags = read_diagrams_csv(input)?;
        let dv = death_vector(&degree_zero(&diags))?;
        write_death_csv(&dv, &output_path(out_dir.as_deref(), input, ".deaths.csv"))?;

        let empty = PersistenceDiagram::empty(degree);
        let diagram = diags.iter().find(|d| d.degree == degree).unwrap_or(&empty);
        let ls = landscape(diagram);
        write_landscape_json(&ls, &output_path(out_dir.as_deref(), input, ".landscape.json"))?;
        let fv = vectorize_landscape(&ls, grid.k, grid.a, grid.delta, grid.m)?;
        write_landscape_grid_csv(&fv, &output_path(out_dir.as_deref(), input, ".landgrid.csv"))?;
        write_diagram_scatter_csv(
            diagram,
            &output_path(out_dir.as_deref(), input, ".scatter.csv"),
        )?;
        write_landscape_polyline_csv(
            &ls,
            &output_path(out_dir.as_deref(), input, ".polyline.csv"),
        )?;
        eprintln!("summarized {}", input.display());
        Ok(())
    })?;

    if !args.group_a.is_empty() && !args.group_b.is_empty() {
        let vectors_of = |files: &[PathBuf]| -> Result<Vec<FeatureVector>> {
            files
                .iter()
                .map(|p| landscape_vector_of(&read_diagrams_csv(p)?, degree, grid))
                .collect()
        };
        let mean_a = mean_vectors(&vectors_of(&args.group_a)?)?;
        let mean_b = mean_vectors(&vectors_of(&args.group_b)?)?;
        let diff = diff_vectors(&mean_a, &mean_b)?;
        let dir = args.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
        write_landscape_grid_csv(&mean_a, &dir.join("mean_a.landgrid.csv"))?;
        write_landscape_grid_csv(&mean_b, &dir.join("mean_b.landgrid.csv"))?;
        write_landscape_grid_csv(&diff, &dir.join("diff.landgrid.csv"))?;
        eprintln!("wrote group means and difference to {}", dir.display());
    }
    Ok(())
}

/// Death vectors for a batch of diagram files, truncated to a common length
/// so they can serve as equal-length feature vectors.
fn death_features(all: &[Vec<PersistenceDiagram>]) -> Result<Vec<FeatureVector>> {
    let dvs: Vec<DeathVector> = all
        .iter()
        .map(|diags| death_vector(&degree_zero(diags)))
        .collect::<Result<_>>()?;
    let common = dvs.iter().map(DeathVector::len).min().unwrap_or(0);
    Ok(dvs
        .iter()
        .map(|dv| truncate_death_vector(dv, 0, common).to_feature_vector())
        .collect())
}

fn landscape_features(
    all: &[Vec<PersistenceDiagram>],
    degree: usize,
    grid: GridOpts,
) -> Result<Vec<FeatureVector>> {
    all.iter().map(|d| landscape_vector_of(d, degree, grid)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ExclusionsRecord {
    drop_death_coords: usize,
    drop_landscape_functions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TestResultRecord {
    statistic: f64,
    p_value: f64,
    n_permutations: u64,
    exhaustive: bool,
    seed: u64,
    statistic_name: String,
    exclusions: ExclusionsRecord,
}

/// Feature construction + exclusion + permutation test, shared by `test`
/// and `pipeline`.
#[allow(clippy::too_many_arguments)]
fn run_test_stage(
    diags_a: &[Vec<PersistenceDiagram>],
    diags_b: &[Vec<PersistenceDiagram>],
    feature: TestFeature,
    statistic: Statistic,
    permutations: u64,
    drop_death: usize,
    drop_landscape: usize,
    degree: usize,
    grid: GridOpts,
    seed: u64,
    out: &Path,
) -> Result<TestResultRecord> {
    let n_a = diags_a.len();
    let mut all: Vec<Vec<PersistenceDiagram>> = Vec::with_capacity(n_a + diags_b.len());
    all.extend_from_slice(diags_a);
    all.extend_from_slice(diags_b);
    let (vectors, exclusions) = match feature {
        TestFeature::Death => {
            let vs = death_features(&all)?;
            let vs = if drop_death > 0 {
                preprocess_exclusion(&vs, ExclusionMode::DropDeathCoords(drop_death))?
            } else {
                vs
            };
            (vs, ExclusionsRecord { drop_death_coords: drop_death, drop_landscape_functions: 0 })
        }
        TestFeature::Landscape => {
            let vs = landscape_features(&all, degree, grid)?;
            let vs = if drop_landscape > 0 {
                preprocess_exclusion(&vs, ExclusionMode::DropLandscapeFunctions(drop_landscape))?
            } else {
                vs
            };
            (
                vs,
                ExclusionsRecord {
                    drop_death_coords: 0,
                    drop_landscape_functions: drop_landscape,
                },
            )
        }
    };
    let result =
        permutation_test(&vectors[..n_a], &vectors[n_a..], statistic, permutations as usize, seed)?;
    let record = TestResultRecord {
        statistic: result.observed_statistic,
        p_value: result.p_value,
        n_permutations: result.n_permutations,
        exhaustive: result.exhaustive,
        seed: result.seed,
        statistic_name: statistic.name().to_string(),
        exclusions,
    };
    let mut text = serde_json::to_string_pretty(&record)?;
    text.push('\n');
    atomic_write(out, text.as_bytes())?;
    Ok(record)
}

fn read_diagram_files(files: &[PathBuf]) -> Result<Vec<Vec<PersistenceDiagram>>> {
    files.iter().map(|p| read_diagrams_csv(p)).collect()
}

fn cmd_test(args: TestArgs, seed: u64) -> Result<()> {
    let statistic = Statistic::from_str(&args.statistic)?;
    let diags_a = read_diagram_files(&args.group_a)?;
    let diags_b = read_diagram_files(&args.group_b)?;
    let record = run_test_stage(
        &diags_a,
        &diags_b,
        args.feature,
        statistic,
        args.permutations,
        args.drop_death_coords,
        args.drop_landscape_functions,
        args.landscape_degree,
        args.grid,
        seed,
        &args.out,
    )?;
    println!(
        "p-value: {} ({} over {} splits, statistic {})",
        record.p_value,
        if record.exhaustive { "exhaustive" } else { "Monte Carlo" },
        record.n_permutations,
        record.statistic_name,
    );
    Ok(())
}

/// Feature construction + CV + full-data training, shared by `classify`
/// and `pipeline`. Returns (report, mean accuracy).
#[allow(clippy::too_many_arguments)]
fn run_classify_stage(
    diags_a: &[Vec<PersistenceDiagram>],
    diags_b: &[Vec<PersistenceDiagram>],
    no_death_vector: bool,
    folds: usize,
    lambda: f64,
    epochs: usize,
    degree: usize,
    grid: GridOpts,
    seed: u64,
    report_path: &Path,
    model_path: &Path,
) -> Result<crate::classify::CvReport> {
    let n_a = diags_a.len();
    let mut all: Vec<Vec<PersistenceDiagram>> = Vec::with_capacity(n_a + diags_b.len());
    all.extend_from_slice(diags_a);
    all.extend_from_slice(diags_b);
    let landscapes = landscape_features(&all, degree, grid)?;
    let empty_death =
        FeatureVector { values: Vec::new(), kind: FeatureKind::Death, grid: None };
    let deaths = if no_death_vector {
        vec![empty_death; all.len()]
    } else {
        death_features(&all)?
    };
    let features: Vec<FeatureVector> = deaths
        .iter()
        .zip(&landscapes)
        .map(|(d, l)| concat_features(d, l))
        .collect();
    let labels: Vec<bool> = (0..all.len()).map(|i| i >= n_a).collect();
    let data = LabeledDataset::new(features, labels)?;

    let report = cross_validate(&data, folds, lambda, epochs, seed)?;
    if report.folds_used < folds {
        eprintln!(
            "warning: smallest class has {} members; using {} folds instead of {}",
            report.folds_used, report.folds_used, folds
        );
    }
    write_cv_report_json(&report, report_path)?;

    let model = train_svm(&data, lambda, epochs, seed)?;
    write_model_json(
        &ModelRecord { weights: model.weights, bias: model.bias, lambda, epochs, seed },
        model_path,
    )?;
    Ok(report)
}

fn cmd_classify(args: ClassifyArgs, seed: u64) -> Result<()> {
    let diags_a = read_diagram_files(&args.group_a)?;
    let diags_b = read_diagram_files(&args.group_b)?;
    let report = run_classify_stage(
        &diags_a,
        &diags_b,
        args.no_death_vector,
        args.folds,
        args.lambda,
        args.epochs,
        args.landscape_degree,
        args.grid,
        seed,
        &args.report,
        &args.model,
    )?;
    println!(
        "cv mean accuracy: {} over {} folds",
        report.mean_accuracy, report.folds_used
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

/// Flat JSON pipeline configuration. Missing keys take the defaults below;
/// unknown keys are rejected. Command-line flags override file values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub out_dir: String,
    pub scale: String,

    // Generators, used when no input file lists are given.
    pub clouds_per_group: usize,
    pub shape_a: String,
    pub wedge_k_a: usize,
    pub shape_b: String,
    pub wedge_k_b: usize,
    pub points_per_cloud: usize,
    pub radius: f64,
    pub noise_sd: f64,
    pub outliers: usize,
    pub input_a: Option<Vec<String>>,
    pub input_b: Option<Vec<String>>,

    // Optional subsampling before the filtration.
    pub subsample: Option<usize>,
    pub subsample_strategy: String,

    // Filtration and diagram parameters.
    pub max_dim: usize,
    pub max_value: Option<f64>,
    pub max_degree: usize,

    // Landscape grid.
    pub landscape_degree: usize,
    pub grid_k: usize,
    pub grid_a: f64,
    pub grid_delta: f64,
    pub grid_m: usize,

    // Permutation test.
    pub feature: String,
    pub statistic: String,
    pub permutations: u64,
    pub drop_death_coords: usize,
    pub drop_landscape_functions: usize,

    // Classification.
    pub folds: usize,
    pub lambda: f64,
    pub epochs: usize,
    pub no_death_vector: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 7,
            out_dir: "runs/demo".to_string(),
            scale: "diameter".to_string(),
            clouds_per_group: 10,
            shape_a: "wedge".to_string(),
            wedge_k_a: 2,
            shape_b: "wedge".to_string(),
            wedge_k_b: 3,
            points_per_cloud: 100,
            radius: 1.0,
            noise_sd: 0.05,
            outliers: 5,
            input_a: None,
            input_b: None,
            subsample: None,
            subsample_strategy: "maxmin".to_string(),
            max_dim: 2,
            max_value: None,
            max_degree: 1,
            landscape_degree: 1,
            grid_k: 60,
            grid_a: 0.0,
            grid_delta: 0.1,
            grid_m: 400,
            feature: "landscape".to_string(),
            statistic: "l2_mean_diff".to_string(),
            permutations: 1000,
            drop_death_coords: 3,
            drop_landscape_functions: 20,
            folds: 10,
            lambda: 1e-3,
            epochs: 100,
            no_death_vector: false,
        }
    }
}

pub fn read_pipeline_config(path: &Path) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path)?;
    let cfg: PipelineConfig = serde_json::from_str(&text)
        .map_err(|e| Error::argument(format!("config {}: {e}", path.display())))?;
    Ok(cfg)
}

// Seed-stream identifiers; each derived seed comes from an independent
// ChaCha stream of the master seed so stages never share RNG state.
const STREAM_GROUP_A: u64 = 1 << 32;
const STREAM_GROUP_B: u64 = 2 << 32;
const STREAM_SUBSAMPLE: u64 = 3 << 32;
const STREAM_TEST: u64 = 1;
const STREAM_CV: u64 = 2;

/// Deterministic sub-seed: stream `stream` of the master-seeded generator.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng.gen()
}

/// Split `total` points across `k` circles as evenly as possible,
/// earlier circles taking the remainder.
fn split_counts(total: usize, k: usize) -> Vec<usize> {
    let base = total / k;
    let extra = total % k;
    (0..k).map(|i| base + usize::from(i < extra)).collect()
}

#[derive(Debug, Clone, Serialize)]
struct CloudRecord {
    group: String,
    index: usize,
    source: String,
    seed: Option<u64>,
    subsample_seed: Option<u64>,
    rows: usize,
    cloud_path: String,
    diagram_path: String,
    max_value: f64,
}

#[derive(Debug, Clone, Serialize)]
struct Manifest {
    tool_version: String,
    config: PipelineConfig,
    clouds: Vec<CloudRecord>,
    test_seed: u64,
    cv_seed: u64,
    result_path: String,
    cv_report_path: String,
    model_path: String,
}

fn generate_group_cloud(cfg: &PipelineConfig, shape: &str, wedge_k: usize, seed: u64) -> Result<PointCloud> {
    match shape {
        "circle" => sample_circle(cfg.points_per_cloud, cfg.radius, cfg.noise_sd, cfg.outliers, seed),
        "wedge" => {
            if wedge_k < 1 {
                return Err(Error::argument("wedge_k must be >= 1"));
            }
            let counts = split_counts(cfg.points_per_cloud, wedge_k);
            sample_wedge_with_counts(&counts, cfg.radius, cfg.noise_sd, cfg.outliers, seed)
        }
        other => Err(Error::argument(format!(
            "unknown shape {:?}; expected circle or wedge",
            other
        ))),
    }
}

fn parse_strategy(s: &str) -> Result<SubsampleStrategy> {
    match s {
        "random" => Ok(SubsampleStrategy::Random),
        "maxmin" => Ok(SubsampleStrategy::MaxMin),
        other => Err(Error::argument(format!(
            "unknown subsample strategy {:?}; expected random or maxmin",
            other
        ))),
    }
}

fn parse_test_feature(s: &str) -> Result<TestFeature> {
    match s {
        "death" => Ok(TestFeature::Death),
        "landscape" => Ok(TestFeature::Landscape),
        other => Err(Error::argument(format!(
            "unknown feature {:?}; expected death or landscape",
            other
        ))),
    }
}

fn cmd_pipeline(
    args: PipelineArgs,
    seed_flag: Option<u64>,
    scale_flag: Option<Scale>,
    jobs: usize,
) -> Result<()> {
    let mut cfg = read_pipeline_config(&args.config)?;
    if let Some(seed) = seed_flag {
        cfg.seed = seed;
    }
    if let Some(scale) = scale_flag {
        cfg.scale = scale.as_str().to_string();
    }
    if let Some(dir) = &args.out_dir {
        cfg.out_dir = dir.to_string_lossy().into_owned();
    }
    if let Some(p) = args.permutations {
        cfg.permutations = p;
    }
    if let Some(f) = args.folds {
        cfg.folds = f;
    }
    if let Some(s) = &args.statistic {
        cfg.statistic = s.clone();
    }
    if let Some(f) = &args.feature {
        cfg.feature = f.clone();
    }

    // Validate the cross-cutting enums up front so nothing half-runs.
    let scale = parse_scale(&cfg.scale)?;
    let statistic = Statistic::from_str(&cfg.statistic)?;
    let feature = parse_test_feature(&cfg.feature)?;
    let sub_strategy = parse_strategy(&cfg.subsample_strategy)?;
    let grid = GridOpts { k: cfg.grid_k, a: cfg.grid_a, delta: cfg.grid_delta, m: cfg.grid_m };

    let out_dir = PathBuf::from(&cfg.out_dir);
    let clouds_dir = out_dir.join("clouds");
    let diagrams_dir = out_dir.join("diagrams");
    let summaries_dir = out_dir.join("summaries");
    for d in [&out_dir, &clouds_dir, &diagrams_dir, &summaries_dir] {
        std::fs::create_dir_all(d)?;
    }

    // Stage 1: obtain clouds (generate or ingest).
    struct PlannedCloud {
        group: String,
        index: usize,
        source: String,
        seed: Option<u64>,
        cloud: PointCloud,
        cloud_path: PathBuf,
        rel_cloud: String,
    }
    let mut planned: Vec<PlannedCloud> = Vec::new();
    for (group, stream, shape, wedge_k, inputs) in [
        ("a", STREAM_GROUP_A, &cfg.shape_a, cfg.wedge_k_a, &cfg.input_a),
        ("b", STREAM_GROUP_B, &cfg.shape_b, cfg.wedge_k_b, &cfg.input_b),
    ] {
        match inputs {
            Some(paths) => {
                if paths.is_empty() {
                    return Err(Error::argument(format!("input_{group} is empty")));
                }
                for (i, p) in paths.iter().enumerate() {
                    let path = PathBuf::from(p);
                    planned.push(PlannedCloud {
                        group: group.to_string(),
                        index: i,
                        source: p.clone(),
                        seed: None,
                        cloud: load_point_cloud(&path, false)?,
                        cloud_path: path,
                        rel_cloud: p.clone(),
                    });
                }
            }
            None => {
                for i in 0..cfg.clouds_per_group {
                    let cloud_seed = derive_seed(cfg.seed, stream + i as u64);
                    let cloud = generate_group_cloud(&cfg, shape, wedge_k, cloud_seed)?;
                    let rel = format!("clouds/{group}_{i:02}.csv");
                    let path = out_dir.join(&rel);
                    save_point_cloud(&cloud, &path)?;
                    let source = if shape == "wedge" {
                        format!("wedge(k={wedge_k}, points={}, radius={}, noise_sd={}, outliers={})",
                            cfg.points_per_cloud, cfg.radius, cfg.noise_sd, cfg.outliers)
                    } else {
                        format!("circle(points={}, radius={}, noise_sd={}, outliers={})",
                            cfg.points_per_cloud, cfg.radius, cfg.noise_sd, cfg.outliers)
                    };
                    planned.push(PlannedCloud {
                        group: group.to_string(),
                        index: i,
                        source,
                        seed: Some(cloud_seed),
                        cloud,
                        cloud_path: path,
                        rel_cloud: rel,
                    });
                }
            }
        }
    }
    eprintln!("pipeline: {} clouds ready", planned.len());

    // Stage 2: persistence diagrams, in parallel across clouds.
    let persist_one = |pc: &PlannedCloud| -> Result<(CloudRecord, Vec<PersistenceDiagram>)> {
        let stem = format!("{}_{:02}", pc.group, pc.index);
        let sub_seed = cfg
            .subsample
            .map(|_| derive_seed(cfg.seed, STREAM_SUBSAMPLE + global_index(&pc.group, pc.index, cfg.clouds_per_group)));
        let sub = cfg.subsample.map(|m| (m, sub_strategy, sub_seed.unwrap()));
        let (diags, cutoff, _) =
            persist_cloud(&pc.cloud, cfg.max_dim, cfg.max_value, cfg.max_degree, sub, scale)?;
        let rel = format!("diagrams/{stem}.dgm.csv");
        write_diagrams_csv(&diags, &out_dir.join(&rel))?;
        eprintln!("pipeline: persisted {}", pc.cloud_path.display());
        Ok((
            CloudRecord {
                group: pc.group.clone(),
                index: pc.index,
                source: pc.source.clone(),
                seed: pc.seed,
                subsample_seed: sub_seed,
                rows: pc.cloud.len(),
                cloud_path: pc.rel_cloud.clone(),
                diagram_path: rel,
                max_value: cutoff,
            },
            diags,
        ))
    };
    let persisted: Vec<(CloudRecord, Vec<PersistenceDiagram>)> = with_pool(jobs, || {
        planned
            .par_iter()
            .map(persist_one)
            .collect::<Result<Vec<_>>>()
    })??;
    let (records, all_diags): (Vec<CloudRecord>, Vec<Vec<PersistenceDiagram>>) =
        persisted.into_iter().unzip();

    // Stage 3: summaries + plot data per cloud, then group means.
    with_pool(jobs, || {
        records
            .par_iter()
            .zip(&all_diags)
            .map(|(rec, diags)| -> Result<()> {
                let stem = format!("{}_{:02}", rec.group, rec.index);
                let dv = death_vector(&degree_zero(diags))?;
                write_death_csv(&dv, &summaries_dir.join(format!("{stem}.deaths.csv")))?;
                let empty = PersistenceDiagram::empty(cfg.landscape_degree);
                let diagram = diags
                    .iter()
                    .find(|d| d.degree == cfg.landscape_degree)
                    .unwrap_or(&empty);
                let ls = landscape(diagram);
                write_landscape_json(&ls, &summaries_dir.join(format!("{stem}.landscape.json")))?;
                let fv = vectorize_landscape(&ls, grid.k, grid.a, grid.delta, grid.m)?;
                write_landscape_grid_csv(&fv, &summaries_dir.join(format!("{stem}.landgrid.csv")))?;
                write_diagram_scatter_csv(diagram, &summaries_dir.join(format!("{stem}.scatter.csv")))?;
                write_landscape_polyline_csv(&ls, &summaries_dir.join(format!("{stem}.polyline.csv")))?;
                Ok(())
            })
            .collect::<Result<Vec<()>>>()
    })??;
    let n_a = records.iter().filter(|r| r.group == "a").count();
    let vec_a = landscape_features(&all_diags[..n_a], cfg.landscape_degree, grid)?;
    let vec_b = landscape_features(&all_diags[n_a..], cfg.landscape_degree, grid)?;
    let mean_a = mean_vectors(&vec_a)?;
    let mean_b = mean_vectors(&vec_b)?;
    let diff = diff_vectors(&mean_a, &mean_b)?;
    write_landscape_grid_csv(&mean_a, &summaries_dir.join("mean_a.landgrid.csv"))?;
    write_landscape_grid_csv(&mean_b, &summaries_dir.join("mean_b.landgrid.csv"))?;
    write_landscape_grid_csv(&diff, &summaries_dir.join("diff.landgrid.csv"))?;
    eprintln!("pipeline: summaries written");

    // Stage 4: permutation test.
    let test_seed = derive_seed(cfg.seed, STREAM_TEST);
    let result_rel = "result.json".to_string();
    let record = run_test_stage(
        &all_diags[..n_a],
        &all_diags[n_a..],
        feature,
        statistic,
        cfg.permutations,
        cfg.drop_death_coords,
        cfg.drop_landscape_functions,
        cfg.landscape_degree,
        grid,
        test_seed,
        &out_dir.join(&result_rel),
    )?;
    println!(
        "p-value: {} ({} over {} splits, statistic {})",
        record.p_value,
        if record.exhaustive { "exhaustive" } else { "Monte Carlo" },
        record.n_permutations,
        record.statistic_name,
    );

    // Stage 5: classification.
    let cv_seed = derive_seed(cfg.seed, STREAM_CV);
    let report_rel = "cv_report.json".to_string();
    let model_rel = "model.json".to_string();
    let report = run_classify_stage(
        &all_diags[..n_a],
        &all_diags[n_a..],
        cfg.no_death_vector,
        cfg.folds,
        cfg.lambda,
        cfg.epochs,
        cfg.landscape_degree,
        grid,
        cv_seed,
        &out_dir.join(&report_rel),
        &out_dir.join(&model_rel),
    )?;
    println!(
        "cv mean accuracy: {} over {} folds",
        report.mean_accuracy, report.folds_used
    );

    // Manifest last, once everything it references exists.
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        clouds: records,
        test_seed,
        cv_seed,
        result_path: result_rel,
        cv_report_path: report_rel,
        model_path: model_rel,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    atomic_write(&out_dir.join("manifest.json"), text.as_bytes())?;
    eprintln!("pipeline: manifest written to {}", out_dir.join("manifest.json").display());
    Ok(())
}

fn global_index(group: &str, index: usize, clouds_per_group: usize) -> u64 {
    let offset = if group == "a" { 0 } else { clouds_per_group };
    (offset + index) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_counts_partitions_evenly() {
        assert_eq!(split_counts(100, 2), vec![50, 50]);
        assert_eq!(split_counts(100, 3), vec![34, 33, 33]);
        assert_eq!(split_counts(7, 3), vec![3, 2, 2]);
        assert_eq!(split_counts(3, 3), vec![1, 1, 1]);
        assert_eq!(split_counts(100, 3).iter().sum::<usize>(), 100);
    }

    #[test]
    fn derived_seeds_are_deterministic_and_distinct() {
        let a = derive_seed(7, STREAM_GROUP_A);
        assert_eq!(a, derive_seed(7, STREAM_GROUP_A));
        assert_ne!(a, derive_seed(7, STREAM_GROUP_B));
        assert_ne!(a, derive_seed(8, STREAM_GROUP_A));
        assert_ne!(derive_seed(7, STREAM_GROUP_A + 1), derive_seed(7, STREAM_GROUP_A + 2));
    }

    #[test]
    fn config_defaults_and_unknown_keys() {
        let cfg: PipelineConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, PipelineConfig::default());
        let cfg: PipelineConfig =
            serde_json::from_str(r#"{"seed": 3, "wedge_k_b": 5}"#).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.wedge_k_b, 5);
        assert_eq!(cfg.folds, 10);
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"sede": 3}"#).is_err());
    }

    #[test]
    fn scale_and_enum_parsing() {
        assert_eq!(parse_scale("diameter").unwrap(), Scale::Diameter);
        assert_eq!(parse_scale("radius").unwrap(), Scale::Radius);
        assert!(parse_scale("furlong").is_err());
        assert!(parse_test_feature("death").is_ok());
        assert!(parse_test_feature("landscape").is_ok());
        assert!(parse_test_feature("silhouette").is_err());
        assert!(parse_strategy("maxmin").is_ok());
        assert!(parse_strategy("greedy").is_err());
    }

    #[test]
    fn death_features_equalize_lengths() {
        let d1 = PersistenceDiagram {
            degree: 0,
            points: vec![(0.0, 3.0), (0.0, 2.0), (0.0, 1.0)],
            essentials: vec![0.0],
        };
        let d2 = PersistenceDiagram {
            degree: 0,
            points: vec![(0.0, 5.0), (0.0, 4.0)],
            essentials: vec![0.0],
        };
        let fvs = death_features(&[vec![d1], vec![d2]]).unwrap();
        assert_eq!(fvs[0].values, vec![3.0, 2.0]);
        assert_eq!(fvs[1].values, vec![5.0, 4.0]);
    }

    #[test]
    fn landscape_vector_missing_degree_is_zero() {
        let diags = vec![PersistenceDiagram::empty(0)];
        let grid = GridOpts { k: 2, a: 0.0, delta: 1.0, m: 2 };
        let fv = landscape_vector_of(&diags, 1, grid).unwrap();
        assert_eq!(fv.values, vec![0.0; 6]);
    }

    #[test]
    fn output_path_names() {
        let p = output_path(None, Path::new("data/cloud_01.csv"), ".dgm.csv");
        assert_eq!(p, PathBuf::from("data/cloud_01.dgm.csv"));
        let p = output_path(Some(Path::new("out")), Path::new("data/cloud_01.csv"), ".deaths.csv");
        assert_eq!(p, PathBuf::from("out/cloud_01.deaths.csv"));
        let p = output_path(None, Path::new("data/cloud_01.dgm.csv"), ".deaths.csv");
        assert_eq!(p, PathBuf::from("data/cloud_01.deaths.csv"));
    }
}
