use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use msw_core::color::{read_rgb, transfer_colors, write_png, TransferConfig, DEFAULT_KMEANS_ITERS, DEFAULT_PALETTE_SIZE};
use msw_core::exact_ot::exact_wasserstein;
use msw_core::flow::{make_gaussian, make_gaussian_mixture, make_s_shape, run_flow, FlowConfig, S_SHAPE_NOISE};
use msw_core::{EmpiricalMeasure, RngStream};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::spec::{DistanceArgs, ResolvedSpec};

/// Seconds rounded to milliseconds.
pub fn round_seconds(s: f64) -> f64 {
    (s * 1000.0).round() / 1000.0
}

fn read_cloud(path: &Path) -> CliResult<EmpiricalMeasure> {
    EmpiricalMeasure::read_csv(path).map_err(|e| CliError::from(e).context(path.display()))
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string(value).map_err(|e| CliError::usage(e.to_string()))?;
    println!("{text}");
    Ok(())
}

#[derive(Debug, Args)]
pub struct DistArgs {
    /// First point cloud (CSV with header x1,...,xd[,w])
    pub first: PathBuf,
    /// Second point cloud
    pub second: PathBuf,
    #[command(flatten)]
    pub spec: DistanceArgs,
}

#[derive(Serialize)]
struct DistOutput<'a> {
    distance: f64,
    seconds: f64,
    spec: &'a ResolvedSpec,
}

pub fn dist(args: &DistArgs) -> CliResult<()> {
    let spec = args.spec.resolve()?;
    let mu = read_cloud(&args.first)?;
    let nu = read_cloud(&args.second)?;
    let distance = spec.to_distance_spec().build()?;
    let start = Instant::now();
    let value = distance.evaluate(&mu, &nu, &RngStream::new(spec.seed, 0))?;
    let seconds = round_seconds(start.elapsed().as_secs_f64());
    if !value.is_finite() {
        return Err(CliError::from(msw_core::Error::Numerical(format!("distance evaluated to {value}"))));
    }
    print_json(&DistOutput { distance: value, seconds, spec: &spec })
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Fixture {
    /// Points along a planar S-curve with Gaussian jitter.
    SShape,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InitialCloud {
    /// Standard planar Gaussian.
    Gaussian,
    /// Four-component planar Gaussian mixture.
    Mixture,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    /// Source point cloud; generated with --init when omitted
    #[arg(long)]
    pub source: Option<PathBuf>,
    /// Target point cloud
    #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
    pub target: Option<PathBuf>,
    /// Generate the target instead of reading it
    #[arg(long, value_enum)]
    pub fixture: Option<Fixture>,
    /// Generated source cloud
    #[arg(long, value_enum, default_value = "gaussian", conflicts_with = "source")]
    pub init: InitialCloud,
    /// Points per generated cloud
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// Jitter of the S-shape fixture
    #[arg(long, default_value_t = S_SHAPE_NOISE)]
    pub noise: f64,
    /// Euler iterations
    #[arg(long, default_value_t = 300)]
    pub steps: usize,
    /// Euler step size
    #[arg(long, default_value_t = 1e-3)]
    pub step_size: f64,
    /// Score with exact W2 every this many steps
    #[arg(long, default_value_t = 10)]
    pub score_every: usize,
    /// Directory receiving trace.csv and final.csv
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub spec: DistanceArgs,
}

#[derive(Serialize)]
struct FlowOutput {
    initial_w2: f64,
    final_w2: f64,
    trace: PathBuf,
    final_cloud: PathBuf,
}

fn flow_config(spec: &ResolvedSpec, steps: usize, step_size: f64, score_every: usize) -> CliResult<FlowConfig> {
    let cfg = FlowConfig { steps, step_size, distance: spec.to_distance_spec(), score_every, seed: spec.seed };
    cfg.validate().map_err(|e| CliError::from(e).context("flow settings"))?;
    Ok(cfg)
}

pub fn flow(args: &FlowArgs) -> CliResult<()> {
    let spec = args.spec.resolve()?;
    let cfg = flow_config(&spec, args.steps, args.step_size, args.score_every)?;
    if args.points == 0 {
        return Err(CliError::usage("--points must be >= 1"));
    }
    if !(args.noise.is_finite() && args.noise >= 0.0) {
        return Err(CliError::usage(format!("--noise must be finite and >= 0, got {}", args.noise)));
    }
    let target = match (&args.target, args.fixture) {
        (Some(path), _) => read_cloud(path)?,
        (None, Some(Fixture::SShape)) => make_s_shape(args.points, args.noise, spec.seed.wrapping_add(2))?,
        (None, None) => return Err(CliError::usage("either --target or --fixture is required")),
    };
    let source = match &args.source {
        Some(path) => read_cloud(path)?,
        None => {
            let seed = spec.seed.wrapping_add(1);
            match args.init {
                InitialCloud::Gaussian => make_gaussian(args.points, &vec![0.0; target.dim()], 1.0, seed)?,
                InitialCloud::Mixture if target.dim() == 2 => make_gaussian_mixture(args.points, seed)?,
                InitialCloud::Mixture => return Err(CliError::usage("--init mixture generates planar clouds only")),
            }
        }
    };
    let trace = run_flow(&source, &target, &cfg)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| CliError::input(format!("{}: {e}", args.out_dir.display())))?;
    let trace_path = args.out_dir.join("trace.csv");
    let final_path = args.out_dir.join("final.csv");
    trace.write_csv_file(&trace_path)?;
    trace.final_cloud.write_csv_file(&final_path)?;
    print_json(&FlowOutput {
        initial_w2: trace.initial_w2(),
        final_w2: trace.final_w2(),
        trace: trace_path,
        final_cloud: final_path,
    })
}

#[derive(Debug, Args)]
pub struct ColorArgs {
    /// Image to recolor
    pub source: PathBuf,
    /// Image providing the palette
    pub target: PathBuf,
    /// Output PNG
    #[arg(long)]
    pub out: PathBuf,
    /// Palette size (at most 3000)
    #[arg(long, default_value_t = DEFAULT_PALETTE_SIZE)]
    pub k: usize,
    /// Lloyd iterations of the palette k-means
    #[arg(long, default_value_t = DEFAULT_KMEANS_ITERS)]
    pub kmeans_iters: usize,
    /// Euler iterations
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    /// Euler step size
    #[arg(long, default_value_t = 1e-3)]
    pub step_size: f64,
    #[command(flatten)]
    pub spec: DistanceArgs,
}

#[derive(Serialize)]
struct ColorOutput {
    k: usize,
    source_w2: f64,
    transferred_w2: f64,
    output: PathBuf,
}

pub fn color(args: &ColorArgs) -> CliResult<()> {
    let spec = args.spec.resolve()?;
    let flow = flow_config(&spec, args.steps, args.step_size, args.steps.max(1))?;
    if args.kmeans_iters == 0 {
        return Err(CliError::usage("--kmeans-iters must be >= 1"));
    }
    let source = read_rgb(&args.source).map_err(|e| CliError::from(e).context(args.source.display()))?;
    let target = read_rgb(&args.target).map_err(|e| CliError::from(e).context(args.target.display()))?;
    let cfg = TransferConfig { k: args.k, kmeans_iters: args.kmeans_iters, flow };
    let result = transfer_colors(&source, &target, &cfg).map_err(|e| {
        let err = CliError::from(e);
        if err.code == crate::error::EXIT_USAGE { err.context("--k") } else { err }
    })?;
    write_png(&result.image, &args.out)?;
    let target_measure = result.target_palette.to_measure()?;
    print_json(&ColorOutput {
        k: result.source_palette.len(),
        source_w2: exact_wasserstein(&result.source_palette.to_measure()?, &target_measure, 2.0)?,
        transferred_w2: exact_wasserstein(&result.transferred_measure()?, &target_measure, 2.0)?,
        output: args.out.clone(),
    })
}
