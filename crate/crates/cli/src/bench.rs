use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use msw_core::flow::make_gaussian;
use msw_core::RngStream;
use serde::Deserialize;

use crate::commands::round_seconds;
use crate::error::{CliError, CliResult};
use crate::spec::SpecFile;

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// JSON grid: {"specs": [...], "n": [...], "d": [...], "repetitions": 3, "warmup": 1, "seed": 0}
    pub config: PathBuf,
    /// Output CSV [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchConfig {
    #[serde(default)]
    specs: Vec<SpecFile>,
    #[serde(default)]
    n: Vec<usize>,
    #[serde(default)]
    d: Vec<usize>,
    #[serde(default = "default_repetitions")]
    repetitions: usize,
    #[serde(default = "default_warmup")]
    warmup: usize,
    /// Seed of the generated point clouds.
    #[serde(default)]
    seed: u64,
}

fn default_repetitions() -> usize {
    3
}

fn default_warmup() -> usize {
    1
}

/// Times every (spec, n, d) in the grid on Gaussian clouds `N(0, I)` and `N(1/2, I)`.
pub fn bench(args: &BenchArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::usage(format!("{}: {e}", args.config.display())))?;
    let cfg: BenchConfig =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", args.config.display())))?;
    if cfg.repetitions == 0 {
        return Err(CliError::usage("repetitions must be >= 1"));
    }
    let specs = cfg
        .specs
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.resolve().map_err(|e| e.context(format!("specs[{i}]"))))
        .collect::<CliResult<Vec<_>>>()?;
    if let Some(bad) = cfg.n.iter().chain(&cfg.d).find(|&&v| v == 0) {
        return Err(CliError::usage(format!("grid sizes must be >= 1, got {bad}")));
    }

    let sink: Box<dyn std::io::Write> = match &args.out {
        Some(path) => Box::new(std::fs::File::create(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut wtr = csv::Writer::from_writer(sink);
    let csv_err = |e: csv::Error| CliError::input(e.to_string());
    wtr.write_record(["spec", "n", "d", "mean-seconds", "distance"]).map_err(csv_err)?;
    for spec in &specs {
        let distance = spec.to_distance_spec().build()?;
        for &n in &cfg.n {
            for &d in &cfg.d {
                let mu = make_gaussian(n, &vec![0.0; d], 1.0, cfg.seed)?;
                let nu = make_gaussian(n, &vec![0.5; d], 1.0, cfg.seed.wrapping_add(1))?;
                let rng = RngStream::new(spec.seed, 0);
                for _ in 0..cfg.warmup {
                    distance.evaluate(&mu, &nu, &rng)?;
                }
                let mut total = 0.0;
                let mut value = f64::NAN;
                for _ in 0..cfg.repetitions {
                    let start = Instant::now();
                    value = distance.evaluate(&mu, &nu, &rng)?;
                    total += start.elapsed().as_secs_f64();
                }
                let mean = round_seconds(total / cfg.repetitions as f64);
                log::info!("{} n={n} d={d}: {mean:.3} s", spec.label());
                wtr.write_record([spec.label(), n.to_string(), d.to_string(), format!("{mean:.3}"), value.to_string()])
                    .map_err(csv_err)?;
            }
        }
    }
    wtr.flush()?;
    Ok(())
}
