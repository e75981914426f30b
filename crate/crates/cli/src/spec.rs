use std::path::{Path, PathBuf};

use clap::Args;
use msw_core::flow::DistanceSpec;
use msw_core::DistanceParams;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_DISTANCE: &str = "msw-i";

/// Estimator flags shared by every subcommand that evaluates a distance.
#[derive(Debug, Clone, Default, Args)]
pub struct DistanceArgs {
    /// One of sw, ksw, max-sw, max-ksw, msw-r, msw-o, msw-i, msw-vi, exact [default: msw-i]
    #[arg(long)]
    pub distance: Option<String>,
    /// Projections, blocks or chains [default: 10]
    #[arg(short = 'L')]
    pub projections: Option<usize>,
    /// Ascent iterations or chain length [default: 5]
    #[arg(short = 'T')]
    pub chain_steps: Option<usize>,
    /// Orthogonal block size [default: 2]
    #[arg(short = 'K')]
    pub block: Option<usize>,
    /// Ascent / input-aware step size [default: 0.1]
    #[arg(long)]
    pub eta: Option<f64>,
    /// vMF concentration [default: 50]
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Burned chain steps [default: 0]
    #[arg(short = 'M')]
    pub burn: Option<usize>,
    /// Thinning interval [default: 1]
    #[arg(short = 'N')]
    pub thin: Option<usize>,
    /// Order of the Wasserstein distance [default: 2]
    #[arg(short = 'p')]
    pub order: Option<f64>,
    /// Seed of every random draw [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON file with any of the keys distance, L, T, K, eta, kappa, M, N, p, seed; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Distance settings as written in JSON configs; every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub distance: Option<String>,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    #[serde(rename = "T")]
    pub t: Option<usize>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub eta: Option<f64>,
    pub kappa: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub seed: Option<u64>,
}

impl SpecFile {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("--config {}: {e}", path.display())))
    }

    /// Fills unset keys from `fallback`.
    fn or(self, fallback: SpecFile) -> SpecFile {
        SpecFile {
            distance: self.distance.or(fallback.distance),
            l: self.l.or(fallback.l),
            t: self.t.or(fallback.t),
            k: self.k.or(fallback.k),
            eta: self.eta.or(fallback.eta),
            kappa: self.kappa.or(fallback.kappa),
            m: self.m.or(fallback.m),
            n: self.n.or(fallback.n),
            p: self.p.or(fallback.p),
            seed: self.seed.or(fallback.seed),
        }
    }

    pub fn resolve(self) -> CliResult<ResolvedSpec> {
        let d = DistanceParams::default();
        let params = DistanceParams {
            p: self.p.unwrap_or(d.p),
            projections: self.l.unwrap_or(d.projections),
            steps: self.t.unwrap_or(d.steps),
            block: self.k.unwrap_or(d.block),
            eta: self.eta.unwrap_or(d.eta),
            kappa: self.kappa.unwrap_or(d.kappa),
            burn: self.m.unwrap_or(d.burn),
            thin: self.n.unwrap_or(d.thin),
        };
        let spec = ResolvedSpec {
            name: self.distance.unwrap_or_else(|| DEFAULT_DISTANCE.to_string()),
            params,
            seed: self.seed.unwrap_or(0),
        };
        spec.to_distance_spec().build().map_err(|e| CliError::from(e).context("distance settings"))?;
        Ok(spec)
    }
}

impl DistanceArgs {
    pub fn resolve(&self) -> CliResult<ResolvedSpec> {
        let flags = SpecFile {
            distance: self.distance.clone(),
            l: self.projections,
            t: self.chain_steps,
            k: self.block,
            eta: self.eta,
            kappa: self.kappa,
            m: self.burn,
            n: self.thin,
            p: self.order,
            seed: self.seed,
        };
        let file = match &self.config {
            Some(path) => SpecFile::read(path)?,
            None => SpecFile::default(),
        };
        flags.or(file).resolve()
    }
}

/// Fully specified estimator; serialized into the JSON output of `dist`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedSpec {
    pub name: String,
    #[serde(flatten)]
    pub params: DistanceParams,
    pub seed: u64,
}

impl ResolvedSpec {
    pub fn to_distance_spec(&self) -> DistanceSpec {
        DistanceSpec::new(self.name.clone(), self.params)
    }

    /// Short label such as `msw-i L=2 T=5`, listing only the knobs the estimator reads.
    pub fn label(&self) -> String {
        let p = &self.params;
        let knobs = match self.name.as_str() {
            "sw" => format!("L={}", p.projections),
            "ksw" => format!("L={} K={}", p.projections, p.block),
            "max-sw" => format!("T={}", p.steps),
            "max-ksw" => format!("T={} K={}", p.steps, p.block),
            "exact" => String::new(),
            _ => format!("L={} T={}", p.projections, p.steps),
        };
        if knobs.is_empty() {
            self.name.clone()
        } else {
            format!("{} {knobs}", self.name)
        }
    }
}
