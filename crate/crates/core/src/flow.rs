//! Euler-scheme gradient flows of a point cloud toward a fixed target.
//!
//! Each step re-estimates the distance with fresh directions (stream
//! `root.substream(t)` for step `t`) and moves every support by
//! `X <- X - n * eta * grad_X D(P_X, P_Y)`. Logged steps are scored with the exact
//! W2 distance to the target.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_ot::exact_wasserstein;
use crate::measure::EmpiricalMeasure;
use crate::registry::{Distance, DistanceParams, Registry};
use crate::sphere::RngStream;

/// Coordinates beyond this magnitude abort the flow.
pub const DIVERGENCE_BOUND: f64 = 1e6;

/// Estimator name plus its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSpec {
    pub name: String,
    pub params: DistanceParams,
}

impl DistanceSpec {
    pub fn new(name: impl Into<String>, params: DistanceParams) -> Self {
        Self { name: name.into(), params }
    }

    pub fn build(&self) -> Result<Box<dyn Distance>> {
        Registry::with_builtins().build(&self.name, &self.params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Euler iterations.
    pub steps: usize,
    /// Euler step size; `0` leaves the cloud in place.
    pub step_size: f64,
    pub distance: DistanceSpec,
    /// Score with exact W2 every this many steps (the first and last steps are always scored).
    pub score_every: usize,
    pub seed: u64,
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size >= 0.0) {
            return Err(Error::InvalidConfig(format!("Euler step size must be finite and >= 0, got {}", self.step_size)));
        }
        if self.score_every == 0 {
            return Err(Error::InvalidConfig("score interval must be >= 1".into()));
        }
        Ok(())
    }
}

/// One logged Euler step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    /// Estimator value at this step's cloud.
    pub loss: f64,
    /// Exact W2 from this step's cloud to the target.
    pub w2: f64,
    /// Wall-clock seconds since the flow started.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    pub records: Vec<TraceRecord>,
    pub final_cloud: EmpiricalMeasure,
}

impl FlowTrace {
    pub fn initial_w2(&self) -> f64 {
        self.records.first().map(|r| r.w2).unwrap_or(f64::NAN)
    }

    pub fn final_w2(&self) -> f64 {
        self.records.last().map(|r| r.w2).unwrap_or(f64::NAN)
    }

    /// CSV with header `step,loss,w2,seconds`; seconds carry three decimals.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["step", "loss", "w2", "seconds"])?;
        for r in &self.records {
            wtr.write_record([r.step.to_string(), r.loss.to_string(), r.w2.to_string(), format!("{:.3}", r.seconds)])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_csv_file<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path.as_ref())?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn check_finite(supports: &Array2<f64>, step: usize) -> Result<()> {
    if let Some(v) = supports.iter().find(|v| !v.is_finite() || v.abs() > DIVERGENCE_BOUND) {
        return Err(Error::Divergence { step, reason: format!("coordinate {v} exceeds {DIVERGENCE_BOUND:e}") });
    }
    Ok(())
}

/// Runs the flow with the estimator named in `cfg.distance`.
pub fn run_flow(source: &EmpiricalMeasure, target: &EmpiricalMeasure, cfg: &FlowConfig) -> Result<FlowTrace> {
    let distance = cfg.distance.build()?;
    run_flow_with(source, target, distance.as_ref(), cfg)
}

/// Runs the flow with an explicit estimator; `cfg.distance` is ignored.
pub fn run_flow_with(
    source: &EmpiricalMeasure,
    target: &EmpiricalMeasure,
    distance: &dyn Distance,
    cfg: &FlowConfig,
) -> Result<FlowTrace> {
    cfg.validate()?;
    crate::gradients::check_gradient_inputs(source, target, distance.order())?;
    let start = Instant::now();
    let root = RngStream::new(cfg.seed, 0);
    let n = source.len() as f64;
    let mut cloud = source.clone();
    let mut records = Vec::new();

    let mut log = |step: usize, cloud: &EmpiricalMeasure, loss: f64| -> Result<()> {
        let w2 = exact_wasserstein(cloud, target, 2.0)?;
        records.push(TraceRecord { step, loss, w2, seconds: start.elapsed().as_secs_f64() });
        Ok(())
    };

    // The value returned with step t's gradient is the loss at the cloud before step t.
    let mut pending = distance.value_and_support_gradient(&cloud, target, &root.substream(1))?;
    log(0, &cloud, pending.0)?;
    for t in 1..=cfg.steps {
        let (_, grad) = &pending;
        let mut supports = cloud.supports().clone();
        supports.scaled_add(-n * cfg.step_size, grad);
        check_finite(&supports, t)?;
        cloud = cloud.with_supports(supports)?;
        pending = distance.value_and_support_gradient(&cloud, target, &root.substream(t as u64 + 1))?;
        if t % cfg.score_every == 0 || t == cfg.steps {
            log(t, &cloud, pending.0)?;
        }
    }
    Ok(FlowTrace { records, final_cloud: cloud })
}

/// Point on the planar S-curve, `t in [-3pi/2, 3pi/2]`.
pub fn s_curve_point(t: f64) -> [f64; 2] {
    [t.sin(), t.signum() * (t.cos() - 1.0)]
}

/// Default jitter of [`make_s_shape`] fixtures.
pub const S_SHAPE_NOISE: f64 = 0.05;

/// `n` points on the S-curve at uniform parameters with isotropic Gaussian jitter.
pub fn make_s_shape(n: usize, noise: f64, seed: u64) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return Err(Error::InvalidParameter("S-shape fixture needs n >= 1".into()));
    }
    let mut rng = RngStream::new(seed, 0);
    let mut pts = Array2::zeros((n, 2));
    for mut row in pts.rows_mut() {
        let t = 3.0 * std::f64::consts::PI * (rng.uniform01() - 0.5);
        let [x, y] = s_curve_point(t);
        row[0] = x + noise * rng.standard_normal();
        row[1] = y + noise * rng.standard_normal();
    }
    EmpiricalMeasure::uniform(pts)
}

/// `n` draws from an isotropic Gaussian `N(mean, std^2 I)`.
pub fn make_gaussian(n: usize, mean: &[f64], std: f64, seed: u64) -> Result<EmpiricalMeasure> {
    let mut rng = RngStream::new(seed, 0);
    let d = mean.len();
    let pts = Array2::from_shape_fn((n, d), |(_, j)| mean[j] + std * rng.standard_normal());
    EmpiricalMeasure::uniform(pts)
}

/// Four-component planar Gaussian mixture standing in for a scattered initial cloud.
pub fn make_gaussian_mixture(n: usize, seed: u64) -> Result<EmpiricalMeasure> {
    const CENTRES: [[f64; 2]; 4] = [[-1.5, -1.5], [1.5, -1.5], [-1.5, 1.5], [1.5, 1.5]];
    let mut rng = RngStream::new(seed, 0);
    let mut pts = Array2::zeros((n, 2));
    for (i, mut row) in pts.rows_mut().into_iter().enumerate() {
        let c = CENTRES[i % CENTRES.len()];
        row[0] = c[0] + 0.4 * rng.standard_normal();
        row[1] = c[1] + 0.4 * rng.standard_normal();
    }
    EmpiricalMeasure::uniform(pts)
}
