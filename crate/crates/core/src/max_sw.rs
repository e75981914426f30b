//! Projected subgradient ascent for Max-SW and Max-K-SW.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradients::{check_gradient_inputs, grad_direction_unchecked};
use crate::measure::{Direction, EmpiricalMeasure};
use crate::sphere::{gram_schmidt_raw, retract_to_sphere, sample_stiefel_uniform, sample_uniform_sphere, DependentVector, RngStream};
use crate::sw_family::sliced_value;

/// Iteration count, step size and seed of a projected ascent run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AscentConfig {
    pub steps: usize,
    pub step_size: f64,
    pub seed: u64,
}

impl AscentConfig {
    pub fn new(steps: usize, step_size: f64, seed: u64) -> Result<Self> {
        let cfg = Self { steps, step_size, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidConfig("ascent steps T must be >= 1".into()));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::InvalidConfig(format!("ascent step size must be finite and > 0, got {}", self.step_size)));
        }
        Ok(())
    }

    /// Stream used for the initial direction(s).
    pub fn init_stream(&self) -> RngStream {
        RngStream::new(self.seed, 0)
    }
}

/// Final estimate of a Max-SW or Max-K-SW ascent.
#[derive(Debug, Clone, PartialEq)]
pub struct AscentResult {
    /// Objective at the returned directions.
    pub distance: f64,
    /// One direction for Max-SW, an orthonormal block for Max-K-SW.
    pub directions: Vec<Direction>,
    /// Objective at the random initialization.
    pub initial_distance: f64,
}

fn ascent_gradient(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, theta: &Direction, p: f64) -> Result<Array1<f64>> {
    let (a, b) = if mu.canonical_cmp(nu).is_gt() { (nu, mu) } else { (mu, nu) };
    let (_, g) = grad_direction_unchecked(a, b, theta.coords().view(), p);
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite gradient during projected ascent".into()));
    }
    Ok(g)
}

fn step(theta: &Direction, grad: &Array1<f64>, eta: f64) -> Array1<f64> {
    let mut next = theta.coords().clone();
    next.scaled_add(eta, grad);
    next
}

/// Max-SW by projected subgradient ascent on S^{d-1}.
///
/// Starts from a uniform direction and applies `theta <- normalize(theta + eta * grad W_p)`
/// `T - 1` times, with no momentum or step schedule.
pub fn max_sw(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, p: f64, cfg: &AscentConfig) -> Result<AscentResult> {
    max_sw_from_stream(mu, nu, p, cfg, cfg.init_stream())
}

/// [`max_sw`] initialized from an explicit stream instead of `cfg.seed`.
pub fn max_sw_from_stream(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    p: f64,
    cfg: &AscentConfig,
    mut rng: RngStream,
) -> Result<AscentResult> {
    cfg.validate()?;
    let d = check_gradient_inputs(mu, nu, p)?;
    let mut theta = sample_uniform_sphere(d, &mut rng)?;
    let initial_distance = sliced_value(mu, nu, std::slice::from_ref(&theta), p)?;
    for _ in 1..cfg.steps {
        let g = ascent_gradient(mu, nu, &theta, p)?;
        theta = retract_to_sphere(&step(&theta, &g, cfg.step_size))?;
    }
    let distance = sliced_value(mu, nu, std::slice::from_ref(&theta), p)?;
    Ok(AscentResult { distance, directions: vec![theta], initial_distance })
}

/// Max-K-SW: per-direction ascent steps followed by Gram-Schmidt each iteration.
///
/// A direction that collapses onto the span of the previous ones is replaced by a
/// fresh uniform draw before re-orthonormalizing.
pub fn max_ksw(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, p: f64, block: usize, cfg: &AscentConfig) -> Result<AscentResult> {
    max_ksw_from_stream(mu, nu, p, block, cfg, cfg.init_stream())
}

/// [`max_ksw`] initialized from an explicit stream instead of `cfg.seed`.
pub fn max_ksw_from_stream(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    p: f64,
    block: usize,
    cfg: &AscentConfig,
    mut rng: RngStream,
) -> Result<AscentResult> {
    cfg.validate()?;
    let d = check_gradient_inputs(mu, nu, p)?;
    let mut thetas = sample_stiefel_uniform(d, block, &mut rng)?;
    let initial_distance = sliced_value(mu, nu, &thetas, p)?;
    for _ in 1..cfg.steps {
        let mut moved = Vec::with_capacity(block);
        for theta in &thetas {
            let g = ascent_gradient(mu, nu, theta, p)?;
            moved.push(step(theta, &g, cfg.step_size));
        }
        thetas = loop {
            match gram_schmidt_raw(&moved) {
                Ok(q) => break q,
                Err(DependentVector(i)) => {
                    log::debug!("Max-K-SW direction {i} collapsed; resampling");
                    moved[i] = sample_uniform_sphere(d, &mut rng)?.into_inner();
                }
            }
        };
    }
    let distance = sliced_value(mu, nu, &thetas, p)?;
    Ok(AscentResult { distance, directions: thetas, initial_distance })
}
