//! Markovian sliced Wasserstein (MSW) estimators.
//!
//! The `T` projecting directions of each of the `L` chains form a first-order
//! Markov chain: `theta_1` is uniform on the sphere and `theta_t` is drawn from a
//! transition kernel given `theta_{t-1}`. The estimator averages projected
//! `W_p^p` over all chain directions (optionally after burning the first `M`
//! steps and keeping every `N`-th) and takes the p-th root.
//!
//! Chain `l` (1-based) draws from `root.substream(l)`, the same stream the plain
//! SW estimator uses for its `l`-th projection, so `T = 1` reproduces SW exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradients::{check_gradient_inputs, grad_direction_unchecked};
use crate::measure::{check_same_dim, Direction, EmpiricalMeasure};
use crate::ot1d::check_order;
use crate::sphere::{project_orthocomplement, retract_to_sphere, sample_uniform_sphere, sample_vmf, RngStream, VmfParams};
use crate::sw_family::sliced_value;

/// Transition kernel `theta_{t-1} -> theta_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransitionKind {
    /// vMF centred at the previous direction.
    RandomWalk { kappa: f64 },
    /// Uniform on the great subsphere orthogonal to the previous direction.
    OrthogonalBased,
    /// One projected subgradient ascent step on `W_p(theta # mu, theta # nu)`.
    InputAwareDeterministic { eta: f64 },
    /// vMF centred at the ascent step's result.
    InputAwareVmf { eta: f64, kappa: f64 },
}

impl TransitionKind {
    pub fn validate(&self) -> Result<()> {
        let kappa_ok = |k: f64| k.is_finite() && k >= 0.0;
        let eta_ok = |e: f64| e.is_finite() && e > 0.0;
        match *self {
            TransitionKind::RandomWalk { kappa } if !kappa_ok(kappa) => {
                Err(Error::InvalidConfig(format!("kappa must be >= 0, got {kappa}")))
            }
            TransitionKind::InputAwareDeterministic { eta } if !eta_ok(eta) => {
                Err(Error::InvalidConfig(format!("eta must be > 0, got {eta}")))
            }
            TransitionKind::InputAwareVmf { eta, kappa } if !eta_ok(eta) || !kappa_ok(kappa) => Err(
                Error::InvalidConfig(format!("need eta > 0 and kappa >= 0, got eta = {eta}, kappa = {kappa}")),
            ),
            _ => Ok(()),
        }
    }

    /// Whether the kernel reads the two measures.
    pub fn is_input_aware(&self) -> bool {
        matches!(self, TransitionKind::InputAwareDeterministic { .. } | TransitionKind::InputAwareVmf { .. })
    }

    /// Every kernel except the deterministic ascent step needs `d >= 2`.
    fn min_dimension(&self) -> usize {
        match self {
            TransitionKind::InputAwareDeterministic { .. } => 1,
            _ => 2,
        }
    }
}

/// Full specification of an MSW estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MswConfig {
    /// Number of chains `L`.
    pub chains: usize,
    /// Chain length `T`.
    pub steps: usize,
    pub p: f64,
    pub transition: TransitionKind,
    /// Burned steps `M`.
    pub burn: usize,
    /// Thinning interval `N`.
    pub thin: usize,
    pub seed: u64,
}

impl MswConfig {
    /// Config without burning or thinning.
    pub fn new(chains: usize, steps: usize, p: f64, transition: TransitionKind, seed: u64) -> Self {
        Self { chains, steps, p, transition, burn: 0, thin: 1, seed }
    }

    pub fn with_burn_thin(mut self, burn: usize, thin: usize) -> Self {
        self.burn = burn;
        self.thin = thin;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_chains(mut self, chains: usize) -> Self {
        self.chains = chains;
        self
    }

    /// 1-based step `t` contributes to the estimate iff `t > M` and `t mod N == 0`.
    pub fn is_kept(&self, t: usize) -> bool {
        t > self.burn && t % self.thin == 0
    }

    /// Number of kept steps per chain.
    pub fn kept_per_chain(&self) -> usize {
        (1..=self.steps).filter(|&t| self.is_kept(t)).count()
    }

    pub fn validate(&self) -> Result<()> {
        check_order(self.p)?;
        self.transition.validate()?;
        if self.chains == 0 {
            return Err(Error::InvalidConfig("number of chains L must be >= 1".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("chain length T must be >= 1".into()));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thinning interval N must be >= 1".into()));
        }
        if self.burn >= self.steps {
            return Err(Error::InvalidConfig(format!("burn M = {} must be < T = {}", self.burn, self.steps)));
        }
        if self.kept_per_chain() == 0 {
            return Err(Error::InvalidConfig(format!(
                "no step t in 1..={} satisfies t > {} and t mod {} = 0",
                self.steps, self.burn, self.thin
            )));
        }
        Ok(())
    }

    pub fn root_stream(&self) -> RngStream {
        RngStream::new(self.seed, 0)
    }
}

/// Directions `theta_1..theta_T` of one chain with the burn/thin mask.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionChain {
    pub directions: Vec<Direction>,
    pub kept: Vec<bool>,
}

impl DirectionChain {
    pub fn kept_directions(&self) -> impl Iterator<Item = &Direction> {
        self.directions.iter().zip(&self.kept).filter(|(_, &k)| k).map(|(d, _)| d)
    }
}

fn ascent_target(
    inputs: Option<(&EmpiricalMeasure, &EmpiricalMeasure)>,
    theta: &Direction,
    eta: f64,
    p: f64,
) -> Result<Direction> {
    let (mu, nu) = inputs.ok_or_else(|| Error::InvalidConfig("input-aware transitions need both measures".into()))?;
    let (a, b) = if mu.canonical_cmp(nu).is_gt() { (nu, mu) } else { (mu, nu) };
    let (_, grad) = grad_direction_unchecked(a, b, theta.coords().view(), p);
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numerical("non-finite gradient in input-aware transition".into()));
    }
    let mut next = theta.coords().clone();
    next.scaled_add(eta, &grad);
    retract_to_sphere(&next)
}

fn transition(
    kind: &TransitionKind,
    prev: &Direction,
    inputs: Option<(&EmpiricalMeasure, &EmpiricalMeasure)>,
    p: f64,
    rng: &mut RngStream,
) -> Result<Direction> {
    match *kind {
        TransitionKind::RandomWalk { kappa } => sample_vmf(&VmfParams::new(prev.clone(), kappa)?, rng),
        TransitionKind::OrthogonalBased => loop {
            let fresh = sample_uniform_sphere(prev.dim(), rng)?;
            match project_orthocomplement(fresh.coords(), prev) {
                Err(Error::DegenerateInput(_)) => continue,
                other => break other,
            }
        },
        TransitionKind::InputAwareDeterministic { eta } => ascent_target(inputs, prev, eta, p),
        TransitionKind::InputAwareVmf { eta, kappa } => {
            let centre = ascent_target(inputs, prev, eta, p)?;
            sample_vmf(&VmfParams::new(centre, kappa)?, rng)
        }
    }
}

fn check_chain_inputs(
    d: usize,
    inputs: Option<(&EmpiricalMeasure, &EmpiricalMeasure)>,
    cfg: &MswConfig,
) -> Result<()> {
    cfg.validate()?;
    if d < cfg.transition.min_dimension() {
        return Err(Error::InvalidDimension(d, "this transition kernel needs d >= 2"));
    }
    match inputs {
        Some((mu, nu)) => {
            let md = if cfg.transition.is_input_aware() {
                check_gradient_inputs(mu, nu, cfg.p)?
            } else {
                check_same_dim(mu, nu)?
            };
            if md != d {
                return Err(Error::DimensionMismatch { expected: d, found: md });
            }
        }
        None if cfg.transition.is_input_aware() => {
            return Err(Error::InvalidConfig("input-aware transitions need both measures".into()));
        }
        None => {}
    }
    Ok(())
}

fn sample_chain_unchecked(
    d: usize,
    inputs: Option<(&EmpiricalMeasure, &EmpiricalMeasure)>,
    cfg: &MswConfig,
    chain_id: u64,
    root: &RngStream,
) -> Result<DirectionChain> {
    let mut rng = root.substream(chain_id);
    let mut directions = Vec::with_capacity(cfg.steps);
    directions.push(sample_uniform_sphere(d, &mut rng)?);
    for _ in 1..cfg.steps {
        let next = transition(&cfg.transition, directions.last().expect("non-empty"), inputs, cfg.p, &mut rng)?;
        directions.push(next);
    }
    let kept = (1..=cfg.steps).map(|t| cfg.is_kept(t)).collect();
    Ok(DirectionChain { directions, kept })
}

/// Samples one chain of `T` directions in dimension `d` from `root.substream(chain_id)`.
///
/// `inputs` is required for input-aware kernels and ignored otherwise.
pub fn sample_chain(
    d: usize,
    inputs: Option<(&EmpiricalMeasure, &EmpiricalMeasure)>,
    cfg: &MswConfig,
    chain_id: u64,
    root: &RngStream,
) -> Result<DirectionChain> {
    check_chain_inputs(d, inputs, cfg)?;
    sample_chain_unchecked(d, inputs, cfg, chain_id, root)
}

/// Samples chains `1..=L` in parallel, returned in chain order.
pub fn sample_chains(
    d: usize,
    inputs: Option<(&EmpiricalMeasure, &EmpiricalMeasure)>,
    cfg: &MswConfig,
    root: &RngStream,
) -> Result<Vec<DirectionChain>> {
    check_chain_inputs(d, inputs, cfg)?;
    (1..=cfg.chains as u64)
        .into_par_iter()
        .map(|l| sample_chain_unchecked(d, inputs, cfg, l, root))
        .collect()
}

/// Kept directions of all chains, chain by chain, for an estimate driven by `root`.
pub fn msw_directions(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    cfg: &MswConfig,
    root: &RngStream,
) -> Result<Vec<Direction>> {
    let d = check_same_dim(mu, nu)?;
    let chains = sample_chains(d, Some((mu, nu)), cfg, root)?;
    Ok(chains.iter().flat_map(|c| c.kept_directions().cloned()).collect())
}

/// `((1/(LT)) sum_{l,t} W_p^p(theta_lt # mu, theta_lt # nu))^{1/p}`; requires `M = 0`, `N = 1`.
pub fn msw_estimate(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, cfg: &MswConfig) -> Result<f64> {
    if cfg.burn != 0 || cfg.thin != 1 {
        return Err(Error::InvalidConfig(
            "msw_estimate uses every chain step; use msw_estimate_burn_thin for M > 0 or N > 1".into(),
        ));
    }
    msw_estimate_burn_thin(mu, nu, cfg)
}

/// Burned-thinned MSW: averages only over kept steps, normalized by the kept count.
pub fn msw_estimate_burn_thin(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, cfg: &MswConfig) -> Result<f64> {
    let dirs = msw_directions(mu, nu, cfg, &cfg.root_stream())?;
    sliced_value(mu, nu, &dirs, cfg.p)
}

/// Empirical mean and standard deviation of an estimator at one `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub projections: usize,
    pub mean: f64,
    pub stddev: f64,
}

/// Re-evaluates `estimate(L, seed)` for `seed in 0..seeds` at every `L` in `grid`.
///
/// The standard deviation uses the unbiased `(seeds - 1)` normalization.
pub fn monte_carlo_report<F>(grid: &[usize], seeds: u64, estimate: F) -> Result<Vec<VarianceRow>>
where
    F: Fn(usize, u64) -> Result<f64> + Sync,
{
    if seeds < 2 {
        return Err(Error::InvalidConfig("variance report needs at least two seeds".into()));
    }
    grid.iter()
        .map(|&l| {
            let values: Vec<f64> = (0..seeds).into_par_iter().map(|s| estimate(l, s)).collect::<Result<_>>()?;
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            Ok(VarianceRow { projections: l, mean, stddev: var.sqrt() })
        })
        .collect()
}

/// Variance report for [`msw_estimate_burn_thin`] over chain counts `grid`, seeds `cfg.seed + s`.
pub fn estimator_variance_report(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    cfg: &MswConfig,
    seeds: u64,
    grid: &[usize],
) -> Result<Vec<VarianceRow>> {
    cfg.validate()?;
    monte_carlo_report(grid, seeds, |l, s| {
        let c = cfg.with_chains(l).with_seed(cfg.seed.wrapping_add(s));
        msw_estimate_burn_thin(mu, nu, &c)
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
