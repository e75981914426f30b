//! Name-keyed registry of distance estimators.
//!
//! Every estimator implements [`Distance`]. The sliced ones share one
//! implementation, [`SlicedDistance`], and differ only in the
//! [`ProjectionSampler`] that picks the direction set; the estimate is then
//! `((1/|S|) sum_{theta in S} W_p^p)^{1/p}` over that set, and its support
//! gradient is available to gradient flows. Built-in names:
//!
//! | name      | directions                                            |
//! |-----------|-------------------------------------------------------|
//! | `sw`      | `L` i.i.d. uniform                                    |
//! | `ksw`     | `L` uniform orthonormal blocks of size `K`            |
//! | `max-sw`  | endpoint of `T`-step projected ascent                 |
//! | `max-ksw` | endpoint block of `T`-step ascent with Gram-Schmidt   |
//! | `msw-r`   | `L` chains of length `T`, vMF random walk (`kappa`)   |
//! | `msw-o`   | `L` chains, orthogonal-complement transitions         |
//! | `msw-i`   | `L` chains, deterministic ascent step (`eta`)         |
//! | `msw-vi`  | `L` chains, vMF around the ascent step                |
//! | `exact`   | none; Hungarian assignment                            |

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_ot::exact_wasserstein;
use crate::gradients::value_and_grad_supports;
use crate::max_sw::{max_ksw_from_stream, max_sw_from_stream, AscentConfig};
use crate::measure::{check_same_dim, Direction, EmpiricalMeasure};
use crate::msw::{msw_directions, MswConfig, TransitionKind};
use crate::sphere::RngStream;
use crate::sw_family::{ksw_directions, sliced_value, sw_directions};

/// Hyperparameters shared by all estimators; each reads the ones it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistanceParams {
    /// Order `p`.
    pub p: f64,
    /// `L`: projections, blocks or chains.
    #[serde(rename = "L")]
    pub projections: usize,
    /// `T`: ascent iterations or chain length.
    #[serde(rename = "T")]
    pub steps: usize,
    /// `K`: orthogonal block size.
    #[serde(rename = "K")]
    pub block: usize,
    /// Ascent / input-aware step size.
    pub eta: f64,
    /// vMF concentration.
    pub kappa: f64,
    /// `M`: burned chain steps.
    #[serde(rename = "M")]
    pub burn: usize,
    /// `N`: thinning interval.
    #[serde(rename = "N")]
    pub thin: usize,
}

impl Default for DistanceParams {
    fn default() -> Self {
        Self { p: 2.0, projections: 10, steps: 5, block: 2, eta: 0.1, kappa: 50.0, burn: 0, thin: 1 }
    }
}

/// Chooses the direction set of a sliced estimate.
pub trait ProjectionSampler: Send + Sync + fmt::Debug {
    fn directions(&self, mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, rng: &RngStream) -> Result<Vec<Direction>>;
}

/// A discrepancy between two empirical measures.
pub trait Distance: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn order(&self) -> f64;

    /// Distance estimate; stochastic estimators draw only from `rng`'s substreams.
    fn evaluate(&self, mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, rng: &RngStream) -> Result<f64>;

    /// Estimate and its gradient with respect to the supports of `mu`.
    fn value_and_support_gradient(
        &self,
        _mu: &EmpiricalMeasure,
        _nu: &EmpiricalMeasure,
        _rng: &RngStream,
    ) -> Result<(f64, Array2<f64>)> {
        Err(Error::Unsupported(format!("distance `{}` has no support gradient", self.name())))
    }
}

/// Sliced estimator over the directions chosen by a [`ProjectionSampler`].
#[derive(Debug)]
pub struct SlicedDistance {
    name: String,
    p: f64,
    sampler: Box<dyn ProjectionSampler>,
}

impl SlicedDistance {
    pub fn new(name: impl Into<String>, p: f64, sampler: Box<dyn ProjectionSampler>) -> Self {
        Self { name: name.into(), p, sampler }
    }

    pub fn directions(&self, mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, rng: &RngStream) -> Result<Vec<Direction>> {
        self.sampler.directions(mu, nu, rng)
    }
}

impl Distance for SlicedDistance {
    fn name(&self) -> &str {
        &self.name
    }

    fn order(&self) -> f64 {
        self.p
    }

    fn evaluate(&self, mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, rng: &RngStream) -> Result<f64> {
        let dirs = self.sampler.directions(mu, nu, rng)?;
        sliced_value(mu, nu, &dirs, self.p)
    }

    fn value_and_support_gradient(
        &self,
        mu: &EmpiricalMeasure,
        nu: &EmpiricalMeasure,
        rng: &RngStream,
    ) -> Result<(f64, Array2<f64>)> {
        let dirs = self.sampler.directions(mu, nu, rng)?;
        value_and_grad_supports(mu, nu, &dirs, self.p)
    }
}

#[derive(Debug)]
struct UniformSampler {
    projections: usize,
}

impl ProjectionSampler for UniformSampler {
    fn directions(&self, mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, rng: &RngStream) -> Result<Vec<Direction>> {
        sw_directions(check_same_dim(mu, nu)?, self.projections, rng)
    }
}

#[derive(Debug)]
struct StiefelSampler {
    projections: usize,
    block: usize,
}

impl ProjectionSampler for StiefelSampler {
    fn directions(&self, mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, rng: &RngStream) -> Result<Vec<Direction>> {
        ksw_directions(check_same_dim(mu, nu)?, self.projections, self.block, rng)
    }
}

#[derive(Debug)]
struct AscentSampler {
    p: f64,
    /// `None` for Max-SW, `Some(K)` for Max-K-SW.
    block: Option<usize>,
    cfg: AscentConfig,
}

impl ProjectionSampler for AscentSampler {
    fn directions(&self, mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, rng: &RngStream) -> Result<Vec<Direction>> {
        let result = match self.block {
            None => max_sw_from_stream(mu, nu, self.p, &self.cfg, rng.clone())?,
            Some(k) => max_ksw_from_stream(mu, nu, self.p, k, &self.cfg, rng.clone())?,
        };
        Ok(result.directions)
    }
}

#[derive(Debug)]
struct MarkovSampler {
    cfg: MswConfig,
}

impl ProjectionSampler for MarkovSampler {
    fn directions(&self, mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, rng: &RngStream) -> Result<Vec<Direction>> {
        msw_directions(mu, nu, &self.cfg, rng)
    }
}

/// Exact Wasserstein distance via optimal assignment.
#[derive(Debug)]
pub struct ExactDistance {
    p: f64,
}

impl Distance for ExactDistance {
    fn name(&self) -> &str {
        "exact"
    }

    fn order(&self) -> f64 {
        self.p
    }

    fn evaluate(&self, mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, _rng: &RngStream) -> Result<f64> {
        exact_wasserstein(mu, nu, self.p)
    }
}

fn positive(name: &str, v: usize) -> Result<usize> {
    if v == 0 {
        return Err(Error::InvalidConfig(format!("{name} must be >= 1")));
    }
    Ok(v)
}

fn check_p(p: f64) -> Result<f64> {
    crate::ot1d::check_order(p)?;
    Ok(p)
}

fn markov(name: &str, params: &DistanceParams, transition: TransitionKind) -> Result<Box<dyn Distance>> {
    let cfg = MswConfig::new(params.projections, params.steps, params.p, transition, 0)
        .with_burn_thin(params.burn, params.thin);
    cfg.validate()?;
    Ok(Box::new(SlicedDistance::new(name, params.p, Box::new(MarkovSampler { cfg }))))
}

fn ascent(name: &str, params: &DistanceParams, block: Option<usize>) -> Result<Box<dyn Distance>> {
    let p = check_p(params.p)?;
    let cfg = AscentConfig::new(params.steps, params.eta, 0)?;
    if let Some(k) = block {
        positive("K", k)?;
    }
    Ok(Box::new(SlicedDistance::new(name, p, Box::new(AscentSampler { p, block, cfg }))))
}

/// Constructor stored in the registry.
pub type Builder = Arc<dyn Fn(&DistanceParams) -> Result<Box<dyn Distance>> + Send + Sync>;

/// Distances constructible by name.
#[derive(Clone)]
pub struct Registry {
    builders: BTreeMap<String, Builder>,
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry").field("names", &self.names().collect::<Vec<_>>()).finish()
    }
}

impl Default for Registry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl Registry {
    pub fn empty() -> Self {
        Self { builders: BTreeMap::new() }
    }

    /// Registry holding every estimator in the table above.
    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("sw", |p| {
            let sampler = UniformSampler { projections: positive("L", p.projections)? };
            Ok(Box::new(SlicedDistance::new("sw", check_p(p.p)?, Box::new(sampler))))
        });
        r.register("ksw", |p| {
            let sampler = StiefelSampler { projections: positive("L", p.projections)?, block: positive("K", p.block)? };
            Ok(Box::new(SlicedDistance::new("ksw", check_p(p.p)?, Box::new(sampler))))
        });
        r.register("max-sw", |p| ascent("max-sw", p, None));
        r.register("max-ksw", |p| ascent("max-ksw", p, Some(p.block)));
        r.register("msw-r", |p| markov("msw-r", p, TransitionKind::RandomWalk { kappa: p.kappa }));
        r.register("msw-o", |p| markov("msw-o", p, TransitionKind::OrthogonalBased));
        r.register("msw-i", |p| markov("msw-i", p, TransitionKind::InputAwareDeterministic { eta: p.eta }));
        r.register("msw-vi", |p| {
            markov("msw-vi", p, TransitionKind::InputAwareVmf { eta: p.eta, kappa: p.kappa })
        });
        r.register("exact", |p| Ok(Box::new(ExactDistance { p: check_p(p.p)? })));
        r
    }

    /// Adds or replaces the builder for `name`.
    pub fn register<F>(&mut self, name: &str, builder: F)
    where
        F: Fn(&DistanceParams) -> Result<Box<dyn Distance>> + Send + Sync + 'static,
    {
        self.builders.insert(name.to_string(), Arc::new(builder));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.builders.contains_key(name)
    }

    pub fn build(&self, name: &str, params: &DistanceParams) -> Result<Box<dyn Distance>> {
        let builder = self.builders.get(name).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "unknown distance `{name}` (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        builder(params)
    }
}
