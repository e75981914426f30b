//! Monte Carlo estimators for sliced Wasserstein (SW) and K-sliced Wasserstein (K-SW).
//!
//! Every sliced estimator in this crate reduces to the same final step: given a
//! finite set of directions `S`, average the projected `W_p^p` over `S` and take
//! the p-th root. [`sliced_pth_power`] performs that step with a parallel map and
//! an ordered reduction, so results do not depend on the thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{check_same_dim, project_unchecked, Direction, EmpiricalMeasure};
use crate::ot1d::{check_order, pth_power_unchecked};
use crate::sphere::{sample_stiefel_uniform, sample_uniform_sphere, RngStream};

/// Projected `W_p^p(theta # mu, theta # nu)` for every direction, in input order.
pub fn projected_pth_powers(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    directions: &[Direction],
    p: f64,
) -> Result<Vec<f64>> {
    check_order(p)?;
    let d = check_same_dim(mu, nu)?;
    if let Some(bad) = directions.iter().find(|t| t.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: bad.dim() });
    }
    Ok(directions
        .par_iter()
        .map(|theta| {
            let a = project_unchecked(mu, theta.coords().view());
            let b = project_unchecked(nu, theta.coords().view());
            pth_power_unchecked(&a, &b, p)
        })
        .collect())
}

/// `(1/|S|) sum_{theta in S} W_p^p(theta # mu, theta # nu)`.
pub fn sliced_pth_power(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, directions: &[Direction], p: f64) -> Result<f64> {
    if directions.is_empty() {
        return Err(Error::InvalidParameter("sliced estimate needs at least one direction".into()));
    }
    let powers = projected_pth_powers(mu, nu, directions, p)?;
    Ok(powers.iter().sum::<f64>() / powers.len() as f64)
}

/// p-th root of [`sliced_pth_power`].
pub fn sliced_value(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, directions: &[Direction], p: f64) -> Result<f64> {
    Ok(sliced_pth_power(mu, nu, directions, p)?.powf(1.0 / p))
}

/// `L` i.i.d. uniform directions; direction `l` is drawn from `rng.substream(l)`, `l = 1..=L`.
pub fn sw_directions(d: usize, projections: usize, rng: &RngStream) -> Result<Vec<Direction>> {
    if projections == 0 {
        return Err(Error::InvalidParameter("number of projections L must be >= 1".into()));
    }
    (1..=projections as u64)
        .map(|l| sample_uniform_sphere(d, &mut rng.substream(l)))
        .collect()
}

/// `L` blocks of `K` orthonormal directions, block `l` from `rng.substream(l)`; flattened block by block.
pub fn ksw_directions(d: usize, projections: usize, block: usize, rng: &RngStream) -> Result<Vec<Direction>> {
    if projections == 0 {
        return Err(Error::InvalidParameter("number of projections L must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(projections * block);
    for l in 1..=projections as u64 {
        out.extend(sample_stiefel_uniform(d, block, &mut rng.substream(l))?);
    }
    Ok(out)
}

/// `SW_p^p` estimate with `L` uniform projections.
pub fn sw_pth_power(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, p: f64, projections: usize, rng: &RngStream) -> Result<f64> {
    check_order(p)?;
    let d = check_same_dim(mu, nu)?;
    let dirs = sw_directions(d, projections, rng)?;
    sliced_pth_power(mu, nu, &dirs, p)
}

/// Monte Carlo sliced Wasserstein distance `((1/L) sum_l W_p^p(theta_l # mu, theta_l # nu))^{1/p}`.
pub fn sw(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, p: f64, projections: usize, rng: &RngStream) -> Result<f64> {
    Ok(sw_pth_power(mu, nu, p, projections, rng)?.powf(1.0 / p))
}

/// K-sliced Wasserstein distance with `L` orthonormal blocks of size `K`.
pub fn ksw(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    p: f64,
    projections: usize,
    block: usize,
    rng: &RngStream,
) -> Result<f64> {
    check_order(p)?;
    let d = check_same_dim(mu, nu)?;
    let dirs = ksw_directions(d, projections, block, rng)?;
    sliced_value(mu, nu, &dirs, p)
}
