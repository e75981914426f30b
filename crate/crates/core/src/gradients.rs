//! Subgradients of projected Wasserstein distances.
//!
//! For uniform measures with the same number of atoms the 1D optimal coupling of
//! `theta # mu` and `theta # nu` is the rank matching `sigma`. Holding `sigma`
//! fixed, `W_p^p(theta) = (1/n) sum_i |theta . (x_i - y_sigma(i))|^p` is smooth
//! in both `theta` and the supports, and its gradient is exact wherever the
//! projected values have no ties. At ties the stable-sort matching gives one
//! valid subgradient.

use ndarray::{Array1, Array2, ArrayView1};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{check_same_dim, project_unchecked, Direction, EmpiricalMeasure};
use crate::ot1d::{abs_pow, check_order, sorted_order};

/// Distances below this value have their gradient defined as zero.
pub const ZERO_DISTANCE: f64 = 1e-12;

pub(crate) fn check_gradient_inputs(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, p: f64) -> Result<usize> {
    check_order(p)?;
    let d = check_same_dim(mu, nu)?;
    if mu.len() != nu.len() || !mu.is_uniform() || !nu.is_uniform() {
        return Err(Error::Unsupported(format!(
            "gradients need uniform measures of equal size (got {} and {} atoms)",
            mu.len(),
            nu.len()
        )));
    }
    Ok(d)
}

#[inline]
fn signed_pow(s: f64, exponent: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else if exponent == 0.0 {
        s.signum()
    } else if exponent == 1.0 {
        s
    } else {
        s.signum() * s.abs().powf(exponent)
    }
}

/// Rank-matched residuals `theta.x_{sigma_x(k)} - theta.y_{sigma_y(k)}` with their index pairs.
struct Matching {
    x_index: Vec<usize>,
    y_index: Vec<usize>,
    residual: Vec<f64>,
}

fn rank_matching(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, theta: ArrayView1<f64>) -> Matching {
    let px = project_unchecked(mu, theta);
    let py = project_unchecked(nu, theta);
    let x_index = sorted_order(px.values());
    let y_index = sorted_order(py.values());
    let residual = x_index
        .iter()
        .zip(&y_index)
        .map(|(&i, &j)| px.values()[i] - py.values()[j])
        .collect();
    Matching { x_index, y_index, residual }
}

fn pth_power(residual: &[f64], p: f64) -> f64 {
    residual.iter().map(|&s| abs_pow(s, p)).sum::<f64>() / residual.len() as f64
}

/// `grad_theta W_p(theta # mu, theta # nu)` with the sorted coupling frozen.
///
/// Evaluated with the two measures in canonical order so the result is bitwise
/// symmetric in `(mu, nu)`. Returns the zero vector when `W_p < ZERO_DISTANCE`.
pub fn grad_direction(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, theta: &Direction, p: f64) -> Result<Array1<f64>> {
    let d = check_gradient_inputs(mu, nu, p)?;
    if theta.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: theta.dim() });
    }
    let (a, b) = if mu.canonical_cmp(nu).is_gt() { (nu, mu) } else { (mu, nu) };
    Ok(grad_direction_unchecked(a, b, theta.coords().view(), p).1)
}

/// Returns `(W_p, grad)`; inputs are assumed validated.
pub(crate) fn grad_direction_unchecked(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    theta: ArrayView1<f64>,
    p: f64,
) -> (f64, Array1<f64>) {
    let n = mu.len();
    let m = rank_matching(mu, nu, theta);
    let w = pth_power(&m.residual, p).powf(1.0 / p);
    let d = theta.len();
    if !(w >= ZERO_DISTANCE) {
        return (w, Array1::zeros(d));
    }
    // grad = W^{1-p} (1/n) sum_k |s_k|^{p-1} sign(s_k) (x_{i_k} - y_{j_k})
    let scale = w.powf(1.0 - p) / n as f64;
    let mut cx = vec![0.0; n];
    let mut cy = vec![0.0; n];
    for ((&i, &j), &s) in m.x_index.iter().zip(&m.y_index).zip(&m.residual) {
        let c = scale * signed_pow(s, p - 1.0);
        cx[i] = c;
        cy[j] = c;
    }
    let grad = mu.supports().t().dot(&Array1::from(cx)) - nu.supports().t().dot(&Array1::from(cy));
    (w, grad)
}

/// Value `D = ((1/|S|) sum_theta W_p^p)^{1/p}` over a direction set and its gradient
/// with respect to every support of `mu`, all couplings frozen.
pub fn value_and_grad_supports(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    directions: &[Direction],
    p: f64,
) -> Result<(f64, Array2<f64>)> {
    let d = check_gradient_inputs(mu, nu, p)?;
    if directions.is_empty() {
        return Err(Error::InvalidParameter("gradient needs at least one direction".into()));
    }
    if let Some(bad) = directions.iter().find(|t| t.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: bad.dim() });
    }
    let n = mu.len();
    let per_direction: Vec<(f64, Vec<f64>)> = directions
        .par_iter()
        .map(|theta| {
            let m = rank_matching(mu, nu, theta.coords().view());
            let wpp = pth_power(&m.residual, p);
            let mut coef = vec![0.0; n];
            for (&i, &s) in m.x_index.iter().zip(&m.residual) {
                coef[i] = signed_pow(s, p - 1.0);
            }
            (wpp, coef)
        })
        .collect();

    let count = directions.len() as f64;
    let mean_pp = per_direction.iter().map(|(w, _)| *w).sum::<f64>() / count;
    let value = mean_pp.powf(1.0 / p);
    let mut grad = Array2::zeros((n, d));
    if !(value >= ZERO_DISTANCE) {
        return Ok((value, grad));
    }
    // dD/dx_i = D^{1-p} / (|S| n) sum_theta |s_i|^{p-1} sign(s_i) theta
    let scale = value.powf(1.0 - p) / (count * n as f64);
    for ((_, coef), theta) in per_direction.iter().zip(directions) {
        let t = theta.coords();
        for (mut row, &c) in grad.rows_mut().into_iter().zip(coef) {
            if c != 0.0 {
                row.scaled_add(scale * c, t);
            }
        }
    }
    Ok((value, grad))
}

/// Gradient of the sliced estimator over `directions` with respect to the supports of `mu`.
pub fn grad_supports(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    directions: &[Direction],
    p: f64,
) -> Result<Array2<f64>> {
    value_and_grad_supports(mu, nu, directions, p).map(|(_, g)| g)
}
