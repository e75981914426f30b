#![allow(dead_code)]

use msw_core::{EmpiricalMeasure, RngStream};
use ndarray::{Array1, Array2};

pub fn gaussian_cloud(rng: &mut RngStream, n: usize, d: usize, shift: f64) -> EmpiricalMeasure {
    EmpiricalMeasure::uniform(Array2::from_shape_fn((n, d), |_| rng.standard_normal() + shift)).unwrap()
}

fn sorted_projection(x: &Array2<f64>, v: &Array1<f64>) -> Vec<f64> {
    let mut p = x.dot(v).to_vec();
    p.sort_by(f64::total_cmp);
    p
}

/// `W_p^p` between `v # mu` and `v # nu` by sorting, for any `v` (not necessarily unit).
pub fn projected_pth_power(x: &Array2<f64>, y: &Array2<f64>, v: &Array1<f64>, p: f64) -> f64 {
    let (a, b) = (sorted_projection(x, v), sorted_projection(y, v));
    a.iter().zip(&b).map(|(s, t)| (s - t).abs().powf(p)).sum::<f64>() / a.len() as f64
}

/// `((1/|S|) sum W_p^p)^{1/p}` computed by sorting.
pub fn sliced_oracle(x: &Array2<f64>, y: &Array2<f64>, dirs: &[Array1<f64>], p: f64) -> f64 {
    let total: f64 = dirs.iter().map(|v| projected_pth_power(x, y, v, p)).sum();
    (total / dirs.len() as f64).powf(1.0 / p)
}

/// Smallest gap between consecutive sorted projections, and smallest matched residual.
pub fn separation(x: &Array2<f64>, y: &Array2<f64>, v: &Array1<f64>) -> f64 {
    let (a, b) = (sorted_projection(x, v), sorted_projection(y, v));
    let gap = |s: &[f64]| s.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let residual = a.iter().zip(&b).map(|(s, t)| (s - t).abs()).fold(f64::INFINITY, f64::min);
    gap(&a).min(gap(&b)).min(residual)
}

pub fn rel_err(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    let diff = a - b;
    diff.dot(&diff).sqrt() / b.dot(b).sqrt().max(1e-12)
}
