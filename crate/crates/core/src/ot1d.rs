//! Closed-form Wasserstein distance between one-dimensional measures.
//!
//! `W_p^p(a, b)` is the integral over `z in [0, 1]` of `|F_a^{-1}(z) - F_b^{-1}(z)|^p`.
//! Both quantile functions are piecewise constant, so the integral is a finite sum
//! over the segments obtained by merging the two cumulative-weight ladders. When
//! both inputs are uniform with the same number of atoms the ladders coincide and
//! the sum is the sorted matching `(1/n) sum_i |x_(i) - y_(i)|^p`.

use crate::error::{Error, Result};
use crate::measure::ProjectedMeasure;

pub(crate) fn check_order(p: f64) -> Result<()> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidOrder(p));
    }
    Ok(())
}

#[inline]
pub(crate) fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else {
        a.powf(p)
    }
}

/// Indices that sort `values` ascending; ties keep their input order.
pub fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    idx
}

fn sorted_values(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// `W_p^p` between two 1D measures.
pub fn wasserstein_1d_pth_power(a: &ProjectedMeasure, b: &ProjectedMeasure, p: f64) -> Result<f64> {
    check_order(p)?;
    Ok(pth_power_unchecked(a, b, p))
}

/// `W_p` between two 1D measures.
pub fn wasserstein_1d(a: &ProjectedMeasure, b: &ProjectedMeasure, p: f64) -> Result<f64> {
    Ok(wasserstein_1d_pth_power(a, b, p)?.powf(1.0 / p))
}

pub(crate) fn pth_power_unchecked(a: &ProjectedMeasure, b: &ProjectedMeasure, p: f64) -> f64 {
    if a.is_uniform() && b.is_uniform() && a.len() == b.len() {
        sorted_matching(a.values(), b.values(), p)
    } else {
        quantile_ladder(a, b, p)
    }
}

fn sorted_matching(x: &[f64], y: &[f64], p: f64) -> f64 {
    let xs = sorted_values(x);
    let ys = sorted_values(y);
    let total: f64 = xs.iter().zip(&ys).map(|(u, v)| abs_pow(u - v, p)).sum();
    total / xs.len() as f64
}

fn quantile_ladder(a: &ProjectedMeasure, b: &ProjectedMeasure, p: f64) -> f64 {
    let ia = sorted_order(a.values());
    let ib = sorted_order(b.values());
    let (va, wa) = (a.values(), a.weights());
    let (vb, wb) = (b.values(), b.weights());

    let (mut i, mut j) = (0usize, 0usize);
    let mut ca = wa[ia[0]];
    let mut cb = wb[ib[0]];
    let mut z = 0.0;
    let mut total = 0.0;
    loop {
        let upper = ca.min(cb);
        if upper > z {
            total += (upper - z) * abs_pow(va[ia[i]] - vb[ib[j]], p);
            z = upper;
        }
        let last_a = i + 1 == ia.len();
        let last_b = j + 1 == ib.len();
        if last_a && last_b {
            break;
        }
        // Advance whichever ladder ended the segment; the last rung absorbs rounding.
        let step_a = !last_a && (ca <= cb || last_b);
        let step_b = !last_b && (cb <= ca || last_a);
        if step_a {
            i += 1;
            ca += wa[ia[i]];
        }
        if step_b {
            j += 1;
            cb += wb[ib[j]];
        }
    }
    // Mass left over when the ladders end at slightly different totals.
    let end = ca.max(cb);
    if end > z {
        total += (end - z) * abs_pow(va[ia[ia.len() - 1]] - vb[ib[ib.len() - 1]], p);
    }
    total
}
