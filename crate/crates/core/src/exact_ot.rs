//! Exact Wasserstein distance between uniform measures of equal size.
//!
//! With uniform weights and `n = m` the optimal coupling is a permutation, so
//! `W_p^p = (1/n) min_sigma sum_i ||x_i - y_sigma(i)||_2^p` is a linear assignment
//! problem, solved here with the Hungarian method (shortest augmenting paths with
//! dual potentials, `O(n^3)`).

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};
use crate::measure::{check_same_dim, EmpiricalMeasure};
use crate::ot1d::{abs_pow, check_order};

/// Largest support count accepted by [`exact_wasserstein`].
pub const MAX_ASSIGNMENT_SIZE: usize = 2000;
/// Largest support count accepted by [`brute_force_wasserstein`].
pub const MAX_BRUTE_FORCE_SIZE: usize = 7;

/// Minimum-cost perfect matching on a square cost matrix; `result[i]` is the column of row `i`.
pub fn optimal_assignment(cost: &Array2<f64>) -> Vec<usize> {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "assignment needs a square cost matrix");
    // 1-based arrays; column 0 is the virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if row_of[j] > 0 {
            assignment[row_of[j] - 1] = j - 1;
        }
    }
    assignment
}

fn check_assignment_inputs(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, p: f64) -> Result<usize> {
    check_order(p)?;
    check_same_dim(mu, nu)?;
    if mu.len() != nu.len() || !mu.is_uniform() || !nu.is_uniform() {
        return Err(Error::Unsupported(format!(
            "exact OT supports uniform measures of equal size only (got {} and {} atoms)",
            mu.len(),
            nu.len()
        )));
    }
    Ok(mu.len())
}

/// `||x_i - y_j||_2^p` for all pairs.
pub fn cost_matrix(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, p: f64) -> Array2<f64> {
    let (xs, ys) = (mu.supports(), nu.supports());
    Array2::from_shape_fn((xs.nrows(), ys.nrows()), |(i, j)| {
        let diff = &xs.index_axis(Axis(0), i) - &ys.index_axis(Axis(0), j);
        let dist = diff.dot(&diff).sqrt();
        abs_pow(dist, p)
    })
}

fn mean_cost(cost: &Array2<f64>, assignment: &[usize]) -> f64 {
    assignment.iter().enumerate().map(|(i, &j)| cost[[i, j]]).sum::<f64>() / assignment.len() as f64
}

/// Exact `W_p` with Euclidean ground cost, via the Hungarian method.
pub fn exact_wasserstein(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, p: f64) -> Result<f64> {
    let n = check_assignment_inputs(mu, nu, p)?;
    if n > MAX_ASSIGNMENT_SIZE {
        return Err(Error::ResourceLimit(format!("exact OT is capped at n = {MAX_ASSIGNMENT_SIZE}, got {n}")));
    }
    let cost = cost_matrix(mu, nu, p);
    let assignment = optimal_assignment(&cost);
    Ok(mean_cost(&cost, &assignment).powf(1.0 / p))
}

/// Exhaustive minimum over all `n!` permutations; a test oracle for small `n`.
pub fn brute_force_wasserstein(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, p: f64) -> Result<f64> {
    let n = check_assignment_inputs(mu, nu, p)?;
    if n > MAX_BRUTE_FORCE_SIZE {
        return Err(Error::ResourceLimit(format!("brute force is capped at n = {MAX_BRUTE_FORCE_SIZE}, got {n}")));
    }
    let cost = cost_matrix(mu, nu, p);
    // Heap's algorithm over permutations of the column indices.
    let mut perm: Vec<usize> = (0..n).collect();
    let mut counters = vec![0usize; n];
    let mut best = mean_cost(&cost, &perm);
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            best = best.min(mean_cost(&cost, &perm));
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(best.powf(1.0 / p))
}
