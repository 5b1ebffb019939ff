//! Direct numerical minimization of the reporting objective over the simplex.
//!
//! This deliberately avoids the closed form: it runs pairwise coordinate
//! descent (always moving mass between the two bins whose partial
//! derivatives differ most) with an exact line search done by bisection on
//! the directional derivative. The result serves as an independent check of
//! [`crate::reporting::report_from_base`].

use crate::error::{Error, Result};
use crate::reporting::{erbr_objective, Lambda};

/// Iteration budget for [`variational_solve`].
pub const MAX_ITERATIONS: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct VariationalSolution {
    pub probs: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Spread of the partial derivatives `max_i g_i − min_i g_i` at exit.
    pub kkt_residual: f64,
}

/// Partial derivative of the objective in coordinate `i`, up to the common
/// constant `+1`: `ln p_i − λ ln q_i`.
fn gradient(p: &[f64], log_base: &[f64], lambda: f64) -> Vec<f64> {
    p.iter()
        .zip(log_base)
        .map(|(&pi, &lq)| pi.ln() - lambda * lq)
        .collect()
}

/// Minimizes the objective along the segment that moves mass between bins
/// `i` and `j` with their combined mass `m` fixed. Returns the new `p_i`.
fn line_search(m: f64, target: f64) -> f64 {
    // d(x) = ln x − ln(m − x) − target is increasing on (0, m)
    let (mut lo, mut hi) = (0.0_f64, m);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let d = mid.ln() - (m - mid).ln() - target;
        if d > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimizes `λ·KL(p‖base) − (1−λ)·H(p)` over the probability simplex.
///
/// Stops once the partial derivatives agree to within `tol / 16`, which bounds
/// the log-distance of every coordinate from the optimum by the same amount.
pub fn variational_solve(base: &[f64], lambda: Lambda, tol: f64) -> Result<VariationalSolution> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    if base.is_empty() {
        return Err(Error::structural("empty base distribution"));
    }
    if let Some(b) = base.iter().find(|&&b| !(b > 0.0) || !b.is_finite()) {
        return Err(Error::domain(format!("base entry {b} must be strictly positive")));
    }
    let k = base.len();
    let l = lambda.value();
    let log_base: Vec<f64> = base.iter().map(|b| b.ln()).collect();
    let mut p = vec![1.0 / k as f64; k];
    let stop = tol / 16.0;
    let mut residual = f64::INFINITY;
    let mut stalled = 0;

    for iteration in 0..MAX_ITERATIONS {
        let g = gradient(&p, &log_base, l);
        let (imax, gmax) = g
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        let (imin, gmin) = g
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
        let spread = gmax - gmin;
        if spread <= stop || k == 1 {
            let objective = erbr_objective(&p, base, lambda)?;
            return Ok(VariationalSolution {
                probs: p,
                objective,
                iterations: iteration,
                kkt_residual: spread,
            });
        }
        if spread >= residual {
            stalled += 1;
            if stalled > 50 {
                break;
            }
        } else {
            stalled = 0;
        }
        residual = residual.min(spread);

        // Mass flows from the bin with the largest derivative to the smallest.
        let (i, j) = (imin, imax);
        let m = p[i] + p[j];
        let target = l * (log_base[i] - log_base[j]);
        let x = line_search(m, target);
        p[i] = x;
        p[j] = m - x;
        if p[j] <= 0.0 || p[i] <= 0.0 {
            // the optimum is interior, so a coordinate underflowed
            break;
        }
    }
    Err(Error::Convergence {
        iterations: MAX_ITERATIONS,
        residual,
    })
}
