//! Shannon entropy and Kullback-Leibler divergence in nats, with `0 ln 0 = 0`.

use crate::error::{Error, Result};

fn check_entries(p: &[f64], what: &str) -> Result<()> {
    for (i, &x) in p.iter().enumerate() {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::domain(format!("{what}[{i}] = {x} is not a probability")));
        }
    }
    Ok(())
}

#[inline]
fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

pub fn entropy(p: &[f64]) -> Result<f64> {
    check_entries(p, "p")?;
    Ok(-p.iter().map(|&x| xlogx(x)).sum::<f64>())
}

/// `Σ p_i ln(p_i / q_i)`; `q` must be strictly positive.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::structural(format!(
            "length mismatch: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    check_entries(p, "p")?;
    for (i, &x) in q.iter().enumerate() {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::domain(format!("q[{i}] = {x} must be strictly positive")));
        }
    }
    Ok(p
        .iter()
        .zip(q)
        .map(|(&pi, &qi)| if pi == 0.0 { 0.0 } else { pi * (pi / qi).ln() })
        .sum())
}
