use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::reporting::{erbr_report, Lambda};
use crate::space::{Event, Partition, Prior, StateSpace};

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Reported `μ_ω` for each state on the binary partition `{{ω}, {ω}ᶜ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryReportSet {
    space: Arc<StateSpace>,
    mu: Vec<f64>,
}

impl BinaryReportSet {
    pub fn new(space: &Arc<StateSpace>, mu: Vec<f64>) -> Result<Self> {
        if mu.len() != space.len() {
            return Err(Error::structural(format!(
                "{} binary reports for {} states",
                mu.len(),
                space.len()
            )));
        }
        for (i, &m) in mu.iter().enumerate() {
            if !(m > 0.0 && m < 1.0) {
                return Err(Error::domain(format!(
                    "binary report for state {} is {m}, must lie strictly inside (0, 1)",
                    space.label(i)
                )));
            }
        }
        Ok(BinaryReportSet {
            space: Arc::clone(space),
            mu,
        })
    }

    /// Builds the set from `(label, μ)` pairs; every state must appear once.
    pub fn from_labeled<'a, I>(space: &Arc<StateSpace>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut mu = vec![f64::NAN; space.len()];
        for (label, m) in entries {
            let i = space
                .index_of(label)
                .ok_or_else(|| Error::structural(format!("unknown state label {label:?}")))?;
            if !mu[i].is_nan() {
                return Err(Error::structural(format!("state {label:?} reported twice")));
            }
            mu[i] = m;
        }
        if let Some(i) = mu.iter().position(|m| m.is_nan()) {
            return Err(Error::structural(format!("no binary report for state {}", space.label(i))));
        }
        BinaryReportSet::new(space, mu)
    }

    /// Reports of an ERBR agent on every singleton-vs-rest partition.
    pub fn generate(prior: &Prior, lambda: Lambda) -> Result<Self> {
        let space = prior.space();
        let mu = (0..space.len())
            .map(|i| {
                let p = Partition::binary(space, Event::singleton(i))?;
                let r = erbr_report(prior, &p, lambda)?;
                Ok(r.probs()[p.position(&Event::singleton(i)).expect("bin present")])
            })
            .collect::<Result<Vec<f64>>>()?;
        BinaryReportSet::new(space, mu)
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }
}

/// `F(λ) = Σ_ω σ(logit μ_ω / λ) − 1`.
pub fn recovery_equation(reports: &BinaryReportSet, lambda: f64) -> Result<f64> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::domain(format!("recovery equation needs finite λ ≠ 0, got {lambda}")));
    }
    let logits: Vec<f64> = reports.mu.iter().map(|&m| logit(m)).collect();
    Ok(equation_from_logits(&logits, lambda))
}

/// Evaluates `F` with the `1 − σ(x) = σ(−x)` rewrite for positive logits so
/// that no unit terms cancel.
fn equation_from_logits(logits: &[f64], lambda: f64) -> f64 {
    let positive = logits.iter().filter(|&&l| l / lambda > 0.0).count();
    let mut small = 0.0;
    for &l in logits {
        let x = l / lambda;
        if x > 0.0 {
            small -= logistic(-x);
        } else {
            small += logistic(x);
        }
    }
    (positive as f64 - 1.0) + small
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Log-spaced scan points over `[lambda_min, lambda_max]`.
    pub grid_points: usize,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            lambda_min: 1e-3,
            lambda_max: 1e3,
            grid_points: 2001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryResult {
    pub lambda: f64,
    #[serde(skip)]
    pub prior: Prior,
    /// `|Σ π(ω) − 1|` before renormalization.
    pub sum_residual: f64,
    /// Every root found in the scan, ascending.
    pub roots_found: Vec<f64>,
    pub multiple_roots: bool,
}

fn bisect(logits: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = equation_from_logits(logits, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = equation_from_logits(logits, mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `F(λ) = 0` on a log-spaced scan followed by bisection and returns
/// the prior implied by the root closest to 1.
pub fn recover_from_binary(reports: &BinaryReportSet, config: &RecoveryConfig) -> Result<RecoveryResult> {
    let n = reports.space.len();
    if n < 3 {
        return Err(Error::structural(
            "binary recovery needs at least 3 states; with 2 the equation holds for every λ",
        ));
    }
    if !(config.lambda_min > 0.0 && config.lambda_max > config.lambda_min && config.lambda_max.is_finite()) {
        return Err(Error::Config(format!(
            "λ search range [{}, {}] must satisfy 0 < min < max < ∞",
            config.lambda_min, config.lambda_max
        )));
    }
    if config.grid_points < 2 {
        return Err(Error::Config("the λ scan needs at least 2 points".into()));
    }
    let logits: Vec<f64> = reports.mu.iter().map(|&m| logit(m)).collect();
    if logits.iter().all(|&l| l == 0.0) {
        return Err(Error::Degenerate(
            "all binary reports equal 0.5, which is consistent with any λ".into(),
        ));
    }

    let (a, b) = (config.lambda_min.ln(), config.lambda_max.ln());
    let last = config.grid_points - 1;
    let grid: Vec<f64> = (0..=last)
        .map(|i| (a + (b - a) * i as f64 / last as f64).exp())
        .collect();
    let values: Vec<f64> = grid.iter().map(|&l| equation_from_logits(&logits, l)).collect();

    // Runs of exact zeros count as a root only when the nonzero values on
    // both sides differ in sign; zeros at the scan ends are underflow.
    let mut roots = Vec::new();
    let mut prev: Option<usize> = None;
    for i in 0..grid.len() {
        if values[i] == 0.0 {
            continue;
        }
        if let Some(p) = prev {
            if (values[p] > 0.0) != (values[i] > 0.0) {
                roots.push(if i == p + 1 {
                    bisect(&logits, grid[p], grid[i])
                } else {
                    let zeros = &grid[p + 1..i];
                    (zeros[0] * zeros[zeros.len() - 1]).sqrt()
                });
            }
        }
        prev = Some(i);
    }
    if roots.is_empty() {
        return Err(Error::NoSolution {
            lambda_min: config.lambda_min,
            lambda_max: config.lambda_max,
            f_low: values[0],
            f_high: values[last],
        });
    }
    let lambda = *roots
        .iter()
        .min_by(|x, y| (x.ln().abs()).total_cmp(&y.ln().abs()))
        .expect("non-empty");
    if roots.len() > 1 {
        log::warn!("recovery equation has {} roots; using λ = {lambda}", roots.len());
    }

    let raw: Vec<f64> = logits.iter().map(|&l| logistic(l / lambda)).collect();
    let total: f64 = raw.iter().sum();
    let prior = Prior::new(&reports.space, raw.iter().map(|p| p / total).collect())?;
    Ok(RecoveryResult {
        lambda,
        prior,
        sum_residual: (total - 1.0).abs(),
        multiple_roots: roots.len() > 1,
        roots_found: roots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn reports(pi: &[f64], lambda: f64) -> BinaryReportSet {
        let space = StateSpace::range(pi.len()).unwrap();
        let prior = Prior::new(&space, pi.to_vec()).unwrap();
        BinaryReportSet::generate(&prior, Lambda::new(lambda).unwrap()).unwrap()
    }

    #[test]
    fn generated_reports_match_worked_values() {
        let r = reports(&[0.5, 0.3, 0.2], 0.5);
        assert_abs_diff_eq!(r.mu()[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.mu()[1], 0.39564392373896, epsilon = 1e-12);
        assert_abs_diff_eq!(r.mu()[2], 1.0 / 3.0, epsilon = 1e-6);
    }

    #[test]
    fn equation_values() {
        let r = reports(&[0.5, 0.3, 0.2], 0.5);
        assert_abs_diff_eq!(recovery_equation(&r, 0.5).unwrap(), 0.0, epsilon = 1e-12);
        let sum: f64 = r.mu().iter().sum();
        assert_abs_diff_eq!(recovery_equation(&r, 1.0).unwrap(), sum - 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(recovery_equation(&r, 1.0).unwrap(), 0.22897725707229333, epsilon = 1e-12);
        assert!(recovery_equation(&r, 0.0).is_err());
    }

    #[test]
    fn two_states_are_uninformative() {
        let space = StateSpace::range(2).unwrap();
        let r = BinaryReportSet::new(&space, vec![0.3, 0.7]).unwrap();
        for l in [0.1, 1.0, 7.0] {
            assert_abs_diff_eq!(recovery_equation(&r, l).unwrap(), 0.0, epsilon = 1e-15);
        }
        assert!(matches!(
            recover_from_binary(&r, &RecoveryConfig::default()),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn round_trip() {
        let r = reports(&[0.5, 0.3, 0.2], 0.5);
        let res = recover_from_binary(&r, &RecoveryConfig::default()).unwrap();
        assert_abs_diff_eq!(res.lambda, 0.5, epsilon = 1e-9);
        for (p, q) in res.prior.probs().iter().zip([0.5, 0.3, 0.2]) {
            assert_abs_diff_eq!(*p, q, epsilon = 1e-9);
        }
        assert!(res.sum_residual < 1e-9);
    }

    #[test]
    fn reciprocal_reports_recover_uniform_truth() {
        // logits all equal ln(1/(n−1)); F has a single root at λ = 1
        let space = StateSpace::range(4).unwrap();
        let r = BinaryReportSet::new(&space, vec![0.25; 4]).unwrap();
        let res = recover_from_binary(&r, &RecoveryConfig::default()).unwrap();
        assert_abs_diff_eq!(res.lambda, 1.0, epsilon = 1e-12);
        assert_eq!(res.roots_found.len(), 1);
        for p in res.prior.probs() {
            assert_abs_diff_eq!(*p, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn all_half_is_degenerate() {
        let space = StateSpace::range(3).unwrap();
        let r = BinaryReportSet::new(&space, vec![0.5; 3]).unwrap();
        assert!(matches!(
            recover_from_binary(&r, &RecoveryConfig::default()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn no_sign_change_reports_endpoints() {
        // every μ above 0.5: F > 0 throughout
        let space = StateSpace::range(3).unwrap();
        let r = BinaryReportSet::new(&space, vec![0.6, 0.7, 0.8]).unwrap();
        match recover_from_binary(&r, &RecoveryConfig::default()) {
            Err(Error::NoSolution { f_low, f_high, .. }) => {
                assert!(f_low > 0.0 && f_high > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn endpoint_limits() {
        let r = reports(&[0.6, 0.25, 0.15], 0.7);
        let f_lo = recovery_equation(&r, 1e-3).unwrap();
        let f_hi = recovery_equation(&r, 1e3).unwrap();
        // one μ above 0.5
        assert_abs_diff_eq!(f_lo, 0.0, epsilon = 1e-3);
        assert_abs_diff_eq!(f_hi, 0.5, epsilon = 1e-3);
    }

    #[test]
    fn labeled_construction() {
        let space = StateSpace::new(["x", "y", "z"]).unwrap();
        let r = BinaryReportSet::from_labeled(&space, [("z", 0.2), ("x", 0.4), ("y", 0.3)]).unwrap();
        assert_eq!(r.mu(), &[0.4, 0.3, 0.2]);
        assert!(BinaryReportSet::from_labeled(&space, [("x", 0.4), ("y", 0.3)]).is_err());
        assert!(BinaryReportSet::new(&space, vec![0.0, 0.3, 0.2]).is_err());
    }
}
