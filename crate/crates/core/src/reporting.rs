//! The entropy regularized reporting objective and its closed-form minimizer.
//!
//! Faced with a partition whose bins carry base probabilities `q`, the agent
//! reports the distribution `p` minimizing
//!
//! ```text
//! λ·KL(p ‖ q) − (1 − λ)·H(p)
//! ```
//!
//! whose unique minimizer is `p_i = q_i^λ / Σ_j q_j^λ`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::divergence::{entropy, kl_divergence};
use crate::error::{Error, Result};
use crate::space::{induced_prior, Event, Partition, Prior, SUM_TOLERANCE};

/// Entropy regularization weight. Any finite real is admissible: `1` reports
/// truthfully, `0` reports uniformly, negative values push away from the base
/// and values above one sharpen it.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Lambda(f64);

impl Lambda {
    pub const TRUTHFUL: Lambda = Lambda(1.0);
    pub const UNIFORM: Lambda = Lambda(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Lambda(value))
        } else {
            Err(Error::domain(format!("lambda must be finite, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Lambda {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Lambda::new(v)
    }
}

impl From<Lambda> for f64 {
    fn from(l: Lambda) -> f64 {
        l.0
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A reported distribution over the bins of one partition.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefReport {
    partition: Partition,
    probs: Vec<f64>,
}

impl BeliefReport {
    /// Checks one entry per bin, strict positivity and a sum within
    /// [`SUM_TOLERANCE`] of one (renormalizing inside that band).
    pub fn new(partition: Partition, mut probs: Vec<f64>) -> Result<Self> {
        if probs.len() != partition.len() {
            return Err(Error::structural(format!(
                "report has {} entries for {} bins",
                probs.len(),
                partition.len()
            )));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, &p)| !p.is_finite() || p <= 0.0)
        {
            return Err(Error::domain(format!("bin {i} has non-positive probability {p}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::domain(format!("report sums to {sum}")));
        }
        if sum != 1.0 {
            probs.iter_mut().for_each(|p| *p /= sum);
        }
        Ok(BeliefReport { partition, probs })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }
}

fn check_base(base: &[f64]) -> Result<()> {
    if base.is_empty() {
        return Err(Error::structural("empty base distribution"));
    }
    for (i, &b) in base.iter().enumerate() {
        if !b.is_finite() || b <= 0.0 {
            return Err(Error::domain(format!("base[{i}] = {b} must be strictly positive")));
        }
    }
    Ok(())
}

/// `λ·KL(candidate ‖ base) − (1−λ)·H(candidate)`.
pub fn erbr_objective(candidate: &[f64], base: &[f64], lambda: Lambda) -> Result<f64> {
    let l = lambda.value();
    let kl = kl_divergence(candidate, base)?;
    let h = entropy(candidate)?;
    Ok(l * kl - (1.0 - l) * h)
}

/// The same objective written as a weighted pair of divergences, one toward
/// the base and one toward the uniform ignorance distribution. It exceeds
/// [`erbr_objective`] by exactly `(1−λ)·ln k` for `k` bins.
pub fn objective_uniform_form(candidate: &[f64], base: &[f64], lambda: Lambda) -> Result<f64> {
    let l = lambda.value();
    let k = candidate.len();
    let uniform = vec![1.0 / k as f64; k];
    Ok(l * kl_divergence(candidate, base)? + (1.0 - l) * kl_divergence(candidate, &uniform)?)
}

/// Closed-form report for a strictly positive base vector. The base need not
/// be normalized; only ratios matter.
pub fn report_from_base(base: &[f64], lambda: Lambda) -> Result<Vec<f64>> {
    check_base(base)?;
    let l = lambda.value();
    let k = base.len();
    if l == 0.0 {
        return Ok(vec![1.0 / k as f64; k]);
    }
    if l == 1.0 {
        let sum: f64 = base.iter().sum();
        return Ok(base.iter().map(|&b| b / sum).collect());
    }
    let mut logw: Vec<f64> = base.iter().map(|&b| l * b.ln()).collect();
    if l.abs() > 8.0 {
        let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        logw.iter_mut().for_each(|w| *w -= max);
    }
    let w: Vec<f64> = logw.into_iter().map(f64::exp).collect();
    let sum: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / sum).collect())
}

/// Reported belief on `partition` for an agent with benchmark `prior`.
pub fn erbr_report(prior: &Prior, partition: &Partition, lambda: Lambda) -> Result<BeliefReport> {
    let base = induced_prior(prior, partition)?;
    let probs = if lambda.value() == 1.0 {
        base
    } else {
        report_from_base(&base, lambda)?
    };
    Ok(BeliefReport {
        partition: partition.clone(),
        probs,
    })
}

/// Tally of an exhaustive scan of `s(E) = π(E)^λ` over disjoint event pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AdditivityScan {
    pub pairs_checked: usize,
    /// Pairs with `s(A∪B) > s(A) + s(B)` beyond the tolerance.
    pub subadditivity_violations: usize,
    /// Pairs with `s(A∪B) < s(A) + s(B)` beyond the tolerance.
    pub superadditivity_violations: usize,
    pub max_relative_gap: f64,
}

impl AdditivityScan {
    pub fn is_subadditive(&self) -> bool {
        self.subadditivity_violations == 0
    }

    pub fn is_superadditive(&self) -> bool {
        self.superadditivity_violations == 0
    }
}

/// Checks every ordered pair of disjoint non-empty events of the prior's
/// space. Exponential in the number of states, so limited to 12.
pub fn scan_power_support(prior: &Prior, lambda: Lambda, rel_tol: f64) -> Result<AdditivityScan> {
    let n = prior.space().len();
    if n > 12 {
        return Err(Error::domain(format!(
            "exhaustive additivity scan supports at most 12 states, got {n}"
        )));
    }
    let l = lambda.value();
    let s = |e: &Event| prior.event_prob(e).powf(l);
    let mut scan = AdditivityScan::default();
    let full: u64 = (1 << n) - 1;
    for a in 1..=full {
        let rest = full & !a;
        // enumerate non-empty submasks of the remaining states
        let mut b = rest;
        while b != 0 {
            let (ea, eb) = (Event::from_mask(a), Event::from_mask(b));
            let union = s(&ea.union(&eb));
            let parts = s(&ea) + s(&eb);
            let gap = (union - parts) / parts.max(union);
            scan.pairs_checked += 1;
            scan.max_relative_gap = scan.max_relative_gap.max(gap.abs());
            if gap > rel_tol {
                scan.subadditivity_violations += 1;
            }
            if gap < -rel_tol {
                scan.superadditivity_violations += 1;
            }
            b = (b - 1) & rest;
        }
    }
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::StateSpace;
    use approx::assert_abs_diff_eq;

    fn lam(x: f64) -> Lambda {
        Lambda::new(x).unwrap()
    }

    #[test]
    fn lambda_must_be_finite() {
        assert!(Lambda::new(f64::NAN).is_err());
        assert!(Lambda::new(f64::INFINITY).is_err());
        assert!(Lambda::new(-3.0).is_ok());
    }

    #[test]
    fn objective_examples() {
        let base = [0.3, 0.7];
        assert_eq!(erbr_objective(&base, &base, Lambda::TRUTHFUL).unwrap(), 0.0);
        let u = [0.25; 4];
        assert_abs_diff_eq!(
            erbr_objective(&u, &[0.1, 0.2, 0.3, 0.4], Lambda::UNIFORM).unwrap(),
            -(4f64.ln()),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            erbr_objective(&[0.5, 0.5], &[0.6, 0.4], lam(0.5)).unwrap(),
            -0.336_368_091_649_908_9,
            epsilon = 1e-12
        );
    }

    #[test]
    fn uniform_form_examples() {
        let c = [0.2, 0.8];
        let b = [0.6, 0.4];
        assert_eq!(
            objective_uniform_form(&c, &b, Lambda::TRUTHFUL).unwrap(),
            erbr_objective(&c, &b, Lambda::TRUTHFUL).unwrap()
        );
        let d = objective_uniform_form(&c, &b, lam(0.3)).unwrap() - erbr_objective(&c, &b, lam(0.3)).unwrap();
        assert_abs_diff_eq!(d, 0.7 * 2f64.ln(), epsilon = 1e-14);
        let third = [1.0 / 3.0; 3];
        let b3 = [0.5, 0.3, 0.2];
        let d3 = objective_uniform_form(&third, &b3, lam(0.5)).unwrap() - erbr_objective(&third, &b3, lam(0.5)).unwrap();
        assert_abs_diff_eq!(d3, 0.5 * 3f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn report_examples() {
        let r = report_from_base(&[0.6, 0.4], lam(0.5)).unwrap();
        assert_abs_diff_eq!(r[0], 0.550_510_257_216_821_9, epsilon = 1e-14);
        assert_abs_diff_eq!(r[1], 0.449_489_742_783_178_1, epsilon = 1e-14);

        let r = report_from_base(&[0.5, 0.3, 0.2], lam(2.0)).unwrap();
        let expect = [0.25 / 0.38, 0.09 / 0.38, 0.04 / 0.38];
        for (a, b) in r.iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn unpacking_lowers_the_first_bin() {
        // ternary vs binary presentation of the same event
        let ternary = report_from_base(&[0.5, 0.25, 0.25], lam(0.5)).unwrap();
        let binary = report_from_base(&[0.5, 0.5], lam(0.5)).unwrap();
        assert_abs_diff_eq!(ternary[0], 2f64.sqrt() - 1.0, epsilon = 1e-14);
        assert_eq!(binary[0], 0.5);
        assert!(binary[0] > ternary[0]);
    }

    #[test]
    fn truthful_and_uniform_are_exact() {
        let space = StateSpace::range(5).unwrap();
        let prior = Prior::new(&space, vec![0.1, 0.2, 0.3, 0.15, 0.25]).unwrap();
        let part = Partition::parse(&space, "0,1|2|3,4").unwrap();
        let truthful = erbr_report(&prior, &part, Lambda::TRUTHFUL).unwrap();
        assert_eq!(truthful.probs(), induced_prior(&prior, &part).unwrap().as_slice());
        let flat = erbr_report(&prior, &part, Lambda::UNIFORM).unwrap();
        assert_eq!(flat.probs(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn extreme_lambda_does_not_overflow() {
        let r = report_from_base(&[1e-300, 0.5, 0.5], lam(-40.0)).unwrap();
        assert!(r.iter().all(|x| x.is_finite()));
        assert_abs_diff_eq!(r[0], 1.0, epsilon = 1e-12);
        let r = report_from_base(&[0.1, 0.9], lam(500.0)).unwrap();
        assert_abs_diff_eq!(r[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn belief_report_validation() {
        let space = StateSpace::range(3).unwrap();
        let part = Partition::finest(&space);
        assert!(BeliefReport::new(part.clone(), vec![0.5, 0.5]).is_err());
        assert!(BeliefReport::new(part.clone(), vec![0.0, 0.5, 0.5]).is_err());
        assert!(BeliefReport::new(part.clone(), vec![0.2, 0.3, 0.52]).is_err());
        assert!(BeliefReport::new(part, vec![0.2, 0.3, 0.5]).is_ok());
    }

    #[test]
    fn additivity_direction_small_space() {
        let space = StateSpace::range(4).unwrap();
        let prior = Prior::new(&space, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let sub = scan_power_support(&prior, lam(0.5), 1e-12).unwrap();
        assert!(sub.is_subadditive() && !sub.is_superadditive());
        let sup = scan_power_support(&prior, lam(2.0), 1e-12).unwrap();
        assert!(sup.is_superadditive() && !sup.is_subadditive());
        let add = scan_power_support(&prior, Lambda::TRUTHFUL, 1e-12).unwrap();
        assert!(add.is_subadditive() && add.is_superadditive());
        // 3^4 - 2·2^4 + 1 ordered disjoint non-empty pairs
        assert_eq!(add.pairs_checked, 81 - 32 + 1);
    }

    proptest::proptest! {
        #[test]
        fn report_is_positive_normalized_and_order_preserving(
            raw in proptest::collection::vec(0.01f64..1.0, 2..10),
            l in -3.0f64..3.0,
        ) {
            let sum: f64 = raw.iter().sum();
            let base: Vec<f64> = raw.iter().map(|x| x / sum).collect();
            let r = report_from_base(&base, lam(l)).unwrap();
            proptest::prop_assert!(r.iter().all(|&x| x > 0.0));
            proptest::prop_assert!((r.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            if l > 0.0 {
                for i in 0..base.len() {
                    for j in 0..base.len() {
                        if base[i] > base[j] {
                            proptest::prop_assert!(r[i] >= r[j]);
                        }
                    }
                }
            }
        }
    }
}
