//! Conjunction and disjunction fallacies when each event is reported on its
//! own binary partition `{E, Eᶜ}` with its own `λ`, and itemwise reporting.
//!
//! For `B ⊊ C` the agent reports `μ(B) > μ(C)` iff
//! `λ_B · logit π(B) > λ_C · logit π(C)`. The disjunction fallacy is the same
//! inequality read from the side of `C`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::recovery::logit;
use crate::reporting::{erbr_report, report_from_base, Lambda};
use crate::space::{Event, Partition, Prior};

/// Probabilities of nested events `B ⊊ C` and the parameters of their binary
/// partitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventPair {
    pub pi_b: f64,
    pub pi_c: f64,
    pub lambda_b: f64,
    pub lambda_c: f64,
}

impl EventPair {
    pub fn new(pi_b: f64, pi_c: f64, lambda_b: f64, lambda_c: f64) -> Result<Self> {
        check_nested(pi_b, pi_c)?;
        if !lambda_b.is_finite() || !lambda_c.is_finite() {
            return Err(Error::domain("λ values must be finite"));
        }
        Ok(EventPair {
            pi_b,
            pi_c,
            lambda_b,
            lambda_c,
        })
    }
}

fn check_nested(pi_b: f64, pi_c: f64) -> Result<()> {
    if !(0.0 < pi_b && pi_b < pi_c && pi_c < 1.0) {
        return Err(Error::domain(format!(
            "nested events need 0 < π(B) < π(C) < 1, got π(B) = {pi_b}, π(C) = {pi_c}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// `μ(B) > μ(C)` although `B ⊊ C`.
    Fallacy,
    NoFallacy,
    /// Both sides of the inequality are exactly equal.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjunctionCheck {
    /// `λ_B · logit π(B)`.
    pub lhs: f64,
    /// `λ_C · logit π(C)`.
    pub rhs: f64,
    pub mu_b: f64,
    pub mu_c: f64,
    pub verdict: Verdict,
}

fn binary_report(pi: f64, lambda: f64) -> f64 {
    report_from_base(&[pi, 1.0 - pi], Lambda::new(lambda).expect("finite λ")).expect("positive base")[0]
}

pub fn conjunction_check(pair: &EventPair) -> ConjunctionCheck {
    let lhs = pair.lambda_b * logit(pair.pi_b);
    let rhs = pair.lambda_c * logit(pair.pi_c);
    let verdict = if lhs > rhs {
        Verdict::Fallacy
    } else if lhs < rhs {
        Verdict::NoFallacy
    } else {
        Verdict::Boundary
    };
    ConjunctionCheck {
        lhs,
        rhs,
        mu_b: binary_report(pair.pi_b, pair.lambda_b),
        mu_c: binary_report(pair.pi_c, pair.lambda_c),
        verdict,
    }
}

/// True iff the strict inequality holds; boundary cases are false.
pub fn conjunction_condition(pair: &EventPair) -> bool {
    conjunction_check(pair).verdict == Verdict::Fallacy
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionKind {
    /// Fallacy iff `λ_B < threshold` (`π(B) < 1/2`).
    Below { threshold: f64 },
    /// Fallacy iff `λ_B > threshold` (`π(B) > 1/2`).
    Above { threshold: f64 },
    /// `π(B) = 1/2`: the left side is identically zero, so the fallacy holds
    /// for every `λ_B` or for none.
    Boundary { fallacy_for_all: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaRegion {
    pub region: RegionKind,
    /// `π(B) < 1/2 < π(C)`.
    pub straddles_half: bool,
    /// No non-negative `λ_B` produces the fallacy while the region is non-empty.
    pub requires_negative_lambda_b: bool,
}

/// The set of `λ_B` for which `μ(B) > μ(C)`, given `λ_C`.
pub fn conjunction_lambda_region(pi_b: f64, pi_c: f64, lambda_c: f64) -> Result<LambdaRegion> {
    check_nested(pi_b, pi_c)?;
    if !lambda_c.is_finite() {
        return Err(Error::domain("λ_C must be finite"));
    }
    let lb = logit(pi_b);
    let rhs = lambda_c * logit(pi_c);
    let region = if lb < 0.0 {
        RegionKind::Below { threshold: rhs / lb }
    } else if lb > 0.0 {
        RegionKind::Above { threshold: rhs / lb }
    } else {
        RegionKind::Boundary {
            fallacy_for_all: 0.0 > rhs,
        }
    };
    let requires_negative_lambda_b = match region {
        RegionKind::Below { threshold } => threshold <= 0.0,
        RegionKind::Above { .. } | RegionKind::Boundary { .. } => false,
    };
    Ok(LambdaRegion {
        region,
        straddles_half: pi_b < 0.5 && pi_c > 0.5,
        requires_negative_lambda_b,
    })
}

/// Per-bin `λ` for itemwise reporting.
#[derive(Debug, Clone, PartialEq)]
pub enum ItemLambdas {
    Constant(Lambda),
    PerBin(Vec<Lambda>),
}

/// Each bin `E_i` reported alone on `{E_i, E_iᶜ}`; entries need not sum to one.
pub fn itemwise_report(prior: &Prior, partition: &Partition, lambdas: &ItemLambdas) -> Result<Vec<f64>> {
    if let ItemLambdas::PerBin(ls) = lambdas {
        if ls.len() != partition.len() {
            return Err(Error::structural(format!(
                "{} λ values for {} bins",
                ls.len(),
                partition.len()
            )));
        }
    }
    let space = partition.space();
    partition
        .bins()
        .iter()
        .enumerate()
        .map(|(i, bin)| {
            let lambda = match lambdas {
                ItemLambdas::Constant(l) => *l,
                ItemLambdas::PerBin(ls) => ls[i],
            };
            if bin.len() == space.len() {
                return Ok(1.0);
            }
            let binary = Partition::binary(space, bin.clone())?;
            let report = erbr_report(prior, &binary, lambda)?;
            Ok(report.probs()[binary.position(bin).expect("bin present")])
        })
        .collect()
}

/// How the agent reports the two events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ReportingMode {
    /// Each event on its own binary partition.
    Holistic { lambda_b: f64, lambda_c: f64 },
    /// Both events read off one partition `{B, C ∖ B, Cᶜ}` with a single `λ`.
    Decompositional { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventConjunction {
    pub pi_b: f64,
    pub pi_c: f64,
    pub mu_b: f64,
    pub mu_c: f64,
    pub verdict: Verdict,
    /// Present in holistic mode.
    pub check: Option<ConjunctionCheck>,
}

/// Fallacy diagnosis for concrete events `B ⊊ C` under a prior.
pub fn conjunction_from_events(prior: &Prior, b: &Event, c: &Event, mode: ReportingMode) -> Result<EventConjunction> {
    let space = prior.space();
    if b.is_empty() || !b.is_subset(c) || b == c {
        return Err(Error::structural("events must satisfy ∅ ≠ B ⊊ C"));
    }
    if c.len() >= space.len() || c.states().iter().any(|&s| s >= space.len()) {
        return Err(Error::structural("C must be a proper event of the state space"));
    }
    let (pi_b, pi_c) = (prior.event_prob(b), prior.event_prob(c));
    match mode {
        ReportingMode::Holistic { lambda_b, lambda_c } => {
            let check = conjunction_check(&EventPair::new(pi_b, pi_c, lambda_b, lambda_c)?);
            Ok(EventConjunction {
                pi_b,
                pi_c,
                mu_b: check.mu_b,
                mu_c: check.mu_c,
                verdict: check.verdict,
                check: Some(check),
            })
        }
        ReportingMode::Decompositional { lambda } => {
            let rest = c.difference(b);
            let outside = c.complement(space.len());
            let partition = Partition::new(space, vec![b.clone(), rest, outside])?;
            let report = erbr_report(prior, &partition, Lambda::new(lambda)?)?;
            let (mu_b, mu_c) = (report.probs()[0], report.probs()[0] + report.probs()[1]);
            let verdict = if mu_b > mu_c {
                Verdict::Fallacy
            } else if mu_b < mu_c {
                Verdict::NoFallacy
            } else {
                Verdict::Boundary
            };
            Ok(EventConjunction {
                pi_b,
                pi_c,
                mu_b,
                mu_c,
                verdict,
                check: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::StateSpace;
    use approx::assert_abs_diff_eq;

    #[test]
    fn worked_condition() {
        let pair = EventPair::new(0.2, 0.4, 0.2, 1.0).unwrap();
        let c = conjunction_check(&pair);
        assert_eq!(c.verdict, Verdict::Fallacy);
        assert_abs_diff_eq!(c.lhs, -0.277_258_872_223_978_1, epsilon = 1e-12);
        assert_abs_diff_eq!(c.rhs, -0.405_465_108_108_164_4, epsilon = 1e-12);
        assert_abs_diff_eq!(c.mu_b, 0.43112592776921603, epsilon = 1e-12);
        assert_abs_diff_eq!(c.mu_c, 0.4, epsilon = 1e-15);
        assert!(!conjunction_condition(&EventPair::new(0.2, 0.4, 1.0, 1.0).unwrap()));
    }

    #[test]
    fn nested_probabilities_validated() {
        assert!(EventPair::new(0.4, 0.4, 1.0, 1.0).is_err());
        assert!(EventPair::new(0.0, 0.4, 1.0, 1.0).is_err());
        assert!(EventPair::new(0.2, 1.0, 1.0, 1.0).is_err());
        assert!(conjunction_lambda_region(0.5, 0.3, 1.0).is_err());
    }

    #[test]
    fn zero_lambdas_tie() {
        let c = conjunction_check(&EventPair::new(0.2, 0.4, 0.0, 0.0).unwrap());
        assert_eq!(c.verdict, Verdict::Boundary);
        assert!(!conjunction_condition(&EventPair::new(0.2, 0.4, 0.0, 0.0).unwrap()));
    }

    #[test]
    fn regions() {
        let r = conjunction_lambda_region(0.2, 0.4, 1.0).unwrap();
        match r.region {
            RegionKind::Below { threshold } => assert_abs_diff_eq!(threshold, 0.292_481_250_360_578_1, epsilon = 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(!r.requires_negative_lambda_b && !r.straddles_half);

        let r = conjunction_lambda_region(0.3, 0.6, 0.8).unwrap();
        match r.region {
            RegionKind::Below { threshold } => assert_abs_diff_eq!(threshold, -0.382_831_235_214_376_5, epsilon = 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(r.requires_negative_lambda_b && r.straddles_half);

        let r = conjunction_lambda_region(0.6, 0.8, 1.0).unwrap();
        match r.region {
            RegionKind::Above { threshold } => assert_abs_diff_eq!(threshold, 3.4190225827029096, epsilon = 1e-12),
            other => panic!("{other:?}"),
        }

        let r = conjunction_lambda_region(0.5, 0.7, 1.0).unwrap();
        assert_eq!(r.region, RegionKind::Boundary { fallacy_for_all: false });
        let r = conjunction_lambda_region(0.5, 0.7, -1.0).unwrap();
        assert_eq!(r.region, RegionKind::Boundary { fallacy_for_all: true });
    }

    #[test]
    fn itemwise_uniform_half() {
        let space = StateSpace::range(4).unwrap();
        let prior = Prior::uniform(&space);
        let items = itemwise_report(
            &prior,
            &Partition::finest(&space),
            &ItemLambdas::Constant(Lambda::new(0.5).unwrap()),
        )
        .unwrap();
        for x in &items {
            assert_abs_diff_eq!(*x, 0.36602540378443865, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(items.iter().sum::<f64>(), 1.4641016151377546, epsilon = 1e-12);
    }

    #[test]
    fn itemwise_truthful_and_per_bin() {
        let space = StateSpace::range(3).unwrap();
        let prior = Prior::new(&space, vec![0.2, 0.3, 0.5]).unwrap();
        let p = Partition::finest(&space);
        let items = itemwise_report(&prior, &p, &ItemLambdas::Constant(Lambda::TRUTHFUL)).unwrap();
        for (x, y) in items.iter().zip(prior.probs()) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-15);
        }
        let per = ItemLambdas::PerBin(vec![Lambda::TRUTHFUL, Lambda::UNIFORM, Lambda::TRUTHFUL]);
        let items = itemwise_report(&prior, &p, &per).unwrap();
        assert_abs_diff_eq!(items[1], 0.5, epsilon = 1e-15);
        assert!(itemwise_report(&prior, &p, &ItemLambdas::PerBin(vec![Lambda::TRUTHFUL])).is_err());
    }

    #[test]
    fn event_adapter_modes() {
        let space = StateSpace::range(5).unwrap();
        let prior = Prior::new(&space, vec![0.1, 0.1, 0.2, 0.3, 0.3]).unwrap();
        let b = Event::singleton(0);
        let c = Event::new(vec![0, 1, 2]);
        let holistic = conjunction_from_events(
            &prior,
            &b,
            &c,
            ReportingMode::Holistic {
                lambda_b: 0.1,
                lambda_c: 1.0,
            },
        )
        .unwrap();
        assert_abs_diff_eq!(holistic.pi_c, 0.4, epsilon = 1e-15);
        assert_eq!(holistic.verdict, Verdict::Fallacy);
        let decomposed =
            conjunction_from_events(&prior, &b, &c, ReportingMode::Decompositional { lambda: 0.1 }).unwrap();
        assert_eq!(decomposed.verdict, Verdict::NoFallacy);
        assert!(conjunction_from_events(&prior, &c, &b, ReportingMode::Decompositional { lambda: 1.0 }).is_err());
    }
}
