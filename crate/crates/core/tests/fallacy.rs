mod common;

use erbr_core::fallacy::{
    conjunction_check, conjunction_condition, conjunction_from_events, conjunction_lambda_region, itemwise_report,
    EventPair, ItemLambdas, RegionKind, ReportingMode, Verdict,
};
use erbr_core::reporting::{report_from_base, Lambda};
use erbr_core::space::induced_prior;
use erbr_core::{Event, Prior, StateSpace};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_partition, random_prior};

fn binary_report(pi: f64, lambda: f64) -> f64 {
    report_from_base(&[pi, 1.0 - pi], Lambda::new(lambda).unwrap()).unwrap()[0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn condition_matches_direct_reports(pi_b in 0.01f64..0.98, gap in 0.005f64..0.9, lb in -1.0f64..2.0, lc in -1.0f64..2.0) {
        let pi_c = (pi_b + gap).min(0.99);
        prop_assume!(pi_c > pi_b);
        let pair = EventPair::new(pi_b, pi_c, lb, lc).unwrap();
        let (mb, mc) = (binary_report(pi_b, lb), binary_report(pi_c, lc));
        prop_assume!((mb - mc).abs() > 1e-12);
        prop_assert_eq!(conjunction_condition(&pair), mb > mc);
    }

    #[test]
    fn positive_lambda_fallacy_ordering(pi_b in 0.01f64..0.98, gap in 0.005f64..0.9, lb in 0.01f64..3.0, lc in 0.01f64..3.0) {
        let pi_c = (pi_b + gap).min(0.99);
        prop_assume!(pi_c > pi_b);
        let pair = EventPair::new(pi_b, pi_c, lb, lc).unwrap();
        if conjunction_condition(&pair) {
            if pi_c < 0.5 {
                prop_assert!(lb < lc);
            }
            if pi_b > 0.5 {
                prop_assert!(lb > lc);
            }
            prop_assert!(!(pi_b < 0.5 && pi_c > 0.5));
        }
    }

    #[test]
    fn region_agrees_with_condition(pi_b in 0.01f64..0.98, gap in 0.005f64..0.9, lb in -3.0f64..3.0, lc in -1.0f64..2.0) {
        let pi_c = (pi_b + gap).min(0.99);
        prop_assume!(pi_c > pi_b);
        let region = conjunction_lambda_region(pi_b, pi_c, lc).unwrap();
        let inside = match region.region {
            RegionKind::Below { threshold } => { prop_assume!((lb - threshold).abs() > 1e-9); lb < threshold }
            RegionKind::Above { threshold } => { prop_assume!((lb - threshold).abs() > 1e-9); lb > threshold }
            RegionKind::Boundary { fallacy_for_all } => fallacy_for_all,
        };
        prop_assert_eq!(inside, conjunction_condition(&EventPair::new(pi_b, pi_c, lb, lc).unwrap()));
    }

    #[test]
    fn itemwise_sums_by_lambda(seed in any::<u64>(), lambda in 1.01f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(3..10);
        let prior = random_prior(&mut rng, n);
        let partition = random_partition(&mut rng, prior.space());
        let base = induced_prior(&prior, &partition).unwrap();
        prop_assume!(base.iter().all(|&p| p < 0.5));
        let above = itemwise_report(&prior, &partition, &ItemLambdas::Constant(Lambda::new(lambda).unwrap())).unwrap();
        prop_assert!(above.iter().sum::<f64>() < 1.0);
        let below = itemwise_report(&prior, &partition, &ItemLambdas::Constant(Lambda::new(2.0 - lambda).unwrap())).unwrap();
        prop_assert!(below.iter().sum::<f64>() > 1.0);
    }
}

#[test]
fn worked_region_needs_negative_lambda() {
    let region = conjunction_lambda_region(0.3, 0.6, 0.8).unwrap();
    assert!(region.straddles_half && region.requires_negative_lambda_b);
    match region.region {
        RegionKind::Below { threshold } => assert!((threshold - 0.8 * 1.5f64.ln() / (3.0f64 / 7.0).ln()).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
}

#[test]
fn worked_condition_from_a_small_gap() {
    let check = conjunction_check(&EventPair::new(0.2, 0.4, 0.2, 1.0).unwrap());
    assert_eq!(check.verdict, Verdict::Fallacy);
}

#[test]
fn decompositional_reports_respect_nesting_for_positive_lambda() {
    let space = StateSpace::range(4).unwrap();
    let prior = Prior::new(&space, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let (b, c) = (Event::new(vec![0]), Event::new(vec![0, 1]));
    for lambda in [0.0, 0.3, 1.0, 2.0] {
        let r = conjunction_from_events(&prior, &b, &c, ReportingMode::Decompositional { lambda }).unwrap();
        assert_eq!(r.verdict, Verdict::NoFallacy);
    }
    let holistic = conjunction_from_events(&prior, &b, &c, ReportingMode::Holistic { lambda_b: 0.1, lambda_c: 1.0 }).unwrap();
    assert_eq!(holistic.verdict, Verdict::Fallacy);
}
