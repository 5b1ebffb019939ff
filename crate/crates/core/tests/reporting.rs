mod common;

use erbr_core::reporting::{erbr_report, report_from_base, scan_power_support, Lambda};
use erbr_core::space::induced_prior;
use erbr_core::variational::variational_solve;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_partition, random_prior, random_simplex};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reports_are_positive_and_normalized(seed in any::<u64>(), n in 2usize..12, lambda in -5.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prior = random_prior(&mut rng, n);
        let partition = random_partition(&mut rng, prior.space());
        let report = erbr_report(&prior, &partition, Lambda::new(lambda).unwrap()).unwrap();
        prop_assert!(report.probs().iter().all(|&p| p > 0.0));
        prop_assert!((report.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn closed_form_agrees_with_numerical_optimum(seed in any::<u64>(), k in 2usize..8, lambda in -1.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_simplex(&mut rng, k);
        let lambda = Lambda::new(lambda).unwrap();
        let closed = report_from_base(&base, lambda).unwrap();
        let numeric = variational_solve(&base, lambda, 1e-9).unwrap();
        for (a, b) in closed.iter().zip(&numeric.probs) {
            prop_assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn order_follows_the_sign_of_lambda(seed in any::<u64>(), k in 2usize..8, lambda in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_simplex(&mut rng, k);
        let mu = report_from_base(&base, Lambda::new(lambda).unwrap()).unwrap();
        for i in 0..k {
            for j in 0..k {
                if base[i] > base[j] {
                    if lambda > 0.0 {
                        prop_assert!(mu[i] >= mu[j]);
                    } else if lambda < 0.0 {
                        prop_assert!(mu[i] <= mu[j]);
                    }
                }
            }
        }
    }

    #[test]
    fn truthful_and_uniform_limits(seed in any::<u64>(), n in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prior = random_prior(&mut rng, n);
        let partition = random_partition(&mut rng, prior.space());
        let base = induced_prior(&prior, &partition).unwrap();
        let truthful = erbr_report(&prior, &partition, Lambda::TRUTHFUL).unwrap();
        for (a, b) in truthful.probs().iter().zip(&base) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
        let uniform = erbr_report(&prior, &partition, Lambda::UNIFORM).unwrap();
        let k = partition.len() as f64;
        prop_assert!(uniform.probs().iter().all(|&p| (p - 1.0 / k).abs() <= 1e-15));
    }
}

#[test]
fn large_lambda_stays_finite() {
    let mu = report_from_base(&[0.2, 0.3, 0.5], Lambda::new(900.0).unwrap()).unwrap();
    assert!(mu.iter().all(|p| p.is_finite()));
    assert!((mu[2] - 1.0).abs() < 1e-12);
}

#[test]
fn subadditive_below_one_superadditive_above() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let prior = random_prior(&mut rng, 6);
    assert!(scan_power_support(&prior, Lambda::new(0.5).unwrap(), 1e-12).unwrap().is_subadditive());
    assert!(scan_power_support(&prior, Lambda::new(2.0).unwrap(), 1e-12).unwrap().is_superadditive());
    let one = scan_power_support(&prior, Lambda::TRUTHFUL, 1e-12).unwrap();
    assert!(one.is_subadditive() && one.is_superadditive());
}
