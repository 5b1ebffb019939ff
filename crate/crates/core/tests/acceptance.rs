//! Acceptance suite: one PASS/FAIL/SKIP line per criterion; exits non-zero on
//! any failure.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use erbr_core::empirics::{binomial_prior, load_dataset, replicate, ReplicationConfig, ReplicationReport};
use erbr_core::fallacy::{conjunction_condition, conjunction_lambda_region, itemwise_report, EventPair, ItemLambdas};
use erbr_core::identification::{construction_partitions, find_alpha, full_pipeline, AlphaSolution, BeliefCollection, Diagnosis};
use erbr_core::recovery::{recover_from_binary, BinaryReportSet, RecoveryConfig};
use erbr_core::reporting::{
    erbr_objective, erbr_report, objective_uniform_form, report_from_base, scan_power_support, Lambda,
};
use erbr_core::space::induced_prior;
use erbr_core::variational::variational_solve;
use erbr_core::{Error, Partition, StateSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_partition, random_prior, random_simplex};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + stream)
}

fn lam(x: f64) -> Lambda {
    Lambda::new(x).unwrap()
}

fn closed_form_vs_oracle() -> Outcome {
    let mut rng = rng(1);
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for _ in 0..500 {
        let n = rng.random_range(2..=10);
        let prior = random_prior(&mut rng, n);
        let partition = random_partition(&mut rng, prior.space());
        let lambda = lam(rng.random_range(-1.0..3.0));
        let closed = erbr_report(&prior, &partition, lambda).unwrap();
        let base = induced_prior(&prior, &partition).unwrap();
        let oracle = match variational_solve(&base, lambda, 1e-9) {
            Ok(s) => s,
            Err(e) => return Outcome::Fail(format!("oracle failed: {e}")),
        };
        for (a, b) in closed.probs().iter().zip(&oracle.probs) {
            worst = worst.max((a - b).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!("500 instances, max deviation {worst:.2e}, {secs:.2}s");
    if worst <= 1e-6 && secs < 10.0 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn round_trip_identification() -> Outcome {
    let mut rng = rng(2);
    let lambdas = [-1.0, 0.3, 0.69, 1.0, 2.0, 0.0];
    let (mut worst_l, mut worst_p) = (0.0_f64, 0.0_f64);
    for trial in 0..200 {
        let n = rng.random_range(3..=10);
        let lambda = lambdas[trial % lambdas.len()];
        let prior = random_prior(&mut rng, n);
        let parts = construction_partitions(prior.space(), 0).unwrap();
        let c = BeliefCollection::generate(&prior, &parts, lam(lambda)).unwrap();
        let d = match full_pipeline(&c, 1e-8) {
            Ok(d) => d,
            Err(e) => return Outcome::Fail(format!("trial {trial} (n={n}, λ={lambda}): {e}")),
        };
        match (lambda == 0.0, d) {
            (true, Diagnosis::UniformDegenerate { .. }) => {}
            (false, Diagnosis::Identified(id)) => {
                worst_l = worst_l.max((id.lambda - lambda).abs());
                for (p, q) in id.prior.probs().iter().zip(prior.probs()) {
                    worst_p = worst_p.max((p - q).abs());
                }
            }
            (_, other) => {
                return Outcome::Fail(format!("trial {trial} (n={n}, λ={lambda}): {}", diagnosis_name(&other)))
            }
        }
    }
    let detail = format!("200 trials, max |Δλ| {worst_l:.2e}, max |Δπ| {worst_p:.2e}");
    if worst_l <= 1e-6 && worst_p <= 1e-8 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn diagnosis_name(d: &Diagnosis) -> &'static str {
    match d {
        Diagnosis::Identified(_) => "identified",
        Diagnosis::UniformDegenerate { .. } => "uniform degenerate",
        Diagnosis::RegularityFailed(_) => "regularity failed",
        Diagnosis::CyclicalIndependenceFailed(_) => "cyclical independence failed",
        Diagnosis::NotErbr { .. } => "not ERBR",
    }
}

fn trichotomy() -> Outcome {
    let mut rng = rng(3);
    let grid: Vec<f64> = (0..=400).map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / 400.0)).collect();
    let (mut worst, mut solved) = (0.0_f64, 0usize);
    for t in 0..10_000 {
        let a = rng.random_range(-4.0f64..4.0).exp();
        let b = rng.random_range(-4.0f64..4.0).exp();
        let c = match t % 20 {
            0 => a,
            1 => b,
            _ => rng.random_range(-4.0f64..4.0).exp(),
        };
        let got = find_alpha(a, b, c, 1e-15).unwrap();
        let expected_sign = if c > a.max(b) {
            1.0
        } else if c < a.min(b) {
            -1.0
        } else {
            0.0
        };
        let h = |alpha: f64| (a / c).powf(alpha) + (b / c).powf(alpha) - 1.0;
        let sign_changes = |s: f64| {
            grid.windows(2)
                .filter(|w| h(s * w[0]) * h(s * w[1]) < 0.0)
                .count()
        };
        match got {
            AlphaSolution::NotPowerAdditive => {
                if expected_sign != 0.0 {
                    return Outcome::Fail(format!("({a}, {b}, {c}) has a solution but none was returned"));
                }
                if sign_changes(1.0) + sign_changes(-1.0) != 0 {
                    return Outcome::Fail(format!("({a}, {b}, {c}): grid finds a root the classifier missed"));
                }
            }
            AlphaSolution::Alpha { alpha } => {
                if alpha.signum() != expected_sign {
                    return Outcome::Fail(format!("({a}, {b}, {c}) misclassified: α = {alpha}"));
                }
                worst = worst.max(h(alpha).abs());
                solved += 1;
                let same = sign_changes(expected_sign);
                let other = sign_changes(-expected_sign);
                let in_range = alpha.abs() >= grid[0] && alpha.abs() <= grid[grid.len() - 1];
                if other != 0 || same > 1 || (in_range && same != 1) {
                    return Outcome::Fail(format!("({a}, {b}, {c}): {same}+{other} roots on the grid"));
                }
            }
        }
    }
    let detail = format!("10000 triples, {solved} solved, max residual {worst:.2e}");
    if worst <= 1e-10 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn subadditivity_sweep() -> Outcome {
    let mut rng = rng(4);
    let (mut pairs, mut violations) = (0usize, 0usize);
    for lambda in [-1.0, 0.0, 0.5, 1.0, 1.5, 3.0] {
        for n in 2..=8 {
            for _ in 0..5 {
                let prior = random_prior(&mut rng, n);
                let scan = scan_power_support(&prior, lam(lambda), 1e-12).unwrap();
                pairs += scan.pairs_checked;
                if lambda <= 1.0 {
                    violations += scan.subadditivity_violations;
                }
                if lambda >= 1.0 {
                    violations += scan.superadditivity_violations;
                }
            }
        }
    }
    let detail = format!("{pairs} disjoint pairs, {violations} violations");
    if violations == 0 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn uniform_form_equivalence() -> Outcome {
    let mut rng = rng(5);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let k = rng.random_range(2..=12);
        let base = random_simplex(&mut rng, k);
        let candidate = random_simplex(&mut rng, k);
        let lambda = lam(rng.random_range(-2.0..3.0));
        let diff = objective_uniform_form(&candidate, &base, lambda).unwrap()
            - erbr_objective(&candidate, &base, lambda).unwrap();
        worst = worst.max((diff - (1.0 - lambda.value()) * (k as f64).ln()).abs());
    }
    let detail = format!("1000 candidates, max deviation {worst:.2e}");
    if worst <= 1e-10 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn binary_recovery() -> Outcome {
    let mut rng = rng(6);
    let lambdas = [0.3, 0.7, 1.0, 2.0];
    let (mut worst_l, mut worst_p) = (0.0_f64, 0.0_f64);
    for trial in 0..400 {
        let n = rng.random_range(3..=12);
        let lambda = lambdas[trial % lambdas.len()];
        let prior = random_prior(&mut rng, n);
        let reports = BinaryReportSet::generate(&prior, lam(lambda)).unwrap();
        let r = match recover_from_binary(&reports, &RecoveryConfig::default()) {
            Ok(r) => r,
            Err(e) => return Outcome::Fail(format!("trial {trial} (n={n}, λ={lambda}): {e}")),
        };
        worst_l = worst_l.max((r.lambda - lambda).abs());
        for (p, q) in r.prior.probs().iter().zip(prior.probs()) {
            worst_p = worst_p.max((p - q).abs());
        }
    }
    let space = StateSpace::range(5).unwrap();
    let half = BinaryReportSet::new(&space, vec![0.5; 5]).unwrap();
    let degenerate = matches!(
        recover_from_binary(&half, &RecoveryConfig::default()),
        Err(Error::Degenerate(_))
    );
    let detail = format!(
        "400 trials, max |Δλ| {worst_l:.2e}, max |Δπ| {worst_p:.2e}, all-0.5 degenerate: {degenerate}"
    );
    if worst_l <= 1e-6 && worst_p <= 1e-6 && degenerate {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn conjunction_grid() -> Outcome {
    let probs: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
    let lambdas: Vec<f64> = (0..=12).map(|i| -1.0 + 0.25 * i as f64).collect();
    let (mut cells, mut agree, mut ties, mut straddle_ok) = (0usize, 0usize, 0usize, true);
    for &pb in &probs {
        for &pc in probs.iter().filter(|&&pc| pc > pb) {
            for &lb in &lambdas {
                for &lc in &lambdas {
                    cells += 1;
                    let pair = EventPair::new(pb, pc, lb, lc).unwrap();
                    let predicted = conjunction_condition(&pair);
                    let mu_b = report_from_base(&[pb, 1.0 - pb], lam(lb)).unwrap()[0];
                    let mu_c = report_from_base(&[pc, 1.0 - pc], lam(lc)).unwrap()[0];
                    if (mu_b - mu_c).abs() <= 1e-12 {
                        // numerically tied beliefs: either answer is a tie
                        ties += 1;
                        agree += 1;
                    } else if predicted == (mu_b > mu_c) {
                        agree += 1;
                    }
                    if predicted && pb < 0.5 && pc > 0.5 {
                        let region = conjunction_lambda_region(pb, pc, lc).unwrap();
                        let negative = lb < 0.0 || lc < 0.0;
                        straddle_ok &= negative && region.straddles_half;
                    }
                }
            }
        }
    }
    let detail = format!("{agree}/{cells} cells agree ({ties} ties), straddle implication holds: {straddle_ok}");
    if agree == cells && straddle_ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn binomial_oracle() -> Outcome {
    let prior = binomial_prior(10, 0.5).unwrap();
    let mut counts = [0u32; 11];
    for seq in 0u32..1024 {
        counts[seq.count_ones() as usize] += 1;
    }
    let exact = counts
        .iter()
        .enumerate()
        .all(|(k, &c)| prior.prob(k) == c as f64 / 1024.0);
    if exact {
        Outcome::Pass("all 11 probabilities equal count/1024 exactly".into())
    } else {
        Outcome::Fail(format!("{:?} vs {:?}", prior.probs(), counts))
    }
}

struct Check {
    failures: Vec<String>,
    compared: usize,
}

impl Check {
    fn near(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.compared += 1;
        if (got - want).abs() > tol {
            self.failures.push(format!("{what}: {got:.4} vs {want} (±{tol})"));
        }
    }
}

fn published_tables() -> Outcome {
    let Some(path) = std::env::var_os("ERBR_EXP2_DATA").map(PathBuf::from) else {
        return Outcome::Skip("ERBR_EXP2_DATA not set; synthetic round-trip criteria stand in".into());
    };
    let dataset = match load_dataset(&path, None) {
        Ok(d) => d,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let dataset = if dataset.true_prior().is_none() {
        dataset.with_true_prior(binomial_prior(10, 0.5).unwrap()).unwrap()
    } else {
        dataset
    };
    let report: ReplicationReport = match replicate(&dataset, &ReplicationConfig::default()) {
        Ok(r) => r,
        Err(e) => return Outcome::Fail(format!("replication failed: {e}")),
    };
    let mut check = Check {
        failures: Vec::new(),
        compared: 0,
    };
    check.near("global λ", report.single_fit.lambda, 0.69, 0.01);
    let t2 = [(0.0320, 0.0746, 0.0324), (0.0450, 0.0615, 0.0377), (0.0406, 0.0048, 0.0587), (0.0265, 0.3627, 0.0615)];
    let t3 = [(0.82, 0.0313), (2.17, 0.0198), (0.05, 0.0037), (0.70, 0.0263)];
    let t4 = [(0.91, 0.0141), (1.39, 0.0143), (0.09, 0.0032), (0.70, 0.0000)];
    if report.table2.len() != 4 {
        return Outcome::Fail(format!("expected 4 formats, found {}", report.table2.len()));
    }
    for i in 0..4 {
        let (r2, r3) = (&report.table2[i], &report.table3[i]);
        check.near(&format!("table 2 {} fitted", r2.format), r2.rmse_fitted, t2[i].0, 0.002);
        check.near(&format!("table 2 {} λ=0", r2.format), r2.rmse_zero, t2[i].1, 0.002);
        check.near(&format!("table 2 {} λ=1", r2.format), r2.rmse_one, t2[i].2, 0.002);
        check.near(&format!("table 3 {} λ", r3.format), r3.lambda, t3[i].0, 0.05);
        check.near(&format!("table 3 {} RMSE", r3.format), r3.rmse_partition_dependent, t3[i].1, 0.002);
        match report.table4.get(i) {
            Some(r4) => {
                check.near(&format!("table 4 {} λ", r4.format), r4.lambda_recovered, t4[i].0, 0.05);
                check.near(&format!("table 4 {} RMSE", r4.format), r4.rmse_recovered, t4[i].1, 0.002);
            }
            None => check.failures.push(format!("table 4 row {i} missing")),
        }
    }
    match &report.recovery {
        Some(r) => check.near("recovered λ*", r.lambda, 0.70, 0.01),
        None => check.failures.push("no prior recovery".into()),
    }
    if check.failures.is_empty() {
        Outcome::Pass(format!("{} values within tolerance", check.compared))
    } else {
        Outcome::Fail(check.failures.join("; "))
    }
}

fn teigen_itemwise() -> Outcome {
    let mut rng = rng(10);
    let (mut above, mut trials, mut worst_truthful) = (0usize, 0usize, 0.0_f64);
    while trials < 1000 {
        let n = rng.random_range(3..=10);
        let prior = random_prior(&mut rng, n);
        let partition: Partition = random_partition(&mut rng, prior.space());
        let base = induced_prior(&prior, &partition).unwrap();
        if base.iter().any(|&p| p >= 0.5) {
            continue;
        }
        trials += 1;
        let lambda = lam(rng.random_range(-1.0..1.0));
        let items = itemwise_report(&prior, &partition, &ItemLambdas::Constant(lambda)).unwrap();
        if items.iter().sum::<f64>() > 1.0 {
            above += 1;
        }
        let truthful = itemwise_report(&prior, &partition, &ItemLambdas::Constant(Lambda::TRUTHFUL)).unwrap();
        worst_truthful = worst_truthful.max((truthful.iter().sum::<f64>() - 1.0).abs());
    }
    let detail = format!("{above}/{trials} sums exceed 1 for λ < 1; λ = 1 max |Σ − 1| {worst_truthful:.1e}");
    if above == trials && worst_truthful <= 1e-12 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("closed form matches variational oracle", closed_form_vs_oracle),
        ("round-trip identification", round_trip_identification),
        ("power-additivity trichotomy", trichotomy),
        ("subadditivity sweep", subadditivity_sweep),
        ("uniform-form objective equivalence", uniform_form_equivalence),
        ("binary recovery round trip", binary_recovery),
        ("conjunction condition grid", conjunction_grid),
        ("binomial enumeration oracle", binomial_oracle),
        ("published table reproduction", published_tables),
        ("itemwise sums", teigen_itemwise),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag}  {name}: {detail} [{secs:.1}s]");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
