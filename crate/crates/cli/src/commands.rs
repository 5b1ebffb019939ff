use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use erbr_core::empirics::{
    binary_family_reports, emit_report, find_binary_family, fit_format, fit_per_format, load_dataset,
    parse_dataset_json, replicate, standard_partitions_on, summary_text, synthetic_dataset_with_noise,
    BeliefDataset, FileKind, PartitionFormat, NOISE_FLOOR,
};
use erbr_core::fallacy::{conjunction_check, conjunction_lambda_region, EventPair, Verdict};
use erbr_core::identification::{construction_partitions, full_pipeline_with, BeliefCollection, Diagnosis};
use erbr_core::recovery::{fit_lambda_single, recover_from_binary, BinaryReportSet};
use erbr_core::reporting::{erbr_report, Lambda};
use erbr_core::space::induced_prior;
use erbr_core::variational::variational_solve;
use erbr_core::{Error, Partition, Prior};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::inputs::{
    binary_from_json, collection_from_json, collection_records, json_document, labels, parse_prior, read_input,
};
use crate::output::{fixed, table, Output};

/// Outcome of a command that ran to completion: whether its diagnosis is
/// consistent with the model.
pub enum Status {
    Ok,
    Inconsistent,
}

pub struct Ctx {
    pub config: RunConfig,
    pub out: Output,
}

impl Ctx {
    fn seed(&self) -> u64 {
        self.config.seed()
    }
}

fn lambda(value: f64) -> Result<Lambda> {
    Ok(Lambda::new(value)?)
}

pub fn report(ctx: &Ctx, prior: &str, partition: &str, lambda_value: f64, oracle: bool) -> Result<Status> {
    let prior = parse_prior(prior)?;
    let partition = Partition::parse(prior.space(), partition)?;
    let l = lambda(lambda_value)?;
    let report = erbr_report(&prior, &partition, l)?;
    let oracle = if oracle {
        let solution = variational_solve(&induced_prior(&prior, &partition)?, l, 1e-9)?;
        let deviation = report
            .probs()
            .iter()
            .zip(&solution.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Some(json!({"max_deviation": deviation, "iterations": solution.iterations}))
    } else {
        None
    };
    let space = prior.space();
    let bins: Vec<String> = partition.bins().iter().map(|b| space.describe(b)).collect();
    let value = json!({
        "command": "report",
        "seed": ctx.seed(),
        "states": labels(space),
        "partition": partition.describe(),
        "bins": bins,
        "lambda": lambda_value,
        "probs": report.probs(),
        "oracle": oracle,
    });
    ctx.out.emit(&value, || {
        let rows: Vec<Vec<String>> = bins
            .iter()
            .zip(report.probs())
            .map(|(b, p)| vec![b.clone(), format!("{p:.6}")])
            .collect();
        let mut s = format!("seed: {}\nlambda: {lambda_value}\n", ctx.seed());
        s.push_str(&table(&["bin", "belief"], &rows));
        if let Some(o) = &oracle {
            s.push_str(&format!("oracle max deviation: {:.3e}\n", o["max_deviation"].as_f64().unwrap_or(f64::NAN)));
        }
        s
    })?;
    Ok(Status::Ok)
}

fn dataset_with_prior(data: &Path, prior: Option<&str>) -> Result<BeliefDataset> {
    let dataset = load_dataset(data, None)?;
    match prior {
        Some(spec) => Ok(dataset.with_true_prior(parse_prior(spec)?)?),
        None => Ok(dataset),
    }
}

pub fn fit(ctx: &Ctx, data: &Path, prior: Option<&str>) -> Result<Status> {
    let dataset = dataset_with_prior(data, prior)?;
    let Some(base) = dataset.true_prior() else {
        bail!(Error::Config("the dataset carries no prior; pass --prior".into()));
    };
    let cfg = ctx.config.fit();
    let formats = dataset
        .formats()
        .iter()
        .map(|f| fit_format(f, base))
        .collect::<erbr_core::Result<Vec<_>>>()?;
    let single = fit_lambda_single(&formats, &cfg)?;
    let per_format = dataset
        .formats()
        .iter()
        .zip(&formats)
        .map(|(f, ff)| fit_per_format(f, ff, &cfg).map(|r| (f.name.clone(), r)))
        .collect::<erbr_core::Result<Vec<_>>>()?;
    let value = json!({
        "command": "fit",
        "seed": ctx.seed(),
        "config": cfg,
        "single": single,
        "formats": per_format.iter().map(|(name, r)| json!({"format": name, "fit": r})).collect::<Vec<_>>(),
        "warnings": dataset.warnings(),
    });
    ctx.out.emit(&value, || {
        let mut s = format!(
            "seed: {}\nsingle lambda: {:.4} (mean format RMSE {:.4})\n",
            ctx.seed(),
            single.lambda,
            single.rmse
        );
        let rows: Vec<Vec<String>> = per_format
            .iter()
            .zip(&single.rmse_by_format)
            .map(|((name, r), (_, single_rmse))| {
                vec![name.clone(), fixed(*single_rmse), fixed(r.lambda), fixed(r.rmse)]
            })
            .collect();
        s.push_str(&table(&["format", "rmse_single", "lambda", "rmse"], &rows));
        s
    })?;
    Ok(Status::Ok)
}

fn binary_reports(input: &Path, family: Option<&str>) -> Result<(BinaryReportSet, Option<String>)> {
    if FileKind::from_path(input) != Some(FileKind::Csv) {
        let text = read_input(input)?;
        let source = input.display().to_string();
        let doc = json_document(&text, &source)?;
        if let Some(set) = binary_from_json(&doc, &source)? {
            return Ok((set, None));
        }
        return from_dataset(&parse_dataset_json(&text)?, family);
    }
    from_dataset(&load_dataset(input, Some(FileKind::Csv))?, family)
}

fn from_dataset(dataset: &BeliefDataset, family: Option<&str>) -> Result<(BinaryReportSet, Option<String>)> {
    let Some(f) = find_binary_family(dataset, family)? else {
        bail!(Error::Config("the dataset has no singleton-vs-rest family".into()));
    };
    let (set, _) = binary_family_reports(dataset, f)?;
    Ok((set, Some(f.name.clone())))
}

pub fn recover(ctx: &Ctx, input: &Path, family: Option<&str>) -> Result<Status> {
    let (reports, family) = binary_reports(input, family)?;
    let r = recover_from_binary(&reports, &ctx.config.recovery())?;
    let space = reports.space();
    let value = json!({
        "command": "recover",
        "seed": ctx.seed(),
        "family": family,
        "states": labels(space),
        "lambda": r.lambda,
        "prior": r.prior.probs(),
        "sum_residual": r.sum_residual,
        "roots_found": r.roots_found,
        "multiple_roots": r.multiple_roots,
    });
    ctx.out.emit(&value, || {
        let mut s = format!("seed: {}\nlambda: {:.6}\n", ctx.seed(), r.lambda);
        let rows: Vec<Vec<String>> = space
            .labels()
            .iter()
            .zip(r.prior.probs())
            .map(|(l, p)| vec![l.clone(), format!("{p:.6}")])
            .collect();
        s.push_str(&table(&["state", "prior"], &rows));
        if r.multiple_roots {
            s.push_str(&format!("note: {} roots found\n", r.roots_found.len()));
        }
        s
    })?;
    Ok(Status::Ok)
}

fn diagnosis_name(d: &Diagnosis) -> &'static str {
    match d {
        Diagnosis::Identified(_) => "identified",
        Diagnosis::UniformDegenerate { .. } => "uniform_degenerate",
        Diagnosis::RegularityFailed(_) => "regularity_failed",
        Diagnosis::CyclicalIndependenceFailed(_) => "cyclical_independence_failed",
        Diagnosis::NotErbr { .. } => "not_erbr",
    }
}

pub fn identify(ctx: &Ctx, input: &Path) -> Result<Status> {
    let collection: BeliefCollection = collection_from_json(&read_input(input)?, &input.display().to_string())?;
    let diagnosis = full_pipeline_with(&collection, &ctx.config.pipeline())?;
    let (lambda, prior) = match &diagnosis {
        Diagnosis::Identified(id) => (Some(id.lambda), Some(id.prior.probs().to_vec())),
        Diagnosis::UniformDegenerate { lambda, .. } => (Some(*lambda), None),
        _ => (None, None),
    };
    let space = collection.space();
    let value = json!({
        "command": "identify",
        "seed": ctx.seed(),
        "consistent": diagnosis.is_consistent(),
        "states": labels(space),
        "lambda": lambda,
        "prior": prior,
        "diagnosis": diagnosis,
    });
    ctx.out.emit(&value, || {
        let mut s = format!("seed: {}\ndiagnosis: {}\n", ctx.seed(), diagnosis_name(&diagnosis));
        if let Some(l) = lambda {
            s.push_str(&format!("lambda: {l:.6}\n"));
        }
        if let Some(p) = &prior {
            let rows: Vec<Vec<String>> = space
                .labels()
                .iter()
                .zip(p)
                .map(|(l, p)| vec![l.clone(), format!("{p:.6}")])
                .collect();
            s.push_str(&table(&["state", "prior"], &rows));
        }
        if !diagnosis.is_consistent() {
            s.push_str(&format!("{}\n", serde_json::to_string_pretty(&diagnosis).unwrap_or_default()));
        }
        s
    })?;
    Ok(if diagnosis.is_consistent() {
        Status::Ok
    } else {
        Status::Inconsistent
    })
}

pub fn check_fallacy(ctx: &Ctx, pi_b: f64, pi_c: f64, lambda_b: f64, lambda_c: f64) -> Result<Status> {
    let check = conjunction_check(&EventPair::new(pi_b, pi_c, lambda_b, lambda_c)?);
    let region = conjunction_lambda_region(pi_b, pi_c, lambda_c)?;
    let fallacy = check.verdict == Verdict::Fallacy;
    let value = json!({
        "command": "check-fallacy",
        "seed": ctx.seed(),
        "fallacy": fallacy,
        "check": check,
        "region": region,
    });
    ctx.out.emit(&value, || {
        let verdict = match check.verdict {
            Verdict::Fallacy => "fallacy",
            Verdict::NoFallacy => "no_fallacy",
            Verdict::Boundary => "boundary",
        };
        format!(
            "seed: {}\nfallacy: {fallacy}\nverdict: {verdict}\nmu_B: {:.6}\nmu_C: {:.6}\nlambda_B*logit(pi_B): {:.6}\nlambda_C*logit(pi_C): {:.6}\n",
            ctx.seed(),
            check.mu_b,
            check.mu_c,
            check.lhs,
            check.rhs
        )
    })?;
    Ok(Status::Ok)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SimKind {
    /// Beliefs on the partitions identification needs.
    Collection,
    /// An empirical-means dataset (coin formats by default).
    Dataset,
    /// Singleton-vs-rest beliefs for prior recovery.
    Binary,
}

pub struct SimulateArgs<'a> {
    pub kind: SimKind,
    pub prior: &'a str,
    pub lambda: f64,
    pub lambda_for: &'a [String],
    pub partitions: &'a [String],
    pub noise: f64,
}

fn noise_source(seed: u64, sd: f64) -> Result<impl FnMut() -> f64> {
    if !(sd >= 0.0 && sd.is_finite()) {
        bail!(Error::Config(format!("noise standard deviation must be non-negative, got {sd}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sd).map_err(|e| Error::Config(e.to_string()))?;
    Ok(move || if sd == 0.0 { 0.0 } else { normal.sample(&mut rng) })
}

fn perturb(row: &mut [f64], noise: &mut impl FnMut() -> f64) {
    let mut changed = false;
    for x in row.iter_mut() {
        let e = noise();
        if e != 0.0 {
            changed = true;
            *x = (*x + e).max(NOISE_FLOOR);
        }
    }
    if changed {
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= total);
    }
}

fn lambda_map(entries: &[String]) -> Result<BTreeMap<String, f64>> {
    entries
        .iter()
        .map(|e| {
            let (name, value) = e
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--lambda-for expects NAME=VALUE, got {e:?}")))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("--lambda-for {e:?}: {value:?} is not a number")))?;
            Ok((name.trim().to_string(), v))
        })
        .collect()
}

pub fn simulate(ctx: &Ctx, args: &SimulateArgs<'_>) -> Result<Status> {
    let prior = parse_prior(args.prior)?;
    let space = prior.space();
    let l = lambda(args.lambda)?;
    let mut noise = noise_source(ctx.seed(), args.noise)?;
    let parse_partitions = || {
        args.partitions
            .iter()
            .map(|p| Partition::parse(space, p))
            .collect::<erbr_core::Result<Vec<_>>>()
    };
    if args.kind != SimKind::Dataset && !args.lambda_for.is_empty() {
        bail!(Error::Config("--lambda-for applies to --kind dataset only".into()));
    }
    let value = match args.kind {
        SimKind::Collection => {
            let partitions = if args.partitions.is_empty() {
                construction_partitions(space, ctx.config.pipeline().anchor)?
            } else {
                parse_partitions()?
            };
            let mut collection = BeliefCollection::generate(&prior, &partitions, l)?;
            for r in 0..collection.len() {
                let mut probs = collection.records()[r].probs.clone();
                perturb(&mut probs, &mut noise);
                collection.set_probs(r, probs)?;
            }
            json!({
                "command": "simulate",
                "kind": "collection",
                "seed": ctx.seed(),
                "lambda": args.lambda,
                "noise": args.noise,
                "states": labels(space),
                "prior": prior.probs(),
                "records": collection_records(&collection),
            })
        }
        SimKind::Binary => {
            let mut mu = BinaryReportSet::generate(&prior, l)?.mu().to_vec();
            for x in &mut mu {
                *x = (*x + noise()).clamp(NOISE_FLOOR, 1.0 - NOISE_FLOOR);
            }
            json!({
                "command": "simulate",
                "kind": "binary",
                "seed": ctx.seed(),
                "lambda": args.lambda,
                "noise": args.noise,
                "states": labels(space),
                "prior": prior.probs(),
                "mu": mu,
            })
        }
        SimKind::Dataset => simulate_dataset(ctx, &prior, args, parse_partitions()?, &mut noise)?,
    };
    // generated data is always emitted as JSON so that it can be piped on
    Output { json: true }.emit(&value, String::new)?;
    Ok(Status::Ok)
}

fn simulate_dataset(
    ctx: &Ctx,
    prior: &Prior,
    args: &SimulateArgs<'_>,
    partitions: Vec<Partition>,
    noise: &mut impl FnMut() -> f64,
) -> Result<Value> {
    let space = prior.space();
    let formats: Vec<PartitionFormat> = if partitions.is_empty() {
        let coin: Vec<String> = (0..=10).map(|i| i.to_string()).collect();
        if space.labels() != coin.as_slice() {
            bail!(Error::Config(
                "the default coin formats need states 0..10; pass --partition for other spaces".into()
            ));
        }
        standard_partitions_on(space)
    } else {
        partitions
            .into_iter()
            .enumerate()
            .map(|(i, p)| PartitionFormat {
                name: format!("P{}", i + 1),
                family: false,
                partitions: vec![p],
            })
            .collect()
    };
    let per_format = lambda_map(args.lambda_for)?;
    if let Some(name) = per_format.keys().find(|n| !formats.iter().any(|f| &f.name == *n)) {
        bail!(Error::Config(format!("--lambda-for names unknown format {name:?}")));
    }
    let mut out = Vec::with_capacity(formats.len());
    for f in &formats {
        let value = per_format.get(&f.name).copied().unwrap_or(args.lambda);
        let d = synthetic_dataset_with_noise(prior, std::slice::from_ref(f), lambda(value)?, &mut *noise)?;
        out.extend(d.formats().iter().cloned());
    }
    let metadata = json!({
        "source": "synthetic",
        "seed": ctx.seed(),
        "lambda": args.lambda,
        "lambda_for": per_format,
        "noise": args.noise,
    });
    Ok(BeliefDataset::new(space, out, Some(prior.clone()), metadata)?.to_json())
}

pub fn replicate_cmd(ctx: &Ctx, data: &Path, prior: Option<&str>, out_dir: Option<PathBuf>) -> Result<Status> {
    let dataset = dataset_with_prior(data, prior)?;
    let out_dir = out_dir
        .or_else(|| ctx.config.out_dir.clone())
        .or_else(|| std::env::var_os("ERBR_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("erbr-output"));
    let report = replicate(&dataset, &ctx.config.replication())?;
    let files = emit_report(&report, &out_dir)?;
    let value = json!({
        "command": "replicate",
        "seed": ctx.seed(),
        "out_dir": out_dir,
        "files": files,
        "report": report,
    });
    ctx.out.emit(&value, || {
        let mut s = summary_text(&report);
        s.push_str(&format!("\nwrote {} files to {}\n", files.len(), out_dir.display()));
        s
    })?;
    Ok(Status::Ok)
}
