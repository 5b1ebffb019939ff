use serde::{Deserialize, Serialize};

use super::dataset::{BeliefDataset, DatasetFormat};
use crate::error::{Error, Result};
use crate::recovery::{
    fit_family_common_lambda, fit_lambda_per_partition, fit_lambda_single, recover_from_binary, BinaryReportSet,
    FitConfig, FitFormat, FitMethod, FitResult, FitRow, RecoveryConfig, EMPIRICAL_CLIP,
};
use crate::reporting::{report_from_base, Lambda};
use crate::space::{induced_prior, Event, Prior};

/// Whether replication recovers the latent prior from the binary family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryMode {
    /// Recover when a binary family is present; skip with a warning otherwise.
    #[default]
    Auto,
    /// Fail when no binary family is present or recovery fails.
    Required,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationConfig {
    pub fit: FitConfig,
    pub recovery: RecoveryConfig,
    pub mode: RecoveryMode,
    /// Name of the binary family format; found automatically when unset.
    pub binary_family: Option<String>,
    /// Echoed in the report. Replication itself draws no random numbers.
    pub seed: u64,
}

impl Default for ReplicationConfig {
    fn default() -> Self {
        ReplicationConfig {
            fit: FitConfig::default(),
            recovery: RecoveryConfig::default(),
            mode: RecoveryMode::Auto,
            binary_family: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    True,
    Recovered,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table2Row {
    pub format: String,
    pub rmse_fitted: f64,
    pub rmse_zero: f64,
    pub rmse_one: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table3Row {
    pub format: String,
    pub lambda: f64,
    pub rmse_partition_dependent: f64,
    pub rmse_single: f64,
    pub method: FitMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table4Row {
    pub format: String,
    pub lambda_true: f64,
    pub rmse_true: f64,
    pub lambda_recovered: f64,
    pub rmse_recovered: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoverySummary {
    pub format: String,
    pub lambda: f64,
    pub prior: Vec<f64>,
    pub sum_residual: f64,
    pub roots_found: Vec<f64>,
    /// Binary means moved into `(0, 1)` before taking logits.
    pub clipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureRow {
    pub partition: String,
    pub bin: String,
    /// Event probability under the true prior, when known.
    #[serde(rename = "true")]
    pub true_prob: Option<f64>,
    pub empirical: f64,
    /// Single-`λ` model on the benchmark prior.
    pub model: f64,
    /// Format-specific `λ` on the benchmark prior.
    pub model_partition_dependent: f64,
    pub recovered: Option<f64>,
    /// Format-specific `λ` on the recovered prior.
    pub model_recovered: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureSeries {
    pub format: String,
    pub rows: Vec<FigureRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationReport {
    pub seed: u64,
    pub states: Vec<String>,
    /// Prior used for Tables 2 and 3 and the `model` figure columns.
    pub benchmark: Benchmark,
    pub single_fit: FitResult,
    pub table2: Vec<Table2Row>,
    pub table3: Vec<Table3Row>,
    pub recovery: Option<RecoverySummary>,
    /// Empty unless both a true prior and a recovered prior exist.
    pub table4: Vec<Table4Row>,
    pub figure_data: Vec<FigureSeries>,
    pub warnings: Vec<String>,
}

/// Fit rows for one format: each member's induced base under `prior` and its
/// empirical means.
pub fn fit_format(format: &DatasetFormat, prior: &Prior) -> Result<FitFormat> {
    let rows = format
        .members
        .iter()
        .map(|m| FitRow::new(m.label.clone(), induced_prior(prior, &m.partition)?, m.empirical.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(FitFormat {
        name: format.name.clone(),
        rows,
    })
}

/// Format-specific fit: a lone non-family partition is fitted on its own
/// (exactly when binary); anything else shares one `λ` across members.
pub fn fit_per_format(format: &DatasetFormat, fit: &FitFormat, config: &FitConfig) -> Result<FitResult> {
    if !format.family && fit.rows.len() == 1 {
        match fit_lambda_per_partition(&fit.rows[0], config) {
            Err(Error::NoExactFit { .. }) => fit_lambda_single(std::slice::from_ref(fit), config),
            other => other,
        }
    } else {
        fit_family_common_lambda(&fit.rows, config)
    }
}

fn is_binary_family(format: &DatasetFormat, n: usize) -> bool {
    if format.members.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for m in &format.members {
        let Some(state) = singleton_of(m) else {
            return false;
        };
        if std::mem::replace(&mut seen[state], true) {
            return false;
        }
    }
    true
}

fn singleton_of(m: &super::dataset::DatasetMember) -> Option<usize> {
    let bins = m.partition.bins();
    if bins.len() != 2 {
        return None;
    }
    bins.iter().find(|b| b.len() == 1).map(|b| b.states()[0])
}

/// The format holding one singleton-vs-rest partition per state: the one
/// named `name`, or the first such format when `name` is `None`.
pub fn find_binary_family<'a>(dataset: &'a BeliefDataset, name: Option<&str>) -> Result<Option<&'a DatasetFormat>> {
    let n = dataset.space().len();
    match name {
        Some(name) => {
            let f = dataset
                .formats()
                .iter()
                .find(|f| f.name == name)
                .ok_or_else(|| Error::Config(format!("no format named {name:?}")))?;
            if !is_binary_family(f, n) {
                return Err(Error::Config(format!(
                    "format {name:?} is not one singleton-vs-rest partition per state"
                )));
            }
            Ok(Some(f))
        }
        None => Ok(dataset.formats().iter().find(|f| is_binary_family(f, n))),
    }
}

/// Singleton beliefs `μ(ω)` of a binary family, clipped to
/// `[EMPIRICAL_CLIP, 1 − EMPIRICAL_CLIP]`, with the number of clipped entries.
pub fn binary_family_reports(dataset: &BeliefDataset, family: &DatasetFormat) -> Result<(BinaryReportSet, usize)> {
    let space = dataset.space();
    if !is_binary_family(family, space.len()) {
        return Err(Error::Config(format!(
            "format {:?} is not one singleton-vs-rest partition per state",
            family.name
        )));
    }
    let mut mu = vec![0.0; space.len()];
    let mut clipped = 0;
    for m in &family.members {
        let state = singleton_of(m).expect("checked binary family");
        let bin = m.partition.position(&Event::singleton(state)).expect("bin present");
        let raw = m.empirical[bin];
        let x = raw.clamp(EMPIRICAL_CLIP, 1.0 - EMPIRICAL_CLIP);
        clipped += usize::from(x != raw);
        mu[state] = x;
    }
    Ok((BinaryReportSet::new(space, mu)?, clipped))
}

fn recover(dataset: &BeliefDataset, family: &DatasetFormat, config: &RecoveryConfig) -> Result<(RecoverySummary, Prior)> {
    let (reports, clipped) = binary_family_reports(dataset, family)?;
    let result = recover_from_binary(&reports, config)?;
    Ok((
        RecoverySummary {
            format: family.name.clone(),
            lambda: result.lambda,
            prior: result.prior.probs().to_vec(),
            sum_residual: result.sum_residual,
            roots_found: result.roots_found,
            clipped,
        },
        result.prior,
    ))
}

fn model(base: &[f64], lambda: f64) -> Vec<f64> {
    report_from_base(base, Lambda::new(lambda).expect("finite λ")).expect("validated base")
}

/// Runs the single-`λ` fit, format-specific fits, prior recovery and the
/// recovered-prior rerun, and assembles figure data.
pub fn replicate(dataset: &BeliefDataset, config: &ReplicationConfig) -> Result<ReplicationReport> {
    let mut warnings: Vec<String> = dataset.warnings().to_vec();
    let space = dataset.space();

    let family = match config.mode {
        RecoveryMode::Off => None,
        _ => find_binary_family(dataset, config.binary_family.as_deref())?,
    };
    let recovered = match (config.mode, family) {
        (RecoveryMode::Required, None) => {
            return Err(Error::Config(
                "prior recovery requested but the dataset has no singleton-vs-rest family".into(),
            ))
        }
        (RecoveryMode::Required, Some(f)) => Some(recover(dataset, f, &config.recovery)?),
        (RecoveryMode::Auto, Some(f)) => match recover(dataset, f, &config.recovery) {
            Ok(r) => Some(r),
            Err(e) => {
                warnings.push(format!("prior recovery skipped: {e}"));
                None
            }
        },
        (RecoveryMode::Auto, None) => {
            warnings.push("prior recovery skipped: no singleton-vs-rest family".into());
            None
        }
        (RecoveryMode::Off, _) => None,
    };

    let (benchmark_kind, benchmark) = match (dataset.true_prior(), &recovered) {
        (Some(p), _) => (Benchmark::True, p.clone()),
        (None, Some((_, p))) => (Benchmark::Recovered, p.clone()),
        (None, None) => {
            return Err(Error::Config(
                "replication needs a true prior or a recoverable binary family".into(),
            ))
        }
    };

    let formats: Vec<FitFormat> = dataset
        .formats()
        .iter()
        .map(|f| fit_format(f, &benchmark))
        .collect::<Result<_>>()?;
    let agg = config.fit.aggregation;
    let single_fit = fit_lambda_single(&formats, &config.fit)?;
    let lambda = single_fit.lambda;
    let table2 = formats
        .iter()
        .map(|f| Table2Row {
            format: f.name.clone(),
            rmse_fitted: f.rmse(lambda, agg),
            rmse_zero: f.rmse(0.0, agg),
            rmse_one: f.rmse(1.0, agg),
        })
        .collect::<Vec<_>>();

    let per_format = dataset
        .formats()
        .iter()
        .zip(&formats)
        .map(|(d, f)| fit_per_format(d, f, &config.fit))
        .collect::<Result<Vec<_>>>()?;
    let table3 = per_format
        .iter()
        .zip(&table2)
        .map(|(fit, t2)| Table3Row {
            format: t2.format.clone(),
            lambda: fit.lambda,
            rmse_partition_dependent: fit.rmse,
            rmse_single: t2.rmse_fitted,
            method: fit.method,
        })
        .collect::<Vec<_>>();

    let rerun = match &recovered {
        Some((_, prior)) => {
            let formats_rec: Vec<FitFormat> = dataset
                .formats()
                .iter()
                .map(|f| fit_format(f, prior))
                .collect::<Result<_>>()?;
            let fits = dataset
                .formats()
                .iter()
                .zip(&formats_rec)
                .map(|(d, f)| fit_per_format(d, f, &config.fit))
                .collect::<Result<Vec<_>>>()?;
            Some((formats_rec, fits))
        }
        None => None,
    };
    let table4 = match (&rerun, benchmark_kind) {
        (Some((_, fits)), Benchmark::True) => table3
            .iter()
            .zip(fits)
            .map(|(t3, r)| Table4Row {
                format: t3.format.clone(),
                lambda_true: t3.lambda,
                rmse_true: t3.rmse_partition_dependent,
                lambda_recovered: r.lambda,
                rmse_recovered: r.rmse,
            })
            .collect(),
        _ => Vec::new(),
    };

    let mut figure_data = Vec::with_capacity(formats.len());
    for (fi, (d, f)) in dataset.formats().iter().zip(&formats).enumerate() {
        let mut rows = Vec::new();
        for (mi, (member, row)) in d.members.iter().zip(&f.rows).enumerate() {
            let single = model(&row.base, lambda);
            let dependent = model(&row.base, per_format[fi].lambda);
            let truth = dataset
                .true_prior()
                .map(|p| induced_prior(p, &member.partition))
                .transpose()?;
            let (rec_base, rec_model) = match &rerun {
                Some((formats_rec, fits)) => {
                    let base = &formats_rec[fi].rows[mi].base;
                    (Some(base.clone()), Some(model(base, fits[fi].lambda)))
                }
                None => (None, None),
            };
            for (bi, bin) in member.partition.bins().iter().enumerate() {
                rows.push(FigureRow {
                    partition: member.label.clone(),
                    bin: space.describe(bin),
                    true_prob: truth.as_ref().map(|t| t[bi]),
                    empirical: row.empirical[bi],
                    model: single[bi],
                    model_partition_dependent: dependent[bi],
                    recovered: rec_base.as_ref().map(|b| b[bi]),
                    model_recovered: rec_model.as_ref().map(|m| m[bi]),
                });
            }
        }
        figure_data.push(FigureSeries {
            format: d.name.clone(),
            rows,
        });
    }

    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(ReplicationReport {
        seed: config.seed,
        states: space.labels().to_vec(),
        benchmark: benchmark_kind,
        single_fit,
        table2,
        table3,
        recovery: recovered.map(|(s, _)| s),
        table4,
        figure_data,
        warnings,
    })
}
