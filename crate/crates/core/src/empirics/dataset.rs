use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::coin::binomial_prior;
use crate::error::{Error, Result};
use crate::space::{Event, Partition, Prior, StateSpace};

/// Rows whose empirical means sum to within this of one are renormalized;
/// rows further off are rejected.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Rounding-level deviations are renormalized without a warning.
const SILENT_RENORMALIZATION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMember {
    pub label: String,
    pub partition: Partition,
    pub empirical: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFormat {
    pub name: String,
    /// Members share one `λ`.
    pub family: bool,
    pub members: Vec<DatasetMember>,
}

/// Empirical bin means for a set of response formats over one state space.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefDataset {
    space: Arc<StateSpace>,
    formats: Vec<DatasetFormat>,
    true_prior: Option<Prior>,
    metadata: serde_json::Value,
    warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Json,
    Csv,
}

impl FileKind {
    pub fn from_path(path: &Path) -> Option<FileKind> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "json" => Some(FileKind::Json),
            "csv" => Some(FileKind::Csv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum StateLabel {
    Int(i64),
    Str(String),
}

impl StateLabel {
    fn text(&self) -> String {
        match self {
            StateLabel::Int(i) => i.to_string(),
            StateLabel::Str(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PriorSpec {
    Binomial { n: u64, p: f64 },
    Explicit { probs: Vec<f64> },
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum BinSpec {
    States(Vec<StateLabel>),
    Expr(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MemberFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    bins: Vec<BinSpec>,
    empirical: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormatFile {
    name: String,
    #[serde(default)]
    family: bool,
    members: Vec<MemberFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    states: Vec<StateLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    true_prior: Option<PriorSpec>,
    formats: Vec<FormatFile>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    metadata: serde_json::Value,
}

/// Checks a row of empirical means: entries in `[0, 1]`, sum within
/// [`ROW_SUM_TOLERANCE`] of one. Returns the renormalized row and a warning
/// when it was rescaled.
fn check_row(location: &str, row: &[f64]) -> Result<(Vec<f64>, Option<String>)> {
    for (i, &x) in row.iter().enumerate() {
        if !x.is_finite() || !(0.0..=1.0).contains(&x) {
            return Err(Error::parse(
                format!("{location}[{i}]"),
                format!("empirical mean {x} outside [0, 1]"),
            ));
        }
    }
    let sum: f64 = row.iter().sum();
    // a few ulps of slack so that a written sum of exactly 1 ± tolerance passes
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE + 8.0 * f64::EPSILON {
        return Err(Error::parse(
            location,
            format!("empirical means sum to {sum}, more than {ROW_SUM_TOLERANCE:e} from 1"),
        ));
    }
    if sum == 1.0 {
        return Ok((row.to_vec(), None));
    }
    let warning = ((sum - 1.0).abs() > SILENT_RENORMALIZATION)
        .then(|| format!("{location}: empirical means sum to {sum}; renormalized"));
    Ok((row.iter().map(|x| x / sum).collect(), warning))
}

impl BeliefDataset {
    /// Validates and assembles a dataset. Empirical rows are checked and
    /// renormalized by the same rule as the file loaders.
    pub fn new(
        space: &Arc<StateSpace>,
        formats: Vec<DatasetFormat>,
        true_prior: Option<Prior>,
        metadata: serde_json::Value,
    ) -> Result<Self> {
        let mut warnings = Vec::new();
        let mut formats = formats;
        if formats.is_empty() {
            return Err(Error::structural("dataset has no formats"));
        }
        for f in &mut formats {
            if f.members.is_empty() {
                return Err(Error::structural(format!("format {} has no members", f.name)));
            }
            for m in &mut f.members {
                if m.partition.space() != space {
                    return Err(Error::structural(format!(
                        "member {} of format {} uses a different state space",
                        m.label, f.name
                    )));
                }
                if m.empirical.len() != m.partition.len() {
                    return Err(Error::structural(format!(
                        "member {} of format {} has {} empirical means for {} bins",
                        m.label,
                        f.name,
                        m.empirical.len(),
                        m.partition.len()
                    )));
                }
                let (row, warning) = check_row(&format!("{}/{}", f.name, m.label), &m.empirical)?;
                m.empirical = row;
                if let Some(w) = warning {
                    log::warn!("{w}");
                    warnings.push(w);
                }
            }
        }
        if let Some(p) = &true_prior {
            if p.space() != space {
                return Err(Error::structural("true prior uses a different state space"));
            }
        }
        Ok(BeliefDataset {
            space: Arc::clone(space),
            formats,
            true_prior,
            metadata,
            warnings,
        })
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn formats(&self) -> &[DatasetFormat] {
        &self.formats
    }

    pub fn true_prior(&self) -> Option<&Prior> {
        self.true_prior.as_ref()
    }

    pub fn metadata(&self) -> &serde_json::Value {
        &self.metadata
    }

    /// Renormalization notices raised while loading.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn record_count(&self) -> usize {
        self.formats.iter().map(|f| f.members.len()).sum()
    }

    /// Replaces the true prior; it must live on the dataset's space.
    pub fn with_true_prior(mut self, prior: Prior) -> Result<Self> {
        if prior.space() != &self.space {
            return Err(Error::structural("true prior uses a different state space"));
        }
        self.true_prior = Some(prior);
        Ok(self)
    }

    /// JSON form accepted by [`load_dataset`].
    pub fn to_json(&self) -> serde_json::Value {
        let label = |i: usize| {
            let text = self.space.label(i);
            text.parse::<i64>().map(StateLabel::Int).unwrap_or_else(|_| StateLabel::Str(text.to_string()))
        };
        let file = DatasetFile {
            states: (0..self.space.len()).map(label).collect(),
            true_prior: self.true_prior.as_ref().map(|p| PriorSpec::Explicit {
                probs: p.probs().to_vec(),
            }),
            formats: self
                .formats
                .iter()
                .map(|f| FormatFile {
                    name: f.name.clone(),
                    family: f.family,
                    members: f
                        .members
                        .iter()
                        .map(|m| MemberFile {
                            label: Some(m.label.clone()),
                            bins: m
                                .partition
                                .bins()
                                .iter()
                                .map(|b| BinSpec::States(b.states().iter().map(|&s| label(s)).collect()))
                                .collect(),
                            empirical: m.empirical.clone(),
                        })
                        .collect(),
                })
                .collect(),
            metadata: self.metadata.clone(),
        };
        serde_json::to_value(file).expect("dataset serializes")
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::io(path, e))?;
    } else {
        File::open(path)
            .and_then(|mut f| f.read_to_string(&mut s))
            .map_err(|e| Error::io(path, e))?;
    }
    Ok(s)
}

/// Loads a dataset, choosing the parser from `kind` or the file extension.
pub fn load_dataset(path: &Path, kind: Option<FileKind>) -> Result<BeliefDataset> {
    let kind = kind.or_else(|| FileKind::from_path(path)).ok_or_else(|| {
        Error::Config(format!(
            "cannot tell the dataset format of {}; use a .json or .csv extension",
            path.display()
        ))
    })?;
    let text = read_to_string(path)?;
    match kind {
        FileKind::Json => parse_dataset_json(&text),
        FileKind::Csv => parse_dataset_csv(&text),
    }
}

fn prior_from_spec(space: &Arc<StateSpace>, spec: &PriorSpec) -> Result<Prior> {
    match spec {
        PriorSpec::Uniform => Ok(Prior::uniform(space)),
        PriorSpec::Explicit { probs } => {
            if probs.len() != space.len() {
                return Err(Error::parse(
                    "true_prior.probs",
                    format!("{} probabilities for {} states", probs.len(), space.len()),
                ));
            }
            Prior::with_tolerance(space, probs.clone(), ROW_SUM_TOLERANCE)
                .map_err(|e| Error::parse("true_prior.probs", e.to_string()))
        }
        PriorSpec::Binomial { n, p } => {
            let b = binomial_prior(*n, *p).map_err(|e| Error::parse("true_prior", e.to_string()))?;
            if b.space().labels() != space.labels() {
                return Err(Error::parse(
                    "true_prior",
                    format!("binomial prior needs states 0..={n} in order"),
                ));
            }
            Prior::new(space, b.probs().to_vec())
        }
    }
}

pub fn parse_dataset_json(text: &str) -> Result<BeliefDataset> {
    let file: DatasetFile = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string()))?;
    let space = StateSpace::new(file.states.iter().map(StateLabel::text))
        .map_err(|e| Error::parse("states", e.to_string()))?;
    let true_prior = file
        .true_prior
        .as_ref()
        .map(|spec| prior_from_spec(&space, spec))
        .transpose()?;
    let mut formats = Vec::with_capacity(file.formats.len());
    for (fi, f) in file.formats.iter().enumerate() {
        let mut members = Vec::with_capacity(f.members.len());
        for (mi, m) in f.members.iter().enumerate() {
            let loc = format!("formats[{fi}].members[{mi}]");
            let bins = m
                .bins
                .iter()
                .enumerate()
                .map(|(bi, b)| {
                    let bloc = format!("{loc}.bins[{bi}]");
                    match b {
                        BinSpec::Expr(e) => space.parse_event(e).map_err(|err| Error::parse(&bloc, err.to_string())),
                        BinSpec::States(labels) => labels
                            .iter()
                            .map(|l| {
                                space
                                    .index_of(&l.text())
                                    .ok_or_else(|| Error::parse(&bloc, format!("unknown state {}", l.text())))
                            })
                            .collect::<Result<Vec<usize>>>()
                            .map(Event::new),
                    }
                })
                .collect::<Result<Vec<Event>>>()?;
            let partition = Partition::new(&space, bins)?;
            if m.empirical.len() != partition.len() {
                return Err(Error::parse(
                    format!("{loc}.empirical"),
                    format!("{} values for {} bins", m.empirical.len(), partition.len()),
                ));
            }
            check_row(&format!("{loc}.empirical"), &m.empirical)?;
            let label = m.label.clone().unwrap_or_else(|| member_label(&f.name, mi, f.members.len()));
            members.push(DatasetMember {
                label,
                partition,
                empirical: m.empirical.clone(),
            });
        }
        formats.push(DatasetFormat {
            name: f.name.clone(),
            family: f.family,
            members,
        });
    }
    BeliefDataset::new(&space, formats, true_prior, file.metadata)
}

fn member_label(format: &str, index: usize, count: usize) -> String {
    if count == 1 {
        format.to_string()
    } else {
        format!("{format}[{index}]")
    }
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    format: String,
    member: String,
    bin: usize,
    states: String,
    empirical: f64,
}

/// Integer labels sort numerically; otherwise labels keep first appearance.
fn infer_states(rows: &[(usize, CsvRow)]) -> Vec<String> {
    let mut seen: Vec<String> = Vec::new();
    let mut push = |s: String| {
        if !seen.contains(&s) {
            seen.push(s);
        }
    };
    for (_, r) in rows {
        let body = r.states.trim();
        if body.starts_with('~') {
            continue;
        }
        for token in body.split(',').map(str::trim) {
            let range = token
                .split_once('-')
                .and_then(|(a, b)| Some((a.trim().parse::<i64>().ok()?, b.trim().parse::<i64>().ok()?)));
            match range {
                Some((a, b)) => (a..=b).for_each(|v| push(v.to_string())),
                None => push(token.to_string()),
            }
        }
    }
    if seen.iter().all(|s| s.parse::<i64>().is_ok()) {
        seen.sort_by_key(|s| s.parse::<i64>().unwrap());
    }
    seen
}

/// Parses the long CSV form `format,member,bin,states,empirical`. The state
/// space is inferred from explicitly listed states; formats with more than
/// one member are families. No true prior is carried.
/// (record index, bin index, event, empirical mean) for one CSV row.
type Cell = (usize, usize, Event, f64);

pub fn parse_dataset_csv(text: &str) -> Result<BeliefDataset> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse("line 1", e.to_string()))?
        .clone();
    let mut rows = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::parse(format!("line {line}"), e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0) as usize;
        let row: CsvRow = record
            .deserialize(Some(&headers))
            .map_err(|e| Error::parse(format!("line {line}"), e.to_string()))?;
        rows.push((line, row));
    }
    if rows.is_empty() {
        return Err(Error::parse("line 1", "no data rows"));
    }
    let space = StateSpace::new(infer_states(&rows)).map_err(|e| Error::parse("states column", e.to_string()))?;

    // (format, member) in order of first appearance, bins by index
    let mut format_order: Vec<String> = Vec::new();
    let mut member_order: HashMap<String, Vec<String>> = HashMap::new();
    let mut cells: HashMap<(String, String), Vec<Cell>> = HashMap::new();
    for (line, r) in rows {
        if !(0.0..=1.0).contains(&r.empirical) || !r.empirical.is_finite() {
            return Err(Error::parse(
                format!("line {line}, field empirical"),
                format!("empirical mean {} outside [0, 1]", r.empirical),
            ));
        }
        let event = space
            .parse_event(&r.states)
            .map_err(|e| Error::parse(format!("line {line}, field states"), e.to_string()))?;
        if !format_order.contains(&r.format) {
            format_order.push(r.format.clone());
        }
        let members = member_order.entry(r.format.clone()).or_default();
        if !members.contains(&r.member) {
            members.push(r.member.clone());
        }
        let entry = cells.entry((r.format.clone(), r.member.clone())).or_default();
        if entry.iter().any(|(_, b, _, _)| *b == r.bin) {
            return Err(Error::parse(
                format!("line {line}, field bin"),
                format!("bin {} repeated for {}/{}", r.bin, r.format, r.member),
            ));
        }
        entry.push((line, r.bin, event, r.empirical));
    }

    let mut formats = Vec::new();
    for name in format_order {
        let member_names = &member_order[&name];
        let mut members = Vec::new();
        for m in member_names {
            let mut bins = cells.remove(&(name.clone(), m.clone())).expect("recorded");
            bins.sort_by_key(|(_, b, _, _)| *b);
            let first_line = bins.iter().map(|(l, ..)| *l).min().unwrap_or(0);
            let partition = Partition::new(&space, bins.iter().map(|(_, _, e, _)| e.clone()).collect())
                .map_err(|e| match e {
                    Error::Structural(msg) => Error::structural(format!("{name}/{m} (from line {first_line}): {msg}")),
                    other => other,
                })?;
            let empirical: Vec<f64> = bins.iter().map(|(.., x)| *x).collect();
            check_row(&format!("{name}/{m} (from line {first_line})"), &empirical)?;
            let label = if member_names.len() == 1 {
                name.clone()
            } else {
                format!("{name}[{m}]")
            };
            members.push(DatasetMember {
                label,
                partition,
                empirical,
            });
        }
        formats.push(DatasetFormat {
            family: members.len() > 1,
            name,
            members,
        });
    }
    BeliefDataset::new(&space, formats, None, serde_json::Value::Null)
}
