//! Prior specifications and the JSON documents exchanged between commands.

use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use anyhow::Result;
use erbr_core::empirics::binomial_prior;
use erbr_core::identification::{BeliefCollection, Observation};
use erbr_core::recovery::BinaryReportSet;
use erbr_core::{Error, Partition, Prior, StateSpace};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Reads a file, or standard input for `-`.
pub fn read_input(path: &Path) -> Result<String> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
    }
    Ok(text)
}

fn parse_json(text: &str, what: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| {
        Error::Parse {
            location: format!("{what}, line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        }
        .into()
    })
}

fn spec_error(spec: &str, message: impl Into<String>) -> anyhow::Error {
    Error::Parse {
        location: format!("prior spec {spec:?}"),
        message: message.into(),
    }
    .into()
}

fn number<T: std::str::FromStr>(spec: &str, field: &str, text: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| spec_error(spec, format!("{field} {text:?} is not a number")))
}

/// Parses `binomial:N:P`, `uniform:N`, `explicit:P0,P1,…` or `file:PATH`
/// (`file:-` for standard input).
pub fn parse_prior(spec: &str) -> Result<Prior> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "binomial" => {
            let (n, p) = rest
                .split_once(':')
                .ok_or_else(|| spec_error(spec, "expected binomial:N:P"))?;
            Ok(binomial_prior(number(spec, "N", n)?, number(spec, "P", p)?)?)
        }
        "uniform" => {
            let n: usize = number(spec, "N", rest)?;
            Ok(Prior::uniform(&StateSpace::range(n)?))
        }
        "explicit" => {
            let probs = rest
                .split(',')
                .map(|p| number(spec, "probability", p))
                .collect::<Result<Vec<f64>>>()?;
            Ok(Prior::new(&StateSpace::range(probs.len())?, probs)?)
        }
        "file" if !rest.is_empty() => prior_from_json(&read_input(Path::new(rest))?, rest),
        _ => Err(spec_error(spec, "expected binomial:N:P, uniform:N, explicit:P0,P1,… or file:PATH")),
    }
}

fn label(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(Error::Parse {
            location: "states".into(),
            message: format!("state label {other} is neither a string nor a number"),
        }
        .into()),
    }
}

fn states_of(doc: &Value, count: usize) -> Result<Arc<StateSpace>> {
    match doc.get("states").and_then(Value::as_array) {
        Some(labels) => Ok(StateSpace::new(labels.iter().map(label).collect::<Result<Vec<_>>>()?)?),
        None => Ok(StateSpace::range(count)?),
    }
}

fn floats(v: &Value, location: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parse {
        location: location.into(),
        message: "expected an array of numbers".into(),
    };
    v.as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|x| x.as_f64().ok_or_else(bad))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(Into::into)
}

/// A prior from JSON: a bare array, or an object with a `prior` or `probs`
/// array and optional `states` labels. `identify` output qualifies.
pub fn prior_from_json(text: &str, source: &str) -> Result<Prior> {
    let doc = parse_json(text, source)?;
    let probs = match &doc {
        Value::Array(_) => floats(&doc, source)?,
        Value::Object(map) => match map.get("prior").or_else(|| map.get("probs")) {
            Some(v) if v.is_array() => floats(v, &format!("{source}: prior"))?,
            _ => {
                return Err(Error::Parse {
                    location: source.into(),
                    message: "no `prior` or `probs` array (an identification that did not recover a prior?)".into(),
                }
                .into())
            }
        },
        _ => {
            return Err(Error::Parse {
                location: source.into(),
                message: "expected a JSON array or object".into(),
            }
            .into())
        }
    };
    let space = states_of(&doc, probs.len())?;
    Ok(Prior::new(&space, probs)?)
}

/// One record of a collection document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordDoc {
    pub partition: String,
    pub probs: Vec<f64>,
}

pub fn labels(space: &StateSpace) -> Vec<Value> {
    space
        .labels()
        .iter()
        .map(|l| l.parse::<i64>().map(Value::from).unwrap_or_else(|_| Value::from(l.clone())))
        .collect()
}

pub fn collection_records(collection: &BeliefCollection) -> Vec<RecordDoc> {
    collection
        .records()
        .iter()
        .map(|r| RecordDoc {
            partition: r.partition.describe(),
            probs: r.probs.clone(),
        })
        .collect()
}

/// A collection document: `states` and `records`; other keys are ignored.
pub fn collection_from_json(text: &str, source: &str) -> Result<BeliefCollection> {
    let doc = parse_json(text, source)?;
    let records = doc.get("records").ok_or_else(|| Error::Parse {
        location: source.into(),
        message: "missing `records`".into(),
    })?;
    let records: Vec<RecordDoc> = serde_json::from_value(records.clone()).map_err(|e| Error::Parse {
        location: format!("{source}: records"),
        message: e.to_string(),
    })?;
    let space = match doc.get("states") {
        Some(_) => states_of(&doc, 0)?,
        None => {
            return Err(Error::Parse {
                location: source.into(),
                message: "missing `states`".into(),
            }
            .into())
        }
    };
    let observations = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let partition = Partition::parse(&space, &r.partition).map_err(|e| Error::Parse {
                location: format!("{source}: records[{i}].partition"),
                message: e.to_string(),
            })?;
            Ok(Observation {
                partition,
                probs: r.probs.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BeliefCollection::new(&space, observations)?)
}

/// Binary reports `{"states": […], "mu": […]}`, if the document has `mu`.
pub fn binary_from_json(doc: &Value, source: &str) -> Result<Option<BinaryReportSet>> {
    let Some(mu) = doc.get("mu") else {
        return Ok(None);
    };
    let mu = floats(mu, &format!("{source}: mu"))?;
    let space = states_of(doc, mu.len())?;
    Ok(Some(BinaryReportSet::new(&space, mu)?))
}

pub fn json_document(text: &str, source: &str) -> Result<Value> {
    parse_json(text, source)
}
