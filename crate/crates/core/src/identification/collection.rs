use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::reporting::{erbr_report, Lambda};
use crate::space::{Event, Partition, Prior, StateSpace};

/// One observed report. The probabilities are kept as observed so that
/// regularity can be tested rather than assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub partition: Partition,
    pub probs: Vec<f64>,
}

impl Observation {
    pub fn prob_of(&self, event: &Event) -> Option<f64> {
        self.partition.position(event).map(|i| self.probs[i])
    }
}

/// Reported beliefs on a set of distinct partitions of one state space.
#[derive(Debug, Clone)]
pub struct BeliefCollection {
    space: Arc<StateSpace>,
    records: Vec<Observation>,
    index: HashMap<Vec<Event>, usize>,
}

impl BeliefCollection {
    pub fn new(space: &Arc<StateSpace>, records: Vec<Observation>) -> Result<Self> {
        let mut index = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if r.partition.space() != space {
                return Err(Error::structural(format!(
                    "record {i} is defined over a different state space"
                )));
            }
            if r.probs.len() != r.partition.len() {
                return Err(Error::structural(format!(
                    "record {i} ({}) has {} probabilities for {} bins",
                    r.partition.describe(),
                    r.probs.len(),
                    r.partition.len()
                )));
            }
            if index.insert(r.partition.key(), i).is_some() {
                return Err(Error::structural(format!(
                    "partition {} appears more than once",
                    r.partition.describe()
                )));
            }
        }
        Ok(BeliefCollection {
            space: Arc::clone(space),
            records,
            index,
        })
    }

    /// Reports of an ERBR agent with a single `λ` on each partition.
    pub fn generate(prior: &Prior, partitions: &[Partition], lambda: Lambda) -> Result<Self> {
        let records = partitions
            .iter()
            .map(|p| {
                Ok(Observation {
                    partition: p.clone(),
                    probs: erbr_report(prior, p, lambda)?.into_probs(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        BeliefCollection::new(prior.space(), records)
    }

    /// Reports `μ_P(E) = s(E) / Σ s` for an arbitrary positive support `s`.
    pub fn from_support<F>(space: &Arc<StateSpace>, partitions: &[Partition], support: F) -> Result<Self>
    where
        F: Fn(&Event) -> f64,
    {
        let records = partitions
            .iter()
            .map(|p| {
                let s: Vec<f64> = p.bins().iter().map(&support).collect();
                let total: f64 = s.iter().sum();
                Observation {
                    partition: p.clone(),
                    probs: s.into_iter().map(|x| x / total).collect(),
                }
            })
            .collect();
        BeliefCollection::new(space, records)
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn records(&self) -> &[Observation] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Looks up the record for the partition with these bins, in any order.
    pub fn find(&self, bins: &[Event]) -> Option<&Observation> {
        let mut key = bins.to_vec();
        key.sort();
        self.index.get(&key).map(|&i| &self.records[i])
    }

    /// Replaces the reported probabilities of one record.
    pub fn set_probs(&mut self, record: usize, probs: Vec<f64>) -> Result<()> {
        let obs = self
            .records
            .get_mut(record)
            .ok_or_else(|| Error::structural(format!("no record {record}")))?;
        if probs.len() != obs.partition.len() {
            return Err(Error::structural(format!(
                "{} probabilities for {} bins",
                probs.len(),
                obs.partition.len()
            )));
        }
        obs.probs = probs;
        Ok(())
    }
}
