//! Constructive recovery of the support function.
//!
//! Fix an anchor state `ω*` with `s({ω*}) = 1`. For a proper event `A`:
//!
//! * `ω* ∉ A`: read `μ_P(A) / μ_P({ω*})` on `P = {A, A^c∖{ω*}, {ω*}}`;
//! * `ω* ∈ A`: pick `ω ∉ A`, and chain
//!   `μ_{P2}(A)/μ_{P2}({ω}) · μ_{P1}({ω})/μ_{P1}({ω*})` with
//!   `P1 = {{ω*}, {ω}, {ω*,ω}^c}` and `P2 = {A, A^c∖{ω}, {ω}}`.
//!
//! Empty bins are dropped, so the three-bin partitions degrade to binary ones
//! at the edges.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::BeliefCollection;
use crate::error::{Error, Result};
use crate::space::{Event, Partition, StateSpace};

/// Largest space for which all proper events are enumerated.
const MAX_ENUMERATED_STATES: usize = 20;

/// Positive support values on proper events, normalized at the anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportFunction {
    space: Arc<StateSpace>,
    anchor: usize,
    values: BTreeMap<Event, f64>,
}

impl SupportFunction {
    pub fn new(space: &Arc<StateSpace>, anchor: usize, mut values: BTreeMap<Event, f64>) -> Result<Self> {
        if anchor >= space.len() {
            return Err(Error::structural(format!("anchor index {anchor} out of range")));
        }
        for (e, &v) in &values {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!(
                    "support of {} is {v}; values must be positive",
                    space.describe(e)
                )));
            }
            if e.is_empty() || e.len() == space.len() || e.states().iter().any(|&s| s >= space.len()) {
                return Err(Error::structural(format!("{e} is not a proper event")));
            }
        }
        let anchor_event = Event::singleton(anchor);
        match values.get(&anchor_event) {
            Some(&v) if v != 1.0 => {
                return Err(Error::domain(format!("anchor support must be 1, got {v}")));
            }
            _ => {
                values.insert(anchor_event, 1.0);
            }
        }
        Ok(SupportFunction {
            space: Arc::clone(space),
            anchor,
            values,
        })
    }

    /// Tabulates `f` on every proper event and rescales so that the anchor
    /// singleton has support one.
    pub fn from_fn<F>(space: &Arc<StateSpace>, anchor: usize, f: F) -> Result<Self>
    where
        F: Fn(&Event) -> f64,
    {
        let scale = f(&Event::singleton(anchor));
        let values = proper_events(space.len())?
            .into_iter()
            .map(|e| {
                let v = if e == Event::singleton(anchor) { 1.0 } else { f(&e) / scale };
                (e, v)
            })
            .collect();
        SupportFunction::new(space, anchor, values)
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn get(&self, event: &Event) -> Option<f64> {
        self.values.get(event).copied()
    }

    pub fn values(&self) -> &BTreeMap<Event, f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn proper_events(n: usize) -> Result<Vec<Event>> {
    if n > MAX_ENUMERATED_STATES {
        return Err(Error::domain(format!(
            "enumerating all events supports at most {MAX_ENUMERATED_STATES} states, got {n}"
        )));
    }
    let full: u64 = (1u64 << n) - 1;
    Ok((1..full).map(Event::from_mask).collect())
}

/// Bins `{A, rest, {ω}}` where `rest = Ω ∖ (A ∪ {ω})`, dropping an empty rest.
fn three_way(space: &Arc<StateSpace>, a: &Event, omega: usize) -> Vec<Event> {
    let single = Event::singleton(omega);
    let rest = a.union(&single).complement(space.len());
    let mut bins = vec![a.clone(), single];
    if !rest.is_empty() {
        bins.push(rest);
    }
    bins
}

fn describe_bins(space: &StateSpace, bins: &[Event]) -> String {
    bins.iter().map(|b| space.describe(b)).collect::<Vec<_>>().join("|")
}

/// The partition set the construction needs, using the smallest auxiliary
/// state for events that contain the anchor.
pub fn construction_partitions(space: &Arc<StateSpace>, anchor: usize) -> Result<Vec<Partition>> {
    partitions_for(space, anchor, false)
}

/// Every partition any chain can use: the construction set plus the chain
/// for each admissible auxiliary state.
pub fn chain_partitions(space: &Arc<StateSpace>, anchor: usize) -> Result<Vec<Partition>> {
    partitions_for(space, anchor, true)
}

fn partitions_for(space: &Arc<StateSpace>, anchor: usize, all_chains: bool) -> Result<Vec<Partition>> {
    if anchor >= space.len() {
        return Err(Error::structural(format!("anchor index {anchor} out of range")));
    }
    let n = space.len();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |bins: Vec<Event>| -> Result<()> {
        let mut key = bins.clone();
        key.sort();
        if seen.insert(key) {
            out.push(Partition::new(space, bins)?);
        }
        Ok(())
    };
    for a in proper_events(n)? {
        if a == Event::singleton(anchor) {
            continue;
        }
        if !a.contains(anchor) {
            push(three_way(space, &a, anchor))?;
            continue;
        }
        for omega in (0..n).filter(|&w| !a.contains(w)) {
            push(three_way(space, &Event::singleton(anchor), omega))?;
            push(three_way(space, &a, omega))?;
            if !all_chains {
                break;
            }
        }
    }
    Ok(out)
}

fn log_ratio(
    collection: &BeliefCollection,
    bins: &[Event],
    num: &Event,
    den: &Event,
    target: &Event,
) -> Result<f64> {
    let space = collection.space();
    let obs = collection.find(bins).ok_or_else(|| Error::MissingPartition {
        needed: describe_bins(space, bins),
        event: space.describe(target),
    })?;
    let p = obs.prob_of(num).expect("bin present");
    let q = obs.prob_of(den).expect("bin present");
    if !(p > 0.0 && q > 0.0) {
        return Err(Error::domain(format!(
            "non-positive belief in partition {}",
            obs.partition.describe()
        )));
    }
    Ok(p.ln() - q.ln())
}

/// `ln s(A)` along every available chain, as `(auxiliary state, value)`.
/// Events not containing the anchor have a single chain, reported with the
/// anchor as its auxiliary state.
pub fn chain_values(collection: &BeliefCollection, anchor: usize, event: &Event) -> Result<Vec<(usize, f64)>> {
    let space = collection.space();
    let n = space.len();
    if event.is_empty() || event.len() >= n {
        return Err(Error::structural(format!("{event} is not a proper event")));
    }
    let star = Event::singleton(anchor);
    if *event == star {
        return Ok(vec![(anchor, 0.0)]);
    }
    if !event.contains(anchor) {
        let bins = three_way(space, event, anchor);
        return Ok(vec![(anchor, log_ratio(collection, &bins, event, &star, event)?)]);
    }
    let mut out = Vec::new();
    let mut first_missing = None;
    for omega in (0..n).filter(|&w| !event.contains(w)) {
        let w = Event::singleton(omega);
        let chain = log_ratio(collection, &three_way(space, event, omega), event, &w, event).and_then(|l2| {
            Ok(l2 + log_ratio(collection, &three_way(space, &star, omega), &w, &star, event)?)
        });
        match chain {
            Ok(v) => out.push((omega, v)),
            Err(e @ Error::MissingPartition { .. }) => {
                first_missing.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() {
        return Err(first_missing.expect("a chain was attempted"));
    }
    Ok(out)
}

/// Recovers `s` on every proper event. Alternative chains to the same event
/// must agree within `tol` in log space.
pub fn recover_support(collection: &BeliefCollection, anchor: usize, tol: f64) -> Result<SupportFunction> {
    let events = proper_events(collection.space().len())?;
    recover_support_on(collection, anchor, &events, tol)
}

/// Recovers `s` on the given events only.
pub fn recover_support_on(
    collection: &BeliefCollection,
    anchor: usize,
    events: &[Event],
    tol: f64,
) -> Result<SupportFunction> {
    let space = collection.space();
    if anchor >= space.len() {
        return Err(Error::structural(format!("anchor index {anchor} out of range")));
    }
    let mut values = BTreeMap::new();
    for event in events {
        let chains = chain_values(collection, anchor, event)?;
        let (lo, hi) = chains
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, v)| (lo.min(v), hi.max(v)));
        if hi - lo > tol {
            return Err(Error::Inconsistent {
                event: space.describe(event),
                spread: hi - lo,
            });
        }
        values.insert(event.clone(), chains[0].1.exp());
    }
    SupportFunction::new(space, anchor, values)
}
