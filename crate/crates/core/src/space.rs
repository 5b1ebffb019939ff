//! Finite state spaces, events, partitions and full-support priors.
//!
//! States are identified by opaque string labels. Internally an event is the
//! sorted set of state indices, which gives every event a single canonical form
//! usable as a map key. Bins can be written with a small grammar shared by the
//! dataset files and the command line:
//!
//! ```text
//! 0-4|5|6-10      three bins, inclusive integer ranges
//! 5|~5            a singleton and its complement
//! a,b|c           plain labels separated by commas
//! ```

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Tolerance within which input probability vectors are accepted and renormalized.
pub const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct StateSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl PartialEq for StateSpace {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

impl Eq for StateSpace {}

impl StateSpace {
    /// Builds a space from distinct labels; at least two states are required.
    pub fn new<I, S>(labels: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(Error::structural(format!(
                "a state space needs at least 2 states, got {}",
                labels.len()
            )));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::structural("empty state label"));
            }
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::structural(format!("duplicate state label {label:?}")));
            }
        }
        Ok(Arc::new(StateSpace { labels, index }))
    }

    /// States labelled `0, 1, …, n-1`.
    pub fn range(n: usize) -> Result<Arc<Self>> {
        Self::new((0..n).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, state: usize) -> &str {
        &self.labels[state]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn full_event(&self) -> Event {
        Event::from_sorted((0..self.len()).collect())
    }

    fn integer_labels(&self) -> bool {
        self.labels.iter().all(|l| l.parse::<i64>().is_ok())
    }

    /// Parses one bin expression such as `0-3`, `5`, `~5` or `a,b`.
    pub fn parse_event(&self, expr: &str) -> Result<Event> {
        let expr = expr.trim();
        let (complement, body) = match expr.strip_prefix('~') {
            Some(rest) => (true, rest.trim()),
            None => (false, expr),
        };
        if body.is_empty() {
            return Err(Error::parse(format!("bin {expr:?}"), "empty bin expression"));
        }
        let mut states = Vec::new();
        for token in body.split(',') {
            let token = token.trim();
            if let Some(i) = self.index_of(token) {
                states.push(i);
                continue;
            }
            let range = token.split_once('-').and_then(|(lo, hi)| {
                Some((lo.trim().parse::<i64>().ok()?, hi.trim().parse::<i64>().ok()?))
            });
            match range {
                Some((lo, hi)) if lo <= hi => {
                    for v in lo..=hi {
                        let i = self.index_of(&v.to_string()).ok_or_else(|| {
                            Error::parse(format!("bin {expr:?}"), format!("unknown state {v}"))
                        })?;
                        states.push(i);
                    }
                }
                _ => {
                    return Err(Error::parse(
                        format!("bin {expr:?}"),
                        format!("unknown state or range {token:?}"),
                    ))
                }
            }
        }
        let event = Event::new(states);
        let event = if complement {
            event.complement(self.len())
        } else {
            event
        };
        if event.is_empty() {
            return Err(Error::parse(format!("bin {expr:?}"), "bin is empty"));
        }
        Ok(event)
    }

    /// Compact label for an event, the inverse of [`StateSpace::parse_event`].
    pub fn describe(&self, event: &Event) -> String {
        let listed = if self.integer_labels() {
            let mut values: Vec<i64> = event
                .states()
                .iter()
                .map(|&s| self.labels[s].parse().unwrap())
                .collect();
            values.sort_unstable();
            let mut runs: Vec<String> = Vec::new();
            let mut i = 0;
            while i < values.len() {
                let mut j = i;
                while j + 1 < values.len() && values[j + 1] == values[j] + 1 {
                    j += 1;
                }
                match j - i {
                    0 => runs.push(values[i].to_string()),
                    1 => {
                        runs.push(values[i].to_string());
                        runs.push(values[j].to_string());
                    }
                    _ => runs.push(format!("{}-{}", values[i], values[j])),
                }
                i = j + 1;
            }
            runs.join(",")
        } else {
            event
                .states()
                .iter()
                .map(|&s| self.labels[s].as_str())
                .collect::<Vec<_>>()
                .join(",")
        };
        let rest = event.complement(self.len());
        if rest.len() == 1 && event.len() > 1 {
            let short = format!("~{}", self.labels[rest.states()[0]]);
            if short.len() < listed.len() {
                return short;
            }
        }
        listed
    }
}

/// A set of states, stored as sorted distinct indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event(Vec<usize>);

impl Event {
    pub fn new(mut states: Vec<usize>) -> Self {
        states.sort_unstable();
        states.dedup();
        Event(states)
    }

    fn from_sorted(states: Vec<usize>) -> Self {
        Event(states)
    }

    pub fn singleton(state: usize) -> Self {
        Event(vec![state])
    }

    /// Event whose members are the set bits of `mask`.
    pub fn from_mask(mask: u64) -> Self {
        Event((0..64).filter(|b| mask >> b & 1 == 1).collect())
    }

    pub fn states(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, state: usize) -> bool {
        self.0.binary_search(&state).is_ok()
    }

    pub fn is_disjoint(&self, other: &Event) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn is_subset(&self, other: &Event) -> bool {
        self.0.iter().all(|&s| other.contains(s))
    }

    pub fn union(&self, other: &Event) -> Event {
        let mut states = self.0.clone();
        states.extend_from_slice(&other.0);
        Event::new(states)
    }

    pub fn difference(&self, other: &Event) -> Event {
        Event(self.0.iter().copied().filter(|&s| !other.contains(s)).collect())
    }

    /// Complement within a space of `n` states.
    pub fn complement(&self, n: usize) -> Event {
        Event((0..n).filter(|&s| !self.contains(s)).collect())
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

/// Disjoint, exhaustive grouping of a state space into non-empty bins.
///
/// Bin order is kept as given (reports are indexed by it); equality ignores
/// bin order.
#[derive(Debug, Clone)]
pub struct Partition {
    space: Arc<StateSpace>,
    bins: Vec<Event>,
}

impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.key() == other.key()
    }
}

impl Eq for Partition {}

impl Partition {
    pub fn new(space: &Arc<StateSpace>, bins: Vec<Event>) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::structural("partition has no bins"));
        }
        let n = space.len();
        let mut seen = vec![false; n];
        for (b, bin) in bins.iter().enumerate() {
            if bin.is_empty() {
                return Err(Error::structural(format!("bin {b} is empty")));
            }
            for &s in bin.states() {
                if s >= n {
                    return Err(Error::structural(format!(
                        "bin {b} refers to state index {s} outside a space of {n} states"
                    )));
                }
                if seen[s] {
                    return Err(Error::structural(format!(
                        "state {:?} appears in more than one bin",
                        space.label(s)
                    )));
                }
                seen[s] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|&x| !x) {
            return Err(Error::structural(format!(
                "bins do not cover state {:?}",
                space.label(missing)
            )));
        }
        Ok(Partition {
            space: Arc::clone(space),
            bins,
        })
    }

    /// Parses `|`-separated bin expressions, e.g. `0-4|5|6-10`.
    pub fn parse(space: &Arc<StateSpace>, expr: &str) -> Result<Self> {
        let bins = expr
            .split('|')
            .map(|b| space.parse_event(b))
            .collect::<Result<Vec<_>>>()?;
        Partition::new(space, bins)
    }

    /// The binary partition `{E, E^c}`.
    pub fn binary(space: &Arc<StateSpace>, event: Event) -> Result<Self> {
        let rest = event.complement(space.len());
        Partition::new(space, vec![event, rest])
    }

    /// All singleton bins, in state order.
    pub fn finest(space: &Arc<StateSpace>) -> Self {
        let bins = (0..space.len()).map(Event::singleton).collect();
        Partition {
            space: Arc::clone(space),
            bins,
        }
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn bins(&self) -> &[Event] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn position(&self, event: &Event) -> Option<usize> {
        self.bins.iter().position(|b| b == event)
    }

    /// Bin-order independent identity.
    pub fn key(&self) -> Vec<Event> {
        let mut key = self.bins.clone();
        key.sort();
        key
    }

    pub fn describe(&self) -> String {
        self.bins
            .iter()
            .map(|b| self.space.describe(b))
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// Full-support probability distribution over the states of a space.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    space: Arc<StateSpace>,
    probs: Vec<f64>,
    renormalized_from: Option<f64>,
}

impl Prior {
    /// Validates positivity and normalization. Sums within [`SUM_TOLERANCE`]
    /// of one are renormalized and the original sum is kept.
    pub fn new(space: &Arc<StateSpace>, probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(space, probs, SUM_TOLERANCE)
    }

    pub fn with_tolerance(space: &Arc<StateSpace>, mut probs: Vec<f64>, tol: f64) -> Result<Self> {
        if probs.len() != space.len() {
            return Err(Error::structural(format!(
                "prior has {} entries for {} states",
                probs.len(),
                space.len()
            )));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p <= 0.0 {
                return Err(Error::domain(format!(
                    "prior probability of state {:?} is {p}; full support is required",
                    space.label(i)
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::domain(format!("prior sums to {sum}, not 1")));
        }
        let renormalized_from = if sum != 1.0 {
            probs.iter_mut().for_each(|p| *p /= sum);
            Some(sum)
        } else {
            None
        };
        Ok(Prior {
            space: Arc::clone(space),
            probs,
            renormalized_from,
        })
    }

    pub fn uniform(space: &Arc<StateSpace>) -> Self {
        let n = space.len();
        Prior {
            space: Arc::clone(space),
            probs: vec![1.0 / n as f64; n],
            renormalized_from: None,
        }
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, state: usize) -> f64 {
        self.probs[state]
    }

    /// The input sum, when the constructor had to renormalize.
    pub fn renormalized_from(&self) -> Option<f64> {
        self.renormalized_from
    }

    pub fn event_prob(&self, event: &Event) -> f64 {
        event.states().iter().map(|&s| self.probs[s]).sum()
    }
}

/// Distribution over the bins of `partition` induced by `prior`: entry `i`
/// is the prior mass of bin `i`.
pub fn induced_prior(prior: &Prior, partition: &Partition) -> Result<Vec<f64>> {
    if prior.space() != partition.space() {
        return Err(Error::structural(
            "prior and partition are defined over different state spaces",
        ));
    }
    Ok(partition.bins().iter().map(|b| prior.event_prob(b)).collect())
}
