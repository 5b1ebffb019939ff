//! Cyclical independence: around any chain of partitions `P_1 … P_n` and
//! events with `E_{i+1} ∈ P_i ∩ P_{i+1}` and `E_1 ∈ P_1 ∩ P_n`, the product of
//! belief ratios `μ_{P_i}(E_i) / μ_{P_i}(E_{i+1})` must equal one. Products are
//! accumulated as sums of log-ratios.

use std::collections::HashMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::BeliefCollection;
use crate::error::{Error, Result};
use crate::space::Event;

/// Collections with at most this many partitions are enumerated exhaustively.
pub const EXHAUSTIVE_MAX_PARTITIONS: usize = 12;
/// Number of sampled cycles for larger collections.
pub const RANDOM_CYCLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cycle {
    /// Record indices `P_1 … P_n`.
    pub records: Vec<usize>,
    #[serde(skip)]
    pub events: Vec<Event>,
    /// Event labels `E_1 … E_n`.
    pub event_labels: Vec<String>,
    pub log_product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleReport {
    pub passed: bool,
    pub cycles_checked: usize,
    pub exhaustive: bool,
    /// Cycle with the largest `|log product|` among those checked.
    pub worst: Option<Cycle>,
}

/// Interned view of a collection: event ids and log-beliefs per record.
struct Graph {
    events: Vec<Event>,
    /// per record: (event id, ln μ)
    bins: Vec<Vec<(usize, f64)>>,
    /// event id -> records containing it
    by_event: Vec<Vec<usize>>,
    /// (lower id, higher id) -> records containing both
    by_pair: HashMap<(usize, usize), Vec<usize>>,
}

impl Graph {
    fn new(collection: &BeliefCollection) -> Self {
        let mut ids: HashMap<Event, usize> = HashMap::new();
        let mut events = Vec::new();
        let mut bins = Vec::with_capacity(collection.len());
        for obs in collection.records() {
            let row = obs
                .partition
                .bins()
                .iter()
                .zip(&obs.probs)
                .map(|(e, &p)| {
                    let id = *ids.entry(e.clone()).or_insert_with(|| {
                        events.push(e.clone());
                        events.len() - 1
                    });
                    let lp = if p > 0.0 { p.ln() } else { f64::NAN };
                    (id, lp)
                })
                .collect::<Vec<_>>();
            bins.push(row);
        }
        let mut by_event = vec![Vec::new(); events.len()];
        let mut by_pair: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (r, row) in bins.iter().enumerate() {
            for (i, &(a, _)) in row.iter().enumerate() {
                by_event[a].push(r);
                for &(b, _) in &row[i + 1..] {
                    by_pair.entry((a.min(b), a.max(b))).or_default().push(r);
                }
            }
        }
        Graph {
            events,
            bins,
            by_event,
            by_pair,
        }
    }

    fn log_belief(&self, record: usize, event: usize) -> f64 {
        self.bins[record]
            .iter()
            .find(|(e, _)| *e == event)
            .map(|&(_, lp)| lp)
            .expect("event belongs to record")
    }

    fn shared(&self, r: usize, s: usize) -> Vec<usize> {
        self.bins[r]
            .iter()
            .filter(|(e, _)| self.bins[s].iter().any(|(f, _)| f == e))
            .map(|&(e, _)| e)
            .collect()
    }

    /// Whether some record other than `prev` and `first` holds both events.
    fn closes(&self, a: usize, b: usize, prev: usize, first: usize) -> bool {
        a != b
            && self
                .by_pair
                .get(&(a.min(b), a.max(b)))
                .is_some_and(|v| v.iter().any(|&r| r != prev && r != first))
    }

    /// Σ ln μ_{P_i}(E_i) − ln μ_{P_i}(E_{i+1}), indices cyclic.
    fn log_product(&self, records: &[usize], events: &[usize]) -> f64 {
        let n = records.len();
        let total: f64 = (0..n)
            .map(|i| self.log_belief(records[i], events[i]) - self.log_belief(records[i], events[(i + 1) % n]))
            .sum();
        if total.is_nan() {
            f64::INFINITY
        } else {
            total
        }
    }
}

struct Tracker<'g> {
    graph: &'g Graph,
    checked: usize,
    worst: Option<(Vec<usize>, Vec<usize>, f64)>,
}

impl Tracker<'_> {
    fn record(&mut self, records: &[usize], events: &[usize]) {
        let lp = self.graph.log_product(records, events);
        self.checked += 1;
        let worse = match &self.worst {
            None => true,
            Some((_, _, w)) => lp.abs() > w.abs(),
        };
        if worse {
            self.worst = Some((records.to_vec(), events.to_vec(), lp));
        }
    }
}

/// Checks cycles of length `2..=max_cycle_len`. Small collections are
/// enumerated exhaustively; larger ones are sampled with `seed`.
pub fn check_cyclical_independence(
    collection: &BeliefCollection,
    max_cycle_len: usize,
    tol: f64,
    seed: u64,
) -> Result<CycleReport> {
    if max_cycle_len < 2 {
        return Err(Error::domain(format!(
            "max_cycle_len must be at least 2, got {max_cycle_len}"
        )));
    }
    let graph = Graph::new(collection);
    let mut tracker = Tracker {
        graph: &graph,
        checked: 0,
        worst: None,
    };
    let exhaustive = collection.len() <= EXHAUSTIVE_MAX_PARTITIONS;
    if exhaustive {
        enumerate_cycles(&graph, max_cycle_len, &mut tracker);
    } else {
        sample_cycles(&graph, max_cycle_len, seed, &mut tracker);
    }
    let space = collection.space();
    let worst = tracker.worst.map(|(records, events, log_product)| {
        let events: Vec<Event> = events.iter().map(|&e| graph.events[e].clone()).collect();
        Cycle {
            records,
            event_labels: events.iter().map(|e| space.describe(e)).collect(),
            events,
            log_product,
        }
    });
    let passed = worst.as_ref().is_none_or(|c| c.log_product.abs() <= tol);
    Ok(CycleReport {
        passed,
        cycles_checked: tracker.checked,
        exhaustive,
        worst,
    })
}

fn enumerate_cycles(graph: &Graph, max_len: usize, tracker: &mut Tracker<'_>) {
    let n = graph.bins.len();
    let shared: Vec<Vec<Vec<usize>>> = (0..n)
        .map(|r| (0..n).map(|s| if r == s { Vec::new() } else { graph.shared(r, s) }).collect())
        .collect();
    for len in 2..=max_len {
        let mut records = Vec::with_capacity(len);
        extend_records(graph, &shared, len, &mut records, tracker);
    }
}

fn extend_records(
    graph: &Graph,
    shared: &[Vec<Vec<usize>>],
    len: usize,
    records: &mut Vec<usize>,
    tracker: &mut Tracker<'_>,
) {
    let n = graph.bins.len();
    if records.len() == len {
        let first = records[0];
        let last = records[len - 1];
        if first == last || shared[last][first].is_empty() {
            return;
        }
        // E_1 ∈ P_n ∩ P_1, E_{i+1} ∈ P_i ∩ P_{i+1}
        let choices: Vec<&Vec<usize>> = std::iter::once(&shared[last][first])
            .chain((0..len - 1).map(|i| &shared[records[i]][records[i + 1]]))
            .collect();
        let mut events = vec![0; len];
        choose_events(records, &choices, 0, &mut events, tracker);
        return;
    }
    for r in 0..n {
        if let Some(&prev) = records.last() {
            if prev == r || shared[prev][r].is_empty() {
                continue;
            }
        }
        records.push(r);
        extend_records(graph, shared, len, records, tracker);
        records.pop();
    }
}

fn choose_events(
    records: &[usize],
    choices: &[&Vec<usize>],
    depth: usize,
    events: &mut Vec<usize>,
    tracker: &mut Tracker<'_>,
) {
    if depth == choices.len() {
        tracker.record(records, events);
        return;
    }
    for &e in choices[depth] {
        events[depth] = e;
        choose_events(records, choices, depth + 1, events, tracker);
    }
}

fn sample_cycles(graph: &Graph, max_len: usize, seed: u64, tracker: &mut Tracker<'_>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<usize> = (0..graph.bins.len()).filter(|&r| graph.bins[r].len() >= 2).collect();
    if candidates.is_empty() {
        return;
    }
    let max_attempts = RANDOM_CYCLES * 50;
    let mut records = Vec::with_capacity(max_len);
    let mut events = Vec::with_capacity(max_len);
    for _ in 0..max_attempts {
        if tracker.checked >= RANDOM_CYCLES {
            break;
        }
        records.clear();
        events.clear();
        let len = rng.random_range(2..=max_len);
        let first = *candidates.choose(&mut rng).unwrap();
        let e1 = graph.bins[first].choose(&mut rng).unwrap().0;
        let seconds: Vec<usize> = graph.bins[first]
            .iter()
            .map(|b| b.0)
            .filter(|&e| e != e1 && (len > 2 || graph.closes(e, e1, first, first)))
            .collect();
        let Some(&e2) = seconds.choose(&mut rng) else {
            continue;
        };
        records.push(first);
        events.extend_from_slice(&[e1, e2]);
        let mut ok = true;
        while events.len() < len {
            let cur = *events.last().unwrap();
            let prev = *records.last().unwrap();
            let next_records: Vec<usize> = graph.by_event[cur].iter().copied().filter(|&r| r != prev).collect();
            let Some(&r) = next_records.choose(&mut rng) else {
                ok = false;
                break;
            };
            let closing = events.len() + 1 == len;
            let first_event = events[0];
            let others: Vec<usize> = graph.bins[r]
                .iter()
                .map(|b| b.0)
                .filter(|&e| e != cur)
                .filter(|&e| !closing || graph.closes(e, first_event, r, first))
                .collect();
            let Some(&e) = others.choose(&mut rng) else {
                ok = false;
                break;
            };
            records.push(r);
            events.push(e);
        }
        if !ok {
            continue;
        }
        let (a, b) = (events[0], *events.last().unwrap());
        if a == b {
            continue;
        }
        let prev = *records.last().unwrap();
        let closers: Vec<usize> = graph
            .by_pair
            .get(&(a.min(b), a.max(b)))
            .map(|v| v.iter().copied().filter(|&r| r != prev && r != records[0]).collect())
            .unwrap_or_default();
        let Some(&close) = closers.choose(&mut rng) else {
            continue;
        };
        records.push(close);
        tracker.record(&records, &events);
    }
}
