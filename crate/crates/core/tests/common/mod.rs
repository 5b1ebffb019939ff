#![allow(dead_code)]

use std::sync::Arc;

use erbr_core::{Event, Partition, Prior, StateSpace};
use rand::Rng;

/// Full-support prior with weights drawn from `[0.05, 1]`.
pub fn random_prior<R: Rng>(rng: &mut R, n: usize) -> Prior {
    let space = StateSpace::range(n).unwrap();
    random_prior_on(rng, &space)
}

pub fn random_prior_on<R: Rng>(rng: &mut R, space: &Arc<StateSpace>) -> Prior {
    let w: Vec<f64> = (0..space.len()).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    Prior::new(space, w.iter().map(|x| x / total).collect()).unwrap()
}

/// Random partition with at least two bins.
pub fn random_partition<R: Rng>(rng: &mut R, space: &Arc<StateSpace>) -> Partition {
    let n = space.len();
    loop {
        let k = rng.random_range(2..=n);
        let mut bins = vec![Vec::new(); k];
        for s in 0..n {
            bins[rng.random_range(0..k)].push(s);
        }
        let bins: Vec<Event> = bins.into_iter().filter(|b| !b.is_empty()).map(Event::new).collect();
        if bins.len() >= 2 {
            return Partition::new(space, bins).unwrap();
        }
    }
}

/// Random point in the interior of the simplex.
pub fn random_simplex<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(1e-3..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}
