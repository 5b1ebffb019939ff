use std::sync::Arc;

use crate::error::{Error, Result};
use crate::space::{Event, Partition, Prior, StateSpace};

/// Largest `n` for which `C(n, k)` is computed exactly in `u128`.
const EXACT_BINOMIAL_MAX: u64 = 125;

fn binomial_coefficient(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    // each partial product C(n-k+i, i) is an integer
    (1..=k as u128).fold(1u128, |acc, i| acc * (n as u128 - k as u128 + i) / i)
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (1..=k).map(|i| ((n - k + i) as f64).ln() - (i as f64).ln()).sum()
}

/// Number of heads in `n` independent tosses with success probability `p`,
/// over states labelled `0..=n`.
pub fn binomial_prior(n: u64, p: f64) -> Result<Prior> {
    if n == 0 {
        return Err(Error::domain("binomial prior needs n ≥ 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "binomial prior needs p strictly inside (0, 1) for full support, got {p}"
        )));
    }
    let n_states = usize::try_from(n + 1).map_err(|_| Error::domain("n too large"))?;
    let space = StateSpace::range(n_states)?;
    let q = 1.0 - p;
    let probs = (0..=n)
        .map(|k| {
            let (a, b) = (k as i32, (n - k) as i32);
            if n <= EXACT_BINOMIAL_MAX {
                binomial_coefficient(n, k) as f64 * p.powi(a) * q.powi(b)
            } else {
                (ln_binomial(n, k) + k as f64 * p.ln() + (n - k) as f64 * q.ln()).exp()
            }
        })
        .collect();
    Prior::new(&space, probs)
}

/// A named group of partitions; a family shares one `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionFormat {
    pub name: String,
    pub family: bool,
    pub partitions: Vec<Partition>,
}

/// The four coin-toss response formats over `{0,…,10}` heads: all
/// singletons, a five-bin coarsening, a three-bin coarsening, and the family
/// of eleven singleton-vs-rest partitions.
pub fn standard_partitions() -> Vec<PartitionFormat> {
    let space = StateSpace::range(11).expect("valid space");
    standard_partitions_on(&space)
}

/// [`standard_partitions`] on an existing eleven-state space.
pub fn standard_partitions_on(space: &Arc<StateSpace>) -> Vec<PartitionFormat> {
    let p = |expr: &str| Partition::parse(space, expr).expect("valid partition");
    vec![
        PartitionFormat {
            name: "P1".into(),
            family: false,
            partitions: vec![Partition::finest(space)],
        },
        PartitionFormat {
            name: "P2".into(),
            family: false,
            partitions: vec![p("0-3|4|5|6|7-10")],
        },
        PartitionFormat {
            name: "P3".into(),
            family: false,
            partitions: vec![p("0-4|5|6-10")],
        },
        PartitionFormat {
            name: "P4".into(),
            family: true,
            partitions: (0..space.len())
                .map(|k| Partition::binary(space, Event::singleton(k)).expect("valid partition"))
                .collect(),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(binomial_prior(1, 0.5).unwrap().probs(), &[0.5, 0.5]);
        assert_eq!(binomial_prior(2, 0.5).unwrap().probs(), &[0.25, 0.5, 0.25]);
        assert!(binomial_prior(3, 0.0).is_err());
        assert!(binomial_prior(3, 1.0).is_err());
        assert!(binomial_prior(0, 0.5).is_err());
    }

    #[test]
    fn ten_fair_tosses_match_enumeration() {
        let prior = binomial_prior(10, 0.5).unwrap();
        let mut counts = [0u32; 11];
        for seq in 0u32..1024 {
            counts[seq.count_ones() as usize] += 1;
        }
        for (k, c) in counts.iter().enumerate() {
            assert_eq!(prior.prob(k), *c as f64 / 1024.0);
        }
        assert_eq!(prior.prob(5), 252.0 / 1024.0);
    }

    #[test]
    fn exact_and_log_paths_agree() {
        let exact = binomial_coefficient(EXACT_BINOMIAL_MAX, 60) as f64;
        let logged = ln_binomial(EXACT_BINOMIAL_MAX, 60).exp();
        assert!((exact - logged).abs() / exact < 1e-12);
        let big = binomial_prior(400, 0.3).unwrap();
        assert!((big.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn standard_formats() {
        let formats = standard_partitions();
        assert_eq!(formats.len(), 4);
        assert_eq!(formats[0].partitions[0].len(), 11);
        assert_eq!(formats[2].partitions[0].len(), 3);
        assert_eq!(formats[3].partitions.len(), 11);
        let p45 = &formats[3].partitions[5];
        assert_eq!(p45.bins()[p45.position(&Event::singleton(5)).unwrap() ^ 1].len(), 10);
        let space = formats[0].partitions[0].space().clone();
        assert!(formats
            .iter()
            .flat_map(|f| &f.partitions)
            .all(|p| p.space() == &space));
    }
}
