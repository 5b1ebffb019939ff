//! Power additivity: find `α ≠ 0` with `s(A∪B)^α = s(A)^α + s(B)^α` and use it
//! to read off `λ = 1/α` and the prior `π(ω) ∝ s({ω})^α`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::SupportFunction;
use crate::error::{Error, Result};
use crate::space::{Event, Prior};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaSolution {
    Alpha { alpha: f64 },
    /// `min(a,b) ≤ c ≤ max(a,b)`: no exponent can make `c^α = a^α + b^α`.
    NotPowerAdditive,
}

impl AlphaSolution {
    pub fn alpha(self) -> Option<f64> {
        match self {
            AlphaSolution::Alpha { alpha } => Some(alpha),
            AlphaSolution::NotPowerAdditive => None,
        }
    }
}

/// Largest bracket exponent: the search covers `α ∈ [2^-60, 2^60]`.
const MAX_BRACKET_EXP: i32 = 60;

/// Root of `e^{β·u} + e^{β·v} = 1` for `u, v < 0`; the left side falls
/// strictly from 2 at `β = 0` toward 0.
fn solve_decreasing(u: f64, v: f64, tol: f64) -> Result<f64> {
    let h = |beta: f64| (beta * u).exp() + (beta * v).exp() - 1.0;
    let mut k = 0;
    let (mut lo, mut hi) = (1.0_f64, 1.0_f64);
    while !(h(lo) > 0.0 && h(hi) < 0.0) {
        k += 1;
        if k > MAX_BRACKET_EXP {
            return Err(Error::Convergence {
                iterations: k as usize,
                residual: h(hi),
            });
        }
        lo = 2f64.powi(-k);
        hi = 2f64.powi(k);
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= tol * mid.max(1.0) {
            // pick whichever endpoint is closer to the root
            return Ok(if h(lo).abs() <= h(hi).abs() { lo } else { hi });
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Solves `c^α = a^α + b^α` for positive `a, b, c` read as `s(A), s(B), s(A∪B)`.
pub fn find_alpha(a: f64, b: f64, c: f64, tol: f64) -> Result<AlphaSolution> {
    for (name, x) in [("a", a), ("b", b), ("c", c)] {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::domain(format!("{name} = {x} must be positive and finite")));
        }
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    let (la, lb, lc) = (a.ln(), b.ln(), c.ln());
    if c > a.max(b) {
        let alpha = solve_decreasing(la - lc, lb - lc, tol)?;
        Ok(AlphaSolution::Alpha { alpha })
    } else if c < a.min(b) {
        let beta = solve_decreasing(lc - la, lc - lb, tol)?;
        Ok(AlphaSolution::Alpha { alpha: -beta })
    } else {
        Ok(AlphaSolution::NotPowerAdditive)
    }
}

/// Which disjoint pairs are checked for power additivity.
#[derive(Debug, Clone, PartialEq)]
pub enum VerificationSet {
    /// All disjoint singleton pairs plus `random_pairs` sampled disjoint
    /// pairs; every disjoint pair when the space has at most
    /// `exhaustive_max_states` states.
    Default {
        random_pairs: usize,
        exhaustive_max_states: usize,
        seed: u64,
    },
    Pairs(Vec<(Event, Event)>),
}

impl Default for VerificationSet {
    fn default() -> Self {
        VerificationSet::Default {
            random_pairs: 100,
            exhaustive_max_states: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErbrIdentification {
    pub alpha: f64,
    pub lambda: f64,
    #[serde(skip)]
    pub prior: Prior,
    /// Largest `|ln(s(A)^α + s(B)^α) − α ln s(A∪B)|` over the verification set.
    pub residual: f64,
    pub pairs_checked: usize,
    /// Events `(A, B)` that produced the candidate `α`.
    pub alpha_pair: (String, String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NotErbrReason {
    /// The pair used for `α` fails the trichotomy condition.
    NotPowerAdditive { pair: (String, String) },
    /// Additivity under the candidate `α` fails on some verified pair.
    VerificationFailed {
        alpha: f64,
        pair: (String, String),
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Identification {
    Erbr(ErbrIdentification),
    /// Constant support: reports are always uniform, `λ = 0` and the prior is
    /// not recoverable.
    UniformDegenerate { lambda: f64, max_log_support: f64 },
    NotErbr { reason: NotErbrReason, residual: f64 },
}

fn log_add(x: f64, y: f64) -> f64 {
    let m = x.max(y);
    m + ((x - m).exp() + (y - m).exp()).ln()
}

fn disjoint_pairs_exhaustive(n: usize) -> Vec<(Event, Event)> {
    let full: u64 = (1 << n) - 1;
    let mut out = Vec::new();
    for a in 1..full {
        let rest = full & !a;
        let mut b = rest;
        while b != 0 {
            // unordered, union proper
            if a < b && (a | b) != full {
                out.push((Event::from_mask(a), Event::from_mask(b)));
            }
            b = (b - 1) & rest;
        }
    }
    out
}

fn singleton_pairs(n: usize) -> Vec<(Event, Event)> {
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    for i in 0..n {
        for j in i + 1..n {
            out.push((Event::singleton(i), Event::singleton(j)));
        }
    }
    out
}

fn random_pairs(n: usize, count: usize, seed: u64) -> Vec<(Event, Event)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    if n < 3 {
        return out;
    }
    while out.len() < count {
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut free = 0;
        for s in 0..n {
            match rng.random_range(0..3) {
                0 => a.push(s),
                1 => b.push(s),
                _ => free += 1,
            }
        }
        if !a.is_empty() && !b.is_empty() && free > 0 {
            out.push((Event::new(a), Event::new(b)));
        }
    }
    out
}

/// Tests power additivity of `support` and, when it holds, recovers `λ` and
/// the prior.
pub fn identify_erbr(support: &SupportFunction, tol: f64, verification: &VerificationSet) -> Result<Identification> {
    let space = support.space();
    let n = space.len();
    if n < 3 {
        return Err(Error::structural(
            "power additivity needs at least 3 states (no disjoint pair has a proper union)",
        ));
    }
    let log_s = |e: &Event| -> Result<f64> {
        support
            .get(e)
            .map(f64::ln)
            .ok_or_else(|| Error::structural(format!("support has no value for {}", space.describe(e))))
    };
    let singles = (0..n).map(|i| log_s(&Event::singleton(i))).collect::<Result<Vec<f64>>>()?;

    let max_log = support.values().values().map(|v| v.ln().abs()).fold(0.0, f64::max);
    if max_log <= tol {
        return Ok(Identification::UniformDegenerate {
            lambda: 0.0,
            max_log_support: max_log,
        });
    }

    let label = |e: &Event| space.describe(e);
    // Candidate α from the singleton pair whose union lies farthest outside
    // [min, max] of its parts, for conditioning.
    let mut best: Option<(f64, (Event, Event))> = None;
    for (a, b) in singleton_pairs(n) {
        let lc = log_s(&a.union(&b))?;
        let (la, lb) = (singles[a.states()[0]], singles[b.states()[0]]);
        let margin = (lc - la.max(lb)).max(la.min(lb) - lc);
        if best.as_ref().is_none_or(|(m, _)| margin > *m) {
            best = Some((margin, (a, b)));
        }
    }
    let (_, (pa, pb)) = best.expect("n >= 3 gives at least one pair");
    let solution = find_alpha(
        support.get(&pa).unwrap(),
        support.get(&pb).unwrap(),
        support.get(&pa.union(&pb)).unwrap(),
        1e-15,
    )?;
    let Some(alpha) = solution.alpha() else {
        return Ok(Identification::NotErbr {
            reason: NotErbrReason::NotPowerAdditive {
                pair: (label(&pa), label(&pb)),
            },
            residual: f64::INFINITY,
        });
    };

    let pairs = match verification {
        VerificationSet::Pairs(p) => p.clone(),
        VerificationSet::Default {
            random_pairs: count,
            exhaustive_max_states,
            seed,
        } => {
            if n <= *exhaustive_max_states {
                disjoint_pairs_exhaustive(n)
            } else {
                let mut p = singleton_pairs(n);
                p.extend(random_pairs(n, *count, *seed));
                p
            }
        }
    };
    let mut residual = 0.0_f64;
    let mut worst_pair = None;
    for (a, b) in &pairs {
        if !a.is_disjoint(b) {
            return Err(Error::structural(format!("verification pair {a}, {b} is not disjoint")));
        }
        let lhs = log_add(alpha * log_s(a)?, alpha * log_s(b)?);
        let rhs = alpha * log_s(&a.union(b))?;
        let r = (lhs - rhs).abs();
        if !(r <= residual) {
            residual = r;
            worst_pair = Some((label(a), label(b)));
        }
    }
    if !(residual <= tol) {
        return Ok(Identification::NotErbr {
            reason: NotErbrReason::VerificationFailed {
                alpha,
                pair: worst_pair.expect("residual above tolerance implies a pair"),
            },
            residual,
        });
    }

    let scaled: Vec<f64> = singles.iter().map(|l| alpha * l).collect();
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = scaled.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = w.iter().sum();
    let prior = Prior::new(space, w.iter().map(|x| x / total).collect())?;
    Ok(Identification::Erbr(ErbrIdentification {
        alpha,
        lambda: 1.0 / alpha,
        prior,
        residual,
        pairs_checked: pairs.len(),
        alpha_pair: (label(&pa), label(&pb)),
    }))
}
