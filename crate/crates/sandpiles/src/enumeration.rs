//! Exhaustive enumerators and counters over the complete-graph family:
//! stable/DR/SR/PSR^k sets, minimal states, tournament scores,
//! score-equivalence classes, and a labelled-forest counting oracle.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use num::bigint::BigUint;
use num::One;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::dynamics::{add_grain, max_stable, stabilization_outcomes, Configuration};
use crate::error::{Error, Result};
use crate::graph::{Multigraph, VertexSubset};
use crate::recurrence::{is_dr_complete, is_sr_complete};

/// Default cap on `n` for the `n^n` box sweeps.
pub const STABLE_ENUM_GUARD: usize = 8;
/// Default cap on `n` for the PSR state-space search.
pub const PSR_ENUM_GUARD: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Dr,
    Sr,
    Psr(usize),
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Model::Dr => write!(f, "dr"),
            Model::Sr => write!(f, "sr"),
            Model::Psr(k) => write!(f, "psr:{k}"),
        }
    }
}

/// An enumerated recurrent set with its size and, optionally, the states
/// themselves in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct RecurrentSetSummary {
    pub n: usize,
    pub model: Model,
    pub count: u64,
    pub states: Option<Vec<Configuration>>,
}

fn check_stable_guard(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("need n >= 1".into()));
    }
    if n > STABLE_ENUM_GUARD {
        return Err(Error::GuardExceeded {
            what: "n for stable-state enumeration",
            value: n as u64,
            limit: STABLE_ENUM_GUARD as u64,
        });
    }
    Ok(())
}

fn decode(n: usize, mut idx: u64) -> Configuration {
    let mut c = vec![0u32; n];
    for slot in (0..n).rev() {
        c[slot] = (idx % n as u64) as u32;
        idx /= n as u64;
    }
    c
}

/// All stable states of `K_n` in lexicographic order (`n^n` of them).
pub fn enumerate_stable(n: usize) -> Result<Vec<Configuration>> {
    check_stable_guard(n)?;
    let total = (n as u64).pow(n as u32);
    Ok((0..total).map(|idx| decode(n, idx)).collect())
}

/// Filters the stable box by a per-state predicate, preserving
/// lexicographic order. Parallel when the `parallel` feature is on.
fn filter_stable(n: usize, pred: impl Fn(&[u32]) -> bool + Sync) -> Result<Vec<Configuration>> {
    check_stable_guard(n)?;
    let total = (n as u64).pow(n as u32);
    #[cfg(feature = "parallel")]
    {
        Ok((0..total)
            .into_par_iter()
            .filter_map(|idx| {
                let c = decode(n, idx);
                pred(&c).then_some(c)
            })
            .collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok((0..total)
            .filter_map(|idx| {
                let c = decode(n, idx);
                pred(&c).then_some(c)
            })
            .collect())
    }
}

/// Sequential variant of the DR filter, available regardless of features
/// (used for apples-to-apples benchmarking).
pub fn enumerate_dr_states_seq(n: usize) -> Result<Vec<Configuration>> {
    check_stable_guard(n)?;
    let total = (n as u64).pow(n as u32);
    Ok((0..total)
        .filter_map(|idx| {
            let c = decode(n, idx);
            is_dr_complete(&c).unwrap().then_some(c)
        })
        .collect())
}

/// Sequential variant of the SR filter.
pub fn enumerate_sr_states_seq(n: usize) -> Result<Vec<Configuration>> {
    check_stable_guard(n)?;
    let total = (n as u64).pow(n as u32);
    Ok((0..total)
        .filter_map(|idx| {
            let c = decode(n, idx);
            is_sr_complete(&c).unwrap().then_some(c)
        })
        .collect())
}

/// All DR states of `K_n`.
pub fn enumerate_dr(n: usize) -> Result<RecurrentSetSummary> {
    let states = filter_stable(n, |c| is_dr_complete(c).unwrap())?;
    Ok(RecurrentSetSummary {
        n,
        model: Model::Dr,
        count: states.len() as u64,
        states: Some(states),
    })
}

/// All SR states of `K_n`.
pub fn enumerate_sr(n: usize) -> Result<RecurrentSetSummary> {
    let states = filter_stable(n, |c| is_sr_complete(c).unwrap())?;
    Ok(RecurrentSetSummary {
        n,
        model: Model::Sr,
        count: states.len() as u64,
        states: Some(states),
    })
}

/// Recurrent states of the `k`-partial stochastic model on `K_n`
/// (vertices `1..=k` topple stochastically, the rest deterministically):
/// the breadth-first closure of stable states reachable from `c^max` by
/// grain additions and positive-probability stabilizations.
pub fn enumerate_psr(n: usize, k: usize) -> Result<RecurrentSetSummary> {
    if n == 0 {
        return Err(Error::InvalidInput("need n >= 1".into()));
    }
    if n > PSR_ENUM_GUARD {
        return Err(Error::GuardExceeded {
            what: "n for PSR enumeration",
            value: n as u64,
            limit: PSR_ENUM_GUARD as u64,
        });
    }
    if k > n {
        return Err(Error::InvalidInput(format!(
            "stochastic prefix {k} exceeds n = {n}"
        )));
    }
    let g = Multigraph::complete(n)?;
    let stochastic = VertexSubset::new(1..=k);
    let start = max_stable(&g);
    let mut reached: BTreeSet<Configuration> = BTreeSet::new();
    let mut queue = VecDeque::new();
    reached.insert(start.clone());
    queue.push_back(start);
    let mut cache: HashMap<Configuration, BTreeSet<Configuration>> = HashMap::new();
    while let Some(s) = queue.pop_front() {
        for i in 1..=n {
            let seeded = add_grain(&g, &s, i)?;
            let outcomes = match cache.get(&seeded) {
                Some(o) => o.clone(),
                None => {
                    let o = stabilization_outcomes(&g, &seeded, &stochastic)?;
                    cache.insert(seeded, o.clone());
                    o
                }
            };
            for next in outcomes {
                if reached.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }
    let states: Vec<Configuration> = reached.into_iter().collect();
    Ok(RecurrentSetSummary {
        n,
        model: Model::Psr(k),
        count: states.len() as u64,
        states: Some(states),
    })
}

/// Minimal (level-0) recurrent states of `K_n` under the given model.
pub fn enumerate_minimal(n: usize, model: Model) -> Result<RecurrentSetSummary> {
    let summary = match model {
        Model::Dr => enumerate_dr(n)?,
        Model::Sr => enumerate_sr(n)?,
        Model::Psr(k) => enumerate_psr(n, k)?,
    };
    let g = Multigraph::complete(n)?;
    let states: Vec<Configuration> = summary
        .states
        .unwrap()
        .into_iter()
        .filter(|c| crate::dynamics::level(&g, c).unwrap() == 0)
        .collect();
    Ok(RecurrentSetSummary {
        n,
        model,
        count: states.len() as u64,
        states: Some(states),
    })
}

/// Number of forests on `n` labelled vertices, via the convolution
/// `a(n) = Σ_k C(n-1, k-1) · t(k) · a(n-k)` where `t(k)` counts labelled
/// trees on `k` vertices.
pub fn count_forests(n: usize) -> Result<BigUint> {
    if n > 12 {
        return Err(Error::GuardExceeded {
            what: "n for forest counting",
            value: n as u64,
            limit: 12,
        });
    }
    fn trees(k: usize) -> BigUint {
        if k <= 2 {
            BigUint::one()
        } else {
            BigUint::from(k).pow(k as u32 - 2)
        }
    }
    let mut binom = vec![vec![BigUint::from(0u32); n + 1]; n + 1];
    for r in 0..=n {
        binom[r][0] = BigUint::one();
        for c in 1..=r {
            binom[r][c] = &binom[r - 1][c - 1]
                + if c <= r - 1 {
                    binom[r - 1][c].clone()
                } else {
                    BigUint::from(0u32)
                };
        }
    }
    let mut a = vec![BigUint::one()];
    for m in 1..=n {
        let mut total = BigUint::from(0u32);
        for k in 1..=m {
            total += &binom[m - 1][k - 1] * trees(k) * &a[m - k];
        }
        a.push(total);
    }
    Ok(a[n].clone())
}

/// Number of score-equivalence classes (distinct in-degree vectors) over
/// all `2^|E|` orientations of an arbitrary labelled multigraph given as a
/// list of edge copies on vertices `0..num_vertices`.
pub fn count_score_classes(num_vertices: usize, edge_copies: &[(usize, usize)]) -> Result<u64> {
    if edge_copies.len() > 12 {
        return Err(Error::GuardExceeded {
            what: "edge copies for orientation sweep",
            value: edge_copies.len() as u64,
            limit: 12,
        });
    }
    for &(u, v) in edge_copies {
        if u >= num_vertices || v >= num_vertices {
            return Err(Error::VertexOutOfRange {
                vertex: u.max(v),
                max: num_vertices - 1,
            });
        }
        if u == v {
            return Err(Error::InvalidGraph(format!("loop at vertex {u}")));
        }
    }
    let m = edge_copies.len();
    let mut scores: HashSet<Vec<u32>> = HashSet::new();
    for mask in 0u64..(1u64 << m) {
        let mut indeg = vec![0u32; num_vertices];
        for (b, &(u, v)) in edge_copies.iter().enumerate() {
            let head = if mask & (1 << b) != 0 { v } else { u };
            indeg[head] += 1;
        }
        scores.insert(indeg);
    }
    Ok(scores.len() as u64)
}

/// Number of tournament score sequences on `n` players: weakly increasing
/// `c` with entries in `0..n`, total `C(n,2)` and prefix sums at least
/// `C(i,2)` (equivalently, non-decreasing minimal SR states of `K_n`).
pub fn count_tournament_scores(n: usize) -> Result<u64> {
    if n == 0 || n > 10 {
        return Err(Error::GuardExceeded {
            what: "n for tournament score counting",
            value: n as u64,
            limit: 10,
        });
    }
    let total = (n as u64) * (n as u64 - 1) / 2;
    fn dfs(n: usize, pos: usize, min: u32, sum: u64, total: u64) -> u64 {
        if pos == n {
            return u64::from(sum == total);
        }
        // prefix sums must stay >= C(i,2); with the weakly increasing
        // constraint this is exactly Landau's condition
        let mut count = 0;
        for x in min..=(n as u32 - 1) {
            let new_sum = sum + x as u64;
            if new_sum > total {
                break;
            }
            let i = (pos + 1) as u64;
            if new_sum < i * (i - 1) / 2 {
                continue;
            }
            count += dfs(n, pos + 1, x, new_sum, total);
        }
        count
    }
    Ok(dfs(n, 0, 0, 0, total))
}

/// Rows `(n, |DR|, |PSR^1|, |SR|)` for `n = 1..=n_max`.
pub fn table_counts(n_max: usize) -> Result<Vec<(usize, u64, u64, u64)>> {
    if n_max > PSR_ENUM_GUARD {
        return Err(Error::GuardExceeded {
            what: "n_max for the count table",
            value: n_max as u64,
            limit: PSR_ENUM_GUARD as u64,
        });
    }
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let dr = enumerate_dr(n)?.count;
        let psr1 = enumerate_psr(n, 1.min(n))?.count;
        let sr = enumerate_sr(n)?.count;
        rows.push((n, dr, psr1, sr));
    }
    Ok(rows)
}
