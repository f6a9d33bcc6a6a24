//! Configurations, toppling operators and stabilization engines.
//!
//! A configuration assigns grain counts to the non-sink vertices `1..=n`;
//! internally it is a `Vec<u32>` indexed by `vertex - 1`. Four engines are
//! provided: deterministic stabilization with an audit trace, sampled
//! stochastic stabilization with a replayable coin tape, exhaustive
//! branching over mixed (partially stochastic) topplings, and an exact
//! absorption distribution in rational arithmetic.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num::bigint::BigInt;
use num::rational::Ratio;
use num::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Multigraph, VertexSubset};

pub type Configuration = Vec<u32>;
pub type BigRational = Ratio<BigInt>;

/// Default cap on the reachable state space explored by the branching and
/// exact engines.
pub const DEFAULT_STATE_LIMIT: usize = 1_000_000;

/// The maximal stable configuration: `degree(i) - 1` at every vertex.
pub fn max_stable(g: &Multigraph) -> Configuration {
    (1..=g.n()).map(|i| g.degree_unchecked(i) - 1).collect()
}

fn check_len(g: &Multigraph, c: &[u32]) -> Result<()> {
    if c.len() != g.n() {
        return Err(Error::LengthMismatch {
            got: c.len(),
            expected: g.n(),
        });
    }
    Ok(())
}

pub fn is_stable(g: &Multigraph, c: &[u32]) -> Result<bool> {
    check_len(g, c)?;
    Ok((1..=g.n()).all(|i| c[i - 1] < g.degree_unchecked(i)))
}

pub fn is_unstable_at(g: &Multigraph, c: &[u32], i: usize) -> Result<bool> {
    check_len(g, c)?;
    if i == 0 || i > g.n() {
        return Err(Error::VertexOutOfRange {
            vertex: i,
            max: g.n(),
        });
    }
    Ok(c[i - 1] >= g.degree_unchecked(i))
}

/// Errors with the first offending vertex when `c` is unstable.
pub fn check_stable(g: &Multigraph, c: &[u32]) -> Result<()> {
    check_len(g, c)?;
    for i in 1..=g.n() {
        let d = g.degree_unchecked(i);
        if c[i - 1] >= d {
            return Err(Error::NotStable {
                vertex: i,
                grains: c[i - 1],
                degree: d,
            });
        }
    }
    Ok(())
}

/// True iff `c_i < degree(i) - 1` everywhere: a grain can be added at every
/// vertex and the result stays stable.
pub fn is_superstable(g: &Multigraph, c: &[u32]) -> Result<bool> {
    check_len(g, c)?;
    Ok((1..=g.n()).all(|i| c[i - 1] + 1 < g.degree_unchecked(i)))
}

/// `level(c) = sum(c) + degree(0) - |E|`. Zero exactly for minimal
/// recurrent states.
pub fn level(g: &Multigraph, c: &[u32]) -> Result<i64> {
    check_len(g, c)?;
    let total: i64 = c.iter().map(|&x| x as i64).sum();
    Ok(total + g.degree_unchecked(0) as i64 - g.edge_count() as i64)
}

/// `c + alpha_i`. The sink holds no grains, so `i = 0` is rejected.
pub fn add_grain(g: &Multigraph, c: &[u32], i: usize) -> Result<Configuration> {
    check_len(g, c)?;
    if i == 0 {
        return Err(Error::GrainAtSink);
    }
    if i > g.n() {
        return Err(Error::VertexOutOfRange {
            vertex: i,
            max: g.n(),
        });
    }
    let mut out = c.to_vec();
    out[i - 1] += 1;
    Ok(out)
}

/// Deterministic toppling: vertex `i` sends one grain along each incident
/// edge copy; grains on sink edges vanish.
pub fn det_topple(g: &Multigraph, c: &[u32], i: usize) -> Result<Configuration> {
    if !is_unstable_at(g, c, i)? {
        return Err(Error::StableVertex { vertex: i });
    }
    let mut out = c.to_vec();
    out[i - 1] -= g.degree_unchecked(i);
    for &(j, m) in g.neighbors(i) {
        if j != 0 {
            out[j - 1] += m;
        }
    }
    Ok(out)
}

/// One toppling recorded in a [`StabilizationTrace`].
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ToppleEvent {
    pub vertex: usize,
    /// Grains sent to each non-sink neighbour.
    pub sent: Vec<(usize, u32)>,
    pub to_sink: u32,
}

/// Audit trail of a deterministic stabilization.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct StabilizationTrace {
    pub result: Configuration,
    pub topple_counts: Vec<u64>,
    pub order: Vec<ToppleEvent>,
}

impl StabilizationTrace {
    pub fn grains_to_sink(&self) -> u64 {
        self.order.iter().map(|e| e.to_sink as u64).sum()
    }
}

/// Replays a recorded toppling order from `c`; used to audit traces.
pub fn replay_trace(g: &Multigraph, c: &[u32], order: &[ToppleEvent]) -> Result<Configuration> {
    check_len(g, c)?;
    let mut cur = c.to_vec();
    for event in order {
        let i = event.vertex;
        let total: u32 = event.sent.iter().map(|&(_, k)| k).sum::<u32>() + event.to_sink;
        if cur[i - 1] < total {
            return Err(Error::InvalidInput(format!(
                "trace replay underflows at vertex {i}"
            )));
        }
        cur[i - 1] -= total;
        for &(j, k) in &event.sent {
            cur[j - 1] += k;
        }
    }
    Ok(cur)
}

/// Deterministic stabilization with the default lowest-index policy.
pub fn det_stabilize(g: &Multigraph, c: &[u32]) -> Result<StabilizationTrace> {
    det_stabilize_by(g, c, |unstable| unstable[0])
}

/// Deterministic stabilization with an arbitrary unstable-vertex selection
/// policy; the result is policy-independent (abelian property).
pub fn det_stabilize_by(
    g: &Multigraph,
    c: &[u32],
    mut chooser: impl FnMut(&[usize]) -> usize,
) -> Result<StabilizationTrace> {
    check_len(g, c)?;
    let mut cur = c.to_vec();
    let mut topple_counts = vec![0u64; g.n()];
    let mut order = Vec::new();
    loop {
        let unstable: Vec<usize> = (1..=g.n())
            .filter(|&i| cur[i - 1] >= g.degree_unchecked(i))
            .collect();
        if unstable.is_empty() {
            break;
        }
        let i = chooser(&unstable);
        debug_assert!(unstable.contains(&i));
        cur[i - 1] -= g.degree_unchecked(i);
        let mut sent = Vec::new();
        let mut to_sink = 0;
        for &(j, m) in g.neighbors(i) {
            if j == 0 {
                to_sink = m;
            } else {
                cur[j - 1] += m;
                sent.push((j, m));
            }
        }
        topple_counts[i - 1] += 1;
        order.push(ToppleEvent {
            vertex: i,
            sent,
            to_sink,
        });
    }
    Ok(StabilizationTrace {
        result: cur,
        topple_counts,
        order,
    })
}

fn check_sample_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(format!("{p}")));
    }
    Ok(())
}

/// Edge copies incident to `i`, in the coin-tape order: neighbours
/// ascending (sink first when adjacent), each repeated by multiplicity.
fn incident_copies(g: &Multigraph, i: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(g.degree_unchecked(i) as usize);
    for &(j, m) in g.neighbors(i) {
        for _ in 0..m {
            out.push(j);
        }
    }
    out
}

/// Applies a stochastic toppling of `i` with an explicit coin vector, one
/// coin per incident edge copy in [`incident_copies`] order. `true` sends
/// the grain across the edge.
pub fn sto_topple_with_coins(
    g: &Multigraph,
    c: &[u32],
    i: usize,
    coins: &[bool],
) -> Result<Configuration> {
    if !is_unstable_at(g, c, i)? {
        return Err(Error::StableVertex { vertex: i });
    }
    let copies = incident_copies(g, i);
    if coins.len() != copies.len() {
        return Err(Error::InvalidInput(format!(
            "coin tape has {} flips, vertex {i} has {} incident edge copies",
            coins.len(),
            copies.len()
        )));
    }
    let mut out = c.to_vec();
    for (&j, &heads) in copies.iter().zip(coins) {
        if heads {
            out[i - 1] -= 1;
            if j != 0 {
                out[j - 1] += 1;
            }
        }
    }
    Ok(out)
}

/// Samples a stochastic toppling of `i`; returns the new configuration and
/// the drawn coin tape.
pub fn sto_topple_sampled(
    g: &Multigraph,
    c: &[u32],
    i: usize,
    p: f64,
    rng: &mut impl Rng,
) -> Result<(Configuration, Vec<bool>)> {
    check_sample_p(p)?;
    let copies = incident_copies(g, i);
    let coins: Vec<bool> = copies.iter().map(|_| rng.gen_bool(p)).collect();
    let out = sto_topple_with_coins(g, c, i, &coins)?;
    Ok((out, coins))
}

/// Sampled stabilization record: every coin draw (including no-op draws)
/// is kept so the run can be replayed exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledStabilization {
    pub result: Configuration,
    pub topple_counts: Vec<u64>,
    /// `(vertex, coin tape)` per toppling attempt, in order.
    pub tape: Vec<(usize, Vec<bool>)>,
}

impl SampledStabilization {
    pub fn grains_to_sink(&self, g: &Multigraph) -> u64 {
        let mut total = 0u64;
        for (vertex, coins) in &self.tape {
            let copies = incident_copies(g, *vertex);
            total += copies
                .iter()
                .zip(coins)
                .filter(|&(&j, &h)| j == 0 && h)
                .count() as u64;
        }
        total
    }
}

/// Fully stochastic stabilization (every vertex topples by coin flips).
pub fn sto_stabilize_sampled(
    g: &Multigraph,
    c: &[u32],
    p: f64,
    rng: &mut impl Rng,
) -> Result<SampledStabilization> {
    mixed_stabilize_sampled(g, c, &VertexSubset::full(g.n()), p, rng)
}

/// Sampled stabilization where vertices in `stochastic` topple by coin
/// flips and the rest deterministically. Lowest-index unstable vertex
/// first; a no-op coin draw is recorded and the vertex retried.
pub fn mixed_stabilize_sampled(
    g: &Multigraph,
    c: &[u32],
    stochastic: &VertexSubset,
    p: f64,
    rng: &mut impl Rng,
) -> Result<SampledStabilization> {
    check_len(g, c)?;
    stochastic.check(g.n())?;
    check_sample_p(p)?;
    let mut cur = c.to_vec();
    let mut topple_counts = vec![0u64; g.n()];
    let mut tape = Vec::new();
    loop {
        let Some(i) = (1..=g.n()).find(|&i| cur[i - 1] >= g.degree_unchecked(i)) else {
            break;
        };
        if stochastic.contains(i) {
            let (next, coins) = sto_topple_sampled(g, &cur, i, p, rng)?;
            tape.push((i, coins));
            cur = next;
        } else {
            cur = det_topple(g, &cur, i)?;
            let coins = vec![true; g.degree_unchecked(i) as usize];
            tape.push((i, coins));
        }
        topple_counts[i - 1] += 1;
    }
    Ok(SampledStabilization {
        result: cur,
        topple_counts,
        tape,
    })
}

/// Replays a recorded coin tape; stable prefixes and no-op draws are
/// applied exactly as recorded.
pub fn replay_tape(g: &Multigraph, c: &[u32], tape: &[(usize, Vec<bool>)]) -> Result<Configuration> {
    let mut cur = c.to_vec();
    for (vertex, coins) in tape {
        cur = sto_topple_with_coins(g, &cur, *vertex, coins)?;
    }
    Ok(cur)
}

/// All configurations reachable from `c` by one toppling of the unstable
/// vertex `i` when `i` topples stochastically: every nonempty sub-multiset
/// of its incident edge copies fires. The no-op branch is excluded.
pub fn mixed_topple_branches(g: &Multigraph, c: &[u32], i: usize) -> Result<Vec<Configuration>> {
    if !is_unstable_at(g, c, i)? {
        return Err(Error::StableVertex { vertex: i });
    }
    let pairs: Vec<(usize, u32)> = g.neighbors(i).to_vec();
    let mut counts = vec![0u32; pairs.len()];
    let mut out = Vec::new();
    loop {
        // advance odometer
        let mut pos = 0;
        loop {
            if pos == counts.len() {
                return Ok(out);
            }
            if counts[pos] < pairs[pos].1 {
                counts[pos] += 1;
                for k in counts.iter_mut().take(pos) {
                    *k = 0;
                }
                break;
            }
            pos += 1;
        }
        let total: u32 = counts.iter().sum();
        let mut next = c.to_vec();
        next[i - 1] -= total;
        for (t, &(j, _)) in pairs.iter().enumerate() {
            if j != 0 {
                next[j - 1] += counts[t];
            }
        }
        out.push(next);
    }
}

/// Set of stable configurations reachable with positive probability when
/// vertices in `stochastic` topple by any nonempty edge-subset and the
/// rest deterministically. Lowest-index unstable vertex is expanded; the
/// support does not depend on that choice.
pub fn stabilization_outcomes(
    g: &Multigraph,
    c: &[u32],
    stochastic: &VertexSubset,
) -> Result<BTreeSet<Configuration>> {
    stabilization_outcomes_with_limit(g, c, stochastic, DEFAULT_STATE_LIMIT)
}

pub fn stabilization_outcomes_with_limit(
    g: &Multigraph,
    c: &[u32],
    stochastic: &VertexSubset,
    limit: usize,
) -> Result<BTreeSet<Configuration>> {
    check_len(g, c)?;
    stochastic.check(g.n())?;
    let mut outcomes = BTreeSet::new();
    let mut seen: BTreeSet<Configuration> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(c.to_vec());
    queue.push_back(c.to_vec());
    while let Some(cur) = queue.pop_front() {
        let Some(i) = (1..=g.n()).find(|&i| cur[i - 1] >= g.degree_unchecked(i)) else {
            outcomes.insert(cur);
            continue;
        };
        let successors = if stochastic.contains(i) {
            mixed_topple_branches(g, &cur, i)?
        } else {
            vec![det_topple(g, &cur, i)?]
        };
        for next in successors {
            if seen.insert(next.clone()) {
                if seen.len() > limit {
                    return Err(Error::StateSpaceExceeded { limit });
                }
                queue.push_back(next);
            }
        }
    }
    Ok(outcomes)
}

/// Unstable-vertex selection rule for the exact engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopplePolicy {
    MinIndex,
    MaxIndex,
}

impl TopplePolicy {
    fn choose(&self, g: &Multigraph, c: &[u32]) -> Option<usize> {
        let mut iter = (1..=g.n()).filter(|&i| c[i - 1] >= g.degree_unchecked(i));
        match self {
            TopplePolicy::MinIndex => iter.next(),
            TopplePolicy::MaxIndex => iter.last(),
        }
    }
}

/// Exact law of the stochastic stabilization of `c`: a map from stable
/// configuration to rational probability, summing to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeDistribution {
    pub entries: BTreeMap<Configuration, BigRational>,
}

impl OutcomeDistribution {
    pub fn support(&self) -> BTreeSet<Configuration> {
        self.entries.keys().cloned().collect()
    }
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut out = BigInt::one();
    for t in 0..k {
        out = out * BigInt::from(n - t) / BigInt::from(t + 1);
    }
    out
}

/// All one-step outcomes of a stochastic toppling of `i`, with exact
/// probabilities; includes the all-tails no-op with probability
/// `(1-p)^degree(i)`.
fn stochastic_branches_exact(
    g: &Multigraph,
    c: &[u32],
    i: usize,
    p: &BigRational,
) -> Vec<(Configuration, BigRational)> {
    let q = BigRational::one() - p.clone();
    let pairs: Vec<(usize, u32)> = g.neighbors(i).to_vec();
    let mut counts = vec![0u32; pairs.len()];
    let mut out = Vec::new();
    loop {
        let total: u32 = counts.iter().sum();
        let mut next = c.to_vec();
        next[i - 1] -= total;
        let mut prob = BigRational::one();
        for (t, &(j, m)) in pairs.iter().enumerate() {
            let k = counts[t];
            if j != 0 {
                next[j - 1] += k;
            }
            prob *= BigRational::from(binomial(m, k))
                * num::pow::pow(p.clone(), k as usize)
                * num::pow::pow(q.clone(), (m - k) as usize);
        }
        out.push((next, prob));
        // advance odometer
        let mut pos = 0;
        loop {
            if pos == counts.len() {
                return out;
            }
            if counts[pos] < pairs[pos].1 {
                counts[pos] += 1;
                for k in counts.iter_mut().take(pos) {
                    *k = 0;
                }
                break;
            }
            pos += 1;
        }
    }
}

/// Exact absorption distribution of the fully stochastic stabilization of
/// `c` with rational coin bias `p`, under the given selection policy. The
/// finite transient state space is enumerated and the linear absorption
/// system solved in exact rational arithmetic, so no-op self-loops and
/// cyclic returns are handled uniformly.
pub fn exact_outcome_distribution(
    g: &Multigraph,
    c: &[u32],
    p: &BigRational,
    policy: TopplePolicy,
) -> Result<OutcomeDistribution> {
    exact_outcome_distribution_with_limit(g, c, p, policy, DEFAULT_STATE_LIMIT)
}

pub fn exact_outcome_distribution_with_limit(
    g: &Multigraph,
    c: &[u32],
    p: &BigRational,
    policy: TopplePolicy,
    limit: usize,
) -> Result<OutcomeDistribution> {
    check_len(g, c)?;
    if p <= &BigRational::zero() || p >= &BigRational::one() {
        return Err(Error::InvalidProbability(p.to_string()));
    }

    if is_stable(g, c)? {
        let mut entries = BTreeMap::new();
        entries.insert(c.to_vec(), BigRational::one());
        return Ok(OutcomeDistribution { entries });
    }

    // Reachability closure over configurations; stable states absorb.
    let mut index: HashMap<Configuration, usize> = HashMap::new();
    let mut states: Vec<Configuration> = Vec::new();
    let mut queue = VecDeque::new();
    index.insert(c.to_vec(), 0);
    states.push(c.to_vec());
    queue.push_back(0usize);
    // transitions[t]: list of (target state index, probability)
    let mut transitions: Vec<Vec<(usize, BigRational)>> = Vec::new();
    let mut stable_flags: Vec<bool> = vec![false];

    while let Some(idx) = queue.pop_front() {
        let cur = states[idx].clone();
        let choice = policy.choose(g, &cur);
        while transitions.len() <= idx {
            transitions.push(Vec::new());
        }
        let Some(i) = choice else {
            stable_flags[idx] = true;
            continue;
        };
        for (next, prob) in stochastic_branches_exact(g, &cur, i, p) {
            let target = match index.get(&next) {
                Some(&t) => t,
                None => {
                    let t = states.len();
                    if t >= limit {
                        return Err(Error::StateSpaceExceeded { limit });
                    }
                    index.insert(next.clone(), t);
                    states.push(next);
                    stable_flags.push(false);
                    queue.push_back(t);
                    t
                }
            };
            transitions[idx].push((target, prob));
        }
    }
    while transitions.len() < states.len() {
        transitions.push(Vec::new());
    }

    // Re-index: transient states t_0..t_{T-1}, absorbing states a_0..
    let transient: Vec<usize> = (0..states.len()).filter(|&s| !stable_flags[s]).collect();
    let absorbing: Vec<usize> = (0..states.len()).filter(|&s| stable_flags[s]).collect();
    let t_pos: HashMap<usize, usize> = transient.iter().enumerate().map(|(a, &b)| (b, a)).collect();
    let a_pos: HashMap<usize, usize> = absorbing.iter().enumerate().map(|(a, &b)| (b, a)).collect();
    let t = transient.len();

    // Solve (I - Q)^T x = e_start for expected visit counts x, where Q is
    // the transient-to-transient block.
    let zero = BigRational::zero();
    let mut mat: Vec<Vec<BigRational>> = vec![vec![zero.clone(); t + 1]; t];
    for row in 0..t {
        mat[row][row] = BigRational::one();
    }
    for (ti, &s) in transient.iter().enumerate() {
        for (target, prob) in &transitions[s] {
            if let Some(&tj) = t_pos.get(target) {
                // column ti of (I-Q) transposed into row tj
                let entry = &mat[tj][ti] - prob;
                mat[tj][ti] = entry;
            }
        }
    }
    let start_t = t_pos[&0];
    mat[start_t][t] = BigRational::one();

    // Gaussian elimination, exact.
    for col in 0..t {
        let pivot = (col..t)
            .find(|&r| !mat[r][col].is_zero())
            .expect("absorption matrix is nonsingular");
        mat.swap(col, pivot);
        let inv = mat[col][col].clone();
        for entry in mat[col].iter_mut() {
            *entry /= inv.clone();
        }
        for r in 0..t {
            if r != col && !mat[r][col].is_zero() {
                let factor = mat[r][col].clone();
                for k in col..=t {
                    let v = &mat[r][k] - &factor * &mat[col][k];
                    mat[r][k] = v;
                }
            }
        }
    }
    let visits: Vec<BigRational> = (0..t).map(|r| mat[r][t].clone()).collect();

    let mut dist = vec![BigRational::zero(); absorbing.len()];
    for (ti, &s) in transient.iter().enumerate() {
        for (target, prob) in &transitions[s] {
            if let Some(&aj) = a_pos.get(target) {
                let v = &dist[aj] + &visits[ti] * prob;
                dist[aj] = v;
            }
        }
    }

    let mut entries = BTreeMap::new();
    let mut total = BigRational::zero();
    for (aj, &s) in absorbing.iter().enumerate() {
        if !dist[aj].is_zero() {
            total += dist[aj].clone();
            entries.insert(states[s].clone(), dist[aj].clone());
        }
    }
    debug_assert!(total.is_one(), "absorption probabilities must sum to 1");
    if !total.is_one() {
        return Err(Error::InvalidInput(
            "internal: absorption probabilities did not sum to 1".into(),
        ));
    }
    Ok(OutcomeDistribution { entries })
}
