//! Recurrence characterizations for the deterministic and stochastic
//! models: Dhar burning, subset criteria, compatible-orientation
//! constructions, a max-flow decision for general graphs, and the
//! complete-graph fast paths (parking functions and stochastic burning).

use std::collections::BTreeSet;

use crate::dynamics::{check_stable, level};
use crate::error::{Error, Result};
use crate::graph::{Multigraph, VertexSubset};

/// Maximum non-sink vertex count for the exponential subset sweeps.
pub const SUBSET_SWEEP_GUARD: usize = 20;

/// A direction for every edge copy of a host graph. Copies are aligned
/// with [`Multigraph::edge_copies`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    copies: Vec<(usize, usize)>,
    /// `true` directs the copy from the smaller to the larger endpoint.
    toward_high: Vec<bool>,
    num_vertices: usize,
}

impl Orientation {
    /// Builds an orientation from `(tail, head)` pairs, one per edge copy
    /// in `edge_copies` order.
    pub fn from_directed(g: &Multigraph, directed: &[(usize, usize)]) -> Result<Self> {
        let copies = g.edge_copies();
        if directed.len() != copies.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} directed copies, got {}",
                copies.len(),
                directed.len()
            )));
        }
        let mut toward_high = Vec::with_capacity(copies.len());
        for (&(u, v), &(tail, head)) in copies.iter().zip(directed) {
            if (tail, head) == (u, v) {
                toward_high.push(true);
            } else if (tail, head) == (v, u) {
                toward_high.push(false);
            } else {
                return Err(Error::InvalidInput(format!(
                    "directed pair ({tail},{head}) does not match edge copy {{{u},{v}}}"
                )));
            }
        }
        Ok(Orientation {
            copies,
            toward_high,
            num_vertices: g.num_vertices(),
        })
    }

    pub(crate) fn from_parts(
        copies: Vec<(usize, usize)>,
        toward_high: Vec<bool>,
        num_vertices: usize,
    ) -> Self {
        debug_assert_eq!(copies.len(), toward_high.len());
        Orientation {
            copies,
            toward_high,
            num_vertices,
        }
    }

    pub fn num_copies(&self) -> usize {
        self.copies.len()
    }

    /// `(tail, head)` of the copy at `idx`.
    pub fn directed(&self, idx: usize) -> (usize, usize) {
        let (u, v) = self.copies[idx];
        if self.toward_high[idx] {
            (u, v)
        } else {
            (v, u)
        }
    }

    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        (0..self.copies.len()).map(|i| self.directed(i)).collect()
    }

    /// Per-vertex incoming edge-copy counts over `{0..n}`.
    pub fn in_degrees(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.num_vertices];
        for idx in 0..self.copies.len() {
            let (_, head) = self.directed(idx);
            out[head] += 1;
        }
        out
    }

    /// `c_i >= in_i` at every non-sink vertex.
    pub fn is_compatible(&self, c: &[u32]) -> Result<bool> {
        if c.len() + 1 != self.num_vertices {
            return Err(Error::LengthMismatch {
                got: c.len(),
                expected: self.num_vertices - 1,
            });
        }
        let ins = self.in_degrees();
        Ok((1..self.num_vertices).all(|i| c[i - 1] >= ins[i]))
    }

    /// Reverses the given directed cycle (a sequence of copy indices where
    /// each head equals the next tail, closing back to the start).
    pub fn flip_cycle(&self, cycle: &[usize]) -> Result<Orientation> {
        if cycle.is_empty() {
            return Err(Error::NotACycle);
        }
        for idx in cycle {
            if *idx >= self.copies.len() {
                return Err(Error::NotACycle);
            }
        }
        let unique: BTreeSet<usize> = cycle.iter().copied().collect();
        if unique.len() != cycle.len() {
            return Err(Error::NotACycle);
        }
        for w in 0..cycle.len() {
            let (_, head) = self.directed(cycle[w]);
            let (next_tail, _) = self.directed(cycle[(w + 1) % cycle.len()]);
            if head != next_tail {
                return Err(Error::NotACycle);
            }
        }
        let mut flipped = self.clone();
        for &idx in cycle {
            flipped.toward_high[idx] = !flipped.toward_high[idx];
        }
        Ok(flipped)
    }

    /// No directed cycles.
    pub fn is_acyclic(&self) -> bool {
        // Kahn's algorithm on the directed multigraph.
        let mut indeg = self.in_degrees();
        let mut out_adj: Vec<Vec<usize>> = vec![Vec::new(); self.num_vertices];
        for idx in 0..self.copies.len() {
            let (tail, head) = self.directed(idx);
            out_adj[tail].push(head);
        }
        let mut queue: Vec<usize> = (0..self.num_vertices).filter(|&v| indeg[v] == 0).collect();
        let mut removed = 0;
        while let Some(v) = queue.pop() {
            removed += 1;
            for &w in &out_adj[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push(w);
                }
            }
        }
        removed == self.num_vertices
    }

    /// The sink is the unique root (all-incoming vertex).
    pub fn is_sink_rooted(&self) -> bool {
        let mut has_outgoing = vec![false; self.num_vertices];
        for idx in 0..self.copies.len() {
            let (tail, _) = self.directed(idx);
            has_outgoing[tail] = true;
        }
        !has_outgoing[0] && (1..self.num_vertices).all(|v| has_outgoing[v])
    }
}

/// `in_i^O = in_i^O'` at every vertex of the shared host.
pub fn score_equivalent(a: &Orientation, b: &Orientation) -> Result<bool> {
    if a.copies != b.copies || a.num_vertices != b.num_vertices {
        return Err(Error::HostMismatch);
    }
    Ok(a.in_degrees() == b.in_degrees())
}

/// Outcome of Dhar's burning algorithm.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct BurnReport {
    /// Vertices in burn order, sink first.
    pub burned_order: Vec<usize>,
    /// Unburned vertices (a forbidden subconfiguration when nonempty).
    pub remain: Vec<usize>,
}

/// Dhar's burning algorithm with the lowest-index tie-break. The
/// remain-set is independent of the burn-choice order.
pub fn dhar_burning(g: &Multigraph, c: &[u32]) -> Result<BurnReport> {
    dhar_burning_by(g, c, |candidates| candidates[0])
}

/// Burning with an arbitrary choice among currently burnable vertices.
pub fn dhar_burning_by(
    g: &Multigraph,
    c: &[u32],
    mut chooser: impl FnMut(&[usize]) -> usize,
) -> Result<BurnReport> {
    check_stable(g, c)?;
    let n = g.n();
    let mut in_remain = vec![true; n + 1];
    in_remain[0] = false;
    // degree within G(Remain), maintained incrementally; sink burned first
    let mut deg: Vec<u32> = (0..=n)
        .map(|i| g.degree_unchecked(i) - g.multiplicity(i, 0))
        .collect();
    let mut burned_order = vec![0usize];
    let mut remaining = n;
    while remaining > 0 {
        let candidates: Vec<usize> = (1..=n)
            .filter(|&i| in_remain[i] && c[i - 1] >= deg[i])
            .collect();
        if candidates.is_empty() {
            break;
        }
        let i = chooser(&candidates);
        debug_assert!(candidates.contains(&i));
        in_remain[i] = false;
        remaining -= 1;
        burned_order.push(i);
        for &(j, m) in g.neighbors(i) {
            if j != 0 && in_remain[j] {
                deg[j] -= m;
            }
        }
    }
    let remain: Vec<usize> = (1..=n).filter(|&i| in_remain[i]).collect();
    Ok(BurnReport {
        burned_order,
        remain,
    })
}

/// Audit trail of a recurrence checker run.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct RecurrenceVerdict {
    pub recurrent: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "witness_kind", content = "witness", rename_all = "snake_case")]
pub enum Witness {
    BurnOrder(Vec<usize>),
    ForbiddenSubset {
        subset: Vec<usize>,
        grains: u64,
        edges: u64,
    },
    Orientation(Vec<(usize, usize)>),
}

fn forbidden_subset_witness(g: &Multigraph, c: &[u32], subset: Vec<usize>) -> Witness {
    let vs = VertexSubset::new(subset.iter().copied());
    let grains: u64 = subset.iter().map(|&i| c[i - 1] as u64).sum();
    let edges = g.edges_within(&vs).expect("witness subset validated");
    Witness::ForbiddenSubset {
        subset,
        grains,
        edges,
    }
}

/// Primary DR test via Dhar's burning algorithm: recurrent iff every
/// vertex burns.
pub fn is_dr(g: &Multigraph, c: &[u32]) -> Result<RecurrenceVerdict> {
    let report = dhar_burning(g, c)?;
    if report.remain.is_empty() {
        Ok(RecurrenceVerdict {
            recurrent: true,
            witness: Some(Witness::BurnOrder(report.burned_order)),
        })
    } else {
        // re-verify: no vertex of the remain-set can burn
        let vs = VertexSubset::new(report.remain.iter().copied());
        let view = g.induced_subgraph(&vs)?;
        for &i in &report.remain {
            debug_assert!(c[i - 1] < view.degree(i)?);
        }
        Ok(RecurrenceVerdict {
            recurrent: false,
            witness: Some(forbidden_subset_witness(g, c, report.remain)),
        })
    }
}

fn check_subset_guard(n: usize) -> Result<()> {
    if n > SUBSET_SWEEP_GUARD {
        return Err(Error::GuardExceeded {
            what: "non-sink vertices for subset sweep",
            value: n as u64,
            limit: SUBSET_SWEEP_GUARD as u64,
        });
    }
    Ok(())
}

/// DR oracle via the forbidden-subconfiguration sweep: every nonempty
/// `A ⊆ [n]` must contain a vertex `i` with `c_i >= dgr_i^{G(A)}`.
pub fn is_dr_subset_criterion(g: &Multigraph, c: &[u32]) -> Result<RecurrenceVerdict> {
    check_stable(g, c)?;
    let n = g.n();
    check_subset_guard(n)?;
    for mask in 1u64..(1u64 << n) {
        let subset: Vec<usize> = (1..=n).filter(|&i| mask & (1 << (i - 1)) != 0).collect();
        let vs = VertexSubset::new(subset.iter().copied());
        let view = g.induced_subgraph(&vs)?;
        let burnable = subset.iter().any(|&i| {
            c[i - 1]
                >= view
                    .degree(i)
                    .expect("member of its own subset")
        });
        if !burnable {
            return Ok(RecurrenceVerdict {
                recurrent: false,
                witness: Some(forbidden_subset_witness(g, c, subset)),
            });
        }
    }
    Ok(RecurrenceVerdict {
        recurrent: true,
        witness: None,
    })
}

/// Builds an acyclic sink-rooted orientation compatible with `c` from the
/// burn order (every copy directed from later-burned to earlier-burned),
/// or `None` when `c` is not DR.
pub fn find_compatible_acyclic_orientation(
    g: &Multigraph,
    c: &[u32],
) -> Result<Option<Orientation>> {
    let report = dhar_burning(g, c)?;
    if !report.remain.is_empty() {
        return Ok(None);
    }
    let mut rank = vec![0usize; g.num_vertices()];
    for (pos, &v) in report.burned_order.iter().enumerate() {
        rank[v] = pos;
    }
    let copies = g.edge_copies();
    let toward_high: Vec<bool> = copies.iter().map(|&(u, v)| rank[u] > rank[v]).collect();
    let o = Orientation::from_parts(copies, toward_high, g.num_vertices());
    debug_assert!(o.is_acyclic());
    debug_assert!(o.is_sink_rooted());
    debug_assert!(o.is_compatible(c)?);
    if !(o.is_acyclic() && o.is_sink_rooted() && o.is_compatible(c)?) {
        return Err(Error::InvalidInput(
            "internal: burn-order orientation failed its re-check".into(),
        ));
    }
    Ok(Some(o))
}

/// SR oracle via the subset sweep: `c(A) >= |E(G(A))|` for every
/// `A ⊆ [n]`.
pub fn is_sr_subset_criterion(g: &Multigraph, c: &[u32]) -> Result<RecurrenceVerdict> {
    check_stable(g, c)?;
    let n = g.n();
    check_subset_guard(n)?;
    for mask in 1u64..(1u64 << n) {
        let subset: Vec<usize> = (1..=n).filter(|&i| mask & (1 << (i - 1)) != 0).collect();
        let vs = VertexSubset::new(subset.iter().copied());
        let grains: u64 = subset.iter().map(|&i| c[i - 1] as u64).sum();
        let edges = g.edges_within(&vs)?;
        if grains < edges {
            return Ok(RecurrenceVerdict {
                recurrent: false,
                witness: Some(Witness::ForbiddenSubset {
                    subset,
                    grains,
                    edges,
                }),
            });
        }
    }
    Ok(RecurrenceVerdict {
        recurrent: true,
        witness: None,
    })
}

/// Dinic-free small max-flow (Edmonds–Karp); capacities are integral so
/// termination is exact.
struct FlowNetwork {
    // arcs stored as (to, cap); reverse arc at idx ^ 1
    to: Vec<usize>,
    cap: Vec<i64>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        FlowNetwork {
            to: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: i64) -> usize {
        let idx = self.to.len();
        self.to.push(to);
        self.cap.push(cap);
        self.adj[from].push(idx);
        self.to.push(from);
        self.cap.push(0);
        self.adj[to].push(idx + 1);
        idx
    }

    fn max_flow(&mut self, source: usize, sink: usize) -> i64 {
        let mut total = 0i64;
        loop {
            let mut prev_arc = vec![usize::MAX; self.adj.len()];
            let mut visited = vec![false; self.adj.len()];
            let mut queue = std::collections::VecDeque::from([source]);
            visited[source] = true;
            while let Some(u) = queue.pop_front() {
                if u == sink {
                    break;
                }
                for &a in &self.adj[u] {
                    let v = self.to[a];
                    if !visited[v] && self.cap[a] > 0 {
                        visited[v] = true;
                        prev_arc[v] = a;
                        queue.push_back(v);
                    }
                }
            }
            if !visited[sink] {
                return total;
            }
            let mut bottleneck = i64::MAX;
            let mut v = sink;
            while v != source {
                let a = prev_arc[v];
                bottleneck = bottleneck.min(self.cap[a]);
                v = self.to[a ^ 1];
            }
            let mut v = sink;
            while v != source {
                let a = prev_arc[v];
                self.cap[a] -= bottleneck;
                self.cap[a ^ 1] += bottleneck;
                v = self.to[a ^ 1];
            }
            total += bottleneck;
        }
    }

    fn reachable_from(&self, source: usize) -> Vec<bool> {
        let mut visited = vec![false; self.adj.len()];
        let mut queue = std::collections::VecDeque::from([source]);
        visited[source] = true;
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let v = self.to[a];
                if !visited[v] && self.cap[a] > 0 {
                    visited[v] = true;
                    queue.push_back(v);
                }
            }
        }
        visited
    }
}

struct SrFlowSolution {
    feasible: bool,
    /// For each sink-deleted pair `(u, v, mult)`: flow routed into `u`.
    into_low: Vec<i64>,
    /// Violating subset when infeasible.
    violating: Vec<usize>,
}

fn solve_sr_flow(g: &Multigraph, c: &[u32]) -> SrFlowSolution {
    let n = g.n();
    let pairs: Vec<(usize, usize, u32)> = g.edge_pairs().filter(|&(u, _, _)| u != 0).collect();
    let needed: i64 = pairs.iter().map(|&(_, _, m)| m as i64).sum();
    let m = pairs.len();
    // node layout: 0 source, 1..=m edge nodes, m+1..=m+n vertex nodes, m+n+1 sink
    let source = 0usize;
    let edge_node = |e: usize| 1 + e;
    let vertex_node = |v: usize| m + v; // v in 1..=n
    let sink = m + n + 1;
    let mut net = FlowNetwork::new(m + n + 2);
    const INF: i64 = i64::MAX / 4;
    let mut low_arcs = Vec::with_capacity(m);
    for (e, &(u, v, mult)) in pairs.iter().enumerate() {
        net.add_arc(source, edge_node(e), mult as i64);
        low_arcs.push(net.add_arc(edge_node(e), vertex_node(u), INF));
        net.add_arc(edge_node(e), vertex_node(v), INF);
    }
    for v in 1..=n {
        net.add_arc(vertex_node(v), sink, c[v - 1] as i64);
    }
    let flow = net.max_flow(source, sink);
    if flow == needed {
        let into_low = low_arcs
            .iter()
            .map(|&a| net.cap[a ^ 1]) // flow on forward arc = reverse residual
            .collect();
        SrFlowSolution {
            feasible: true,
            into_low,
            violating: Vec::new(),
        }
    } else {
        let reach = net.reachable_from(source);
        let violating: Vec<usize> = (1..=n).filter(|&v| reach[vertex_node(v)]).collect();
        SrFlowSolution {
            feasible: false,
            into_low: Vec::new(),
            violating,
        }
    }
}

fn orientation_from_flow(g: &Multigraph, sol: &SrFlowSolution) -> Orientation {
    let pairs: Vec<(usize, usize, u32)> = g.edge_pairs().filter(|&(u, _, _)| u != 0).collect();
    let copies = g.edge_copies();
    let mut toward_high = Vec::with_capacity(copies.len());
    let mut idx = 0usize;
    let mut per_pair: std::collections::BTreeMap<(usize, usize), (i64, i64)> =
        std::collections::BTreeMap::new();
    for (e, &(u, v, m)) in pairs.iter().enumerate() {
        let into_u = sol.into_low[e];
        per_pair.insert((u, v), (into_u, m as i64 - into_u));
        idx += 1;
    }
    let _ = idx;
    for &(u, v) in &copies {
        if u == 0 {
            // sink edges point into the sink: tail is the high endpoint
            toward_high.push(false);
            continue;
        }
        let entry = per_pair.get_mut(&(u, v)).expect("non-sink pair present");
        if entry.0 > 0 {
            entry.0 -= 1;
            toward_high.push(false); // head = u (the low endpoint)
        } else {
            entry.1 -= 1;
            toward_high.push(true); // head = v
        }
    }
    Orientation::from_parts(copies, toward_high, g.num_vertices())
}

/// Polynomial SR decision: every edge of `G([n])` must be orientable with
/// in-degrees bounded by `c`, decided by max flow. Agrees with
/// [`is_sr_subset_criterion`] on all inputs.
pub fn is_sr_flow(g: &Multigraph, c: &[u32]) -> Result<RecurrenceVerdict> {
    check_stable(g, c)?;
    let sol = solve_sr_flow(g, c);
    if sol.feasible {
        let o = orientation_from_flow(g, &sol);
        debug_assert!(o.is_compatible(c)?);
        Ok(RecurrenceVerdict {
            recurrent: true,
            witness: Some(Witness::Orientation(o.directed_edges())),
        })
    } else {
        let witness = forbidden_subset_witness(g, c, sol.violating.clone());
        if let Witness::ForbiddenSubset { grains, edges, .. } = &witness {
            debug_assert!(grains < edges, "min-cut witness must violate the subset bound");
        }
        Ok(RecurrenceVerdict {
            recurrent: false,
            witness: Some(witness),
        })
    }
}

/// Extracts a sink-rooted orientation compatible with `c` from the flow
/// solution, or `None` when `c` is not SR. Requires every non-sink vertex
/// to be adjacent to the sink; other graphs are rejected (use the subset
/// criterion for the verdict there).
pub fn find_compatible_sink_rooted_orientation(
    g: &Multigraph,
    c: &[u32],
) -> Result<Option<Orientation>> {
    check_stable(g, c)?;
    for i in 1..=g.n() {
        if g.multiplicity(i, 0) == 0 {
            return Err(Error::UnsupportedGraph(format!(
                "vertex {i} has no edge to the sink; sink-rootedness is not guaranteed"
            )));
        }
    }
    let sol = solve_sr_flow(g, c);
    if !sol.feasible {
        return Ok(None);
    }
    let o = orientation_from_flow(g, &sol);
    debug_assert!(o.is_sink_rooted());
    debug_assert!(o.is_compatible(c)?);
    if !(o.is_sink_rooted() && o.is_compatible(c)?) {
        return Err(Error::InvalidInput(
            "internal: flow orientation failed its re-check".into(),
        ));
    }
    Ok(Some(o))
}

/// `sorted(q)_i <= i` with positive entries.
pub fn is_parking_function(q: &[u32]) -> Result<bool> {
    if q.iter().any(|&x| x == 0) {
        return Err(Error::InvalidInput(
            "parking function entries must be positive".into(),
        ));
    }
    let mut sorted = q.to_vec();
    sorted.sort_unstable();
    Ok(sorted
        .iter()
        .enumerate()
        .all(|(idx, &x)| x as usize <= idx + 1))
}

fn check_stable_complete(c: &[u32]) -> Result<()> {
    let n = c.len();
    for (idx, &x) in c.iter().enumerate() {
        if x as usize >= n {
            return Err(Error::NotStable {
                vertex: idx + 1,
                grains: x,
                degree: n as u32,
            });
        }
    }
    Ok(())
}

/// DR test on `K_n` via the parking-function complement: `c` is DR iff
/// `n - c` is a parking function, equivalently `sorted(c)_i >= i - 1`.
pub fn is_dr_complete(c: &[u32]) -> Result<bool> {
    check_stable_complete(c)?;
    let mut sorted = c.to_vec();
    sorted.sort_unstable();
    Ok(sorted
        .iter()
        .enumerate()
        .all(|(idx, &x)| x as usize >= idx))
}

/// Stochastic burning algorithm on `K_n`. Returns the number of unburned
/// vertices (`0` iff SR) with a burn report mapping back to original
/// vertex labels. Runs in `O(n log n)`, `O(n)` on sorted input.
pub fn stochastic_burning(c: &[u32]) -> Result<(usize, BurnReport)> {
    check_stable_complete(c)?;
    let n = c.len();
    let sorted_idx: Vec<usize> = if c.windows(2).all(|w| w[0] <= w[1]) {
        (0..n).collect()
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by_key(|&i| c[i]);
        idx
    };
    let mut sum: u64 = c.iter().map(|&x| x as u64).sum();
    let mut target: u64 = (n as u64) * (n as u64 - 1) / 2;
    let mut k = n;
    while k > 0 && sum >= target {
        sum -= c[sorted_idx[k - 1]] as u64;
        target -= (k - 1) as u64;
        k -= 1;
    }
    let mut burned_order = Vec::with_capacity(n + 1 - k);
    burned_order.push(0);
    burned_order.extend((k..n).rev().map(|pos| sorted_idx[pos] + 1));
    let mut remain: Vec<usize> = sorted_idx[..k].iter().map(|&i| i + 1).collect();
    remain.sort_unstable();
    Ok((k, BurnReport {
        burned_order,
        remain,
    }))
}

/// SR test on `K_n` via prefix sums of the sorted configuration:
/// `sum(sorted(c)[..i]) >= C(i,2)` for all `i`.
pub fn is_sr_complete(c: &[u32]) -> Result<bool> {
    check_stable_complete(c)?;
    let mut sorted = c.to_vec();
    sorted.sort_unstable();
    let mut prefix = 0u64;
    for (idx, &x) in sorted.iter().enumerate() {
        prefix += x as u64;
        let i = (idx + 1) as u64;
        if prefix < i * (i - 1) / 2 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecurrenceModel {
    Dr,
    Sr,
}

/// Minimality test: `c` must be recurrent under `model`, and it is
/// minimal iff `level(c) = 0`.
pub fn is_minimal_recurrent(g: &Multigraph, c: &[u32], model: RecurrenceModel) -> Result<bool> {
    let recurrent = match model {
        RecurrenceModel::Dr => is_dr(g, c)?.recurrent,
        RecurrenceModel::Sr => is_sr_flow(g, c)?.recurrent,
    };
    if !recurrent {
        return Err(Error::NotRecurrent);
    }
    Ok(level(g, c)? == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn k3() -> Multigraph {
        Multigraph::complete(3).unwrap()
    }

    fn pendant_triangle() -> Multigraph {
        Multigraph::from_edges(3, [(0, 1, 1), (1, 2, 1), (1, 3, 1), (2, 3, 1)]).unwrap()
    }

    fn heavy_cycle() -> Multigraph {
        Multigraph::from_edges(
            4,
            [
                (0, 1, 1),
                (0, 2, 1),
                (0, 3, 1),
                (0, 4, 1),
                (1, 2, 6),
                (2, 3, 1),
                (3, 4, 7),
                (1, 4, 1),
            ],
        )
        .unwrap()
    }

    /// Directed cycle 1->2->3->1 on K_3, all sink edges into the sink.
    fn k3_cycle_orientation() -> Orientation {
        let g = k3();
        // edge copies of K_3: (0,1),(0,2),(0,3),(1,2),(1,3),(2,3)
        Orientation::from_directed(
            &g,
            &[(1, 0), (2, 0), (3, 0), (1, 2), (3, 1), (2, 3)],
        )
        .unwrap()
    }

    #[test]
    fn in_degrees_examples() {
        let o = k3_cycle_orientation();
        assert_eq!(o.in_degrees(), vec![3, 1, 1, 1]);
        let total: u32 = o.in_degrees().iter().sum();
        assert_eq!(total as u64, k3().edge_count());
    }

    #[test]
    fn compatibility_examples() {
        let o = k3_cycle_orientation();
        assert!(o.is_compatible(&[1, 1, 1]).unwrap());
        assert!(o.is_compatible(&[2, 2, 2]).unwrap());
        assert!(!o.is_compatible(&[0, 1, 1]).unwrap());
        assert!(o.is_compatible(&[1, 1]).is_err());
    }

    #[test]
    fn pendant_triangle_orientation_compatible() {
        let g = pendant_triangle();
        // copies: (0,1),(1,2),(1,3),(2,3); orientation 1->0, cycle 1->2->3->1
        let o = Orientation::from_directed(&g, &[(1, 0), (1, 2), (3, 1), (2, 3)]).unwrap();
        assert!(o.is_compatible(&[1, 1, 1]).unwrap());
        assert!(o.is_sink_rooted());
        assert!(!o.is_acyclic());
    }

    #[test]
    fn flip_cycle_involution_preserves_scores() {
        let o = k3_cycle_orientation();
        // copies 3,4,5 are (1,2),(1,3),(2,3): directed 1->2, 3->1, 2->3,
        // i.e. cycle 1->2->3->1 traversed as copy indices 3,5,4
        let flipped = o.flip_cycle(&[3, 5, 4]).unwrap();
        assert_ne!(flipped, o);
        assert_eq!(flipped.in_degrees(), o.in_degrees());
        assert!(score_equivalent(&o, &flipped).unwrap());
        // the reversed cycle 1->3->2->1 is traversed as copies 4, 5, 3
        let back = flipped.flip_cycle(&[4, 5, 3]).unwrap();
        assert_eq!(back, o);
        // non-cycle input rejected
        assert!(o.flip_cycle(&[0, 1]).is_err());
        assert!(o.flip_cycle(&[]).is_err());
    }

    #[test]
    fn score_equivalence_basics() {
        let o = k3_cycle_orientation();
        assert!(score_equivalent(&o, &o).unwrap());
        let g4 = Multigraph::complete(4).unwrap();
        let copies = g4.edge_copies();
        let other = Orientation::from_parts(copies.clone(), vec![true; copies.len()], 5);
        assert!(score_equivalent(&o, &other).is_err());
    }

    #[test]
    fn acyclic_orientation_class_is_singleton() {
        // all-toward-high orientation of K_3 is acyclic; any distinct
        // orientation has a different score vector
        let g = k3();
        let copies = g.edge_copies();
        let acyclic = Orientation::from_parts(copies.clone(), vec![true; 6], 4);
        assert!(acyclic.is_acyclic());
        for mask in 0u32..(1 << 6) {
            let dirs: Vec<bool> = (0..6).map(|b| mask & (1 << b) != 0).collect();
            let o = Orientation::from_parts(copies.clone(), dirs, 4);
            if o != acyclic {
                assert!(
                    !score_equivalent(&o, &acyclic).unwrap()
                        || !o.is_acyclic() && o.in_degrees() != acyclic.in_degrees()
                );
            }
        }
    }

    #[test]
    fn dhar_burning_examples() {
        let g = k3();
        let report = dhar_burning(&g, &[2, 2, 2]).unwrap();
        assert!(report.remain.is_empty());

        let report = dhar_burning(&pendant_triangle(), &[1, 1, 1]).unwrap();
        assert_eq!(report.remain, vec![1, 2, 3]);

        let report = dhar_burning(&g, &[0, 1, 2]).unwrap();
        assert!(report.remain.is_empty());
        assert_eq!(report.burned_order, vec![0, 3, 2, 1]);

        assert!(dhar_burning(&g, &[3, 0, 0]).is_err());
    }

    #[test]
    fn burn_order_independence() {
        let g = Multigraph::complete(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let c: Vec<u32> = (0..5).map(|_| rng.gen_range(0..5)).collect();
            let min = dhar_burning(&g, &c).unwrap();
            let max = dhar_burning_by(&g, &c, |cand| *cand.last().unwrap()).unwrap();
            let rand = dhar_burning_by(&g, &c, |cand| cand[rng.gen_range(0..cand.len())]).unwrap();
            assert_eq!(min.remain, max.remain);
            assert_eq!(min.remain, rand.remain);
        }
    }

    #[test]
    fn is_dr_examples() {
        let g = k3();
        assert!(!is_dr(&g, &[1, 1, 1]).unwrap().recurrent);
        let g4 = Multigraph::complete(4).unwrap();
        assert!(!is_dr(&g4, &[0, 2, 2, 2]).unwrap().recurrent);
        assert!(is_dr(&g4, &[0, 1, 2, 3]).unwrap().recurrent);
    }

    #[test]
    fn dr_subset_criterion_examples() {
        let verdict = is_dr_subset_criterion(&pendant_triangle(), &[1, 1, 1]).unwrap();
        assert!(!verdict.recurrent);
        match verdict.witness.unwrap() {
            Witness::ForbiddenSubset { subset, .. } => assert_eq!(subset, vec![1, 2, 3]),
            w => panic!("unexpected witness {w:?}"),
        }
        assert!(is_dr_subset_criterion(&k3(), &[0, 1, 2]).unwrap().recurrent);
        // superstable states fail with the full set as witness
        let verdict = is_dr_subset_criterion(&k3(), &[1, 1, 1]).unwrap();
        assert!(!verdict.recurrent);
    }

    #[test]
    fn acyclic_orientation_construction() {
        let g = k3();
        let o = find_compatible_acyclic_orientation(&g, &[2, 2, 2])
            .unwrap()
            .unwrap();
        assert!(o.is_acyclic() && o.is_sink_rooted() && o.is_compatible(&[2, 2, 2]).unwrap());
        assert!(find_compatible_acyclic_orientation(&pendant_triangle(), &[1, 1, 1])
            .unwrap()
            .is_none());
    }

    #[test]
    fn sr_subset_criterion_examples() {
        assert!(is_sr_subset_criterion(&pendant_triangle(), &[1, 1, 1]).unwrap().recurrent);
        assert!(is_sr_subset_criterion(&k3(), &[1, 1, 1]).unwrap().recurrent);
        let verdict = is_sr_subset_criterion(&heavy_cycle(), &[0, 5, 5, 5]).unwrap();
        assert!(!verdict.recurrent);
        match verdict.witness.unwrap() {
            Witness::ForbiddenSubset {
                subset,
                grains,
                edges,
            } => {
                assert_eq!(subset, vec![1, 2]);
                assert_eq!(grains, 5);
                assert_eq!(edges, 6);
            }
            w => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn sr_flow_agrees_with_subset_criterion() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 500 {
            let n = rng.gen_range(1..=7usize);
            let mut edges = Vec::new();
            // random spanning tree over 0..=n, then extra random edges
            for v in 1..=n {
                let u = rng.gen_range(0..v);
                edges.push((u, v, rng.gen_range(1..=2u32)));
            }
            for _ in 0..rng.gen_range(0..=n) {
                let u = rng.gen_range(0..=n);
                let v = rng.gen_range(0..=n);
                if u != v {
                    edges.push((u, v, 1));
                }
            }
            let Ok(g) = Multigraph::from_edges(n, edges) else {
                continue;
            };
            let c: Vec<u32> = (1..=n)
                .map(|i| rng.gen_range(0..g.degree(i).unwrap()))
                .collect();
            let flow = is_sr_flow(&g, &c).unwrap();
            let subset = is_sr_subset_criterion(&g, &c).unwrap();
            assert_eq!(flow.recurrent, subset.recurrent, "graph {g:?} c {c:?}");
            checked += 1;
        }
    }

    #[test]
    fn sr_flow_examples() {
        assert!(!is_sr_flow(&heavy_cycle(), &[0, 5, 5, 5]).unwrap().recurrent);
        for n in 1..=8 {
            let g = Multigraph::complete(n).unwrap();
            let cmax = crate::dynamics::max_stable(&g);
            assert!(is_sr_flow(&g, &cmax).unwrap().recurrent);
        }
    }

    #[test]
    fn sink_rooted_orientation_examples() {
        let g = k3();
        let o = find_compatible_sink_rooted_orientation(&g, &[1, 1, 1])
            .unwrap()
            .unwrap();
        let ins = o.in_degrees();
        assert!(ins[1] <= 1 && ins[2] <= 1 && ins[3] <= 1);
        assert!(o.is_compatible(&[1, 1, 1]).unwrap());

        let g4 = Multigraph::complete(4).unwrap();
        let o = find_compatible_sink_rooted_orientation(&g4, &[3, 1, 1, 1])
            .unwrap()
            .unwrap();
        assert!(o.is_compatible(&[3, 1, 1, 1]).unwrap());
        assert!(o.is_sink_rooted());

        // non-SR input yields nothing, matching the flow verdict
        assert!(find_compatible_sink_rooted_orientation(&g4, &[0, 0, 2, 2])
            .unwrap()
            .is_none());

        // guard: a vertex without a sink edge is rejected
        let chain = Multigraph::from_edges(2, [(0, 1, 1), (1, 2, 1)]).unwrap();
        assert!(matches!(
            find_compatible_sink_rooted_orientation(&chain, &[1, 0]),
            Err(Error::UnsupportedGraph(_))
        ));
        // but the subset criterion still gives the verdict there
        assert!(is_sr_subset_criterion(&chain, &[1, 0]).unwrap().recurrent);
        assert!(!is_sr_subset_criterion(&chain, &[0, 0]).unwrap().recurrent);
    }

    #[test]
    fn parking_function_examples() {
        assert!(is_parking_function(&[1, 1, 1, 1]).unwrap());
        assert!(is_parking_function(&[2, 4, 1, 3]).unwrap());
        assert!(!is_parking_function(&[2, 2]).unwrap());
        assert!(is_parking_function(&[0, 1]).is_err());
    }

    #[test]
    fn dr_complete_examples() {
        assert!(is_dr_complete(&[0, 1, 2]).unwrap());
        assert!(!is_dr_complete(&[0, 2, 2, 2]).unwrap());
        assert!(is_dr_complete(&[3, 3]).is_err());
        // agreement with general burning on K_4
        let g = Multigraph::complete(4).unwrap();
        for c0 in 0..4u32 {
            for c1 in 0..4u32 {
                for c2 in 0..4u32 {
                    for c3 in 0..4u32 {
                        let c = vec![c0, c1, c2, c3];
                        assert_eq!(
                            is_dr_complete(&c).unwrap(),
                            is_dr(&g, &c).unwrap().recurrent
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn stochastic_burning_examples() {
        assert_eq!(stochastic_burning(&[1, 1, 1]).unwrap().0, 0);
        assert_eq!(stochastic_burning(&[3, 1, 1, 1]).unwrap().0, 0);
        let (k, report) = stochastic_burning(&[0, 0, 3, 3]).unwrap();
        assert_eq!(k, 2);
        assert_eq!(report.remain, vec![1, 2]);
        assert_eq!(report.burned_order, vec![0, 4, 3]);
        assert!(stochastic_burning(&[4, 0, 0, 0]).is_err());
    }

    #[test]
    fn sr_complete_examples() {
        assert!(is_sr_complete(&[0, 2, 2, 2]).unwrap());
        assert!(!is_sr_complete(&[0, 1, 1, 3]).unwrap());
        let count = (0..27)
            .map(|t| vec![t / 9, (t / 3) % 3, t % 3])
            .filter(|c| is_sr_complete(c).unwrap())
            .count();
        assert_eq!(count, 17);
    }

    #[test]
    fn minimal_recurrence_examples() {
        let g = k3();
        assert!(is_minimal_recurrent(&g, &[0, 1, 2], RecurrenceModel::Dr).unwrap());
        assert!(is_minimal_recurrent(&g, &[1, 1, 1], RecurrenceModel::Sr).unwrap());
        assert!(matches!(
            is_minimal_recurrent(&g, &[1, 1, 1], RecurrenceModel::Dr),
            Err(Error::NotRecurrent)
        ));
        assert!(!is_minimal_recurrent(&g, &[2, 2, 2], RecurrenceModel::Dr).unwrap());
        // minimal states admit an exact-in-degree orientation
        let o = find_compatible_sink_rooted_orientation(&g, &[1, 1, 1])
            .unwrap()
            .unwrap();
        assert_eq!(&o.in_degrees()[1..], &[1, 1, 1]);
    }

    #[test]
    fn dr_implies_sr() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(2..=5usize);
            let g = Multigraph::complete(n).unwrap();
            let c: Vec<u32> = (0..n).map(|_| rng.gen_range(0..n as u32)).collect();
            if is_dr(&g, &c).unwrap().recurrent {
                assert!(is_sr_subset_criterion(&g, &c).unwrap().recurrent);
            }
        }
    }
}
