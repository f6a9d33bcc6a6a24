//! Multigraph data model with a distinguished sink vertex 0.
//!
//! Vertices are the dense range `0..=n`, vertex 0 is the sink. Edges are
//! stored as an unordered-pair -> multiplicity map; parallel edges are
//! multiplicities, loops are rejected. Graphs are immutable after
//! construction and connectivity is validated up front.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Deserialize;

use crate::error::{Error, Result};

/// Labelled loop-free multigraph on vertices `{0..n}` with vertex 0 as sink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    n: usize,
    edges: BTreeMap<(usize, usize), u32>,
    degrees: Vec<u32>,
    adjacency: Vec<Vec<(usize, u32)>>,
}

impl Multigraph {
    /// Builds a graph from `(u, v, multiplicity)` triples. Duplicate pairs
    /// are summed. Fails on loops, out-of-range vertices, zero
    /// multiplicities, or a disconnected result.
    pub fn from_edges(n: usize, raw: impl IntoIterator<Item = (usize, usize, u32)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("need at least one non-sink vertex".into()));
        }
        let mut edges: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for (u, v, m) in raw {
            if u == v {
                return Err(Error::InvalidGraph(format!("loop at vertex {u}")));
            }
            if u > n {
                return Err(Error::VertexOutOfRange { vertex: u, max: n });
            }
            if v > n {
                return Err(Error::VertexOutOfRange { vertex: v, max: n });
            }
            if m == 0 {
                return Err(Error::InvalidGraph(format!(
                    "edge {{{u},{v}}} has multiplicity 0"
                )));
            }
            let key = (u.min(v), u.max(v));
            *edges.entry(key).or_insert(0) += m;
        }

        let mut degrees = vec![0u32; n + 1];
        let mut adjacency = vec![Vec::new(); n + 1];
        for (&(u, v), &m) in &edges {
            degrees[u] += m;
            degrees[v] += m;
            adjacency[u].push((v, m));
            adjacency[v].push((u, m));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }

        let g = Multigraph {
            n,
            edges,
            degrees,
            adjacency,
        };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    /// The complete graph `K_n^0`: one edge between any two distinct
    /// vertices of `{0..n}`.
    pub fn complete(n: usize) -> Result<Self> {
        let mut raw = Vec::new();
        for u in 0..=n {
            for v in (u + 1)..=n {
                raw.push((u, v, 1));
            }
        }
        Self::from_edges(n, raw)
    }

    /// `K_n^(l)`: complete graph where every sink edge `{k,0}` has
    /// multiplicity `l` and non-sink pairs have multiplicity 1.
    pub fn complete_multi_sink(n: usize, sink_mult: u32) -> Result<Self> {
        if sink_mult == 0 {
            return Err(Error::InvalidGraph("sink multiplicity must be positive".into()));
        }
        let mut raw = Vec::new();
        for v in 1..=n {
            raw.push((0, v, sink_mult));
        }
        for u in 1..=n {
            for v in (u + 1)..=n {
                raw.push((u, v, 1));
            }
        }
        Self::from_edges(n, raw)
    }

    /// Number of non-sink vertices.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of vertices including the sink.
    pub fn num_vertices(&self) -> usize {
        self.n + 1
    }

    pub fn degree(&self, i: usize) -> Result<u32> {
        self.check_vertex(i)?;
        Ok(self.degrees[i])
    }

    pub(crate) fn degree_unchecked(&self, i: usize) -> u32 {
        self.degrees[i]
    }

    /// Neighbours of `i` with multiplicities, ascending by vertex label
    /// (the sink, when adjacent, comes first).
    pub fn neighbors(&self, i: usize) -> &[(usize, u32)] {
        &self.adjacency[i]
    }

    /// Multiplicity of the unordered pair `{u,v}` (0 if absent).
    pub fn multiplicity(&self, u: usize, v: usize) -> u32 {
        if u == v {
            return 0;
        }
        self.edges
            .get(&(u.min(v), u.max(v)))
            .copied()
            .unwrap_or(0)
    }

    /// Total number of edges, counted with multiplicity.
    pub fn edge_count(&self) -> u64 {
        self.edges.values().map(|&m| m as u64).sum()
    }

    /// Unordered pairs with multiplicities, in sorted order.
    pub fn edge_pairs(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.edges.iter().map(|(&(u, v), &m)| (u, v, m))
    }

    /// Every edge copy materialized as an unordered pair, sorted; copies of
    /// a multiple edge are adjacent. This ordering is the contract that
    /// `Orientation` relies on.
    pub fn edge_copies(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count() as usize);
        for (&(u, v), &m) in &self.edges {
            for _ in 0..m {
                out.push((u, v));
            }
        }
        out
    }

    /// True when every pair of distinct vertices is joined by exactly one
    /// edge (i.e. the graph is `K_n^0`).
    pub fn is_complete_simple(&self) -> bool {
        for u in 0..=self.n {
            for v in (u + 1)..=self.n {
                if self.multiplicity(u, v) != 1 {
                    return false;
                }
            }
        }
        true
    }

    /// Whether the sink-deleted graph `G([n])` is acyclic (as a multigraph:
    /// any multiple edge counts as a cycle).
    pub fn sink_deleted_acyclic(&self) -> bool {
        let mut parent: Vec<usize> = (0..=self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (&(u, v), &m) in &self.edges {
            if u == 0 {
                continue;
            }
            if m > 1 {
                return false;
            }
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru == rv {
                return false;
            }
            parent[ru] = rv;
        }
        true
    }

    /// Edge count of the induced subgraph `G(A)`, with multiplicity.
    pub fn edges_within(&self, subset: &VertexSubset) -> Result<u64> {
        subset.check(self.n)?;
        let mut total = 0u64;
        for (&(u, v), &m) in &self.edges {
            if subset.contains(u) && subset.contains(v) {
                total += m as u64;
            }
        }
        Ok(total)
    }

    /// Induced subgraph view on a sink-free vertex subset. The view may be
    /// disconnected; only degree and edge-count queries are supported.
    pub fn induced_subgraph<'a>(&'a self, subset: &'a VertexSubset) -> Result<SubgraphView<'a>> {
        subset.check(self.n)?;
        Ok(SubgraphView {
            graph: self,
            subset,
        })
    }

    fn check_vertex(&self, i: usize) -> Result<()> {
        if i > self.n {
            return Err(Error::VertexOutOfRange {
                vertex: i,
                max: self.n,
            });
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n + 1];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n + 1
    }
}

/// A subset of the non-sink vertices `{1..n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSubset {
    members: BTreeSet<usize>,
}

impl VertexSubset {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        VertexSubset {
            members: members.into_iter().collect(),
        }
    }

    /// All of `{1..n}`.
    pub fn full(n: usize) -> Self {
        Self::new(1..=n)
    }

    pub fn empty() -> Self {
        Self::new([])
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.members.iter().copied().collect()
    }

    pub(crate) fn check(&self, n: usize) -> Result<()> {
        for &v in &self.members {
            if v == 0 {
                return Err(Error::InvalidInput(
                    "vertex subset must not contain the sink".into(),
                ));
            }
            if v > n {
                return Err(Error::VertexOutOfRange { vertex: v, max: n });
            }
        }
        Ok(())
    }
}

/// Read-only induced-subgraph view.
#[derive(Debug, Clone, Copy)]
pub struct SubgraphView<'a> {
    graph: &'a Multigraph,
    subset: &'a VertexSubset,
}

impl SubgraphView<'_> {
    /// Degree of `i` inside the view; `i` must be a member.
    pub fn degree(&self, i: usize) -> Result<u32> {
        if !self.subset.contains(i) {
            return Err(Error::InvalidInput(format!(
                "vertex {i} is not in the induced subset"
            )));
        }
        Ok(self
            .graph
            .neighbors(i)
            .iter()
            .filter(|&&(j, _)| self.subset.contains(j))
            .map(|&(_, m)| m)
            .sum())
    }

    pub fn edge_count(&self) -> u64 {
        self.graph.edges_within(self.subset).expect("subset validated")
    }
}

#[derive(Debug, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<Vec<u64>>,
}

impl Multigraph {
    /// Parses the graph JSON format
    /// `{"n": int, "edges": [[u, v, mult], ...]}` where `mult` is optional
    /// (default 1) and duplicate pairs are summed.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("bad graph JSON: {e}")))?;
        let mut raw = Vec::with_capacity(file.edges.len());
        for entry in &file.edges {
            match entry.as_slice() {
                [u, v] => raw.push((*u as usize, *v as usize, 1u32)),
                [u, v, m] => {
                    let m = u32::try_from(*m)
                        .map_err(|_| Error::InvalidInput("multiplicity too large".into()))?;
                    raw.push((*u as usize, *v as usize, m));
                }
                _ => {
                    return Err(Error::InvalidInput(
                        "each edge must be [u, v] or [u, v, mult]".into(),
                    ))
                }
            }
        }
        Self::from_edges(file.n, raw)
    }
}
