//! Finite directed multigraphs, labeled graphs and walks.
//!
//! Edges are identified by their position in the edge list. Every place where
//! a choice between edges has to be made deterministically (walk enumeration,
//! backtracking through dynamic programs) uses ascending [`EdgeId`].

use std::collections::VecDeque;

use num_integer::Integer;
use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;

/// Longest walk length [`enumerate_walks`] accepts unless told otherwise.
pub const DEFAULT_WALK_GUARD: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge {edge} references vertex {vertex}, but the graph has {vertex_count} vertices")]
    VertexOutOfRange {
        edge: EdgeId,
        vertex: VertexId,
        vertex_count: usize,
    },
    #[error("edge {0} is not an edge of the graph")]
    UnknownEdge(EdgeId),
    #[error("graph is not irreducible")]
    NotIrreducible,
    #[error("graph is not primitive")]
    NotPrimitive,
    #[error("a walk must contain at least one edge")]
    EmptyWalk,
    #[error("edges {0} and {1} do not meet: target of the first is not the source of the second")]
    Discontinuous(EdgeId, EdgeId),
    #[error("cannot concatenate: first walk ends at {end}, second starts at {start}")]
    EndpointMismatch { end: VertexId, start: VertexId },
    #[error("walk length {n} exceeds enumeration guard {guard}")]
    GuardExceeded { n: usize, guard: usize },
    #[error("walk length must be at least 1")]
    ZeroLength,
    #[error("{labels} labels supplied for {edges} edges")]
    LabelCount { labels: usize, edges: usize },
    #[error("label {0:?} is not in the alphabet")]
    UnknownSymbol(String),
    #[error("symbol {0:?} appears twice in the alphabet")]
    DuplicateSymbol(String),
    #[error("primitivity index exceeded the Wielandt bound {0}")]
    WielandtBound(usize),
}

/// Finite directed multigraph; parallel edges and self-loops allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Digraph {
    vertex_count: usize,
    edges: Vec<(VertexId, VertexId)>,
    out_edges: Vec<Vec<EdgeId>>,
}

impl Digraph {
    pub fn new(vertex_count: usize, edges: Vec<(VertexId, VertexId)>) -> Result<Self, GraphError> {
        let mut out_edges = vec![Vec::new(); vertex_count];
        for (id, &(s, t)) in edges.iter().enumerate() {
            for v in [s, t] {
                if v >= vertex_count {
                    return Err(GraphError::VertexOutOfRange {
                        edge: id,
                        vertex: v,
                        vertex_count,
                    });
                }
            }
            out_edges[s].push(id);
        }
        Ok(Digraph {
            vertex_count,
            edges,
            out_edges,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn source(&self, e: EdgeId) -> VertexId {
        self.edges[e].0
    }

    pub fn target(&self, e: EdgeId) -> VertexId {
        self.edges[e].1
    }

    /// Outgoing edges of `v` in ascending id order.
    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out_edges[v]
    }

    fn reachable_from(&self, start: VertexId, reverse: bool) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count];
        let mut queue = VecDeque::new();
        // Walks of length >= 1: seed with the direct neighbours of `start`.
        for &(s, t) in &self.edges {
            let (from, to) = if reverse { (t, s) } else { (s, t) };
            if from == start && !seen[to] {
                seen[to] = true;
                queue.push_back(to);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &(s, t) in &self.edges {
                let (from, to) = if reverse { (t, s) } else { (s, t) };
                if from == v && !seen[to] {
                    seen[to] = true;
                    queue.push_back(to);
                }
            }
        }
        seen
    }

    /// Every ordered vertex pair is joined by a walk of length at least one.
    pub fn is_irreducible(&self) -> bool {
        if self.vertex_count == 0 || self.edges.is_empty() {
            return false;
        }
        // Strong connectivity plus vertex 0 lying on a cycle covers every pair,
        // because any v -> w walk can be routed through 0.
        self.reachable_from(0, false).iter().all(|&r| r) && self.reachable_from(0, true).iter().all(|&r| r)
    }

    /// Gcd of all cycle lengths, from BFS levels.
    pub fn period(&self) -> Result<usize, GraphError> {
        if !self.is_irreducible() {
            return Err(GraphError::NotIrreducible);
        }
        let mut level = vec![usize::MAX; self.vertex_count];
        level[0] = 0;
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for &e in self.out_edges(v) {
                let w = self.target(e);
                if level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        let g = self.edges.iter().fold(0usize, |acc, &(s, t)| {
            let diff = (level[s] + 1).abs_diff(level[t]);
            acc.gcd(&diff)
        });
        Ok(g)
    }

    pub fn is_primitive(&self) -> bool {
        self.is_irreducible() && self.period() == Ok(1)
    }

    /// Least `n0` such that every ordered vertex pair is joined by a walk of every length `n >= n0`.
    pub fn primitivity_index(&self) -> Result<usize, GraphError> {
        if !self.is_primitive() {
            return Err(GraphError::NotPrimitive);
        }
        let n = self.vertex_count;
        let cap = (n - 1) * (n - 1) + 1;
        let mut adj = vec![false; n * n];
        for &(s, t) in &self.edges {
            adj[s * n + t] = true;
        }
        let mut power = adj.clone();
        for exp in 1..=cap {
            if power.iter().all(|&b| b) {
                return Ok(exp);
            }
            let mut next = vec![false; n * n];
            for i in 0..n {
                for k in 0..n {
                    if power[i * n + k] {
                        for j in 0..n {
                            next[i * n + j] |= adj[k * n + j];
                        }
                    }
                }
            }
            power = next;
        }
        Err(GraphError::WielandtBound(cap))
    }

    /// Checks that `edges` form a walk and wraps them.
    pub fn walk(&self, edges: Vec<EdgeId>) -> Result<Walk, GraphError> {
        if edges.is_empty() {
            return Err(GraphError::EmptyWalk);
        }
        for &e in &edges {
            if e >= self.edge_count() {
                return Err(GraphError::UnknownEdge(e));
            }
        }
        for pair in edges.windows(2) {
            if self.target(pair[0]) != self.source(pair[1]) {
                return Err(GraphError::Discontinuous(pair[0], pair[1]));
            }
        }
        Ok(Walk {
            start: self.source(edges[0]),
            end: self.target(edges[edges.len() - 1]),
            edges,
        })
    }
}

/// Nonempty walk in a fixed [`Digraph`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Walk {
    edges: Vec<EdgeId>,
    start: VertexId,
    end: VertexId,
}

impl Walk {
    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn end(&self) -> VertexId {
        self.end
    }

    pub fn into_edges(self) -> Vec<EdgeId> {
        self.edges
    }

    pub fn concat(&self, other: &Walk) -> Result<Walk, GraphError> {
        if self.end != other.start {
            return Err(GraphError::EndpointMismatch {
                end: self.end,
                start: other.start,
            });
        }
        let mut edges = self.edges.clone();
        edges.extend_from_slice(&other.edges);
        Ok(Walk {
            edges,
            start: self.start,
            end: other.end,
        })
    }
}

/// Digraph with one symbol per edge, drawn from an ordered alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDigraph {
    graph: Digraph,
    labels: Vec<usize>,
    alphabet: Vec<String>,
}

impl LabeledDigraph {
    /// `alphabet = None` takes the labels in order of first appearance.
    pub fn new(graph: Digraph, labels: Vec<String>, alphabet: Option<Vec<String>>) -> Result<Self, GraphError> {
        if labels.len() != graph.edge_count() {
            return Err(GraphError::LabelCount {
                labels: labels.len(),
                edges: graph.edge_count(),
            });
        }
        let alphabet = match alphabet {
            Some(a) => {
                for (i, s) in a.iter().enumerate() {
                    if a[..i].contains(s) {
                        return Err(GraphError::DuplicateSymbol(s.clone()));
                    }
                }
                a
            }
            None => {
                let mut a: Vec<String> = Vec::new();
                for l in &labels {
                    if !a.contains(l) {
                        a.push(l.clone());
                    }
                }
                a
            }
        };
        let labels = labels
            .iter()
            .map(|l| {
                alphabet
                    .iter()
                    .position(|s| s == l)
                    .ok_or_else(|| GraphError::UnknownSymbol(l.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LabeledDigraph {
            graph,
            labels,
            alphabet,
        })
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    /// Index into [`alphabet`](Self::alphabet) of the label of `e`.
    pub fn label_index(&self, e: EdgeId) -> usize {
        self.labels[e]
    }

    pub fn label(&self, e: EdgeId) -> &str {
        &self.alphabet[self.labels[e]]
    }

    pub fn word_of(&self, walk: &Walk) -> Vec<usize> {
        walk.edges().iter().map(|&e| self.labels[e]).collect()
    }

    /// Same graph, with a different (super-)alphabet.
    pub fn with_alphabet(&self, alphabet: Vec<String>) -> Result<Self, GraphError> {
        let labels = (0..self.graph.edge_count())
            .map(|e| self.label(e).to_string())
            .collect();
        LabeledDigraph::new(self.graph.clone(), labels, Some(alphabet))
    }
}

/// Lazily enumerates walks of a fixed length in lexicographic edge-id order.
pub struct Walks<'g> {
    graph: &'g Digraph,
    len: usize,
    to: Option<VertexId>,
    starts: Vec<EdgeId>,
    // stack[i] = index into the candidate list for position i
    stack: Vec<usize>,
    path: Vec<EdgeId>,
    done: bool,
}

impl<'g> Walks<'g> {
    fn candidates(&self, depth: usize) -> &[EdgeId] {
        if depth == 0 {
            &self.starts
        } else {
            self.graph.out_edges(self.graph.target(self.path[depth - 1]))
        }
    }

    // Advance to the next full-length path, or mark done.
    fn descend(&mut self) {
        loop {
            let depth = self.path.len();
            if depth == self.len {
                return;
            }
            let idx = self.stack[depth];
            let cand = self.candidates(depth);
            if idx < cand.len() {
                let e = cand[idx];
                self.path.push(e);
                if depth + 1 < self.len {
                    self.stack[depth + 1] = 0;
                }
            } else if !self.backtrack() {
                return;
            }
        }
    }

    fn backtrack(&mut self) -> bool {
        match self.path.pop() {
            Some(_) => {
                let depth = self.path.len();
                self.stack[depth] += 1;
                true
            }
            None => {
                self.done = true;
                false
            }
        }
    }
}

impl Iterator for Walks<'_> {
    type Item = Walk;

    fn next(&mut self) -> Option<Walk> {
        loop {
            if self.done {
                return None;
            }
            self.descend();
            if self.done {
                return None;
            }
            let walk = Walk {
                edges: self.path.clone(),
                start: self.graph.source(self.path[0]),
                end: self.graph.target(self.path[self.len - 1]),
            };
            self.backtrack();
            if self.to.is_none_or(|t| t == walk.end) {
                return Some(walk);
            }
        }
    }
}

/// All length-`n` walks, optionally pinned at either end. Refuses `n > DEFAULT_WALK_GUARD`.
pub fn enumerate_walks(
    g: &Digraph,
    n: usize,
    from: Option<VertexId>,
    to: Option<VertexId>,
) -> Result<Walks<'_>, GraphError> {
    enumerate_walks_guarded(g, n, from, to, DEFAULT_WALK_GUARD)
}

pub fn enumerate_walks_guarded(
    g: &Digraph,
    n: usize,
    from: Option<VertexId>,
    to: Option<VertexId>,
    guard: usize,
) -> Result<Walks<'_>, GraphError> {
    if n == 0 {
        return Err(GraphError::ZeroLength);
    }
    if n > guard {
        return Err(GraphError::GuardExceeded { n, guard });
    }
    let starts = (0..g.edge_count())
        .filter(|&e| from.is_none_or(|f| g.source(e) == f))
        .collect();
    Ok(Walks {
        graph: g,
        len: n,
        to,
        starts,
        stack: vec![0; n],
        path: Vec::with_capacity(n),
        done: false,
    })
}
