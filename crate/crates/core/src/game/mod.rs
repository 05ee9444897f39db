//! Non-alternating mean-payoff games on primitive graphs.
//!
//! Alice commits to a walk `p` of length `n` in `H`, Bob answers with a walk
//! `q` of length `n` in `G`, and Bob pays `sum_i P(q_i, p_i)`. For a fixed
//! `p`, the cheapest answer between each pair of `G`-vertices is the min-plus
//! matrix `M(p)`, and `M(p * p') = M(p) * M(p')`. The solver propagates, for
//! every pair of `H`-vertices, the set of maximal walk matrices of length `n`
//! (a [`DaggerFamily`]), reads `V_n` off it, and stops as soon as the family
//! normalized by `V_n` repeats. The value is then `(V_n2 - V_n1) / (n2 - n1)`.

mod oracle;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{Digraph, EdgeId, GraphError, VertexId, Walk};
use crate::tropical::{ExtInt, MatrixSet, TropError, TropMatrix};

pub use oracle::{brute_value_n, brute_value_table, exhaustive_value_n};

/// Which of the two graphs an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Bob's graph.
    G,
    /// Alice's graph.
    H,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::G => "G",
            Side::H => "H",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    MaxLen(usize),
    MaxSetSize(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("graph {0} is not primitive")]
    NotPrimitive(Side),
    #[error("no payoff for G-edge {g_edge} against H-edge {h_edge}")]
    MissingPayoff { g_edge: EdgeId, h_edge: EdgeId },
    #[error("payoff given twice for G-edge {g_edge} against H-edge {h_edge}")]
    DuplicatePayoff { g_edge: EdgeId, h_edge: EdgeId },
    #[error("payoff refers to G-edge {g_edge} / H-edge {h_edge}, which do not exist")]
    PayoffOutOfRange { g_edge: EdgeId, h_edge: EdgeId },
    #[error("every walk matrix is entirely +inf")]
    AllInfinite,
    #[error("limit exceeded ({limit:?}) after computing {} values", v_table.len())]
    LimitExceeded { limit: Limit, v_table: Vec<i64> },
    #[error(transparent)]
    Tropical(#[from] TropError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Two primitive graphs and a total integer payoff `P: E_G x E_H -> Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameInstance {
    g: Digraph,
    h: Digraph,
    payoff: Vec<i64>,
    n0_g: usize,
    n0_h: usize,
    edge_matrices: Vec<TropMatrix>,
}

impl GameInstance {
    /// Validates primitivity of both graphs and totality of the payoff table.
    pub fn validate(
        g: Digraph,
        h: Digraph,
        entries: impl IntoIterator<Item = ((EdgeId, EdgeId), i64)>,
    ) -> Result<Self, GameError> {
        let n0_g = g.primitivity_index().map_err(|_| GameError::NotPrimitive(Side::G))?;
        let n0_h = h.primitivity_index().map_err(|_| GameError::NotPrimitive(Side::H))?;
        let (ge, he) = (g.edge_count(), h.edge_count());
        let mut table = vec![None; ge * he];
        for ((g_edge, h_edge), value) in entries {
            if g_edge >= ge || h_edge >= he {
                return Err(GameError::PayoffOutOfRange { g_edge, h_edge });
            }
            let slot = &mut table[g_edge * he + h_edge];
            if slot.is_some() {
                return Err(GameError::DuplicatePayoff { g_edge, h_edge });
            }
            *slot = Some(value);
        }
        let payoff = table
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or(GameError::MissingPayoff {
                    g_edge: i / he,
                    h_edge: i % he,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut game = GameInstance {
            g,
            h,
            payoff,
            n0_g,
            n0_h,
            edge_matrices: Vec::new(),
        };
        game.edge_matrices = (0..game.h.edge_count()).map(|e| game.compute_edge_matrix(e)).collect();
        Ok(game)
    }

    /// Builds the payoff table from a function of `(g_edge, h_edge)`.
    pub fn from_fn(g: Digraph, h: Digraph, payoff: impl Fn(EdgeId, EdgeId) -> i64) -> Result<Self, GameError> {
        let pairs: Vec<_> = (0..g.edge_count())
            .flat_map(|a| (0..h.edge_count()).map(move |b| (a, b)))
            .map(|(a, b)| ((a, b), payoff(a, b)))
            .collect();
        Self::validate(g, h, pairs)
    }

    pub fn g(&self) -> &Digraph {
        &self.g
    }

    pub fn h(&self) -> &Digraph {
        &self.h
    }

    pub fn payoff(&self, g_edge: EdgeId, h_edge: EdgeId) -> i64 {
        self.payoff[g_edge * self.h.edge_count() + h_edge]
    }

    /// `max |P|`.
    pub fn payoff_norm(&self) -> i64 {
        self.payoff.iter().map(|p| p.abs()).max().unwrap_or(0)
    }

    /// Primitivity index of `G`.
    pub fn n0_g(&self) -> usize {
        self.n0_g
    }

    /// Primitivity index of `H`.
    pub fn n0_h(&self) -> usize {
        self.n0_h
    }

    /// Variation bound `4 * n0(G) * |P|` on walk matrices of length above `2 * n0(G)`.
    pub fn variation_bound(&self) -> i64 {
        4 * self.n0_g as i64 * self.payoff_norm()
    }

    fn compute_edge_matrix(&self, h_edge: EdgeId) -> TropMatrix {
        let n = self.g.vertex_count();
        let mut m = TropMatrix::filled(n, ExtInt::Inf);
        for (ge, &(a, b)) in self.g.edges().iter().enumerate() {
            let c = ExtInt::Fin(self.payoff(ge, h_edge));
            if c < m.get(a, b) {
                m.set(a, b, c);
            }
        }
        m
    }

    /// `M(e)`: entry `(a, b)` is the cheapest payoff over `G`-edges `a -> b`, `+inf` if none.
    pub fn edge_matrix(&self, h_edge: EdgeId) -> &TropMatrix {
        &self.edge_matrices[h_edge]
    }

    /// `M(p)` as the left-to-right min-plus product of edge matrices.
    pub fn walk_matrix(&self, p: &Walk) -> Result<TropMatrix, GameError> {
        self.edges_matrix(p.edges())
    }

    pub(crate) fn edges_matrix(&self, edges: &[EdgeId]) -> Result<TropMatrix, GameError> {
        let (&first, rest) = edges.split_first().ok_or(GraphError::EmptyWalk)?;
        let mut acc = self.edge_matrix(first).clone();
        for &e in rest {
            acc = acc.trop_mul(self.edge_matrix(e))?;
        }
        Ok(acc)
    }

    fn pair_index(&self, u: VertexId, v: VertexId) -> usize {
        u * self.h.vertex_count() + v
    }
}

/// For each ordered pair of `H`-vertices, the set of walk matrices of one length.
///
/// A set is reduced to its maximal elements whenever all of its members are
/// finite; before that only exact duplicates are merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DaggerFamily {
    n: usize,
    h_vertices: usize,
    sets: Vec<MatrixSet>,
}

impl DaggerFamily {
    /// Walk length `n` the family belongs to.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: VertexId, v: VertexId) -> &MatrixSet {
        &self.sets[u * self.h_vertices + v]
    }

    /// `((u, v), set)` in row-major pair order.
    pub fn iter(&self) -> impl Iterator<Item = ((VertexId, VertexId), &MatrixSet)> {
        let k = self.h_vertices;
        self.sets.iter().enumerate().map(move |(i, s)| ((i / k, i % k), s))
    }

    pub fn total_size(&self) -> usize {
        self.sets.iter().map(MatrixSet::len).sum()
    }

    pub fn all_nonempty(&self) -> bool {
        self.sets.iter().all(|s| !s.is_empty())
    }

    pub fn all_finite(&self) -> bool {
        self.sets.iter().all(MatrixSet::all_finite)
    }

    /// Subtracts `offset` from every finite entry of every matrix.
    pub fn normalized(&self, offset: i64) -> Result<DaggerFamily, TropError> {
        let neg = offset.checked_neg().ok_or(TropError::Overflow)?;
        Ok(DaggerFamily {
            n: self.n,
            h_vertices: self.h_vertices,
            sets: self.sets.iter().map(|s| s.shift(neg)).collect::<Result<_, _>>()?,
        })
    }

    /// Same sets, ignoring the recorded length.
    pub fn same_sets(&self, other: &DaggerFamily) -> bool {
        self.sets == other.sets
    }

    fn write_canonical(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.h_vertices as u32).to_be_bytes());
        for s in &self.sets {
            s.write_canonical(out);
        }
    }
}

fn prune(candidates: MatrixSet) -> MatrixSet {
    if candidates.all_finite() {
        candidates.dagger()
    } else {
        candidates
    }
}

/// Length-1 family: the deduplicated edge matrices between each vertex pair.
pub fn initial_family(game: &GameInstance) -> DaggerFamily {
    let k = game.h.vertex_count();
    let mut buckets: Vec<Vec<TropMatrix>> = vec![Vec::new(); k * k];
    for (e, &(u, v)) in game.h.edges().iter().enumerate() {
        buckets[game.pair_index(u, v)].push(game.edge_matrix(e).clone());
    }
    DaggerFamily {
        n: 1,
        h_vertices: k,
        sets: buckets.into_iter().map(|b| prune(b.into_iter().collect())).collect(),
    }
}

/// Extends every family member by one `H`-edge and prunes again.
pub fn step_family(game: &GameInstance, family: &DaggerFamily) -> Result<DaggerFamily, GameError> {
    let k = game.h.vertex_count();
    let mut buckets: Vec<Vec<TropMatrix>> = vec![Vec::new(); k * k];
    for (e, &(v, w)) in game.h.edges().iter().enumerate() {
        let step = game.edge_matrix(e);
        for u in 0..k {
            let bucket = &mut buckets[u * k + w];
            for f in family.get(u, v) {
                bucket.push(f.trop_mul(step)?);
            }
        }
    }
    Ok(DaggerFamily {
        n: family.n + 1,
        h_vertices: k,
        sets: buckets.into_iter().map(|b| prune(b.into_iter().collect())).collect(),
    })
}

/// `V_n = max over pairs, max over f, of min f`.
pub fn value_n(family: &DaggerFamily) -> Result<i64, GameError> {
    family
        .sets
        .iter()
        .flat_map(|s| s.iter())
        .filter_map(|f| f.min().finite())
        .max()
        .ok_or(GameError::AllInfinite)
}

/// Successive families of lengths 1, 2, 3, ...
pub struct Families<'a> {
    game: &'a GameInstance,
    next: Option<DaggerFamily>,
}

impl<'a> Families<'a> {
    pub fn new(game: &'a GameInstance) -> Self {
        Families {
            game,
            next: Some(initial_family(game)),
        }
    }
}

impl Iterator for Families<'_> {
    type Item = Result<DaggerFamily, GameError>;

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.next.take()?;
        match step_family(self.game, &current) {
            Ok(f) => self.next = Some(f),
            Err(e) => return Some(Err(e)),
        }
        Some(Ok(current))
    }
}

/// A family normalized by its own `V_n`, with a SHA-256 digest of its canonical bytes.
#[derive(Debug, Clone)]
pub struct Profile {
    pub family: DaggerFamily,
    pub digest: [u8; 32],
}

impl Profile {
    pub fn new(family: &DaggerFamily, v_n: i64) -> Result<Self, GameError> {
        let family = family.normalized(v_n)?;
        let mut bytes = Vec::new();
        family.write_canonical(&mut bytes);
        let digest = Sha256::digest(&bytes).into();
        Ok(Profile { family, digest })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_len: usize,
    pub max_set_size: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_len: 10_000,
            max_set_size: 100_000,
        }
    }
}

/// Exact value with its periodicity certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub value: Ratio<i64>,
    pub n1: usize,
    pub n2: usize,
    pub k: usize,
    pub v_dagger: i64,
    /// `V_1, ..., V_n2`.
    pub v_table: Vec<i64>,
    pub n0_g: usize,
    pub n0_h: usize,
    pub iterations: usize,
    pub elapsed: Duration,
    /// `4 * n0(G) * |P|`.
    pub c0: i64,
    /// Largest `|entry|` seen in any normalized family.
    pub c_observed: i64,
}

impl SolveReport {
    /// `V_n` for `1 <= n <= n2`.
    pub fn v(&self, n: usize) -> i64 {
        self.v_table[n - 1]
    }

    /// `V_{n+1} - V_n` for the residue class of `n` in the periodic regime.
    pub fn increment(&self, n: usize) -> i64 {
        let r = self.n1 + (n - self.n1) % self.k;
        self.v(r + 1) - self.v(r)
    }
}

/// Serializes as `{"num": .., "den": ..}`.
pub fn serialize_ratio<S: Serializer>(r: &Ratio<i64>, s: S) -> Result<S::Ok, S::Error> {
    let mut st = s.serialize_struct("Ratio", 2)?;
    st.serialize_field("num", r.numer())?;
    st.serialize_field("den", r.denom())?;
    st.end()
}

impl Serialize for SolveReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        struct R<'a>(&'a Ratio<i64>);
        impl Serialize for R<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                serialize_ratio(self.0, s)
            }
        }
        let mut st = s.serialize_struct("SolveReport", 8)?;
        st.serialize_field("value", &R(&self.value))?;
        st.serialize_field("k", &self.k)?;
        st.serialize_field("v_dagger", &self.v_dagger)?;
        st.serialize_field("n1", &self.n1)?;
        st.serialize_field("n2", &self.n2)?;
        st.serialize_field("n0_g", &self.n0_g)?;
        st.serialize_field("n0_h", &self.n0_h)?;
        st.serialize_field("v_table", &self.v_table)?;
        st.end()
    }
}

/// Iterates families until the normalized profile repeats.
pub fn solve(game: &GameInstance, limits: Limits) -> Result<SolveReport, GameError> {
    let started = Instant::now();
    let threshold = game.n0_g.max(game.n0_h);
    let mut v_table = Vec::new();
    let mut by_digest: HashMap<[u8; 32], Vec<usize>> = HashMap::new();
    let mut seen: Vec<(usize, i64, DaggerFamily)> = Vec::new();
    let mut c_observed = 0i64;

    for family in Families::new(game) {
        let family = family?;
        let n = family.len();
        if family.total_size() > limits.max_set_size {
            return Err(GameError::LimitExceeded {
                limit: Limit::MaxSetSize(limits.max_set_size),
                v_table,
            });
        }
        let v_n = value_n(&family)?;
        v_table.push(v_n);

        if n >= threshold && family.all_nonempty() && family.all_finite() {
            let profile = Profile::new(&family, v_n)?;
            let candidates = by_digest.entry(profile.digest).or_default();
            // digest equality alone is not trusted
            if let Some(&i) = candidates.iter().find(|&&i| seen[i].2.same_sets(&profile.family)) {
                let (n1, v_n1, _) = seen[i];
                let k = n - n1;
                let v_dagger = v_n - v_n1;
                return Ok(SolveReport {
                    value: Ratio::new(v_dagger, k as i64),
                    n1,
                    n2: n,
                    k,
                    v_dagger,
                    v_table,
                    n0_g: game.n0_g,
                    n0_h: game.n0_h,
                    iterations: n,
                    elapsed: started.elapsed(),
                    c0: game.variation_bound(),
                    c_observed,
                });
            }
            candidates.push(seen.len());
            let bound = profile
                .family
                .sets
                .iter()
                .flat_map(|s| s.iter())
                .flat_map(|m| m.entries().iter().filter_map(|e| e.finite()))
                .map(|x| x.abs())
                .max()
                .unwrap_or(0);
            c_observed = c_observed.max(bound);
            seen.push((n, v_n, profile.family));
        }
        if n >= limits.max_len {
            return Err(GameError::LimitExceeded {
                limit: Limit::MaxLen(limits.max_len),
                v_table,
            });
        }
    }
    unreachable!("family iteration never ends on its own")
}

/// `V_1, ..., V_{n_max}` computed from families.
pub fn vn_table(game: &GameInstance, n_max: usize) -> Result<Vec<i64>, GameError> {
    Families::new(game)
        .take(n_max)
        .map(|f| f.and_then(|f| value_n(&f)))
        .collect()
}

/// Recomputes values up to `n1 + 3k` and checks `V_{n+k} = V_n + V_dagger`
/// on `[n1, n1 + 2k]` as well as `value = V_dagger / k`.
pub fn verify_certificate(game: &GameInstance, report: &SolveReport) -> Result<bool, GameError> {
    let k = report.k;
    let table = vn_table(game, report.n1 + 3 * k)?;
    let v = |n: usize| table[n - 1];
    let periodic = (report.n1..=report.n1 + 2 * k).all(|n| v(n + k) == v(n) + report.v_dagger);
    let consistent =
        table[..report.v_table.len()] == report.v_table[..] && report.value == Ratio::new(report.v_dagger, k as i64);
    Ok(periodic && consistent)
}
