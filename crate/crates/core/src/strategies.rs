//! Optimal strategies: non-improvable walks, best responses, a finite
//! automaton for the shift of bi-infinite non-improvable walks, and a
//! periodic pair of walks attaining the game value.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_rational::Ratio;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::game::{serialize_ratio, DaggerFamily, Families, GameError, GameInstance, SolveReport};
use crate::graph::{enumerate_walks, Digraph, EdgeId, GraphError, VertexId, Walk};
use crate::tropical::{ExtInt, MatrixSet, TropError, TropMatrix};

/// Longest walks [`PrefixLayers`] will hold.
pub const LANGUAGE_LEN_GUARD: usize = 128;
/// Largest word set any enumeration here will hold.
pub const WORD_GUARD: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("no G-walk {from} -> {to} of the required length")]
    Infeasible { from: VertexId, to: VertexId },
    #[error("automaton is empty after trimming")]
    EmptyAutomaton,
    #[error("graph has no cycle")]
    Acyclic,
    #[error("periodic pair has mean {mean}, solver value is {value}")]
    MeanMismatch { mean: Ratio<i64>, value: Ratio<i64> },
    #[error("report does not describe a repeat of the normalized families")]
    BadCertificate,
    #[error("more than {0} words")]
    TooManyWords(usize),
    #[error("walk length {n} exceeds guard {guard}")]
    LengthGuard { n: usize, guard: usize },
    #[error("G has no vertex {0}")]
    NoSuchVertex(VertexId),
    #[error("weights and edges differ in number")]
    WeightCount,
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Tropical(#[from] TropError),
}

/// Walks of length `n` in `H` whose matrix is maximal among all walks with
/// the same endpoints, in lexicographic order. Enumerates every walk.
pub fn non_improvable_walks(game: &GameInstance, n: usize) -> Result<Vec<Walk>, StrategyError> {
    let mut all = Vec::new();
    let mut classes: BTreeMap<(VertexId, VertexId), Vec<TropMatrix>> = BTreeMap::new();
    for p in enumerate_walks(game.h(), n, None, None)? {
        let m = game.walk_matrix(&p)?;
        classes.entry((p.start(), p.end())).or_default().push(m.clone());
        all.push((p, m));
    }
    let maximal: BTreeMap<_, MatrixSet> = classes
        .into_iter()
        .map(|(k, ms)| (k, ms.into_iter().collect::<MatrixSet>().dagger()))
        .collect();
    Ok(all
        .into_iter()
        .filter(|(p, m)| maximal[&(p.start(), p.end())].contains(m))
        .map(|(p, _)| p)
        .collect())
}

/// Same set as [`non_improvable_walks`], built by extending only prefixes
/// that are themselves non-improvable. Only valid once every length-`n` matrix
/// is finite; shorter lengths fall back to full enumeration.
pub fn non_improvable_walks_by_prefix(game: &GameInstance, n: usize) -> Result<Vec<Walk>, StrategyError> {
    if n < game.n0_g() {
        return non_improvable_walks(game, n);
    }
    if n > LANGUAGE_LEN_GUARD {
        return Err(StrategyError::LengthGuard {
            n,
            guard: LANGUAGE_LEN_GUARD,
        });
    }
    let k = game.h().vertex_count();
    // maximal[len - 1][s * k + t]
    let mut maximal: Vec<Vec<MatrixSet>> = Vec::with_capacity(n);
    for family in Families::new(game).take(n) {
        maximal.push(family?.iter().map(|(_, set)| set.dagger()).collect());
    }
    let keep = |len: usize, s: VertexId, t: VertexId, m: &TropMatrix| maximal[len - 1][s * k + t].contains(m);

    let h = game.h();
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<EdgeId>, TropMatrix)> = Vec::new();
    for e in (0..h.edge_count()).rev() {
        let m = game.edge_matrix(e).clone();
        if keep(1, h.source(e), h.target(e), &m) {
            stack.push((vec![e], m));
        }
    }
    while let Some((path, m)) = stack.pop() {
        if path.len() == n {
            out.push(h.walk(path)?);
            if out.len() > WORD_GUARD {
                return Err(StrategyError::TooManyWords(WORD_GUARD));
            }
            continue;
        }
        let start = h.source(path[0]);
        let end = h.target(path[path.len() - 1]);
        for &e in h.out_edges(end).iter().rev() {
            let next = m.trop_mul(game.edge_matrix(e))?;
            if keep(path.len() + 1, start, h.target(e), &next) {
                let mut p = path.clone();
                p.push(e);
                stack.push((p, next));
            }
        }
    }
    Ok(out)
}

/// Optimal answers to `p` between two `G`-vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestResponses {
    pub cost: i64,
    /// Lexicographic order; a single walk in [`ResponseMode::Canonical`].
    pub walks: Vec<Walk>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseMode {
    All,
    /// Only the lexicographically least optimal walk.
    Canonical,
}

/// `G`-walks `v -> w` of length `|p|` with total payoff `M(p)[v][w]`.
pub fn best_responses(
    game: &GameInstance,
    p: &Walk,
    v: VertexId,
    w: VertexId,
    mode: ResponseMode,
) -> Result<BestResponses, StrategyError> {
    let g = game.g();
    let n = p.len();
    if v >= g.vertex_count() || w >= g.vertex_count() {
        return Err(StrategyError::NoSuchVertex(v.max(w)));
    }
    // to_go[i][x]: cheapest completion from x after i steps
    let mut to_go = vec![vec![ExtInt::Inf; g.vertex_count()]; n + 1];
    to_go[n][w] = ExtInt::Fin(0);
    for i in (0..n).rev() {
        for (ge, &(a, b)) in g.edges().iter().enumerate() {
            let c = to_go[i + 1][b].checked_add_int(game.payoff(ge, p.edges()[i]))?;
            if c < to_go[i][a] {
                to_go[i][a] = c;
            }
        }
    }
    let cost = to_go[0][v]
        .finite()
        .ok_or(StrategyError::Infeasible { from: v, to: w })?;

    let mut walks = Vec::new();
    let mut path = Vec::with_capacity(n);
    collect_responses(game, p.edges(), &to_go, v, &mut path, &mut walks, mode)?;
    Ok(BestResponses { cost, walks })
}

fn collect_responses(
    game: &GameInstance,
    p: &[EdgeId],
    to_go: &[Vec<ExtInt>],
    at: VertexId,
    path: &mut Vec<EdgeId>,
    out: &mut Vec<Walk>,
    mode: ResponseMode,
) -> Result<(), StrategyError> {
    let i = path.len();
    if i == p.len() {
        out.push(game.g().walk(path.clone())?);
        return Ok(());
    }
    for &ge in game.g().out_edges(at) {
        let b = game.g().target(ge);
        if to_go[i + 1][b].checked_add_int(game.payoff(ge, p[i]))? == to_go[i][at] {
            path.push(ge);
            collect_responses(game, p, to_go, b, path, out, mode)?;
            path.pop();
            if mode == ResponseMode::Canonical && !out.is_empty() {
                return Ok(());
            }
            if out.len() > WORD_GUARD {
                return Err(StrategyError::TooManyWords(WORD_GUARD));
            }
        }
    }
    Ok(())
}

/// Per length `1..=n_max`: the largest `|M(p)[a][b] - V_n|` over non-improvable
/// `p`, or `None` while some matrix is not yet finite.
pub fn non_improvable_gaps(game: &GameInstance, n_max: usize) -> Result<Vec<Option<i64>>, StrategyError> {
    let mut gaps = Vec::with_capacity(n_max);
    for family in Families::new(game).take(n_max) {
        let family = family?;
        if !(family.all_finite() && family.all_nonempty()) {
            gaps.push(None);
            continue;
        }
        let v = crate::game::value_n(&family)?;
        let mut gap = 0i64;
        for (_, set) in family.iter() {
            for m in set {
                for x in m.entries().iter().filter_map(|x| x.finite()) {
                    gap = gap.max(x.checked_sub(v).ok_or(TropError::Overflow)?.abs());
                }
            }
        }
        gaps.push(Some(gap));
    }
    Ok(gaps)
}

/// Prefix data of a non-improvable walk: endpoints, length residue, and its
/// matrix minus `V` of its length.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct AutomatonState {
    pub u: VertexId,
    pub v: VertexId,
    /// Length is `n1 + r` modulo `k`.
    pub r: usize,
    pub m: TropMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Transition {
    pub from: usize,
    pub edge: EdgeId,
    pub to: usize,
}

/// Deterministic automaton over `H`-edges whose bi-infinite paths are the
/// bi-infinite walks all of whose windows are non-improvable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProfileAutomaton {
    /// Sorted; state ids index this list.
    pub states: Vec<AutomatonState>,
    /// Sorted by `(from, edge)`.
    pub transitions: Vec<Transition>,
    /// `V_{n+1} - V_n` for lengths `n = n1 + r`, `r < k`.
    pub increments: Vec<i64>,
    pub n1: usize,
    pub k: usize,
}

impl ProfileAutomaton {
    pub fn successors(&self, state: usize) -> impl Iterator<Item = &Transition> {
        let lo = self.transitions.partition_point(|t| t.from < state);
        self.transitions[lo..].iter().take_while(move |t| t.from == state)
    }
}

/// Normalized families at lengths `n1, ..., n1 + k` from a solved report.
fn normalized_cycle(game: &GameInstance, report: &SolveReport) -> Result<Vec<DaggerFamily>, StrategyError> {
    let (n1, k) = (report.n1, report.k);
    if k == 0 || report.v_table.len() < n1 + k {
        return Err(StrategyError::BadCertificate);
    }
    let mut norm = Vec::with_capacity(k + 1);
    for family in Families::new(game).take(n1 + k).skip(n1 - 1) {
        let family = family?;
        norm.push(family.normalized(report.v(family.len()))?);
    }
    if !norm[k].same_sets(&norm[0]) {
        return Err(StrategyError::BadCertificate);
    }
    Ok(norm)
}

pub fn build_dagger_automaton(game: &GameInstance, report: &SolveReport) -> Result<ProfileAutomaton, StrategyError> {
    let norm = normalized_cycle(game, report)?;
    let (n1, k) = (report.n1, report.k);
    let increments: Vec<i64> = (0..k).map(|r| report.v(n1 + r + 1) - report.v(n1 + r)).collect();
    let h = game.h();

    let mut index: BTreeMap<AutomatonState, usize> = BTreeMap::new();
    let mut states: Vec<AutomatonState> = Vec::new();
    let mut queue = VecDeque::new();
    for ((u, v), set) in norm[0].iter() {
        for m in set {
            let s = AutomatonState {
                u,
                v,
                r: 0,
                m: m.clone(),
            };
            index.insert(s.clone(), states.len());
            queue.push_back(states.len());
            states.push(s);
        }
    }
    let mut edges: Vec<Transition> = Vec::new();
    while let Some(i) = queue.pop_front() {
        let AutomatonState { u, v, r, m } = states[i].clone();
        let r2 = (r + 1) % k;
        for &e in h.out_edges(v) {
            let m2 = m.trop_mul(game.edge_matrix(e))?.shift(-increments[r])?;
            let w = h.target(e);
            if !norm[r2].get(u, w).contains(&m2) {
                continue;
            }
            let s = AutomatonState { u, v: w, r: r2, m: m2 };
            let j = match index.get(&s) {
                Some(&j) => j,
                None => {
                    index.insert(s.clone(), states.len());
                    queue.push_back(states.len());
                    states.push(s);
                    states.len() - 1
                }
            };
            edges.push(Transition {
                from: i,
                edge: e,
                to: j,
            });
        }
    }

    // drop states that cannot lie on a bi-infinite path
    let mut alive = vec![true; states.len()];
    loop {
        let mut indeg = vec![0usize; states.len()];
        let mut outdeg = vec![0usize; states.len()];
        for t in edges.iter().filter(|t| alive[t.from] && alive[t.to]) {
            outdeg[t.from] += 1;
            indeg[t.to] += 1;
        }
        let mut changed = false;
        for i in 0..states.len() {
            if alive[i] && (indeg[i] == 0 || outdeg[i] == 0) {
                alive[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut order: Vec<usize> = (0..states.len()).filter(|&i| alive[i]).collect();
    if order.is_empty() {
        return Err(StrategyError::EmptyAutomaton);
    }
    order.sort_by(|&a, &b| states[a].cmp(&states[b]));
    let mut renumber = vec![usize::MAX; states.len()];
    for (new, &old) in order.iter().enumerate() {
        renumber[old] = new;
    }
    let mut transitions: Vec<Transition> = edges
        .into_iter()
        .filter(|t| alive[t.from] && alive[t.to])
        .map(|t| Transition {
            from: renumber[t.from],
            edge: t.edge,
            to: renumber[t.to],
        })
        .collect();
    transitions.sort();
    Ok(ProfileAutomaton {
        states: order.into_iter().map(|i| states[i].clone()).collect(),
        transitions,
        increments,
        n1,
        k,
    })
}

/// Breadth-first reading of all label sequences of lengths `1..=n`, tracking
/// the set of states each word can end in. `step(depth, state)` lists `(label, next)`.
fn read_word_levels<I>(
    starts: Vec<usize>,
    n: usize,
    mut step: impl FnMut(usize, usize) -> I,
) -> Result<Vec<BTreeSet<Vec<EdgeId>>>, StrategyError>
where
    I: IntoIterator<Item = (EdgeId, usize)>,
{
    let mut levels = Vec::with_capacity(n);
    let mut level: BTreeMap<Vec<EdgeId>, Vec<usize>> = BTreeMap::new();
    if !starts.is_empty() {
        level.insert(Vec::new(), starts);
    }
    for depth in 0..n {
        let mut next: BTreeMap<Vec<EdgeId>, Vec<usize>> = BTreeMap::new();
        for (word, at) in &level {
            for &s in at {
                for (label, to) in step(depth, s) {
                    let mut w = word.clone();
                    w.push(label);
                    next.entry(w).or_default().push(to);
                }
            }
        }
        if next.len() > WORD_GUARD {
            return Err(StrategyError::TooManyWords(WORD_GUARD));
        }
        for at in next.values_mut() {
            at.sort_unstable();
            at.dedup();
        }
        levels.push(next.keys().cloned().collect());
        level = next;
    }
    Ok(levels)
}

fn read_words<I>(
    starts: Vec<usize>,
    n: usize,
    step: impl FnMut(usize, usize) -> I,
) -> Result<BTreeSet<Vec<EdgeId>>, StrategyError>
where
    I: IntoIterator<Item = (EdgeId, usize)>,
{
    if n == 0 {
        return Ok(if starts.is_empty() {
            BTreeSet::new()
        } else {
            BTreeSet::from([Vec::new()])
        });
    }
    Ok(read_word_levels(starts, n, step)?.pop().unwrap_or_default())
}

/// Edge sequences of length `n` readable along paths of the automaton.
pub fn automaton_words(automaton: &ProfileAutomaton, n: usize) -> Result<BTreeSet<Vec<EdgeId>>, StrategyError> {
    read_words((0..automaton.states.len()).collect(), n, |_, s| {
        automaton.successors(s).map(|t| (t.edge, t.to))
    })
}

/// [`automaton_words`] for every length `1..=n_max`.
pub fn automaton_word_levels(
    automaton: &ProfileAutomaton,
    n_max: usize,
) -> Result<Vec<BTreeSet<Vec<EdgeId>>>, StrategyError> {
    read_word_levels((0..automaton.states.len()).collect(), n_max, |_, s| {
        automaton.successors(s).map(|t| (t.edge, t.to))
    })
}

/// One length of [`PrefixLayers`]: distinct `(start, end, matrix)` of
/// non-improvable walks, with successor lists into the next layer.
struct Layer {
    states: Vec<(VertexId, VertexId, TropMatrix)>,
    // successors of state i: succ[offsets[i]..offsets[i + 1]]
    offsets: Vec<usize>,
    succ: Vec<(EdgeId, usize)>,
}

/// Non-improvable walks of every length up to some maximum, with walks that
/// agree on start, end and matrix merged into one node.
///
/// Relies on heredity: every prefix of a non-improvable walk with finite
/// matrix is non-improvable, so pruning prefixes loses nothing once the
/// target length is at least the primitivity index of `G`.
pub struct PrefixLayers<'g> {
    game: &'g GameInstance,
    /// `(first edge, state in layer 0)`.
    roots: Vec<(EdgeId, usize)>,
    layers: Vec<Layer>,
}

impl<'g> PrefixLayers<'g> {
    pub fn new(game: &'g GameInstance, max_len: usize) -> Result<Self, StrategyError> {
        if max_len > LANGUAGE_LEN_GUARD {
            return Err(StrategyError::LengthGuard {
                n: max_len,
                guard: LANGUAGE_LEN_GUARD,
            });
        }
        let h = game.h();
        let k = h.vertex_count();
        let mut maximal: Vec<Vec<MatrixSet>> = Vec::with_capacity(max_len);
        for family in Families::new(game).take(max_len) {
            maximal.push(family?.iter().map(|(_, set)| set.dagger()).collect());
        }

        let mut layers: Vec<Layer> = Vec::with_capacity(max_len);
        let mut index: HashMap<(VertexId, VertexId, TropMatrix), usize> = HashMap::new();
        let mut states = Vec::new();
        let mut roots = Vec::new();
        for e in 0..h.edge_count() {
            let key = (h.source(e), h.target(e), game.edge_matrix(e).clone());
            if maximal.first().is_some_and(|m| m[key.0 * k + key.1].contains(&key.2)) {
                let next = states.len();
                let i = *index.entry(key.clone()).or_insert(next);
                if i == next {
                    states.push(key);
                }
                roots.push((e, i));
            }
        }
        for len in 2..=max_len + 1 {
            let mut next_index: HashMap<(VertexId, VertexId, TropMatrix), usize> = HashMap::new();
            let mut next_states = Vec::new();
            let mut offsets = vec![0];
            let mut succ = Vec::new();
            if len <= max_len {
                for (start, end, m) in &states {
                    for &e in h.out_edges(*end) {
                        let w = h.target(e);
                        let m2 = m.trop_mul(game.edge_matrix(e))?;
                        if !maximal[len - 1][start * k + w].contains(&m2) {
                            continue;
                        }
                        let key = (*start, w, m2);
                        let fresh = next_states.len();
                        let j = *next_index.entry(key.clone()).or_insert(fresh);
                        if j == fresh {
                            next_states.push(key);
                        }
                        succ.push((e, j));
                    }
                    offsets.push(succ.len());
                }
            } else {
                offsets.resize(states.len() + 1, 0);
            }
            layers.push(Layer { states, offsets, succ });
            states = next_states;
        }
        Ok(PrefixLayers { game, roots, layers })
    }

    fn successors(&self, depth: usize, i: usize) -> &[(EdgeId, usize)] {
        let l = &self.layers[depth];
        &l.succ[l.offsets[i]..l.offsets[i + 1]]
    }

    /// Length-`n` windows starting after `offset` edges of non-improvable walks of length `len`.
    pub fn windows(&self, len: usize, offset: usize, n: usize) -> Result<BTreeSet<Vec<EdgeId>>, StrategyError> {
        assert!(offset + n <= len && n > 0);
        if len < self.game.n0_g() {
            // short walks may have infinite matrices; no pruning
            return Ok(non_improvable_walks(self.game, len)?
                .iter()
                .map(|p| p.edges()[offset..offset + n].to_vec())
                .collect());
        }
        if len > self.layers.len() {
            return Err(StrategyError::LengthGuard {
                n: len,
                guard: self.layers.len(),
            });
        }
        // live[d][i]: state i after d + 1 edges extends to length len
        let mut live: Vec<Vec<bool>> = vec![Vec::new(); len];
        live[len - 1] = vec![true; self.layers[len - 1].states.len()];
        for d in (0..len - 1).rev() {
            live[d] = (0..self.layers[d].states.len())
                .map(|i| self.successors(d, i).iter().any(|&(_, j)| live[d + 1][j]))
                .collect();
        }
        if offset == 0 {
            let firsts: BTreeMap<EdgeId, Vec<usize>> =
                self.roots
                    .iter()
                    .filter(|&&(_, i)| live[0][i])
                    .fold(BTreeMap::new(), |mut acc, &(e, i)| {
                        acc.entry(e).or_default().push(i);
                        acc
                    });
            let mut out = BTreeSet::new();
            for (e, at) in firsts {
                for rest in read_words(at, n - 1, |d, s| self.live_successors(&live, d, s))? {
                    let mut w = vec![e];
                    w.extend(rest);
                    out.insert(w);
                }
            }
            return Ok(out);
        }
        let starts = (0..self.layers[offset - 1].states.len())
            .filter(|&i| live[offset - 1][i])
            .collect();
        read_words(starts, n, |d, s| self.live_successors(&live, offset - 1 + d, s))
    }

    fn live_successors(&self, live: &[Vec<bool>], d: usize, s: usize) -> Vec<(EdgeId, usize)> {
        self.successors(d, s)
            .iter()
            .copied()
            .filter(|&(_, j)| live[d + 1][j])
            .collect()
    }
}

/// Middle length-`n` windows (offset `k`) of non-improvable walks of length `n + 2k`.
pub fn central_windows(game: &GameInstance, n: usize, k: usize) -> Result<BTreeSet<Vec<EdgeId>>, StrategyError> {
    PrefixLayers::new(game, n + 2 * k)?.windows(n + 2 * k, k, n)
}

/// Whether the automaton's length-`n` words are exactly the words that sit
/// `k` steps inside some non-improvable walk of length `n + 2k`.
pub fn languages_agree(game: &GameInstance, automaton: &ProfileAutomaton, n: usize) -> Result<bool, StrategyError> {
    Ok(languages_agree_upto(game, automaton, n, automaton.k)?[n - 1])
}

/// For every `n` in `1..=n_max`: whether the automaton's length-`n` words are
/// the words sitting `slack` steps inside non-improvable walks of length `n + 2 * slack`.
pub fn languages_agree_upto(
    game: &GameInstance,
    automaton: &ProfileAutomaton,
    n_max: usize,
    slack: usize,
) -> Result<Vec<bool>, StrategyError> {
    let layers = PrefixLayers::new(game, n_max + 2 * slack)?;
    let words = automaton_word_levels(automaton, n_max)?;
    (1..=n_max)
        .map(|n| Ok(words[n - 1] == layers.windows(n + 2 * slack, slack, n)?))
        .collect()
}

/// Minimum mean weight over all cycles, with the lexicographically least
/// simple cycle attaining it. Karp's recurrence over walks of exact length.
pub fn min_cycle_mean(g: &Digraph, weights: &[i64]) -> Result<(Ratio<i64>, Walk), StrategyError> {
    if weights.len() != g.edge_count() {
        return Err(StrategyError::WeightCount);
    }
    let nv = g.vertex_count();
    // d[j][v]: least weight of a length-j walk ending at v, any start
    let mut d: Vec<Vec<Option<i64>>> = vec![vec![Some(0); nv]];
    for j in 1..=nv {
        let mut row = vec![None; nv];
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            if let Some(x) = d[j - 1][a] {
                let c = x.checked_add(weights[e]).ok_or(TropError::Overflow)?;
                if row[b].is_none_or(|old| c < old) {
                    row[b] = Some(c);
                }
            }
        }
        d.push(row);
    }
    let mut best: Option<Ratio<i64>> = None;
    for (v, dn) in d[nv].iter().enumerate() {
        let Some(dn) = *dn else { continue };
        let worst = (0..nv)
            .filter_map(|j| d[j][v].map(|dj| Ratio::new(dn - dj, (nv - j) as i64)))
            .max()
            .expect("d[0] is finite everywhere");
        if best.is_none_or(|b| worst < b) {
            best = Some(worst);
        }
    }
    let mean = best.ok_or(StrategyError::Acyclic)?;
    let cycle = least_tight_cycle(g, weights, mean)?;
    Ok((mean, g.walk(cycle)?))
}

fn least_tight_cycle(g: &Digraph, weights: &[i64], mean: Ratio<i64>) -> Result<Vec<EdgeId>, StrategyError> {
    let nv = g.vertex_count();
    // shifted weights have minimum cycle mean exactly 0
    let shifted: Vec<i64> = weights
        .iter()
        .map(|&w| {
            w.checked_mul(*mean.denom())
                .and_then(|x| x.checked_sub(*mean.numer()))
                .ok_or(TropError::Overflow)
        })
        .collect::<Result<_, _>>()?;
    let mut pot = vec![0i64; nv];
    for _ in 0..nv {
        let mut changed = false;
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            let c = pot[a].checked_add(shifted[e]).ok_or(TropError::Overflow)?;
            if c < pot[b] {
                pot[b] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let tight: Vec<bool> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(a, b))| pot[a] + shifted[e] == pot[b])
        .collect();

    let reaches = |from: VertexId, to: VertexId, blocked: &[bool]| {
        let mut seen = blocked.to_vec();
        let mut stack = vec![from];
        while let Some(x) = stack.pop() {
            if x == to {
                return true;
            }
            if std::mem::replace(&mut seen[x], true) {
                continue;
            }
            stack.extend(g.out_edges(x).iter().filter(|&&e| tight[e]).map(|&e| g.target(e)));
        }
        false
    };

    let none = vec![false; nv];
    let first = (0..g.edge_count())
        .find(|&e| tight[e] && reaches(g.target(e), g.source(e), &none))
        .ok_or(StrategyError::Acyclic)?;
    let home = g.source(first);
    let mut cycle = vec![first];
    let mut visited = vec![false; nv];
    visited[home] = true;
    let mut at = g.target(first);
    while at != home {
        visited[at] = true;
        let mut blocked = visited.clone();
        blocked[home] = false;
        let e = g
            .out_edges(at)
            .iter()
            .copied()
            .find(|&e| {
                tight[e] && (g.target(e) == home || (!visited[g.target(e)] && reaches(g.target(e), home, &blocked)))
            })
            .expect("a tight path back exists");
        cycle.push(e);
        at = g.target(e);
    }
    Ok(cycle)
}

/// Periodic walks `p` in `H` and `q` in `G` such that `q` is an optimal
/// periodic answer to `p` and its mean payoff is the game value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicPair {
    pub p_cycle: Walk,
    pub q_cycle: Walk,
    pub mean: Ratio<i64>,
}

impl Serialize for PeriodicPair {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        struct R<'a>(&'a Ratio<i64>);
        impl Serialize for R<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                serialize_ratio(self.0, s)
            }
        }
        let mut st = s.serialize_struct("PeriodicPair", 3)?;
        st.serialize_field("p_cycle", self.p_cycle.edges())?;
        st.serialize_field("q_cycle", self.q_cycle.edges())?;
        st.serialize_field("mean", &R(&self.mean))?;
        st.end()
    }
}

/// Nodes `(a, i)` numbered `i * |V(G)| + a`; edge `i * |E(G)| + e` copies
/// `G`-edge `e` from position `i` to `i + 1 mod |p|`, weighted against `p[i]`.
pub fn product_graph(game: &GameInstance, p: &[EdgeId]) -> Result<(Digraph, Vec<i64>), StrategyError> {
    let g = game.g();
    let (nv, l) = (g.vertex_count(), p.len());
    let mut edges = Vec::with_capacity(l * g.edge_count());
    let mut weights = Vec::with_capacity(l * g.edge_count());
    for (i, &he) in p.iter().enumerate() {
        for (ge, &(a, b)) in g.edges().iter().enumerate() {
            edges.push((i * nv + a, ((i + 1) % l) * nv + b));
            weights.push(game.payoff(ge, he));
        }
    }
    Ok((Digraph::new(nv * l, edges)?, weights))
}

/// Shortest cycle, lexicographically least among those, through `s`.
fn shortest_cycle_through(automaton: &ProfileAutomaton, s: usize) -> Option<Vec<EdgeId>> {
    let mut parent: Vec<Option<(usize, EdgeId)>> = vec![None; automaton.states.len()];
    let mut seen = vec![false; automaton.states.len()];
    let mut queue = VecDeque::from([s]);
    seen[s] = true;
    while let Some(x) = queue.pop_front() {
        for t in automaton.successors(x) {
            if t.to == s {
                let mut labels = vec![t.edge];
                let mut at = x;
                while let Some((prev, e)) = parent[at] {
                    labels.push(e);
                    at = prev;
                }
                labels.reverse();
                return Some(labels);
            }
            if !seen[t.to] {
                seen[t.to] = true;
                parent[t.to] = Some((x, t.edge));
                queue.push_back(t.to);
            }
        }
    }
    None
}

pub fn periodic_optimal_pair(
    game: &GameInstance,
    report: &SolveReport,
    automaton: &ProfileAutomaton,
) -> Result<PeriodicPair, StrategyError> {
    let p = (0..automaton.states.len())
        .find_map(|s| shortest_cycle_through(automaton, s))
        .ok_or(StrategyError::EmptyAutomaton)?;
    let (product, weights) = product_graph(game, &p)?;
    let (mean, cycle) = min_cycle_mean(&product, &weights)?;
    let ge = game.g().edge_count();
    let start = cycle
        .edges()
        .iter()
        .position(|&e| e / ge == 0)
        .expect("cycles in the product pass every position");
    let q: Vec<EdgeId> = cycle.edges()[start..]
        .iter()
        .chain(&cycle.edges()[..start])
        .map(|&e| e % ge)
        .collect();
    if mean != report.value {
        return Err(StrategyError::MeanMismatch {
            mean,
            value: report.value,
        });
    }
    Ok(PeriodicPair {
        p_cycle: game.h().walk(p)?,
        q_cycle: game.g().walk(q)?,
        mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{build_hamming_game, CoveringProblem};
    use crate::game::{solve, Limits};
    use crate::graph::LabeledDigraph;

    fn covering_game(n: usize, edges: Vec<(usize, usize)>, labels: &[&str], binary: bool) -> GameInstance {
        let g = Digraph::new(n, edges).unwrap();
        let lg = LabeledDigraph::new(g, labels.iter().map(|s| s.to_string()).collect(), None).unwrap();
        let alphabet = binary.then(|| vec!["0".to_string(), "1".to_string()]);
        build_hamming_game(&CoveringProblem::new(lg, alphabet).unwrap()).unwrap()
    }
    fn full2() -> GameInstance {
        covering_game(1, vec![(0, 0), (0, 0)], &["0", "1"], false)
    }
    fn only_zero() -> GameInstance {
        covering_game(1, vec![(0, 0)], &["0"], true)
    }
    fn golden() -> GameInstance {
        covering_game(2, vec![(0, 0), (0, 1), (1, 0)], &["0", "1", "0"], false)
    }

    fn edges(ws: &[Walk]) -> Vec<Vec<EdgeId>> {
        ws.iter().map(|w| w.edges().to_vec()).collect()
    }

    #[test]
    fn non_improvable_examples() {
        assert_eq!(non_improvable_walks(&full2(), 4).unwrap().len(), 16);
        assert_eq!(edges(&non_improvable_walks(&only_zero(), 4).unwrap()), vec![vec![1; 4]]);
        assert_eq!(
            edges(&non_improvable_walks(&golden(), 2).unwrap()),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
    }

    #[test]
    fn prefix_search_matches_enumeration() {
        for game in [full2(), only_zero(), golden()] {
            for n in 1..=10 {
                assert_eq!(
                    non_improvable_walks(&game, n).unwrap(),
                    non_improvable_walks_by_prefix(&game, n).unwrap()
                );
            }
        }
    }

    #[test]
    fn responses() {
        let game = only_zero();
        let p = game.h().walk(vec![1, 1]).unwrap();
        let r = best_responses(&game, &p, 0, 0, ResponseMode::All).unwrap();
        assert_eq!((r.cost, edges(&r.walks)), (2, vec![vec![0, 0]]));

        // golden mean: "11" against A -> A is best met by the walk reading "10"
        let game = golden();
        let p = game.h().walk(vec![1, 1]).unwrap();
        let r = best_responses(&game, &p, 0, 0, ResponseMode::All).unwrap();
        assert_eq!((r.cost, edges(&r.walks)), (1, vec![vec![1, 2]]));

        let p = game.h().walk(vec![1, 1, 1]).unwrap();
        let all = best_responses(&game, &p, 0, 0, ResponseMode::All).unwrap();
        let one = best_responses(&game, &p, 0, 0, ResponseMode::Canonical).unwrap();
        assert_eq!((all.cost, edges(&all.walks)), (2, vec![vec![0, 1, 2], vec![1, 2, 0]]));
        assert_eq!(one.walks, all.walks[..1]);

        // no length-1 walk B -> B
        let p = game.h().walk(vec![0]).unwrap();
        assert_eq!(
            best_responses(&game, &p, 1, 1, ResponseMode::All),
            Err(StrategyError::Infeasible { from: 1, to: 1 })
        );
    }

    #[test]
    fn named_automata() {
        let game = full2();
        let report = solve(&game, Limits::default()).unwrap();
        let a = build_dagger_automaton(&game, &report).unwrap();
        assert_eq!(a.states.len(), 1);
        assert_eq!(a.transitions.len(), 2);
        assert!(languages_agree(&game, &a, 3).unwrap());

        let game = only_zero();
        let report = solve(&game, Limits::default()).unwrap();
        let a = build_dagger_automaton(&game, &report).unwrap();
        assert_eq!(a.states.len(), 1);
        assert_eq!(
            a.transitions,
            vec![Transition {
                from: 0,
                edge: 1,
                to: 0
            }]
        );
        assert!(languages_agree(&game, &a, 5).unwrap());
        assert_eq!(automaton_words(&a, 5).unwrap(), [vec![1; 5]].into_iter().collect());
    }

    #[test]
    fn golden_automaton_languages() {
        let game = golden();
        let report = solve(&game, Limits::default()).unwrap();
        let a = build_dagger_automaton(&game, &report).unwrap();
        for n in 1..=report.n1 + 2 * report.k {
            let left = automaton_words(&a, n).unwrap();
            let right = central_windows(&game, n, a.k).unwrap();
            assert_eq!(left, right, "n = {n}, report {report:?}, automaton {a:?}");
        }
    }

    #[test]
    fn golden_automaton_drops_non_extendable_walks() {
        let game = golden();
        let report = solve(&game, Limits::default()).unwrap();
        let a = build_dagger_automaton(&game, &report).unwrap();
        for n in report.n1..=report.n1 + 2 * report.k {
            let plain: BTreeSet<Vec<EdgeId>> = edges(&non_improvable_walks(&game, n).unwrap()).into_iter().collect();
            let words = automaton_words(&a, n).unwrap();
            assert!(words.is_subset(&plain));
            // what is missing ends in 0 after a 1 and never sits inside a longer non-improvable walk
            let missing: Vec<_> = plain.difference(&words).collect();
            assert_eq!(missing.len(), n - 1);
            let inner = central_windows(&game, n, report.k).unwrap();
            assert!(missing.iter().all(|w| !inner.contains(*w) && w[n - 1] == 0));
        }
    }

    #[test]
    fn cycle_means() {
        let loop3 = Digraph::new(1, vec![(0, 0)]).unwrap();
        let (m, c) = min_cycle_mean(&loop3, &[3]).unwrap();
        assert_eq!((m, c.edges().to_vec()), (Ratio::from_integer(3), vec![0]));

        let two = Digraph::new(2, vec![(0, 1), (1, 0)]).unwrap();
        let (m, c) = min_cycle_mean(&two, &[1, 3]).unwrap();
        assert_eq!((m, c.edges().to_vec()), (Ratio::from_integer(2), vec![0, 1]));

        let mixed = Digraph::new(2, vec![(0, 0), (0, 1), (1, 0)]).unwrap();
        let (m, c) = min_cycle_mean(&mixed, &[2, 0, 3]).unwrap();
        assert_eq!((m, c.edges().to_vec()), (Ratio::new(3, 2), vec![1, 2]));

        // tie between the loop and the 2-cycle goes to the least edge sequence
        let (m, c) = min_cycle_mean(&mixed, &[1, 0, 2]).unwrap();
        assert_eq!((m, c.edges().to_vec()), (Ratio::from_integer(1), vec![0]));

        let path = Digraph::new(2, vec![(0, 1)]).unwrap();
        assert_eq!(min_cycle_mean(&path, &[1]), Err(StrategyError::Acyclic));
    }

    #[test]
    fn periodic_pairs() {
        let game = only_zero();
        let report = solve(&game, Limits::default()).unwrap();
        let a = build_dagger_automaton(&game, &report).unwrap();
        let pair = periodic_optimal_pair(&game, &report, &a).unwrap();
        assert_eq!(pair.p_cycle.edges(), &[1]);
        assert_eq!(pair.q_cycle.edges(), &[0]);
        assert_eq!(pair.mean, Ratio::from_integer(1));

        for game in [full2(), golden()] {
            let report = solve(&game, Limits::default()).unwrap();
            let a = build_dagger_automaton(&game, &report).unwrap();
            let pair = periodic_optimal_pair(&game, &report, &a).unwrap();
            assert_eq!(pair.mean, report.value);
        }
        let json = serde_json::to_string(
            &periodic_optimal_pair(
                &golden(),
                &solve(&golden(), Limits::default()).unwrap(),
                &build_dagger_automaton(&golden(), &solve(&golden(), Limits::default()).unwrap()).unwrap(),
            )
            .unwrap(),
        )
        .unwrap();
        assert!(json.contains("\"mean\":{\"num\":1,\"den\":2}"), "{json}");
    }

    #[test]
    fn gaps_are_bounded() {
        let game = golden();
        let report = solve(&game, Limits::default()).unwrap();
        let gaps = non_improvable_gaps(&game, 30).unwrap();
        let tail: Vec<i64> = gaps[report.n1 - 1..].iter().map(|g| g.unwrap()).collect();
        let period_max = *tail[..report.k].iter().max().unwrap();
        assert!(tail.iter().all(|&g| g <= period_max));
        assert!(period_max <= report.c_observed);
    }
}
