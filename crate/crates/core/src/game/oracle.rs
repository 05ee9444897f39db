//! Enumeration oracles for `V_n`, independent of the min-plus family code.

use crate::graph::{enumerate_walks, enumerate_walks_guarded, DEFAULT_WALK_GUARD};
use crate::tropical::TropError;

use super::{GameError, GameInstance};

/// Cheapest Bob walk of any start ending at each `G`-vertex, after one more
/// Alice edge. `None` marks vertices no walk of this length reaches.
fn relax(game: &GameInstance, best: &[Option<i64>], h_edge: usize) -> Result<Vec<Option<i64>>, TropError> {
    let mut next = vec![None; best.len()];
    for (ge, &(a, b)) in game.g().edges().iter().enumerate() {
        if let Some(cost) = best[a] {
            let c = cost.checked_add(game.payoff(ge, h_edge)).ok_or(TropError::Overflow)?;
            if next[b].is_none_or(|old| c < old) {
                next[b] = Some(c);
            }
        }
    }
    Ok(next)
}

/// Cost of Bob's best reply to an explicit Alice walk: the minimum over all
/// `G`-walks of the same length, grouped by their current endpoint.
fn best_reply(game: &GameInstance, alice: &[usize]) -> Result<i64, GameError> {
    let mut best = vec![Some(0); game.g().vertex_count()];
    for &e in alice {
        best = relax(game, &best, e)?;
    }
    best.into_iter().flatten().min().ok_or(GameError::AllInfinite)
}

/// `V_n = max over Alice walks p of min over Bob walks q of sum P(q_i, p_i)`,
/// by listing every Alice walk.
pub fn brute_value_n(game: &GameInstance, n: usize) -> Result<i64, GameError> {
    let mut value: Option<i64> = None;
    for p in enumerate_walks(game.h(), n, None, None)? {
        let reply = best_reply(game, p.edges())?;
        value = Some(value.map_or(reply, |v| v.max(reply)));
    }
    value.ok_or(GameError::AllInfinite)
}

/// `V_1, ..., V_{n_max}` in one depth-first pass over Alice's walks.
pub fn brute_value_table(game: &GameInstance, n_max: usize) -> Result<Vec<i64>, GameError> {
    if n_max > DEFAULT_WALK_GUARD {
        return Err(crate::graph::GraphError::GuardExceeded {
            n: n_max,
            guard: DEFAULT_WALK_GUARD,
        }
        .into());
    }
    let mut table: Vec<Option<i64>> = vec![None; n_max];
    let start = vec![Some(0); game.g().vertex_count()];
    let h = game.h();
    // (last Alice edge, depth, Bob costs per G-vertex)
    let mut stack: Vec<(usize, usize, Vec<Option<i64>>)> = Vec::new();
    for e in (0..h.edge_count()).rev() {
        stack.push((e, 1, relax(game, &start, e)?));
    }
    while let Some((e, depth, best)) = stack.pop() {
        if let Some(reply) = best.iter().flatten().min().copied() {
            let slot = &mut table[depth - 1];
            *slot = Some(slot.map_or(reply, |v| v.max(reply)));
        }
        if depth < n_max {
            for &next in h.out_edges(h.target(e)).iter().rev() {
                stack.push((next, depth + 1, relax(game, &best, next)?));
            }
        }
    }
    table.into_iter().map(|v| v.ok_or(GameError::AllInfinite)).collect()
}

/// Literal double enumeration over both graphs' walks. Exponential in both;
/// only for cross-checking the other oracles on tiny instances.
pub fn exhaustive_value_n(game: &GameInstance, n: usize) -> Result<i64, GameError> {
    let bob: Vec<_> = enumerate_walks_guarded(game.g(), n, None, None, 12)?.collect();
    let mut value: Option<i64> = None;
    for p in enumerate_walks_guarded(game.h(), n, None, None, 12)? {
        let reply = bob
            .iter()
            .map(|q| {
                q.edges()
                    .iter()
                    .zip(p.edges())
                    .map(|(&ge, &he)| game.payoff(ge, he))
                    .sum::<i64>()
            })
            .min()
            .ok_or(GameError::AllInfinite)?;
        value = Some(value.map_or(reply, |v| v.max(reply)));
    }
    value.ok_or(GameError::AllInfinite)
}
