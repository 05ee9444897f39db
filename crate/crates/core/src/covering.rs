//! Covering radius of a primitive sofic shift, via the Hamming game.
//!
//! Alice's graph is a single vertex with one loop per alphabet symbol, Bob's
//! graph is the presentation, and a round costs 1 when the symbols differ.
//! Then `V_n` of that game is the covering radius of the length-`n` code of
//! the presentation, and the game value is the covering radius of the shift.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::game::{solve, GameError, GameInstance, Limits, SolveReport};
use crate::graph::{enumerate_walks, Digraph, GraphError, LabeledDigraph};

/// Largest `|alphabet|^n` the target enumeration in [`brute_covering_radius_n`] accepts.
pub const TARGET_GUARD: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoveringError {
    #[error("presentation is not primitive")]
    NotPrimitive,
    #[error("words have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("{count} target words exceed the enumeration guard {guard}")]
    TooManyTargets { count: u128, guard: u64 },
    #[error("the alphabet is empty")]
    EmptyAlphabet,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Number of positions where `u` and `v` differ.
pub fn hamming_distance<T: PartialEq>(u: &[T], v: &[T]) -> Result<usize, CoveringError> {
    if u.len() != v.len() {
        return Err(CoveringError::LengthMismatch(u.len(), v.len()));
    }
    Ok(u.iter().zip(v).filter(|(a, b)| a != b).count())
}

/// A primitive labeled graph together with the ambient alphabet targets are drawn from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringProblem {
    presentation: LabeledDigraph,
}

impl CoveringProblem {
    /// `alphabet = None` keeps the presentation's own alphabet.
    pub fn new(presentation: LabeledDigraph, alphabet: Option<Vec<String>>) -> Result<Self, CoveringError> {
        if !presentation.graph().is_primitive() {
            return Err(CoveringError::NotPrimitive);
        }
        let presentation = match alphabet {
            Some(a) => presentation.with_alphabet(a)?,
            None => presentation,
        };
        if presentation.alphabet().is_empty() {
            return Err(CoveringError::EmptyAlphabet);
        }
        Ok(CoveringProblem { presentation })
    }

    pub fn presentation(&self) -> &LabeledDigraph {
        &self.presentation
    }

    pub fn alphabet(&self) -> &[String] {
        self.presentation.alphabet()
    }
}

/// Single-vertex Alice graph with one loop per symbol and the 0/1 mismatch payoff.
pub fn build_hamming_game(p: &CoveringProblem) -> Result<GameInstance, CoveringError> {
    let lg = &p.presentation;
    let h = Digraph::new(1, vec![(0, 0); lg.alphabet().len()])?;
    let game = GameInstance::from_fn(lg.graph().clone(), h, |e, a| i64::from(lg.label_index(e) != a))?;
    Ok(game)
}

pub fn covering_radius(p: &CoveringProblem, limits: Limits) -> Result<SolveReport, CoveringError> {
    Ok(solve(&build_hamming_game(p)?, limits)?)
}

/// Label words (as alphabet indices) of all length-`n` walks.
pub fn code_words(p: &CoveringProblem, n: usize) -> Result<BTreeSet<Vec<usize>>, CoveringError> {
    let lg = &p.presentation;
    Ok(enumerate_walks(lg.graph(), n, None, None)?
        .map(|w| lg.word_of(&w))
        .collect())
}

/// `max over targets in alphabet^n of min over codewords of the Hamming distance`, by enumeration.
pub fn brute_covering_radius_n(p: &CoveringProblem, n: usize) -> Result<usize, CoveringError> {
    let q = p.alphabet().len();
    let count = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > u128::from(TARGET_GUARD) {
        return Err(CoveringError::TooManyTargets {
            count,
            guard: TARGET_GUARD,
        });
    }
    let code: Vec<Vec<usize>> = code_words(p, n)?.into_iter().collect();
    let mut target = vec![0usize; n];
    let mut radius = 0usize;
    loop {
        let mut nearest = usize::MAX;
        for w in &code {
            nearest = nearest.min(hamming_distance(&target, w)?);
            // cannot raise the running maximum any more
            if nearest <= radius {
                break;
            }
        }
        radius = radius.max(nearest);
        // next target in mixed-radix order
        let mut i = 0;
        loop {
            if i == n {
                return Ok(radius);
            }
            target[i] += 1;
            if target[i] < q {
                break;
            }
            target[i] = 0;
            i += 1;
        }
    }
}
