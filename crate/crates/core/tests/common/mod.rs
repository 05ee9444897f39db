//! Seeded generators of small primitive instances shared by the integration tests.
#![allow(dead_code)]

use covrad_core::{build_hamming_game, CoveringProblem, Digraph, GameInstance, LabeledDigraph};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Primitive digraph with at most `max_v` vertices and `max_e` edges, by rejection.
pub fn primitive_digraph(rng: &mut ChaCha8Rng, max_v: usize, max_e: usize) -> Digraph {
    loop {
        let v = rng.gen_range(1..=max_v);
        let e = rng.gen_range(v..=max_e.max(v));
        let edges = (0..e).map(|_| (rng.gen_range(0..v), rng.gen_range(0..v))).collect();
        let g = Digraph::new(v, edges).unwrap();
        if g.is_primitive() {
            return g;
        }
    }
}

/// Graphs with at most 3 vertices and 6 edges, payoffs uniform in `[-3, 3]`.
pub fn random_game(rng: &mut ChaCha8Rng) -> GameInstance {
    let g = primitive_digraph(rng, 3, 6);
    let h = primitive_digraph(rng, 3, 6);
    let table: Vec<Vec<i64>> = (0..g.edge_count())
        .map(|_| (0..h.edge_count()).map(|_| rng.gen_range(-3..=3)).collect())
        .collect();
    GameInstance::from_fn(g, h, |a, b| table[a][b]).unwrap()
}

/// At most 3 vertices, 5 edges and 3 symbols; every symbol is in the alphabet even if unused.
pub fn random_covering(rng: &mut ChaCha8Rng) -> CoveringProblem {
    let g = primitive_digraph(rng, 3, 5);
    let sigma = rng.gen_range(1..=3);
    let alphabet: Vec<String> = (0..sigma).map(|i| i.to_string()).collect();
    let labels = (0..g.edge_count())
        .map(|_| alphabet[rng.gen_range(0..sigma)].clone())
        .collect();
    let lg = LabeledDigraph::new(g, labels, Some(alphabet.clone())).unwrap();
    CoveringProblem::new(lg, Some(alphabet)).unwrap()
}

fn presentation(n: usize, edges: Vec<(usize, usize)>, labels: &[&str], alphabet: &[&str]) -> CoveringProblem {
    let g = Digraph::new(n, edges).unwrap();
    let lg = LabeledDigraph::new(g, labels.iter().map(|s| s.to_string()).collect(), None).unwrap();
    CoveringProblem::new(lg, Some(alphabet.iter().map(|s| s.to_string()).collect())).unwrap()
}

pub fn full2() -> CoveringProblem {
    presentation(1, vec![(0, 0), (0, 0)], &["0", "1"], &["0", "1"])
}

pub fn only_zero() -> CoveringProblem {
    presentation(1, vec![(0, 0)], &["0"], &["0", "1"])
}

pub fn golden() -> CoveringProblem {
    presentation(2, vec![(0, 0), (0, 1), (1, 0)], &["0", "1", "0"], &["0", "1"])
}

/// `(name, problem)` for the three standard presentations.
pub fn named() -> Vec<(&'static str, CoveringProblem)> {
    vec![
        ("full-2-shift", full2()),
        ("single-loop-0", only_zero()),
        ("golden-mean", golden()),
    ]
}

pub fn named_games() -> Vec<(&'static str, GameInstance)> {
    named()
        .into_iter()
        .map(|(n, p)| (n, build_hamming_game(&p).unwrap()))
        .collect()
}
