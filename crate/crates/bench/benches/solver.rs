use covrad_core::{
    build_dagger_automaton, build_hamming_game, covering_radius, solve, vn_table, CoveringProblem, Digraph, ExtInt,
    GameInstance, LabeledDigraph, Limits, MatrixSet, TropMatrix,
};
use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn presentation(n: usize, edges: Vec<(usize, usize)>, labels: &[&str]) -> CoveringProblem {
    let g = Digraph::new(n, edges).unwrap();
    let lg = LabeledDigraph::new(g, labels.iter().map(|s| s.to_string()).collect(), None).unwrap();
    CoveringProblem::new(lg, None).unwrap()
}

fn golden() -> CoveringProblem {
    presentation(2, vec![(0, 0), (0, 1), (1, 0)], &["0", "1", "0"])
}

/// Run-length limited: at most two 1s in a row.
fn rll() -> CoveringProblem {
    presentation(
        3,
        vec![(0, 0), (0, 1), (1, 0), (1, 2), (2, 0)],
        &["0", "1", "0", "1", "0"],
    )
}

fn random_game(seed: u64) -> GameInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut graph = || {
            let v = rng.gen_range(2..=3);
            let edges = (0..rng.gen_range(v..=6))
                .map(|_| (rng.gen_range(0..v), rng.gen_range(0..v)))
                .collect();
            Digraph::new(v, edges).unwrap()
        };
        let (g, h) = (graph(), graph());
        let table: Vec<i64> = (0..g.edge_count() * h.edge_count())
            .map(|_| rng.gen_range(-3..=3))
            .collect();
        let he = h.edge_count();
        if let Ok(game) = GameInstance::from_fn(g, h, |a, b| table[a * he + b]) {
            return game;
        }
    }
}

fn random_set(rng: &mut ChaCha8Rng, dim: usize, size: usize) -> MatrixSet {
    (0..size)
        .map(|_| {
            TropMatrix::new(
                dim,
                (0..dim * dim).map(|_| ExtInt::Fin(rng.gen_range(-20..=20))).collect(),
            )
            .unwrap()
        })
        .collect()
}

fn solver(c: &mut Criterion) {
    let golden = golden();
    c.bench_function("covering_radius golden mean", |b| {
        b.iter(|| covering_radius(black_box(&golden), Limits::default()).unwrap())
    });
    let rll = rll();
    c.bench_function("covering_radius run-length limited", |b| {
        b.iter(|| covering_radius(black_box(&rll), Limits::default()).unwrap())
    });
    let game = random_game(3);
    c.bench_function("vn_table random game n=12", |b| {
        b.iter(|| vn_table(black_box(&game), 12).unwrap())
    });
    let game = build_hamming_game(&golden).unwrap();
    let report = solve(&game, Limits::default()).unwrap();
    c.bench_function("automaton golden mean", |b| {
        b.iter(|| build_dagger_automaton(black_box(&game), &report).unwrap())
    });
}

fn tropical(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = TropMatrix::new(3, (0..9).map(|_| ExtInt::Fin(rng.gen_range(-5..=5))).collect()).unwrap();
    let b = TropMatrix::new(3, (0..9).map(|_| ExtInt::Fin(rng.gen_range(-5..=5))).collect()).unwrap();
    c.bench_function("trop_mul 3x3", |bench| {
        bench.iter(|| black_box(&a).trop_mul(black_box(&b)).unwrap())
    });
    let set = random_set(&mut rng, 2, 2_000);
    c.bench_function("dagger 2000 matrices", |bench| bench.iter(|| black_box(&set).dagger()));
    c.bench_function("dagger_by_scan 2000 matrices", |bench| {
        bench.iter(|| black_box(&set).dagger_by_scan())
    });
}

criterion_group!(benches, solver, tropical);
criterion_main!(benches);
