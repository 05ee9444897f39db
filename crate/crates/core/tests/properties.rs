mod common;

use std::collections::BTreeMap;

use common::*;
use covrad_core::game::Families;
use covrad_core::strategies::{
    automaton_word_levels, best_responses, languages_agree_upto, non_improvable_walks_by_prefix, PrefixLayers,
    ResponseMode,
};
use covrad_core::*;
use proptest::prelude::*;

fn matrix(dim: usize) -> impl Strategy<Value = TropMatrix> {
    prop::collection::vec(
        prop_oneof![9 => (-5i64..=5).prop_map(ExtInt::Fin), 1 => Just(ExtInt::Inf)],
        dim * dim,
    )
    .prop_map(move |e| TropMatrix::new(dim, e).unwrap())
}

fn finite_matrix(dim: usize) -> impl Strategy<Value = TropMatrix> {
    prop::collection::vec(-5i64..=5, dim * dim)
        .prop_map(move |e| TropMatrix::new(dim, e.into_iter().map(ExtInt::Fin).collect()).unwrap())
}

fn finite_set(dim: usize) -> impl Strategy<Value = MatrixSet> {
    prop::collection::vec(finite_matrix(dim), 1..=6).prop_map(|v| v.into_iter().collect())
}

proptest! {
    #[test]
    fn multiplication_is_associative((a, b, c) in (1usize..=3).prop_flat_map(|d| (matrix(d), matrix(d), matrix(d)))) {
        let left = a.trop_mul(&b).unwrap().trop_mul(&c).unwrap();
        let right = a.trop_mul(&b.trop_mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn dagger_is_idempotent(s in (1usize..=3).prop_flat_map(|d| prop::collection::vec(matrix(d), 0..20)).prop_map(|v| v.into_iter().collect::<MatrixSet>())) {
        let d = s.dagger();
        prop_assert_eq!(d.dagger(), d.clone());
        prop_assert_eq!(d, s.dagger_by_scan());
    }

    #[test]
    fn indexed_and_scanned_dagger_agree(s in (1usize..=3).prop_flat_map(|d| prop::collection::vec(matrix(d), 60..200)).prop_map(|v| v.into_iter().collect::<MatrixSet>())) {
        prop_assert_eq!(s.dagger(), s.dagger_by_scan());
    }

    #[test]
    fn pruning_commutes_with_products((a, b) in (1usize..=3).prop_flat_map(|d| (finite_set(d), finite_set(d)))) {
        let lhs = a.dagger().set_mul(&b.dagger()).unwrap().dagger();
        prop_assert_eq!(lhs, a.set_mul(&b).unwrap().dagger());
    }

    #[test]
    fn maximal_products_factor_through_maximal_sets((a, b) in (1usize..=3).prop_flat_map(|d| (finite_set(d), finite_set(d)))) {
        // every maximal product is a product of maximal factors
        let da = a.dagger();
        let db = b.dagger();
        for h in a.set_mul(&b).unwrap().dagger().iter() {
            let found = da.iter().any(|f| db.iter().any(|g| &f.trop_mul(g).unwrap() == h));
            prop_assert!(found);
        }
    }

    #[test]
    fn three_products_have_bounded_spread((f1, f2, f3) in (1usize..=3).prop_flat_map(|d| (finite_matrix(d), finite_matrix(d), finite_matrix(d)))) {
        let p = f1.trop_mul(&f2).unwrap().trop_mul(&f3).unwrap();
        let fin = |x: ExtInt| x.finite().unwrap();
        prop_assert!(fin(p.stats().delta) <= 2 * fin(f1.stats().norm) + 2 * fin(f3.stats().norm));
    }

    #[test]
    fn shifts_move_through_products((f, g, n) in (1usize..=3).prop_flat_map(|d| (matrix(d), matrix(d), -5i64..=5))) {
        let fg = f.trop_mul(&g).unwrap();
        prop_assert_eq!(f.shift(n).unwrap().trop_mul(&g).unwrap(), fg.shift(n).unwrap());
        prop_assert_eq!(f.trop_mul(&g.shift(n).unwrap()).unwrap(), fg.shift(n).unwrap());
        prop_assert_eq!(f.shift(n).unwrap().shift(-n).unwrap(), f);
    }

    #[test]
    fn graph_files_roundtrip(seed in any::<u64>()) {
        let p = random_covering(&mut rng(seed));
        let lg = p.presentation();
        let file = GraphFile {
            graph: lg.graph().clone(),
            labels: Some((0..lg.graph().edge_count()).map(|e| lg.label(e).to_string()).collect()),
            alphabet: Some(lg.alphabet().to_vec()),
        };
        let text = serialize_graph(&file);
        let back = parse_graph(&text).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(serialize_graph(&back), text);
    }
}

#[test]
fn walk_matrices_compose() {
    let mut rng = rng(11);
    for _ in 0..30 {
        let game = random_game(&mut rng);
        let walks: Vec<Walk> = enumerate_walks(game.h(), 3, None, None).unwrap().collect();
        for p in walks.iter().take(10) {
            for q in walks.iter().filter(|q| q.start() == p.end()).take(10) {
                let joined = p.concat(q).unwrap();
                let product = game
                    .walk_matrix(p)
                    .unwrap()
                    .trop_mul(&game.walk_matrix(q).unwrap())
                    .unwrap();
                assert_eq!(game.walk_matrix(&joined).unwrap(), product);
            }
        }
    }
}

/// Once every matrix is finite, the family at length `n` is exactly the set of
/// matrices of non-improvable walks, per endpoint pair.
#[test]
fn families_match_enumeration() {
    let mut rng = rng(12);
    for i in 0..40 {
        let game = random_game(&mut rng);
        for family in Families::new(&game).take(7) {
            let family = family.unwrap();
            let n = family.len();
            let mut by_pair: BTreeMap<(usize, usize), MatrixSet> = BTreeMap::new();
            let mut classes: BTreeMap<(usize, usize), Vec<TropMatrix>> = BTreeMap::new();
            for w in non_improvable_walks(&game, n).unwrap() {
                classes
                    .entry((w.start(), w.end()))
                    .or_default()
                    .push(game.walk_matrix(&w).unwrap());
            }
            for (k, v) in classes {
                by_pair.insert(k, v.into_iter().collect());
            }
            for ((u, v), set) in family.iter() {
                let expect = by_pair.remove(&(u, v)).unwrap_or_default();
                assert_eq!(set.dagger(), expect, "instance {i}, n={n}, pair ({u},{v})");
                if n >= game.n0_g() {
                    assert!(set.all_finite());
                    assert_eq!(set, &expect, "instance {i}, n={n}: pruned set differs");
                }
            }
        }
    }
}

#[test]
fn prefix_search_matches_full_enumeration() {
    let mut rng = rng(13);
    for _ in 0..40 {
        let game = random_game(&mut rng);
        for n in 1..=6 {
            assert_eq!(
                non_improvable_walks_by_prefix(&game, n).unwrap(),
                non_improvable_walks(&game, n).unwrap()
            );
        }
    }
}

#[test]
fn walk_matrices_stay_within_the_variation_bound() {
    let mut rng = rng(14);
    for _ in 0..40 {
        let game = random_game(&mut rng);
        let n = 2 * game.n0_g() + 1;
        if n > 9 {
            continue;
        }
        for p in enumerate_walks(game.h(), n, None, None).unwrap().take(2000) {
            let delta = game.walk_matrix(&p).unwrap().stats().delta.finite().unwrap();
            assert!(delta <= game.variation_bound());
        }
    }
}

#[test]
fn responses_restrict_to_interior_subwalks() {
    let mut rng = rng(15);
    for _ in 0..30 {
        let game = random_game(&mut rng);
        let n = game.n0_g().max(3) + 2;
        if n > 8 {
            continue;
        }
        for p in enumerate_walks(game.h(), n, None, None).unwrap().take(20) {
            for v in 0..game.g().vertex_count() {
                for w in 0..game.g().vertex_count() {
                    let Ok(r) = best_responses(&game, &p, v, w, ResponseMode::All) else {
                        continue;
                    };
                    for q in r.walks.iter().take(5) {
                        let sum: i64 = q.edges().iter().zip(p.edges()).map(|(&a, &b)| game.payoff(a, b)).sum();
                        assert_eq!(sum, r.cost);
                        // drop one step at each end
                        let pi = game.h().walk(p.edges()[1..n - 1].to_vec()).unwrap();
                        let qi = game.g().walk(q.edges()[1..n - 1].to_vec()).unwrap();
                        let inner = best_responses(&game, &pi, qi.start(), qi.end(), ResponseMode::All).unwrap();
                        assert!(inner.walks.contains(&qi));
                    }
                }
            }
        }
    }
}

#[test]
fn values_satisfy_their_certificates() {
    let mut rng = rng(16);
    for _ in 0..40 {
        let game = random_game(&mut rng);
        let limits = Limits {
            max_len: 200,
            max_set_size: 5_000,
        };
        let Ok(report) = solve(&game, limits) else { continue };
        assert!(verify_certificate(&game, &report).unwrap());
        assert_eq!(report.v_table, vn_table(&game, report.n2).unwrap());
        assert!(report.c_observed >= 0);
    }
}

/// The automaton never reads a word that is not deep inside some
/// non-improvable walk, and with `max(n1, k)` steps of room on each side the
/// two languages coincide.
#[test]
fn automaton_language_matches_deep_windows() {
    let mut rng = rng(17);
    let mut checked = 0;
    while checked < 25 {
        let game = random_game(&mut rng);
        let limits = Limits {
            max_len: 100,
            max_set_size: 2_000,
        };
        let Ok(report) = solve(&game, limits) else { continue };
        checked += 1;
        let a = build_dagger_automaton(&game, &report).unwrap();
        let n_max = report.n1 + 2 * report.k;
        let words = automaton_word_levels(&a, n_max).unwrap();
        let layers = PrefixLayers::new(&game, n_max + 2 * report.k).unwrap();
        for n in 1..=n_max {
            let windows = layers.windows(n + 2 * report.k, report.k, n).unwrap();
            assert!(words[n - 1].is_subset(&windows), "n={n}");
        }
        let wide = report.n1.max(report.k);
        assert!(languages_agree_upto(&game, &a, n_max, wide)
            .unwrap()
            .iter()
            .all(|&ok| ok));
    }
}

#[test]
fn layered_windows_match_enumerated_walks() {
    let mut rng = rng(18);
    for _ in 0..30 {
        let game = random_game(&mut rng);
        let layers = PrefixLayers::new(&game, 7).unwrap();
        for len in 1..=7 {
            let walks = non_improvable_walks(&game, len).unwrap();
            for offset in 0..len {
                for n in 1..=len - offset {
                    let expect: std::collections::BTreeSet<Vec<EdgeId>> =
                        walks.iter().map(|w| w.edges()[offset..offset + n].to_vec()).collect();
                    assert_eq!(
                        layers.windows(len, offset, n).unwrap(),
                        expect,
                        "len={len} offset={offset} n={n}"
                    );
                }
            }
        }
    }
}
