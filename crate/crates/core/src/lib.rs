//! Exact values of non-alternating mean-payoff games on primitive digraphs,
//! with the covering radius of primitive sofic shifts as the main application.

pub mod covering;
pub mod format;
pub mod game;
pub mod graph;
pub mod strategies;
pub mod tropical;

pub use covering::{
    brute_covering_radius_n, build_hamming_game, code_words, covering_radius, hamming_distance, CoveringError,
    CoveringProblem,
};
pub use format::{parse_graph, parse_payoff, serialize_graph, serialize_payoff, FormatError, GraphFile};
pub use game::{
    brute_value_n, brute_value_table, solve, verify_certificate, vn_table, DaggerFamily, GameError, GameInstance,
    Limit, Limits, Side, SolveReport,
};
pub use graph::{enumerate_walks, Digraph, EdgeId, GraphError, LabeledDigraph, VertexId, Walk};
pub use num_rational::Ratio;
pub use strategies::{
    best_responses, build_dagger_automaton, languages_agree, min_cycle_mean, non_improvable_walks,
    periodic_optimal_pair, PeriodicPair, ProfileAutomaton, StrategyError,
};
pub use tropical::{ExtInt, MatrixSet, TropError, TropMatrix};
