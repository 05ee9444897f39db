//! Benchmarks for the solver live under `benches/`.
