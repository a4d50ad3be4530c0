//! Criterion benchmarks for framestamp; see `benches/`.
