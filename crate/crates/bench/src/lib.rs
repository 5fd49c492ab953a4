//! Criterion benchmarks for triflow-core; see `benches/`.
