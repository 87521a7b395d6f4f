//! Criterion benchmarks for the path tower; see `benches/`.
