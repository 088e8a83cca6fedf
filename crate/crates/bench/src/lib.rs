//! Criterion benchmarks for `censorfit`; see `benches/`.
