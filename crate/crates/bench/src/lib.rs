//! Criterion benchmarks for `feedaudit-core`; see `benches/`.
