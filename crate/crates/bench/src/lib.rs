//! Benchmarks for the walking detector live under `benches/`.
