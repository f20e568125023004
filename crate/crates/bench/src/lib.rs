//! Criterion benchmarks for assembly and the linear solver; see `benches/`.
