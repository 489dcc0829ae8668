//! Criterion benchmarks for moyalks kernels; see `benches/`.
