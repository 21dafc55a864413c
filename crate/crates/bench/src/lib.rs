//! Criterion benchmarks for the chernforge kernels live in `benches/`.
