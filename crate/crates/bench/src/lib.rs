//! Criterion benchmarks for the smoothing kernels live in `benches/`.
