//! Criterion benchmarks for the scopebench kernels live in `benches/`.
