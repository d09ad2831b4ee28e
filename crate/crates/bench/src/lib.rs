//! Criterion benchmarks for `edgepower-core`; see `benches/kernels.rs`.
