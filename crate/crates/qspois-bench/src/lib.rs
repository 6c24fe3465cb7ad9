//! Benchmark-only crate; see `benches/perf.rs`.
