//! Criterion benchmarks for the allocator and coalition engine live in
//! `benches/`; this crate has no library code.
