//! Benchmarks for the solvers and hull construction; see `benches/solvers.rs`.
