//! Criterion benchmarks for the solver, evaluators and simulator live in
//! `benches/`. This crate has no library surface.
