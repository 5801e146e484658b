//! Criterion micro-benchmarks for the layer kernels and the full training
//! step. The crate exists only for its `benches/`; run with `cargo bench`.
//!
//! These complement the `relukan bench` CLI command: criterion gives
//! statistically careful per-kernel numbers, the CLI reports whole-run
//! wall-clock figures in CSV form.
