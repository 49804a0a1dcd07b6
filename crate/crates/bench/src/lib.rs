//! Criterion benchmarks for the core kernels. Run with `cargo bench -p yangkit-bench`.
