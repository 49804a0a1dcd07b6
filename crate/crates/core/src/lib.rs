pub mod bethe_two;
pub mod catalog;
pub mod charges;
pub mod grading;
pub mod report;
pub mod spectrum;
pub mod tensor;
pub mod verifier;

use std::sync::OnceLock;

pub use bethe_two::{two_exc_block, two_exc_compare, BetheTwoBlock, BetheTwoReport};
pub use catalog::{build_hamiltonian_density, build_r_matrix, HamiltonianParams, LocalOperator, ModelSpec, RMatrixFn};
pub use charges::{emit_integrability_equations, q2q3_commutator_norm, Ansatz, EquationSystem};
pub use grading::{graded_permutation, GradingConvention};
pub use report::Report;
pub use spectrum::{full_spectrum, sector_spectrum, Boundary, Cluster, SpectrumReport};
pub use tensor::{ChainOperator, ComplexMatrix, C64};
pub use verifier::{verify_spec, Tolerances, VerificationReport};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "YANGKIT_WORKERS";

/// Shared rayon pool; `YANGKIT_WORKERS` sets its size.
pub fn worker_pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = std::env::var(WORKERS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok()).filter(|&n| n > 0) {
            builder = builder.num_threads(n);
        }
        builder.build().expect("worker pool")
    })
}
