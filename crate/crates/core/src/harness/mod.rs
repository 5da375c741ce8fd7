//! Instance generators, the property suite and the benchmark runner.

pub mod bench;
pub mod gen;
pub mod lemmas;

pub use bench::{bench, write_csv, BenchError, BenchRecord, BenchReport, BenchSolver};
pub use gen::{corpus, generate, rng_for, GenKind, GenSpec};
pub use lemmas::{
    random_conflict_graph, run_lemma_suite, Fault, PropertyResult, SuiteConfig, SuiteReport,
};
