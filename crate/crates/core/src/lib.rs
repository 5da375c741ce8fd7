//! Feedback vertex sets in bipartite tournaments.

mod bits;
pub mod cfvs;
pub mod dfvc;
pub mod graph;
pub mod harness;
pub mod io;
pub mod matching;
pub mod msequence;
pub mod sample_space;
pub mod solvers;
pub mod structure;
