//! Fixed-parameter algorithms on graphs and matrices of low treewidth.
//!
//! Everything here is driven by a decomposition of the input: Gaussian
//! elimination guided by strong orderings built from path or tree-partition
//! decompositions (with a vertex-splitting reduction for general tree
//! decompositions), randomized maximum matching through the Tutte matrix,
//! maximum vertex flows by divide and conquer on the decomposition tree,
//! and a treewidth approximation that produces the decompositions in the
//! first place. Brute-force reference implementations live in [`oracle`]
//! and back every randomized or approximate component in the test suite.
//!
//! See the `examples/` directory for one runnable program per capability,
//! and the `lowtw` binary for the batch file interface.

pub mod decomp;
pub mod elim;
pub mod error;
pub mod field;
pub mod flow;
pub mod gen;
pub mod graph;
pub mod io;
pub mod matching;
pub mod oracle;
pub mod separators;
pub mod sparse;
pub mod split;
pub mod tw_approx;

pub use error::Error;
