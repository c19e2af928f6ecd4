//! Maximal clades in Yule–Harding phylogenetic trees, studied through the
//! equivalent random binary search tree.
//!
//! The crate is split into:
//!
//! - [`tree`]: samplers for the random binary search tree and for the
//!   branching-process trees stopped by an exponential clock;
//! - [`functionals`]: per-tree quantities (maximal green nodes, tolls,
//!   cutoff counts, the G/H decomposition, green chains, clade census);
//! - [`stream`]: the same functionals evaluated directly from split
//!   decisions without materializing the tree;
//! - [`exact`]: recursions, exact distributions and closed forms;
//! - [`mc`]: reproducible parallel Monte Carlo experiments and summaries;
//! - [`verify`]: the acceptance checks shared by the CLI and the test suite.

pub mod error;
pub mod exact;
pub mod functionals;
pub mod mc;
pub mod rng;
pub mod stream;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use tree::BinaryTree;
