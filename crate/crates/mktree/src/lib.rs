//! Markov networks with bounded-treewidth (k-tree) topology: information
//! measures, structure learning, and exact junction-tree inference.

pub mod error;
pub mod infotheory;
pub mod infer;
pub mod io;
pub mod ktree;
pub mod learn;
pub mod model;
pub mod tables;

pub use error::{MkError, Result};
