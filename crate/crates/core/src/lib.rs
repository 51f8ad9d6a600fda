//! Probabilistic left-corner grammars and PCFGs over bracketed treebanks.

pub mod chart;
pub mod error;
pub mod eval;
pub mod grammar;
pub mod lc;
pub mod stats;
pub mod synth;
pub mod tree;
pub mod treebank;

pub use error::{Error, Result};
pub use tree::Tree;
