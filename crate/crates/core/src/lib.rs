pub mod analysis;
pub mod bloch;
pub mod circuit;
pub mod cli;
pub mod error;
pub mod graph;
pub mod perm;
pub mod protocol;
