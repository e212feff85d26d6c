//! List homomorphism for oriented trees.

pub mod digraph;
pub mod exec;
pub mod pattern;
pub mod circular;
pub mod construct;
pub mod solver;
pub mod generate;
pub mod hm;
pub mod ladder;
pub mod waves;
pub mod io;
pub mod cli;
