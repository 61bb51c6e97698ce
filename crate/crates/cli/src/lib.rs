//! Configuration, dispatch and output for the `nnls-lab` binary.

pub mod config;
pub mod output;
pub mod run;
