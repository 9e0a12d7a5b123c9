//! Batch experiment runner: configuration, experiment drivers, and report
//! writers behind the `mwlp` binary.

pub mod config;
pub mod experiments;
pub mod report;
