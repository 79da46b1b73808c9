//! Command-line harness: configuration, experiments and report rendering.

pub mod config;
pub mod harness;
pub mod output;
