//! Library side of the `cone` binary: config parsing, the four commands and
//! their writers.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
