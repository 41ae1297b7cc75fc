//! Library surface of the batch CLI, split out so the commands and the
//! config schema are directly testable.

pub mod commands;
pub mod config;
