//! Library side of the `nvgeom` command-line tool: configuration resolution,
//! command execution and the validation suite. The binary in `main.rs` is a
//! thin wrapper so that tests and the acceptance suite can drive everything
//! in-process.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;
pub mod validate;
