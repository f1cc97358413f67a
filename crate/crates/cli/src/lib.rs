//! Front end of the `bsm` binary: argument types, command execution and the
//! JSON documents it prints.

pub mod args;
pub mod exec;
pub mod render;

pub use args::{Cli, Command};
pub use exec::{execute, CliError, Output};
