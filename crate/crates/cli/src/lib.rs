//! Library side of the `lrpoly` binary: argument types, subcommand
//! implementations and their JSON output shapes.

pub mod args;
pub mod commands;
pub mod output;
pub mod text;

pub use args::{Cli, Command, Common, Format};
pub use commands::{run, CliError, Outcome};
