//! Command-line front end and HTTP service for the `sbmis` solver.

pub mod cli;
pub mod server;

pub use cli::{main_with_args, Cli};
