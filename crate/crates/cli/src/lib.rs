//! Command-line front end: subcommands, report rendering and the selftest.

pub mod commands;
pub mod render;
pub mod selftest;

pub use commands::{
    analyze, compat, error_json, error_kind, excision, exit_code, reduction, run, wd, Cli, Command, Failure,
    Options, Outcome,
};
