//! Library surface of the walklab command line: argument types, command
//! implementations, verification suites, and output plumbing. The binary
//! in `main.rs` is a thin clap wrapper so the whole pipeline stays
//! testable in-process.

pub mod commands;
pub mod config;
pub mod output;
pub mod suites;

pub use commands::{
    cmd_construct_params, cmd_estimate, cmd_simulate, cmd_verify, ConstructArgs, EstimateArgs,
    Outcome, SimulateArgs, VerifyArgs,
};
