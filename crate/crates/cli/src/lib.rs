//! The `stance` command line: argument definitions, run configuration,
//! subcommands and the exit-code contract.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | usage or configuration error |
//! | 2 | micro-theory parse error |
//! | 3 | merge search exceeded its cap |
//! | 4 | synthesis did not reach a fixed point |

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

pub use args::{Cli, Command, Format};
pub use commands::{run, Outcome};
pub use output::exit_code;
