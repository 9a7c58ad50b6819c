//! Library surface of the command-line tool: the problem-file grammar, the
//! subcommand implementations, and the report types.

pub mod commands;
pub mod expr;
pub mod problem;
pub mod report;
