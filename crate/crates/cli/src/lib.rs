//! Command-line front end: assessment documents, gamble expressions and the
//! `impbounds` commands.

pub mod commands;
pub mod document;
pub mod error;
pub mod expr;
pub mod output;

pub use commands::run;
pub use document::{parse_document, AssessmentDocument};
pub use error::CliError;
pub use expr::{evaluate, gamble_of, parse_expression, Expr};
