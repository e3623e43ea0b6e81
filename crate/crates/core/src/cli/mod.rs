//! Input documents, subcommands and reports.

pub mod doc;
pub mod parse;
pub mod run;
