//! Command-line front end for the `uniqmax_core` engines.

pub mod cli;
pub mod modelspec;
pub mod output;
pub mod parallel;
