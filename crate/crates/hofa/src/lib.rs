//! Command-line front end for `hofa-core`: file formats, configuration
//! layering, JSON reports and the acceptance suite.

pub mod acceptance;
pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod report;
