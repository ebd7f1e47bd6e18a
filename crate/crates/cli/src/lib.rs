//! Command-line front end for `obsplan-core`: scenario files, runs and reports.

pub mod commands;
pub mod config;
pub mod report;
pub mod svg;
