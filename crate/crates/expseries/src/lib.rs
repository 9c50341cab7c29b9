//! Files, command-line driver and parallel evaluation on top of
//! `expseries-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod eval;
pub mod export;
pub mod json;
pub mod report;
pub mod samples;
pub mod tablefile;
