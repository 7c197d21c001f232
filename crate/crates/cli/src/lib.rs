//! Batch workflow around the `bdar` library: ingest and discretize two
//! series, inspect their association, fit and compare the model variants,
//! simulate, forecast, and run replicate studies.
//!
//! Every subcommand reads a [`config::RunConfig`]; command-line flags
//! override the values of a TOML config file.

pub mod cli;
pub mod commands;
pub mod config;
pub mod data;
