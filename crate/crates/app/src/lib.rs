//! The `mcqgen` command-line tool and review service.

pub mod cli;
pub mod commands;
pub mod config;
pub mod requests;
pub mod server;
