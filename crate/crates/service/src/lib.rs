//! HTTP service and command-line front end over `teaser-core`.

pub mod api;
pub mod cli;
pub mod config;
pub mod store;
pub mod workflow;
