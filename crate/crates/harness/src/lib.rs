//! Filesystem, network and command-line side of the agent: live providers,
//! run directories, the console HTTP API and run orchestration.

pub mod config;
pub mod live;
pub mod runner;
pub mod service;
pub mod setup;
pub mod store;
