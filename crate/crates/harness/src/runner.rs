//! One lifelong run from config to run directory, optionally served over
//! HTTP while it goes.

use std::net::SocketAddr;
use std::path::Path;

use anyhow::Context;
use voyager_core::agent::{NoSupervisor, Supervisor};
use voyager_core::library::SkillLibrary;
use voyager_core::metrics::{summarize, RunSummary};

use crate::config::RunConfig;
use crate::service::{HttpSupervisor, Server, Shared};
use crate::setup::build_agent;
use crate::store::{Recording, RunDir};

pub struct RunOptions<'a> {
    pub run_dir: &'a Path,
    /// Seeds the library, e.g. to continue from an earlier run.
    pub library: Option<SkillLibrary>,
    pub serve: Option<SocketAddr>,
}

pub fn execute(config: &RunConfig, opts: RunOptions<'_>) -> anyhow::Result<RunSummary> {
    let dir = RunDir::create(opts.run_dir)?;
    std::fs::write(
        dir.root().join("config.toml"),
        toml::to_string(config).context("serializing config")?,
    )
    .context("writing config.toml")?;

    let agent = build_agent(config, opts.library)?;
    let shared = Shared::new();
    let (inner, server): (Box<dyn Supervisor + Send>, _) = match opts.serve {
        Some(addr) => {
            shared.publish_snapshot(agent.snapshot());
            let server = Server::start(shared.clone(), addr).context("starting server")?;
            (Box::new(HttpSupervisor::new(shared.clone())), Some(server))
        }
        None => (Box::new(NoSupervisor), None),
    };
    let mut agent = agent.with_supervisor(Box::new(Recording::new(dir.event_log()?, inner)));
    agent.run();
    shared.finish();
    dir.finish(&agent)?;
    if let Some(s) = server {
        s.stop();
    }
    Ok(summarize(agent.events()))
}
