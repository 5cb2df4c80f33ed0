//! Builds gateways, embedders and agents from a [`RunConfig`].

use std::path::Path;

use voyager_core::agent::Agent;
use voyager_core::embedding::{Embedder, HashEmbedder};
use voyager_core::library::SkillLibrary;
use voyager_core::llm::{ChatProvider, Gateway, ReplayProvider};
use voyager_core::oracle::OracleProvider;
use voyager_core::registry::Registry;
use voyager_core::world::{create_world, ConfigError, WorldConfig};

use crate::config::{EmbedderConfig, EmbedderKind, LlmConfig, LlmMode, RunConfig};
use crate::live::{LiveChatProvider, LiveEmbedder};
use crate::store::{load_cassette, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum SetupError {
    #[error("replay mode needs a cassette path")]
    NoCassette,
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("world config: {0}")]
    World(#[from] ConfigError),
}

pub fn build_provider(c: &LlmConfig) -> Result<Box<dyn ChatProvider>, SetupError> {
    Ok(match c.mode {
        LlmMode::Live => Box::new(LiveChatProvider::from_config(c)),
        LlmMode::Scripted => Box::new(OracleProvider::full()),
        LlmMode::ScriptedWeak => Box::new(OracleProvider::library_only()),
        LlmMode::Replay => {
            let path = c.cassette.as_deref().ok_or(SetupError::NoCassette)?;
            let cassette = load_cassette(Path::new(path))?;
            Box::new(ReplayProvider::new(cassette, c.strict_replay))
        }
    })
}

pub fn build_gateway(c: &LlmConfig) -> Result<Gateway, SetupError> {
    Ok(Gateway::new(build_provider(c)?).with_models(c.models.clone()))
}

pub fn build_embedder(e: &EmbedderConfig, llm: &LlmConfig) -> Box<dyn Embedder> {
    match e.kind {
        EmbedderKind::Hash => Box::new(HashEmbedder::new(e.dimension)),
        EmbedderKind::Live => Box::new(LiveEmbedder::new(llm, &e.model, e.dimension)),
    }
}

/// A fresh agent in a fresh world; `library` seeds the skill library (an
/// empty one otherwise).
pub fn build_agent(config: &RunConfig, library: Option<SkillLibrary>) -> Result<Agent, SetupError> {
    let registry = Registry::bundled();
    let world = create_world(WorldConfig::with_seed(config.seed))?;
    let gateway = build_gateway(&config.llm)?;
    let embedder = build_embedder(&config.embedder, &config.llm);
    let library = library.unwrap_or_else(|| SkillLibrary::new(embedder.as_ref()));
    Ok(Agent::new(
        world,
        gateway,
        library,
        embedder,
        config.agent_config(&registry),
    ))
}
