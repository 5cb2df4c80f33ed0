//! Zero-shot evaluation: a carried-over skill library in a brand-new world
//! with an empty inventory and a hard iteration cap.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::agent::{Agent, AgentConfig, AgentKind, EpisodeFinal, ZERO_SHOT_MAX_ITERATIONS};
use crate::baselines::decompose_goal;
use crate::embedding::Embedder;
use crate::events::RunEvent;
use crate::library::SkillLibrary;
use crate::llm::{Gateway, GatewayError};
use crate::task::Proposer;
use crate::world::{create_world, ConfigError, WorldConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ZeroShotError {
    #[error(transparent)]
    World(#[from] ConfigError),
    #[error("inventory not empty at the start: {0:?}")]
    DirtyStart(Vec<String>),
    #[error("task decomposition failed: {0}")]
    Decompose(#[from] GatewayError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgoalResult {
    pub subgoal: String,
    pub success: bool,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroShotResult {
    pub task: String,
    pub seed: u64,
    pub success: bool,
    /// Code-generation calls used, at most the cap.
    pub iterations: u64,
    pub max_iterations: u64,
    pub subgoals: Vec<SubgoalResult>,
    pub events: Vec<RunEvent>,
}

impl ZeroShotResult {
    /// Iterations used, or "N/A" when the task was not solved within the cap.
    pub fn report(&self) -> String {
        if self.success {
            self.iterations.to_string()
        } else {
            "N/A".to_string()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroShotConfig {
    /// Seed of the fresh world; pick one the library was not trained in.
    pub seed: u64,
    pub max_iterations: u64,
    pub agent: AgentConfig,
}

impl ZeroShotConfig {
    pub fn new(seed: u64) -> Self {
        let agent = AgentConfig {
            seed,
            max_iterations: ZERO_SHOT_MAX_ITERATIONS,
            ..AgentConfig::default()
        };
        ZeroShotConfig {
            seed,
            max_iterations: ZERO_SHOT_MAX_ITERATIONS,
            agent,
        }
    }
}

/// Solves one task with the given library. The library is only read; skills
/// learned along the way go to a scratch copy that is dropped afterwards.
pub fn run_zero_shot(
    library: &SkillLibrary,
    embedder: Box<dyn Embedder>,
    gateway: Gateway,
    task: &str,
    config: &ZeroShotConfig,
) -> Result<ZeroShotResult, ZeroShotError> {
    let world = create_world(WorldConfig::with_seed(config.seed))?;
    let start = world.observe();
    if !start.inventory.is_empty() {
        return Err(ZeroShotError::DirtyStart(start.inventory.keys().cloned().collect()));
    }
    let mut agent_config = config.agent.clone();
    agent_config.agent = AgentKind::Voyager;
    agent_config.seed = config.seed;
    agent_config.max_iterations = config.max_iterations;
    let scratch = library.clone();
    let mut agent = Agent::new(world, gateway, scratch, embedder, agent_config);
    agent.emit(RunEvent::RunStarted {
        agent: "zero_shot".into(),
        seed: config.seed,
        max_iterations: config.max_iterations,
        curriculum: format!("zero_shot: {task}"),
    });

    let subgoals = decompose_goal(task, &start, &mut agent.gateway)?;
    agent.emit(RunEvent::Replanned {
        agent: "zero_shot".into(),
        iteration: 0,
        subgoals: subgoals.clone(),
    });
    let mut results: Vec<SubgoalResult> = subgoals
        .iter()
        .map(|s| SubgoalResult {
            subgoal: s.clone(),
            success: false,
            attempts: 0,
        })
        .collect();
    let mut current = 0;
    while current < results.len() && agent.iteration() < config.max_iterations && !agent.stopped {
        let t = agent
            .curriculum
            .new_task(&results[current].subgoal, Proposer::Fixed);
        results[current].attempts += 1;
        let record = agent.run_episode(t);
        match record.final_state {
            EpisodeFinal::Success => {
                results[current].success = true;
                current += 1;
            }
            EpisodeFinal::Aborted => break,
            EpisodeFinal::Abandoned | EpisodeFinal::Truncated => {}
        }
    }
    let success = results.iter().all(|r| r.success);
    let iterations = agent.iteration();
    agent.emit(RunEvent::RunEnded {
        agent: "zero_shot".into(),
        iterations,
        completed: results.iter().filter(|r| r.success).map(|r| r.subgoal.clone()).collect(),
        failed: results.iter().filter(|r| !r.success).map(|r| r.subgoal.clone()).collect(),
    });
    Ok(ZeroShotResult {
        task: task.to_string(),
        seed: config.seed,
        success,
        iterations,
        max_iterations: config.max_iterations,
        subgoals: results,
        events: agent.events().to_vec(),
    })
}
