//! Run configuration, read from TOML. Every field has a default so a config
//! file only needs the values it changes.

use std::path::Path;

use serde::{Deserialize, Serialize};
use voyager_core::agent::{AblationConfig, AgentConfig, AgentKind, DEFAULT_MAX_ITERATIONS};
use voyager_core::curriculum::{default_random_pool, CurriculumMode};
use voyager_core::llm::ModelMap;
use voyager_core::registry::Registry;
use voyager_core::script::ExecConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum LlmMode {
    /// HTTP chat-completions endpoint.
    Live,
    /// Offline oracle that plays the game from the item tables.
    Scripted,
    /// Offline oracle that can only reuse stored skills.
    ScriptedWeak,
    /// Answers from a recorded cassette.
    Replay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CurriculumKind {
    Auto,
    Manual,
    Random,
    Human,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub mode: LlmMode,
    pub base_url: String,
    /// Name of the environment variable that holds the bearer token.
    pub api_key_env: String,
    pub models: ModelMap,
    pub max_attempts: u32,
    pub backoff_base_ms: u64,
    pub backoff_max_ms: u64,
    pub timeout_secs: u64,
    /// Cassette to answer from in replay mode.
    pub cassette: Option<String>,
    /// Replay in recorded order (strict) or by digest alone.
    pub strict_replay: bool,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            mode: LlmMode::Scripted,
            base_url: "https://api.openai.com/v1".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            models: ModelMap::default(),
            max_attempts: 5,
            backoff_base_ms: 1000,
            backoff_max_ms: 60_000,
            timeout_secs: 120,
            cassette: None,
            strict_replay: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbedderKind {
    /// Feature hashing; offline and deterministic.
    Hash,
    /// HTTP embeddings endpoint sharing the chat provider's base URL.
    Live,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedderConfig {
    pub kind: EmbedderKind,
    pub model: String,
    pub dimension: usize,
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        EmbedderConfig {
            kind: EmbedderKind::Hash,
            model: "text-embedding-ada-002".into(),
            dimension: voyager_core::embedding::HASH_EMBEDDER_DIM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub agent: AgentKind,
    pub seed: u64,
    pub max_iterations: u64,
    pub curriculum: CurriculumKind,
    /// Task list for the manual curriculum; the ten-step tool ladder when empty.
    pub manual_tasks: Vec<String>,
    /// Item pool for the random curriculum; the discovered-items list when empty.
    pub random_pool: Vec<String>,
    pub include_env_feedback: bool,
    pub include_execution_errors: bool,
    pub use_self_verification: bool,
    pub use_skill_library: bool,
    pub human_critic: bool,
    pub task_context: bool,
    pub attach_skill_library: bool,
    pub retrieval_k: usize,
    pub max_rounds: u32,
    pub max_consecutive_errors: u32,
    pub exec: ExecConfig,
    pub llm: LlmConfig,
    pub embedder: EmbedderConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let a = AgentConfig::default();
        RunConfig {
            agent: AgentKind::Voyager,
            seed: 0,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            curriculum: CurriculumKind::Auto,
            manual_tasks: Vec::new(),
            random_pool: Vec::new(),
            include_env_feedback: true,
            include_execution_errors: true,
            use_self_verification: true,
            use_skill_library: true,
            human_critic: false,
            task_context: a.task_context,
            attach_skill_library: false,
            retrieval_k: a.retrieval_k,
            max_rounds: a.max_rounds,
            max_consecutive_errors: a.max_consecutive_errors,
            exec: ExecConfig::default(),
            llm: LlmConfig::default(),
            embedder: EmbedderConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: String,
        source: toml::de::Error,
    },
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text).map_err(|source| ConfigFileError::Parse {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn curriculum_mode(&self, registry: &Registry) -> CurriculumMode {
        match self.curriculum {
            CurriculumKind::Auto => CurriculumMode::Auto,
            CurriculumKind::Human => CurriculumMode::Human,
            CurriculumKind::Manual if self.manual_tasks.is_empty() => CurriculumMode::manual(),
            CurriculumKind::Manual => CurriculumMode::Manual {
                tasks: self.manual_tasks.clone(),
            },
            CurriculumKind::Random => CurriculumMode::Random {
                pool: if self.random_pool.is_empty() {
                    default_random_pool(registry)
                } else {
                    self.random_pool.clone()
                },
                seed: self.seed,
            },
        }
    }

    pub fn agent_config(&self, registry: &Registry) -> AgentConfig {
        AgentConfig {
            agent: self.agent,
            seed: self.seed,
            max_iterations: self.max_iterations,
            max_rounds: self.max_rounds,
            retrieval_k: self.retrieval_k,
            exec: self.exec,
            ablation: AblationConfig {
                include_env_feedback: self.include_env_feedback,
                include_execution_errors: self.include_execution_errors,
                use_self_verification: self.use_self_verification,
                use_skill_library: self.use_skill_library,
                human_critic: self.human_critic,
                curriculum_mode: self.curriculum_mode(registry),
                codegen_model: None,
            },
            task_context: self.task_context,
            max_consecutive_errors: self.max_consecutive_errors,
            attach_skill_library: self.attach_skill_library,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let c = RunConfig::from_toml(
            "agent = \"react\"\nseed = 9\n[llm]\nmode = \"replay\"\ncassette = \"c.jsonl\"\n[llm.models]\ncodegen = \"gpt-3.5-turbo-0301\"\n",
        )
        .unwrap();
        assert_eq!(c.agent, AgentKind::React);
        assert_eq!(c.seed, 9);
        assert_eq!(c.max_iterations, 160);
        assert_eq!(c.llm.mode, LlmMode::Replay);
        assert_eq!(c.llm.models.codegen, "gpt-3.5-turbo-0301");
        assert_eq!(c.llm.models.curriculum, ModelMap::default().curriculum);
        assert!(c.use_self_verification);
    }

    #[test]
    fn unknown_keys_are_rejected_by_type() {
        assert!(RunConfig::from_toml("agent = \"nobody\"").is_err());
    }
}
