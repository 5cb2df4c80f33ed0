//! The run event stream. One JSON object per line; metrics are computed
//! from it alone.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::curriculum::QaPair;
use crate::task::Task;
use crate::world::BlockPos;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub success: bool,
    pub critique: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RunEvent {
    RunStarted {
        agent: String,
        seed: u64,
        max_iterations: u64,
        curriculum: String,
    },
    TaskProposed {
        agent: String,
        task: Task,
        reasoning: String,
    },
    Context {
        agent: String,
        pairs: Vec<QaPair>,
    },
    /// One code-generation call and everything that followed from it.
    Round {
        agent: String,
        iteration: u64,
        task: String,
        round: u32,
        prompt_digest: String,
        /// Where the agent stood when the model was asked.
        position: BlockPos,
        biome: String,
        program: Option<String>,
        feedback: Vec<String>,
        error: Option<String>,
        verdict: Option<Verdict>,
        rule_check: Option<bool>,
        /// Items held for the first time during this round.
        new_items: Vec<String>,
    },
    SkillCommitted {
        agent: String,
        iteration: u64,
        name: String,
        description: String,
    },
    EpisodeEnded {
        agent: String,
        task: String,
        success: bool,
        rounds: u32,
        committed_skill: Option<String>,
    },
    Replanned {
        agent: String,
        iteration: u64,
        subgoals: Vec<String>,
    },
    Warning {
        agent: String,
        message: String,
    },
    RunEnded {
        agent: String,
        iterations: u64,
        completed: Vec<String>,
        failed: Vec<String>,
    },
}

impl RunEvent {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("events serialize")
    }

    pub fn from_line(line: &str) -> Result<RunEvent, serde_json::Error> {
        serde_json::from_str(line)
    }
}

/// Serializes events as line-delimited JSON.
pub fn to_log(events: &[RunEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_line());
        out.push('\n');
    }
    out
}

/// Parses a line-delimited log; reports the first bad line (1-based).
pub fn parse_log(text: &str) -> Result<Vec<RunEvent>, (usize, serde_json::Error)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| RunEvent::from_line(l).map_err(|e| (i + 1, e)))
        .collect()
}
