//! Baseline drivers that share the world, gateway and round machinery with
//! the main agent but differ in what the prompt carries and how tasks arise.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::agent::{Agent, EpisodeCtx, EpisodeFinal, PromptSections, VerifyMode, OPEN_ENDED_TASK};
use crate::events::RunEvent;
use crate::llm::{Gateway, GatewayError, RoleTag};
use crate::prompts::{self, StateLine};
use crate::task::{Proposer, Task};
use crate::world::AgentState;

/// Rounds per subgoal before AutoGPT moves on.
pub const AUTOGPT_ROUNDS: u32 = 4;
/// Consecutive subgoals without a new item that trigger a replan.
pub const AUTOGPT_STALL_LIMIT: u32 = 3;

const DECOMPOSE_LINES: [StateLine; 6] = [
    StateLine::Biome,
    StateLine::NearbyBlocks,
    StateLine::NearbyEntities,
    StateLine::Position,
    StateLine::Equipment,
    StateLine::Inventory,
];

pub fn decompose_user_prompt(goal: &str, state: &AgentState) -> String {
    format!("Goal: {goal}\n{}", prompts::render_state(state, &DECOMPOSE_LINES))
}

/// `Subgoal N: ...` lines in order; anything else is ignored.
pub fn parse_subgoals(text: &str) -> Vec<String> {
    text.lines()
        .filter_map(|line| {
            let line = line.trim();
            let rest = line
                .strip_prefix("Subgoal")
                .or_else(|| line.strip_prefix("subgoal"))?;
            let (num, goal) = rest.split_once(':')?;
            num.trim().parse::<u32>().ok()?;
            let goal = goal.trim();
            (!goal.is_empty()).then(|| goal.to_string())
        })
        .collect()
}

/// Breaks `goal` into subgoals. An empty parse falls back to the goal itself.
pub fn decompose_goal(
    goal: &str,
    state: &AgentState,
    gateway: &mut Gateway,
) -> Result<Vec<String>, GatewayError> {
    let req = gateway.request(RoleTag::Decompose, prompts::DECOMPOSE, decompose_user_prompt(goal, state));
    let text = gateway.chat(&req)?.text;
    let subgoals = parse_subgoals(&text);
    Ok(if subgoals.is_empty() {
        alloc::vec![goal.to_string()]
    } else {
        subgoals
    })
}

impl Agent {
    fn fixed_task(&mut self) -> Task {
        let id = self.episodes.len() as u64;
        Task::new(id, OPEN_ENDED_TASK, Proposer::Fixed)
    }

    /// Cycles of exactly `max_rounds` rounds on the open-ended task.
    fn run_fixed_cycles(&mut self, sections: PromptSections, verify: VerifyMode) {
        while self.iteration < self.config.max_iterations && !self.stopped {
            self.checkpoint(Some(OPEN_ENDED_TASK));
            let task = self.fixed_task();
            let ev = RunEvent::TaskProposed {
                agent: self.name(),
                task: task.clone(),
                reasoning: String::new(),
            };
            self.emit(ev);
            let mut ctx = EpisodeCtx {
                before: self.world.observe(),
                task,
                context: String::new(),
                rounds: Vec::new(),
                sections,
                verify,
                retrieve: false,
            };
            let mut final_state = EpisodeFinal::Abandoned;
            for _ in 0..self.config.max_rounds {
                if self.iteration >= self.config.max_iterations {
                    final_state = EpisodeFinal::Truncated;
                    break;
                }
                if let Err(e) = self.run_round(&mut ctx) {
                    self.warn(format!("cycle aborted: {e}"));
                    final_state = EpisodeFinal::Aborted;
                    break;
                }
            }
            let aborted = final_state == EpisodeFinal::Aborted;
            self.finish_fixed(ctx, final_state);
            if aborted {
                break;
            }
        }
    }

    fn finish_fixed(&mut self, ctx: EpisodeCtx, final_state: EpisodeFinal) {
        let ev = RunEvent::EpisodeEnded {
            agent: self.name(),
            task: ctx.task.description.clone(),
            success: final_state == EpisodeFinal::Success,
            rounds: ctx.rounds.len() as u32,
            committed_skill: None,
        };
        self.emit(ev);
        self.episodes.push(crate::agent::EpisodeRecord {
            task: ctx.task,
            rounds: ctx.rounds,
            final_state,
            committed_skill: None,
        });
    }

    /// Chat log and state only.
    pub fn run_react(&mut self) {
        let sections = PromptSections {
            chat_log: true,
            execution_error: false,
            critique: false,
        };
        self.run_fixed_cycles(sections, VerifyMode::Off);
    }

    /// ReAct plus execution errors and a critic verdict after every round.
    pub fn run_reflexion(&mut self) {
        let sections = PromptSections {
            chat_log: true,
            execution_error: true,
            critique: true,
        };
        self.run_fixed_cycles(sections, VerifyMode::Critic);
    }

    /// Decomposes `goal` into subgoals and works through them, replanning when
    /// the list runs out or progress stalls. With `stop_when_done` the run
    /// ends once every subgoal of a plan has succeeded. Returns whether that
    /// happened.
    pub fn run_autogpt(&mut self, goal: &str, stop_when_done: bool) -> bool {
        let retrieve = self.config.attach_skill_library;
        let sections = PromptSections {
            chat_log: true,
            execution_error: true,
            critique: false,
        };
        let mut failures = 0;
        while self.iteration < self.config.max_iterations && !self.stopped {
            let state = self.world.observe();
            let subgoals = match decompose_goal(goal, &state, &mut self.gateway) {
                Ok(s) => s,
                Err(e) => {
                    failures += 1;
                    self.warn(format!("decomposition failed: {e}"));
                    if failures >= self.config.max_consecutive_errors {
                        break;
                    }
                    continue;
                }
            };
            failures = 0;
            let ev = RunEvent::Replanned {
                agent: self.name(),
                iteration: self.iteration,
                subgoals: subgoals.clone(),
            };
            self.emit(ev);

            let mut stalled = 0;
            let mut all_done = true;
            for sub in subgoals {
                if self.iteration >= self.config.max_iterations || self.stopped {
                    return false;
                }
                self.checkpoint(Some(&sub));
                let id = self.episodes.len() as u64;
                let task = Task::new(id, sub, Proposer::Fixed);
                let ev = RunEvent::TaskProposed {
                    agent: self.name(),
                    task: task.clone(),
                    reasoning: String::new(),
                };
                self.emit(ev);
                let held_before = self.world.ever_held().len();
                let mut ctx = EpisodeCtx {
                    before: self.world.observe(),
                    task,
                    context: String::new(),
                    rounds: Vec::new(),
                    sections,
                    verify: VerifyMode::Off,
                    retrieve,
                };
                let mut final_state = EpisodeFinal::Abandoned;
                for _ in 0..AUTOGPT_ROUNDS {
                    if self.iteration >= self.config.max_iterations {
                        final_state = EpisodeFinal::Truncated;
                        break;
                    }
                    if let Err(e) = self.run_round(&mut ctx) {
                        self.warn(format!("subgoal aborted: {e}"));
                        final_state = EpisodeFinal::Aborted;
                        break;
                    }
                    if ctx.rounds.last().is_some_and(|r| r.outcome.error.is_none()) {
                        final_state = EpisodeFinal::Success;
                        break;
                    }
                }
                let aborted = final_state == EpisodeFinal::Aborted;
                all_done &= final_state == EpisodeFinal::Success;
                self.finish_fixed(ctx, final_state);
                if aborted {
                    return false;
                }
                if self.world.ever_held().len() > held_before {
                    stalled = 0;
                } else {
                    stalled += 1;
                    if stalled >= AUTOGPT_STALL_LIMIT {
                        all_done = false;
                        break;
                    }
                }
            }
            if stop_when_done && all_done {
                return true;
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subgoal_lines() {
        let text = "Reasoning: need tools\nSubgoal 1: Mine 3 wood log\nsubgoal 2 : Craft 1 crafting table\nSubgoal x: nope\nSubgoal 3:";
        assert_eq!(parse_subgoals(text), ["Mine 3 wood log", "Craft 1 crafting table"]);
    }
}
