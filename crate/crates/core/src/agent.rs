//! The lifelong loop: propose a task, then generate, execute and verify
//! programs for up to four rounds, committing verified programs as skills.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::curriculum::{Curriculum, CurriculumConfig, CurriculumError, CurriculumMode, QaPair, StateField};
use crate::embedding::Embedder;
use crate::events::{RunEvent, Verdict};
use crate::library::{describe_skill, LibraryError, RetrievalQuery, Skill, SkillLibrary};
use crate::llm::{ChatRequest, Gateway, GatewayError, RoleTag};
use crate::prompts::{self, StateLine};
use crate::script::{self, ApiRegistry, ErrorKind, ExecConfig, ExecError, ExecutionOutcome, Span};
use crate::task::{rule_check, Proposer, Task};
use crate::verifier::{self, VerificationResult};
use crate::world::{AgentState, World};

pub const MAX_ROUNDS: u32 = 4;
pub const DEFAULT_MAX_ITERATIONS: u64 = 160;
pub const ZERO_SHOT_MAX_ITERATIONS: u64 = 50;
/// The fixed goal given to every baseline.
pub const OPEN_ENDED_TASK: &str = "explore the world and get as many items as possible";

const CHAIN_OF_THOUGHT: &str = "First explain the reason why the code from the last round fails (if there was one), then give step-by-step plans to finish the task, and finally write the code in a single ```skillscript block.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Voyager,
    React,
    Reflexion,
    #[serde(rename = "autogpt")]
    AutoGpt,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Voyager => "voyager",
            AgentKind::React => "react",
            AgentKind::Reflexion => "reflexion",
            AgentKind::AutoGpt => "autogpt",
        }
    }

    pub fn parse(s: &str) -> Option<AgentKind> {
        [
            AgentKind::Voyager,
            AgentKind::React,
            AgentKind::Reflexion,
            AgentKind::AutoGpt,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationConfig {
    pub include_env_feedback: bool,
    pub include_execution_errors: bool,
    pub use_self_verification: bool,
    pub use_skill_library: bool,
    /// Verdicts come from a person instead of the critic model.
    pub human_critic: bool,
    pub curriculum_mode: CurriculumMode,
    /// Replaces the model that serves code generation.
    pub codegen_model: Option<String>,
}

impl Default for AblationConfig {
    fn default() -> Self {
        AblationConfig {
            include_env_feedback: true,
            include_execution_errors: true,
            use_self_verification: true,
            use_skill_library: true,
            human_critic: false,
            curriculum_mode: CurriculumMode::Auto,
            codegen_model: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub agent: AgentKind,
    pub seed: u64,
    pub max_iterations: u64,
    pub max_rounds: u32,
    pub retrieval_k: usize,
    pub exec: ExecConfig,
    pub ablation: AblationConfig,
    /// Ask the auxiliary model how to solve each task before the first round.
    pub task_context: bool,
    /// Stop after this many consecutive curriculum or gateway failures.
    pub max_consecutive_errors: u32,
    /// Baseline variant: give AutoGPT retrieval from the skill library.
    pub attach_skill_library: bool,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            agent: AgentKind::Voyager,
            seed: 0,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            max_rounds: MAX_ROUNDS,
            retrieval_k: crate::library::DEFAULT_TOP_K,
            exec: ExecConfig::default(),
            ablation: AblationConfig::default(),
            task_context: true,
            max_consecutive_errors: 5,
            attach_skill_library: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub iteration_index: u64,
    /// 1-based position within the episode.
    pub round: u32,
    pub prompt_digest: String,
    pub program: Option<String>,
    pub outcome: ExecutionOutcome,
    pub verdict: Option<VerificationResult>,
    pub rule_check: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeFinal {
    Success,
    Abandoned,
    /// The iteration cap was hit mid-episode.
    Truncated,
    /// A gateway failure or stop request ended the episode early.
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub task: Task,
    pub rounds: Vec<RoundRecord>,
    pub final_state: EpisodeFinal,
    pub committed_skill: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Awaiting {
    Task,
    Critique,
}

/// Read-only view published at round boundaries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub agent: String,
    pub iteration: u64,
    pub state: AgentState,
    pub task: Option<String>,
    pub round: u32,
    pub last_program: Option<String>,
    pub last_feedback: Vec<String>,
    pub last_error: Option<String>,
    pub completed: Vec<String>,
    pub failed: Vec<String>,
    pub awaiting: Option<Awaiting>,
}

/// Hooks for an outside observer or human operator. Every method has a
/// do-nothing default.
pub trait Supervisor {
    fn on_event(&mut self, _event: &RunEvent) {}
    /// Called at round boundaries; may block (e.g. while paused).
    fn checkpoint(&mut self, _snapshot: &Snapshot) {}
    /// Blocks for a human-proposed task; `None` ends the run.
    fn human_task(&mut self, _snapshot: &Snapshot) -> Option<String> {
        None
    }
    /// Blocks for a human verdict; `None` ends the run.
    fn human_critique(&mut self, _snapshot: &Snapshot) -> Option<VerificationResult> {
        None
    }
}

pub struct NoSupervisor;

impl Supervisor for NoSupervisor {}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AgentError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Curriculum(#[from] CurriculumError),
    #[error(transparent)]
    Library(#[from] LibraryError),
    #[error("run stopped: {0}")]
    Stopped(String),
}

/// Which optional sections a code-generation prompt carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptSections {
    pub chat_log: bool,
    pub execution_error: bool,
    pub critique: bool,
}

pub struct CodegenInputs<'a> {
    pub task: &'a str,
    pub context: &'a str,
    pub retrieved: &'a [&'a Skill],
    pub last_round: Option<&'a RoundRecord>,
    pub state: &'a AgentState,
    pub sections: PromptSections,
}

/// System prompt: guidelines, API docs and retrieved skill sources. User
/// prompt: the previous round's code, chat log, error and critique (from
/// round 2 on), then state, task, context and the reasoning instruction.
pub fn assemble_codegen_prompt(inputs: &CodegenInputs<'_>) -> ChatRequest {
    let mut registry = ApiRegistry::with_primitives();
    let mut skills = String::new();
    for skill in inputs.retrieved {
        registry.add_skill(skill.function().clone(), &skill.description);
        skills.push_str(&format!("// {}\n{}\n\n", skill.description, skill.source.trim_end()));
    }
    let skills = if skills.is_empty() {
        "No skills have been retrieved from the library yet.".to_string()
    } else {
        format!("Skills retrieved from the library:\n\n{}", skills.trim_end())
    };
    let system = prompts::render(
        prompts::CODEGEN,
        &[("api_docs", registry.render_api_docs().trim_end()), ("skills", &skills)],
    );

    let mut user = String::new();
    if let Some(last) = inputs.last_round {
        user.push_str(&format!(
            "Code from the last round:\n{}\n\n",
            last.program.as_deref().map(str::trim_end).unwrap_or("No code")
        ));
        if inputs.sections.chat_log {
            let log = if last.outcome.feedback.is_empty() {
                "None".to_string()
            } else {
                last.outcome.feedback.join("\n")
            };
            user.push_str(&format!("Chat log: {log}\n\n"));
        }
        if inputs.sections.execution_error {
            let err = last
                .outcome
                .error
                .as_ref()
                .map(|e| e.to_string())
                .unwrap_or_else(|| "No error".into());
            user.push_str(&format!("Execution error:\n{err}\n\n"));
        }
        if inputs.sections.critique {
            let critique = last
                .verdict
                .as_ref()
                .map(|v| v.critique.as_str())
                .filter(|c| !c.is_empty())
                .unwrap_or("None");
            user.push_str(&format!("Critique: {critique}\n\n"));
        }
    }
    user.push_str(&prompts::render_state(inputs.state, &StateLine::ALL));
    user.push_str(&format!("\nTask: {}\n\n", inputs.task));
    let context = if inputs.context.trim().is_empty() {
        "None"
    } else {
        inputs.context.trim()
    };
    user.push_str(&format!("Context: {context}\n\n{CHAIN_OF_THOUGHT}\n"));
    ChatRequest::new(RoleTag::Codegen, system, user)
}

/// The single fenced code block in a response.
pub fn extract_program(text: &str) -> Result<String, ExecError> {
    let mut blocks = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in text.lines() {
        if line.trim_start().starts_with("```") {
            match current.take() {
                Some(body) => blocks.push(body.join("\n")),
                None => current = Some(Vec::new()),
            }
        } else if let Some(body) = current.as_mut() {
            body.push(line);
        }
    }
    let err = |m: String| ExecError::new(ErrorKind::Extraction, m, Span::default());
    if current.is_some() {
        return Err(err("unterminated code block in the response".into()));
    }
    match blocks.len() {
        0 => Err(err("no code block found in the response; put the program in a single ```skillscript block".into())),
        1 => Ok(blocks.pop().expect("one block")),
        n => Err(err(format!(
            "expected exactly one code block but found {n}; it is ambiguous which one to run"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VerifyMode {
    /// The critic model judges.
    Critic,
    /// A person judges through the supervisor.
    Human,
    /// No verdict; the caller decides what counts as success.
    Off,
}

/// Per-episode settings and history.
pub(crate) struct EpisodeCtx {
    pub task: Task,
    pub context: String,
    pub before: AgentState,
    pub rounds: Vec<RoundRecord>,
    pub sections: PromptSections,
    pub verify: VerifyMode,
    pub retrieve: bool,
}

pub struct Agent {
    pub world: World,
    pub gateway: Gateway,
    pub library: SkillLibrary,
    pub embedder: Box<dyn Embedder>,
    pub curriculum: Curriculum,
    pub config: AgentConfig,
    pub(crate) events: Vec<RunEvent>,
    pub(crate) iteration: u64,
    pub(crate) episodes: Vec<EpisodeRecord>,
    pub(crate) stopped: bool,
    supervisor: Box<dyn Supervisor>,
    snapshot: Snapshot,
}

impl Agent {
    pub fn new(
        world: World,
        mut gateway: Gateway,
        library: SkillLibrary,
        embedder: Box<dyn Embedder>,
        config: AgentConfig,
    ) -> Agent {
        if let Some(model) = &config.ablation.codegen_model {
            gateway.models_mut().codegen = model.clone();
        }
        let curriculum = Curriculum::new(CurriculumConfig {
            mode: config.ablation.curriculum_mode.clone(),
            ..CurriculumConfig::default()
        });
        let snapshot = Snapshot {
            agent: config.agent.name().into(),
            iteration: 0,
            state: world.observe(),
            task: None,
            round: 0,
            last_program: None,
            last_feedback: Vec::new(),
            last_error: None,
            completed: Vec::new(),
            failed: Vec::new(),
            awaiting: None,
        };
        Agent {
            world,
            gateway,
            library,
            embedder,
            curriculum,
            config,
            events: Vec::new(),
            iteration: 0,
            episodes: Vec::new(),
            stopped: false,
            supervisor: Box::new(NoSupervisor),
            snapshot,
        }
    }

    pub fn with_supervisor(mut self, supervisor: Box<dyn Supervisor>) -> Self {
        self.supervisor = supervisor;
        self
    }

    pub fn events(&self) -> &[RunEvent] {
        &self.events
    }

    pub fn episodes(&self) -> &[EpisodeRecord] {
        &self.episodes
    }

    /// Code-generation calls so far.
    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn snapshot(&self) -> &Snapshot {
        &self.snapshot
    }

    pub(crate) fn name(&self) -> String {
        self.config.agent.name().to_string()
    }

    pub(crate) fn emit(&mut self, event: RunEvent) {
        self.supervisor.on_event(&event);
        self.events.push(event);
    }

    pub(crate) fn warn(&mut self, message: String) {
        log::warn!("{message}");
        let agent = self.name();
        self.emit(RunEvent::Warning { agent, message });
    }

    fn refresh_snapshot(&mut self, task: Option<&str>, awaiting: Option<Awaiting>) {
        let s = &mut self.snapshot;
        s.iteration = self.iteration;
        s.state = self.world.observe();
        if let Some(t) = task {
            s.task = Some(t.to_string());
        }
        s.completed = self.curriculum.progress.completed_descriptions();
        s.failed = self.curriculum.progress.failed_descriptions();
        s.awaiting = awaiting;
    }

    fn note_round(&mut self, rec: &RoundRecord) {
        let s = &mut self.snapshot;
        s.round = rec.round;
        s.last_program = rec.program.clone();
        s.last_feedback = rec.outcome.feedback.clone();
        s.last_error = rec.outcome.error.as_ref().map(|e| e.to_string());
    }

    pub(crate) fn checkpoint(&mut self, task: Option<&str>) {
        self.refresh_snapshot(task, None);
        let snap = self.snapshot.clone();
        self.supervisor.checkpoint(&snap);
    }

    /// Runs the configured driver until the iteration cap (or the curriculum
    /// runs out).
    pub fn run(&mut self) {
        let curriculum = match self.config.agent {
            AgentKind::Voyager => self.curriculum.mode().name().to_string(),
            _ => "fixed".to_string(),
        };
        let ev = RunEvent::RunStarted {
            agent: self.name(),
            seed: self.config.seed,
            max_iterations: self.config.max_iterations,
            curriculum,
        };
        self.emit(ev);
        match self.config.agent {
            AgentKind::Voyager => self.run_lifelong(),
            AgentKind::React => self.run_react(),
            AgentKind::Reflexion => self.run_reflexion(),
            AgentKind::AutoGpt => {
                self.run_autogpt(OPEN_ENDED_TASK, false);
            }
        }
        let ev = RunEvent::RunEnded {
            agent: self.name(),
            iterations: self.iteration,
            completed: self.curriculum.progress.completed_descriptions(),
            failed: self.curriculum.progress.failed_descriptions(),
        };
        self.emit(ev);
    }

    /// The next task from whichever curriculum is active; `Ok(None)` when
    /// the curriculum is exhausted.
    pub fn next_task(&mut self) -> Result<Option<(Task, String)>, AgentError> {
        match self.curriculum.mode().clone() {
            CurriculumMode::Auto => {
                let state = self.world.observe();
                let n = self.curriculum.progress.num_completed();
                let mut context: Vec<QaPair> = Vec::new();
                if self
                    .curriculum
                    .config
                    .schedule
                    .unlocked(StateField::AdditionalContext, n)
                {
                    let (pairs, warning) = self.curriculum.gather_context(&state, &mut self.gateway);
                    if let Some(w) = warning {
                        self.warn(w);
                    }
                    let ev = RunEvent::Context {
                        agent: self.name(),
                        pairs: pairs.clone(),
                    };
                    self.emit(ev);
                    context = pairs;
                }
                let (task, reasoning) =
                    self.curriculum
                        .propose_next_task(&state, &context, &mut self.gateway)?;
                Ok(Some((task, reasoning)))
            }
            CurriculumMode::Manual { .. } => Ok(self.curriculum.manual_next().map(|t| (t, String::new()))),
            CurriculumMode::Random { .. } => Ok(Some((self.curriculum.random_next()?, String::new()))),
            CurriculumMode::Human => {
                self.refresh_snapshot(None, Some(Awaiting::Task));
                let snap = self.snapshot.clone();
                let got = self.supervisor.human_task(&snap);
                self.snapshot.awaiting = None;
                match got {
                    Some(d) if !d.trim().is_empty() => {
                        Ok(Some((self.curriculum.new_task(d.trim(), Proposer::Human), String::new())))
                    }
                    _ => Ok(None),
                }
            }
        }
    }

    /// Episodes until the iteration cap.
    pub fn run_lifelong(&mut self) {
        let mut errors = 0;
        while self.iteration < self.config.max_iterations {
            self.checkpoint(None);
            let (task, reasoning) = match self.next_task() {
                Ok(Some(t)) => t,
                Ok(None) => break,
                Err(e) => {
                    errors += 1;
                    self.warn(format!("curriculum failed: {e}"));
                    if errors >= self.config.max_consecutive_errors {
                        self.warn(format!("stopping after {errors} consecutive failures"));
                        break;
                    }
                    continue;
                }
            };
            let ev = RunEvent::TaskProposed {
                agent: self.name(),
                task: task.clone(),
                reasoning,
            };
            self.emit(ev);
            let record = self.run_episode(task);
            match record.final_state {
                EpisodeFinal::Aborted => {
                    errors += 1;
                    if errors >= self.config.max_consecutive_errors {
                        self.warn(format!("stopping after {errors} consecutive failures"));
                        break;
                    }
                }
                _ => errors = 0,
            }
            if self.stopped {
                break;
            }
        }
    }

    fn verify_mode(&self) -> VerifyMode {
        if self.config.ablation.human_critic {
            VerifyMode::Human
        } else if self.config.ablation.use_self_verification {
            VerifyMode::Critic
        } else {
            VerifyMode::Off
        }
    }

    /// Suggestions for the task from the auxiliary model, or empty.
    pub(crate) fn task_context(&mut self, task: &str) -> String {
        if !self.config.task_context {
            return String::new();
        }
        match self.curriculum.task_context(task, &mut self.gateway) {
            Ok(c) => c,
            Err(e) => {
                self.warn(format!("task context skipped: {e}"));
                String::new()
            }
        }
    }

    /// One task: up to `max_rounds` rounds, then commit or give up.
    pub fn run_episode(&mut self, task: Task) -> EpisodeRecord {
        let context = self.task_context(&task.description);
        let ab = &self.config.ablation;
        let verify = self.verify_mode();
        let mut ctx = EpisodeCtx {
            before: self.world.observe(),
            task,
            context,
            rounds: Vec::new(),
            sections: PromptSections {
                chat_log: ab.include_env_feedback,
                execution_error: ab.include_execution_errors,
                critique: verify != VerifyMode::Off,
            },
            verify,
            retrieve: ab.use_skill_library,
        };
        let mut final_state = EpisodeFinal::Abandoned;
        for _ in 0..self.config.max_rounds {
            if self.iteration >= self.config.max_iterations {
                final_state = EpisodeFinal::Truncated;
                break;
            }
            match self.run_round(&mut ctx) {
                Ok(()) => {}
                Err(e) => {
                    self.warn(format!("episode `{}` aborted: {e}", ctx.task.description));
                    if matches!(e, AgentError::Stopped(_)) {
                        self.stopped = true;
                    }
                    final_state = EpisodeFinal::Aborted;
                    break;
                }
            }
            let last = ctx.rounds.last().expect("round recorded");
            if last.verdict.as_ref().is_some_and(|v| v.success) {
                final_state = EpisodeFinal::Success;
                break;
            }
        }
        // without a verifier the final round counts when it ran cleanly
        if verify == VerifyMode::Off
            && final_state == EpisodeFinal::Abandoned
            && ctx.rounds.last().is_some_and(|r| r.outcome.error.is_none())
        {
            final_state = EpisodeFinal::Success;
        }
        let mut committed = None;
        if final_state == EpisodeFinal::Success && ctx.retrieve {
            let last = ctx.rounds.last().expect("successful episode has rounds");
            if let Some(source) = last.program.clone() {
                match self.commit_skill(&source) {
                    Ok(name) => committed = Some(name),
                    Err(e) => self.warn(format!("skill not committed: {e}")),
                }
            }
        }
        match final_state {
            EpisodeFinal::Success => self.curriculum.record_outcome(&ctx.task, true),
            EpisodeFinal::Abandoned => self.curriculum.record_outcome(&ctx.task, false),
            EpisodeFinal::Truncated | EpisodeFinal::Aborted => {}
        }
        let ev = RunEvent::EpisodeEnded {
            agent: self.name(),
            task: ctx.task.description.clone(),
            success: final_state == EpisodeFinal::Success,
            rounds: ctx.rounds.len() as u32,
            committed_skill: committed.clone(),
        };
        self.emit(ev);
        let record = EpisodeRecord {
            task: ctx.task,
            rounds: ctx.rounds,
            final_state,
            committed_skill: committed,
        };
        self.episodes.push(record.clone());
        self.checkpoint(None);
        record
    }

    fn commit_skill(&mut self, source: &str) -> Result<String, AgentError> {
        let func = script::parse(source).map_err(|e| LibraryError::Invalid(e.to_string()))?;
        let description = describe_skill(source, &func.name, &mut self.gateway)?;
        let skill = self
            .library
            .add_skill(source, &description, self.embedder.as_ref(), self.iteration)?;
        let (name, description) = (skill.name.clone(), skill.description.clone());
        let ev = RunEvent::SkillCommitted {
            agent: self.name(),
            iteration: self.iteration,
            name: name.clone(),
            description,
        };
        self.emit(ev);
        Ok(name)
    }

    /// One code-generation call, one execution, one verdict.
    pub(crate) fn run_round(&mut self, ctx: &mut EpisodeCtx) -> Result<(), AgentError> {
        let state = self.world.observe();
        let last = ctx.rounds.last();
        let retrieved: Vec<&Skill> = if ctx.retrieve {
            let plan = if ctx.context.is_empty() {
                ctx.task.description.clone()
            } else {
                format!("{}\n{}", ctx.task.description, ctx.context)
            };
            let feedback = last.map(|r| r.outcome.feedback.join("\n")).unwrap_or_default();
            let mut query = RetrievalQuery::new(plan, feedback);
            query.k = self.config.retrieval_k.max(1);
            self.library
                .retrieve(&query, self.embedder.as_ref())?
                .into_iter()
                .map(|(s, _)| s)
                .collect()
        } else {
            Vec::new()
        };
        let mut req = assemble_codegen_prompt(&CodegenInputs {
            task: &ctx.task.description,
            context: &ctx.context,
            retrieved: &retrieved,
            last_round: last,
            state: &state,
            sections: ctx.sections,
        });
        req.temperature = self.gateway.expected_temperature(RoleTag::Codegen);
        let registry = if ctx.retrieve || self.config.attach_skill_library {
            self.library.api_registry()
        } else {
            ApiRegistry::with_primitives()
        };
        let response = self.gateway.chat(&req)?;
        self.iteration += 1;
        let iteration = self.iteration;

        let held_before = self.world.ever_held().clone();
        let (program, outcome) = match extract_program(&response.text) {
            Err(e) => (None, self.no_execution(e)),
            Ok(src) => match script::compile(&src, &registry) {
                Err(e) => (Some(src), self.no_execution(e)),
                Ok(func) => {
                    let out = script::execute(&func, &mut self.world, &registry, &self.config.exec);
                    (Some(src), out)
                }
            },
        };
        let new_items: Vec<String> = self
            .world
            .ever_held()
            .difference(&held_before)
            .cloned()
            .collect();

        let verdict = match ctx.verify {
            VerifyMode::Off => None,
            VerifyMode::Critic => {
                let (v, fallback) = verifier::self_verify(
                    &outcome.end_state,
                    &ctx.task.description,
                    &ctx.context,
                    &mut self.gateway,
                )?;
                if fallback {
                    self.warn(format!("verifier reply unparseable at iteration {iteration}"));
                }
                Some(v)
            }
            VerifyMode::Human => {
                let provisional = RoundRecord {
                    iteration_index: iteration,
                    round: ctx.rounds.len() as u32 + 1,
                    prompt_digest: String::new(),
                    program: program.clone(),
                    outcome: outcome.clone(),
                    verdict: None,
                    rule_check: None,
                };
                self.note_round(&provisional);
                self.refresh_snapshot(Some(&ctx.task.description), Some(Awaiting::Critique));
                let snap = self.snapshot.clone();
                let got = self.supervisor.human_critique(&snap);
                self.snapshot.awaiting = None;
                match got {
                    Some(mut v) => {
                        if v.success {
                            v.critique.clear();
                        } else if v.critique.trim().is_empty() {
                            v.critique = "The task is not complete yet.".into();
                        }
                        Some(v)
                    }
                    None => return Err(AgentError::Stopped("no human verdict".into())),
                }
            }
        };
        let check = rule_check(
            self.world.registry(),
            &ctx.before,
            &outcome.end_state,
            &ctx.task.description,
        );
        if let (Some(v), Some(c)) = (&verdict, check) {
            if v.success != c {
                log::info!(
                    "verdict {} disagrees with the inventory check for `{}`",
                    v.success,
                    ctx.task.description
                );
            }
        }
        let record = RoundRecord {
            iteration_index: iteration,
            round: ctx.rounds.len() as u32 + 1,
            prompt_digest: req.digest(),
            program,
            outcome,
            verdict,
            rule_check: check,
        };
        let ev = RunEvent::Round {
            agent: self.name(),
            iteration,
            task: ctx.task.description.clone(),
            round: record.round,
            prompt_digest: record.prompt_digest.clone(),
            position: state.position,
            biome: state.biome.clone(),
            program: record.program.clone(),
            feedback: record.outcome.feedback.clone(),
            error: record.outcome.error.as_ref().map(|e| e.to_string()),
            verdict: record.verdict.as_ref().map(|v| Verdict {
                success: v.success,
                critique: v.critique.clone(),
            }),
            rule_check: check,
            new_items,
        };
        self.emit(ev);
        self.note_round(&record);
        ctx.rounds.push(record);
        self.checkpoint(Some(&ctx.task.description.clone()));
        Ok(())
    }

    fn no_execution(&self, error: ExecError) -> ExecutionOutcome {
        ExecutionOutcome {
            feedback: Vec::new(),
            error: Some(error),
            primitive_trace: Vec::new(),
            end_state: self.world.observe(),
            steps_used: 0,
        }
    }

    /// Item names held at any point so far.
    pub fn items_discovered(&self) -> BTreeSet<String> {
        self.world.ever_held().clone()
    }
}
