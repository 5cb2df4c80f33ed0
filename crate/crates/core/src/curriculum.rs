//! Task proposal: automatic (model-driven, warm-up gated), manual, random or
//! human, plus the completed and failed ledgers.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::llm::{Gateway, GatewayError, RoleTag};
use crate::prompts::{self, StateLine};
use crate::registry::{display_name, Registry};
use crate::task::{Proposer, Task};
use crate::world::AgentState;

/// The ten-step curriculum that ends with a diamond.
pub const MANUAL_CURRICULUM: [&str; 10] = [
    "Mine 3 wood log",
    "Craft 1 crafting table",
    "Craft 1 wooden pickaxe",
    "Mine 11 cobblestone",
    "Craft 1 stone pickaxe",
    "Craft 1 furnace",
    "Mine 3 iron ore",
    "Smelt 3 iron ore",
    "Craft 1 iron pickaxe",
    "Mine 1 diamond",
];

/// Items collected across long exploration runs; the random curriculum draws
/// from the ones this world can produce.
pub const DISCOVERED_ITEMS: &[&str] = &[
    "acacia_log", "acacia_planks", "amethyst_block", "amethyst_shard", "andesite", "arrow",
    "azure_bluet", "bamboo", "beef", "birch_boat", "birch_log", "birch_planks", "black_wool",
    "bone", "bone_meal", "bucket", "cactus", "calcite", "chest", "chicken", "clock", "coal",
    "cobbled_deepslate", "cobblestone", "cobblestone_wall", "cod", "cooked_beef",
    "cooked_chicken", "cooked_cod", "cooked_mutton", "cooked_porkchop", "cooked_salmon",
    "copper_block", "copper_ingot", "crafting_table", "diamond", "diamond_sword", "diorite",
    "dirt", "ender_pearl", "feather", "fishing_rod", "flint", "furnace", "gold_ingot", "granite",
    "grass_block", "gravel", "green_dye", "gunpowder", "iron_axe", "iron_boots",
    "iron_chestplate", "iron_helmet", "iron_ingot", "iron_leggings", "iron_pickaxe",
    "iron_shovel", "iron_sword", "jungle_slab", "kelp", "lapis_lazuli", "leather",
    "lightning_rod", "lily_pad", "mutton", "oak_log", "oak_planks", "oak_sapling", "porkchop",
    "pufferfish", "rail", "raw_copper", "raw_gold", "raw_iron", "redstone", "rotten_flesh",
    "salmon", "sand", "sandstone", "scaffolding", "shears", "shield", "smooth_basalt",
    "snowball", "spruce_log", "spruce_planks", "spyglass", "stick", "stone_axe", "stone_hoe",
    "stone_pickaxe", "stone_shovel", "stone_sword", "string", "torch", "tripwire_hook", "tuff",
    "water_bucket", "wheat_seeds", "white_bed", "white_wool", "wooden_hoe", "wooden_pickaxe",
    "wooden_sword",
];

/// The random pool: discovered items this registry knows about.
pub fn default_random_pool(registry: &Registry) -> Vec<String> {
    let known = registry.all_items();
    DISCOVERED_ITEMS
        .iter()
        .filter(|i| known.contains(**i))
        .map(|i| i.to_string())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateField {
    CoreInventory,
    Equipment,
    NearbyBlocks,
    Position,
    NearbyEntities,
    FullInventory,
    RecentlySeenBlocks,
    Biome,
    Health,
    Hunger,
    Time,
    AdditionalContext,
}

impl StateField {
    pub const ALL: [StateField; 12] = [
        StateField::CoreInventory,
        StateField::Equipment,
        StateField::NearbyBlocks,
        StateField::Position,
        StateField::NearbyEntities,
        StateField::FullInventory,
        StateField::RecentlySeenBlocks,
        StateField::Biome,
        StateField::Health,
        StateField::Hunger,
        StateField::Time,
        StateField::AdditionalContext,
    ];
}

/// How many completed tasks unlock each part of the curriculum prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WarmupSchedule {
    pub thresholds: BTreeMap<StateField, u32>,
    /// Substrings an item name must contain to appear in the core inventory.
    pub core_items: Vec<String>,
}

impl Default for WarmupSchedule {
    fn default() -> Self {
        use StateField::*;
        let thresholds = [
            (CoreInventory, 0),
            (Equipment, 0),
            (NearbyBlocks, 0),
            (Position, 0),
            (NearbyEntities, 5),
            (FullInventory, 7),
            (RecentlySeenBlocks, 10),
            (Biome, 10),
            (Health, 15),
            (Hunger, 15),
            (Time, 15),
            (AdditionalContext, 15),
        ]
        .into_iter()
        .collect();
        let core_items = [
            "log", "planks", "stick", "crafting_table", "furnace", "dirt", "coal", "pickaxe",
            "sword", "axe",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        WarmupSchedule {
            thresholds,
            core_items,
        }
    }
}

impl WarmupSchedule {
    pub fn unlocked(&self, field: StateField, num_completed: u32) -> bool {
        self.thresholds
            .get(&field)
            .is_some_and(|t| *t <= num_completed)
    }

    pub fn is_core_item(&self, item: &str) -> bool {
        self.core_items.iter().any(|k| item.contains(k.as_str()))
    }
}

/// The state as the curriculum is allowed to see it.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredState {
    pub fields: BTreeSet<StateField>,
    state: AgentState,
    core_items: Vec<String>,
}

pub fn warmup_filter(state: &AgentState, num_completed: u32, schedule: &WarmupSchedule) -> FilteredState {
    let fields = StateField::ALL
        .iter()
        .copied()
        .filter(|f| schedule.unlocked(*f, num_completed))
        .collect();
    FilteredState {
        fields,
        state: state.clone(),
        core_items: schedule.core_items.clone(),
    }
}

impl FilteredState {
    pub fn includes(&self, field: StateField) -> bool {
        self.fields.contains(&field)
    }

    /// State lines in prompt order. Known chests are shown together with the
    /// recently seen blocks.
    pub fn render(&self, drop_recently_seen: bool) -> String {
        use StateField::*;
        let s = &self.state;
        let mut out = String::new();
        let mut line = |field: StateField, l: StateLine| {
            if self.includes(field) {
                out.push_str(&prompts::state_line(s, l));
                out.push('\n');
            }
        };
        line(Biome, StateLine::Biome);
        line(Time, StateLine::Time);
        line(NearbyBlocks, StateLine::NearbyBlocks);
        if !drop_recently_seen {
            line(RecentlySeenBlocks, StateLine::RecentlySeenBlocks);
        }
        line(NearbyEntities, StateLine::NearbyEntities);
        line(Health, StateLine::Health);
        line(Hunger, StateLine::Hunger);
        line(Position, StateLine::Position);
        line(Equipment, StateLine::Equipment);
        if self.includes(FullInventory) {
            out.push_str(&prompts::state_line(s, StateLine::Inventory));
            out.push('\n');
        } else if self.includes(CoreInventory) {
            let core = &self.core_items;
            let keep = |item: &str| core.iter().any(|k| item.contains(k.as_str()));
            out.push_str(&prompts::inventory_line(s, &keep));
            out.push('\n');
        }
        if !drop_recently_seen && self.includes(RecentlySeenBlocks) {
            out.push_str(&prompts::state_line(s, StateLine::Chests));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaPair {
    pub question: String,
    pub concept: String,
    pub answer: String,
}

/// Reference documents keyed by concept, used to ground answers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocStore {
    docs: BTreeMap<String, String>,
}

impl DocStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, concept: &str, text: impl Into<String>) {
        self.docs.insert(concept.trim().to_lowercase(), text.into());
    }

    pub fn lookup(&self, concept: &str) -> Option<&str> {
        self.docs.get(&concept.trim().to_lowercase()).map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplorationProgress {
    pub completed: Vec<Task>,
    pub failed: Vec<Task>,
}

impl ExplorationProgress {
    pub fn new() -> Self {
        ExplorationProgress {
            completed: Vec::new(),
            failed: Vec::new(),
        }
    }

    pub fn num_completed(&self) -> u32 {
        self.completed.len() as u32
    }

    pub fn completed_descriptions(&self) -> Vec<String> {
        self.completed.iter().map(|t| t.description.clone()).collect()
    }

    pub fn failed_descriptions(&self) -> Vec<String> {
        self.failed.iter().map(|t| t.description.clone()).collect()
    }

    /// Records an attempt. Tasks are identified by description: a success
    /// moves a failed task to the completed list; a failure of an already
    /// completed task only counts the attempt.
    pub fn record_outcome(&mut self, task: &Task, success: bool) {
        let same = |t: &Task| t.description == task.description;
        if success {
            let prior = self
                .failed
                .iter()
                .position(same)
                .map(|i| self.failed.remove(i));
            if let Some(t) = self.completed.iter_mut().find(|t| same(t)) {
                t.attempts += 1;
                return;
            }
            let mut t = prior.unwrap_or_else(|| task.clone());
            t.attempts = t.attempts.max(task.attempts) + 1;
            self.completed.push(t);
        } else if let Some(t) = self.completed.iter_mut().find(|t| same(t)) {
            t.attempts += 1;
        } else if let Some(t) = self.failed.iter_mut().find(|t| same(t)) {
            t.attempts += 1;
        } else {
            let mut t = task.clone();
            t.attempts += 1;
            self.failed.push(t);
        }
    }
}

impl Default for ExplorationProgress {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CurriculumMode {
    Auto,
    Manual { tasks: Vec<String> },
    Random { pool: Vec<String>, seed: u64 },
    Human,
}

impl CurriculumMode {
    pub fn manual() -> Self {
        CurriculumMode::Manual {
            tasks: MANUAL_CURRICULUM.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CurriculumMode::Auto => "auto",
            CurriculumMode::Manual { .. } => "manual",
            CurriculumMode::Random { .. } => "random",
            CurriculumMode::Human => "human",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CurriculumError {
    #[error("curriculum response has no `Task:` line: {0}")]
    Unparseable(String),
    #[error("random curriculum pool is empty")]
    EmptyPool,
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

pub const DEFAULT_QA_COUNT: usize = 5;
pub const DEFAULT_CONTEXT_BUDGET_WORDS: usize = 6000;

const FORMAT_REMINDER: &str = "\n\nYour previous response did not end with a line of the form `Task: <the next task>`. Respond again using exactly the RESPONSE FORMAT.";

/// Extracts the final `Task:` line and the reasoning before it.
pub fn parse_task_response(text: &str) -> Option<(String, String)> {
    let lines: Vec<&str> = text.lines().collect();
    let idx = lines
        .iter()
        .rposition(|l| l.trim_start().starts_with("Task:"))?;
    let task = lines[idx].trim_start()["Task:".len()..]
        .trim()
        .trim_end_matches('.')
        .to_string();
    if task.is_empty() {
        return None;
    }
    let reasoning = lines[..idx].join("\n");
    let reasoning = reasoning.trim();
    let reasoning = reasoning.strip_prefix("Reasoning:").unwrap_or(reasoning).trim();
    Some((task, reasoning.to_string()))
}

/// Pairs `Question N:` lines with the `Concept N:` line that follows them.
pub fn parse_questions(text: &str) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut pending: Option<String> = None;
    for line in text.lines().map(str::trim) {
        let after_label = |prefix: &str| -> Option<String> {
            let rest = line.strip_prefix(prefix)?;
            let rest = rest.trim_start_matches(|c: char| c.is_ascii_digit() || c == ' ');
            Some(rest.strip_prefix(':')?.trim().to_string())
        };
        if let Some(q) = after_label("Question") {
            pending = Some(q);
        } else if let Some(c) = after_label("Concept") {
            if let Some(q) = pending.take() {
                if !q.is_empty() && !c.is_empty() {
                    out.push((q, c));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurriculumConfig {
    pub mode: CurriculumMode,
    pub schedule: WarmupSchedule,
    pub qa_count: usize,
    /// Rough prompt size limit, in whitespace-separated words.
    pub context_budget_words: usize,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        CurriculumConfig {
            mode: CurriculumMode::Auto,
            schedule: WarmupSchedule::default(),
            qa_count: DEFAULT_QA_COUNT,
            context_budget_words: DEFAULT_CONTEXT_BUDGET_WORDS,
        }
    }
}

pub struct Curriculum {
    pub config: CurriculumConfig,
    pub progress: ExplorationProgress,
    pub docs: DocStore,
    rng: ChaCha8Rng,
    next_id: u64,
}

impl Curriculum {
    pub fn new(config: CurriculumConfig) -> Self {
        let seed = match &config.mode {
            CurriculumMode::Random { seed, .. } => *seed,
            _ => 0,
        };
        Curriculum {
            config,
            progress: ExplorationProgress::new(),
            docs: DocStore::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            next_id: 1,
        }
    }

    pub fn mode(&self) -> &CurriculumMode {
        &self.config.mode
    }

    pub fn new_task(&mut self, description: &str, proposer: Proposer) -> Task {
        let id = self.next_id;
        self.next_id += 1;
        let attempts = self
            .progress
            .failed
            .iter()
            .chain(&self.progress.completed)
            .find(|t| t.description == description)
            .map(|t| t.attempts)
            .unwrap_or(0);
        let mut t = Task::new(id, description, proposer);
        t.attempts = attempts;
        t
    }

    pub fn record_outcome(&mut self, task: &Task, success: bool) {
        self.progress.record_outcome(task, success);
    }

    /// Self-asked questions answered by the auxiliary model. Failures yield
    /// an empty context and a warning.
    pub fn gather_context(
        &self,
        state: &AgentState,
        gateway: &mut Gateway,
    ) -> (Vec<QaPair>, Option<String>) {
        match self.try_gather_context(state, gateway) {
            Ok(pairs) => (pairs, None),
            Err(e) => (Vec::new(), Some(format!("additional context skipped: {e}"))),
        }
    }

    fn try_gather_context(
        &self,
        state: &AgentState,
        gateway: &mut Gateway,
    ) -> Result<Vec<QaPair>, GatewayError> {
        let all = warmup_filter(state, u32::MAX, &self.config.schedule);
        let user = format!("{}{}", all.render(false), self.ledger_text(self.progress.completed.len()));
        let req = gateway.request(RoleTag::QaAsk, prompts::QA_ASK, user);
        let resp = gateway.chat(&req)?;
        let mut pairs = Vec::new();
        for (question, concept) in parse_questions(&resp.text)
            .into_iter()
            .take(self.config.qa_count)
        {
            let mut user = format!("Question: {question}\n");
            if let Some(doc) = self.docs.lookup(&concept) {
                user.push_str(&format!("Context: {doc}\n"));
            }
            let req = gateway.request(RoleTag::QaAnswer, prompts::QA_ANSWER, user);
            let text = gateway.chat(&req)?.text;
            let answer = text.trim();
            let answer = answer.strip_prefix("Answer:").unwrap_or(answer).trim();
            pairs.push(QaPair {
                question,
                concept,
                answer: answer.to_string(),
            });
        }
        Ok(pairs)
    }

    /// Suggestions for solving one task, from the auxiliary model.
    pub fn task_context(&self, task: &str, gateway: &mut Gateway) -> Result<String, GatewayError> {
        let question = format!("How to {} in this world?", lower_first(task));
        let mut user = format!("Question: {question}\n");
        if let Some(doc) = self.docs.lookup(task) {
            user.push_str(&format!("Context: {doc}\n"));
        }
        let req = gateway.request(RoleTag::QaAnswer, prompts::QA_ANSWER, user);
        let text = gateway.chat(&req)?.text;
        let answer = text.trim();
        let answer = answer.strip_prefix("Answer:").unwrap_or(answer).trim();
        Ok(format!("Question: {question}\nAnswer: {answer}"))
    }

    fn ledger_text(&self, keep_completed: usize) -> String {
        let completed = &self.progress.completed;
        let skip = completed.len() - keep_completed.min(completed.len());
        let list = |tasks: &[Task]| {
            if tasks.is_empty() {
                "None".to_string()
            } else {
                tasks
                    .iter()
                    .map(|t| t.description.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            }
        };
        format!(
            "Completed tasks so far: {}\nFailed tasks that are too hard: {}\n",
            list(&completed[skip..]),
            list(&self.progress.failed)
        )
    }

    /// The user prompt for automatic proposal. When over budget, the oldest
    /// completed tasks go first, then the recently seen blocks.
    pub fn curriculum_prompt(&self, state: &AgentState, context: &[QaPair]) -> String {
        let n = self.progress.num_completed();
        let filtered = warmup_filter(state, n, &self.config.schedule);
        let mut qa = String::new();
        if filtered.includes(StateField::AdditionalContext) {
            for (i, p) in context.iter().enumerate() {
                qa.push_str(&format!("Question {}: {}\nAnswer: {}\n", i + 1, p.question, p.answer));
            }
        }
        let build = |keep: usize, drop_seen: bool| {
            format!("{qa}{}{}", filtered.render(drop_seen), self.ledger_text(keep))
        };
        let words = |s: &str| s.split_whitespace().count() + prompts::CURRICULUM.split_whitespace().count();
        let total = self.progress.completed.len();
        let mut keep = total;
        let mut prompt = build(keep, false);
        while words(&prompt) > self.config.context_budget_words && keep > 0 {
            keep -= 1;
            prompt = build(keep, false);
        }
        if words(&prompt) > self.config.context_budget_words {
            prompt = build(keep, true);
        }
        prompt
    }

    /// Asks the model for the next task; one reprompt on a malformed reply.
    pub fn propose_next_task(
        &mut self,
        state: &AgentState,
        context: &[QaPair],
        gateway: &mut Gateway,
    ) -> Result<(Task, String), CurriculumError> {
        let user = self.curriculum_prompt(state, context);
        let req = gateway.request(RoleTag::Curriculum, prompts::CURRICULUM, user.clone());
        let first = gateway.chat(&req)?.text;
        let parsed = match parse_task_response(&first) {
            Some(p) => p,
            None => {
                let retry = gateway.request(
                    RoleTag::Curriculum,
                    prompts::CURRICULUM,
                    format!("{user}{FORMAT_REMINDER}"),
                );
                let second = gateway.chat(&retry)?.text;
                parse_task_response(&second).ok_or(CurriculumError::Unparseable(second))?
            }
        };
        let (description, reasoning) = parsed;
        Ok((self.new_task(&description, Proposer::Auto), reasoning))
    }

    /// Next task of the fixed list: the first one not yet completed. `None`
    /// once every task is done.
    pub fn manual_next(&mut self) -> Option<Task> {
        let CurriculumMode::Manual { tasks } = &self.config.mode else {
            return None;
        };
        let done: BTreeSet<&str> = self
            .progress
            .completed
            .iter()
            .map(|t| t.description.as_str())
            .collect();
        let next = tasks.iter().find(|t| !done.contains(t.as_str()))?.clone();
        Some(self.new_task(&next, Proposer::Manual))
    }

    /// A uniformly drawn "Obtain 1 <item>" task.
    pub fn random_next(&mut self) -> Result<Task, CurriculumError> {
        let CurriculumMode::Random { pool, .. } = &self.config.mode else {
            return Err(CurriculumError::EmptyPool);
        };
        if pool.is_empty() {
            return Err(CurriculumError::EmptyPool);
        }
        let item = pool[self.rng.gen_range(0..pool.len())].clone();
        let description = format!("Obtain 1 {}", display_name(&item));
        Ok(self.new_task(&description, Proposer::Random))
    }
}

fn lower_first(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_lowercase().chain(c).collect(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_line_is_the_last_one() {
        let (t, r) = parse_task_response("Reasoning: need wood.\nTask: Mine 3 wood log").unwrap();
        assert_eq!(t, "Mine 3 wood log");
        assert_eq!(r, "need wood.");
        assert!(parse_task_response("I think you should mine wood").is_none());
        assert!(parse_task_response("Task:   ").is_none());
    }

    #[test]
    fn questions_pair_with_concepts() {
        let text = "Reasoning: x\nQuestion 1: How to make a pickaxe?\nConcept 1: wooden pickaxe\nQuestion 2: orphan\nQuestion 3: What is in deserts?\nConcept 3: desert";
        assert_eq!(
            parse_questions(text),
            alloc::vec![
                ("How to make a pickaxe?".to_string(), "wooden pickaxe".to_string()),
                ("What is in deserts?".to_string(), "desert".to_string()),
            ]
        );
    }
}
