//! A deterministic stand-in for the language model. It reads the same prompts
//! a real model would see and answers every role from the item tables, which
//! makes whole runs reproducible offline.
//!
//! [`OracleMode::Full`] writes complete, guarded programs that gather every
//! prerequisite. [`OracleMode::LibraryOnly`] only succeeds by calling a
//! retrieved skill whose name matches the task; otherwise it writes the naive
//! one-liner a weak model would.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::curriculum::MANUAL_CURRICULUM;
use crate::library::base_name;
use crate::llm::{ChatProvider, ChatRequest, ChatResponse, GatewayError, RoleTag, TokenUsage};
use crate::prompts::parse_inventory_line;
use crate::registry::{display_name, Registry, Tier};
use crate::task::{TaskGoal, Verb};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    Full,
    LibraryOnly,
}

/// Tasks the oracle curriculum proposes once the tool ladder is done.
const LADDER_EXTRAS: &[&str] = &[
    "Craft 1 iron sword",
    "Kill 1 sheep",
    "Craft 1 shield",
    "Craft 1 iron helmet",
    "Craft 1 bucket",
    "Mine 5 coal ore",
    "Craft 4 torch",
    "Craft 1 stone axe",
    "Craft 1 iron chestplate",
    "Craft 1 diamond sword",
    "Mine 3 redstone",
    "Craft 1 compass",
    "Craft 1 golden sword",
    "Craft 1 chest",
    "Smelt 1 sand",
];

const DIRECTIONS: [&str; 8] = ["+x", "+z", "-x", "-z", "+x+z", "-x+z", "-x-z", "+x-z"];

pub struct OracleProvider {
    registry: Arc<Registry>,
    mode: OracleMode,
}

impl OracleProvider {
    pub fn new(registry: Arc<Registry>, mode: OracleMode) -> Self {
        OracleProvider { registry, mode }
    }

    pub fn full() -> Self {
        Self::new(Arc::new(Registry::bundled()), OracleMode::Full)
    }

    pub fn library_only() -> Self {
        Self::new(Arc::new(Registry::bundled()), OracleMode::LibraryOnly)
    }

    fn answer(&self, req: &ChatRequest) -> String {
        let user = req.user_prompt.as_str();
        match req.role_tag {
            RoleTag::Curriculum => self.curriculum(user),
            RoleTag::QaAsk => qa_questions(user),
            RoleTag::QaAnswer => self.qa_answer(user),
            RoleTag::Codegen => self.codegen(&req.system_prompt, user),
            RoleTag::Describe => describe(user),
            RoleTag::Verifier => self.verify(user),
            RoleTag::Decompose => self.decompose(user),
        }
    }

    fn curriculum(&self, user: &str) -> String {
        let completed = ledger_line(user, "Completed tasks so far:");
        let failed = ledger_line(user, "Failed tasks that are too hard:");
        let fresh = MANUAL_CURRICULUM.iter().chain(LADDER_EXTRAS).find(|t| {
            !completed.iter().any(|c| c == *t) && !failed.iter().any(|c| c == *t)
        });
        // everything tried: retry the failures before anything else
        let task = fresh
            .map(|t| t.to_string())
            .or_else(|| failed.first().cloned())
            .unwrap_or_else(|| "Mine 3 wood log".to_string());
        let inv = inventory(user);
        let reasoning = if inv.is_empty() {
            "The inventory is empty, so the next step is the first unfinished tool milestone.".to_string()
        } else {
            format!(
                "I hold {} kinds of items; the next unfinished milestone builds on them.",
                inv.len()
            )
        };
        format!("Reasoning: {reasoning}\nTask: {task}")
    }

    fn qa_answer(&self, user: &str) -> String {
        let question = user
            .lines()
            .find_map(|l| l.strip_prefix("Question: "))
            .unwrap_or("")
            .trim();
        let task = question
            .strip_prefix("How to ")
            .and_then(|q| q.strip_suffix(" in this world?"))
            .unwrap_or(question);
        let reg = &self.registry;
        let Some(goal) = TaskGoal::parse(reg, task) else {
            return "Answer: Explore nearby and gather the basic resources first.".to_string();
        };
        let item = concrete(reg, &goal.item);
        let how = if let Some(r) = reg.recipe(&item) {
            let parts: Vec<String> = r
                .inputs
                .iter()
                .map(|i| format!("{} {}", i.count, display_name(i.key.trim_start_matches('#'))))
                .collect();
            let at = match r.station.block_name() {
                Some(s) => format!(" at a {}", display_name(s)),
                None => String::new(),
            };
            format!("craft it from {}{at}", parts.join(" and "))
        } else if let Some(input) = smelt_input(reg, &item) {
            format!("smelt {} in a furnace with some fuel", display_name(&input))
        } else if let Some(b) = reg.block_dropping(&item) {
            match b.tier {
                Tier::None => format!("mine {} by hand", display_name(&b.name)),
                t => format!("mine {} with at least {} pickaxe", display_name(&b.name), t.name()),
            }
        } else if let Some(m) = reg.mobs.values().find(|m| m.drops.iter().any(|(d, _)| *d == item)) {
            format!("kill a {} and collect its drops", m.name)
        } else {
            "explore to find it".to_string()
        };
        format!("Answer: To get {}, {how}.", display_name(&item))
    }

    fn verify(&self, user: &str) -> String {
        let task = line_value(user, "Task:").unwrap_or_default();
        let inv = inventory(user);
        let reg = &self.registry;
        let held = |key: &str| -> u32 {
            reg.expand(key)
                .iter()
                .map(|i| inv.iter().find(|(k, _)| k == i).map_or(0, |(_, n)| *n))
                .sum()
        };
        let (have, need, what) = if let Some(goal) = TaskGoal::parse(reg, &task) {
            (held(&goal.item), goal.count, goal.item.trim_start_matches('#').to_string())
        } else if let Some((mob, n)) = kill_goal(reg, &task) {
            let drop = reg.mobs[&mob].drops[0].0.clone();
            (held(&drop), n, drop)
        } else {
            return "Reasoning: The task cannot be checked from the inventory.\nSuccess: False\nCritique: Pick a task whose result shows up in the inventory.".to_string();
        };
        if have >= need {
            format!(
                "Reasoning: The inventory has {have} {}, which meets the requirement of {need}.\nSuccess: True\nCritique: None",
                display_name(&what)
            )
        } else {
            format!(
                "Reasoning: The inventory has {have} {} but the task needs {need}.\nSuccess: False\nCritique: Get {} more {}.",
                display_name(&what),
                need - have,
                display_name(&what)
            )
        }
    }

    fn decompose(&self, user: &str) -> String {
        let goal = line_value(user, "Goal:").unwrap_or_default();
        let inv = inventory(user);
        let reg = &self.registry;
        let has = |item: &str| inv.iter().any(|(k, n)| k == item && *n > 0);
        let mut subgoals: Vec<String> = Vec::new();
        match TaskGoal::parse(reg, &goal) {
            Some(g) => {
                let tier = required_tier(reg, &concrete(reg, &g.item), &mut BTreeSet::new());
                let upto = match tier {
                    Tier::None => 2,
                    Tier::Wooden => 3,
                    Tier::Stone => 5,
                    _ => 9,
                };
                let best = [("iron_pickaxe", 9), ("stone_pickaxe", 5), ("wooden_pickaxe", 3)]
                    .into_iter()
                    .find(|(p, _)| has(p))
                    .map_or(0, |(_, i)| i);
                let start = best.min(upto);
                subgoals.extend(MANUAL_CURRICULUM[start..upto].iter().map(|s| s.to_string()));
                // raw materials for the goal itself before the final step
                if g.verb != Verb::Mine {
                    let item = concrete(reg, &g.item);
                    if let Some(r) = reg.recipe(&item) {
                        for input in &r.inputs {
                            if let Some(b) = reg.block_dropping(&input.key) {
                                if b.tier.rank() >= Tier::Iron.rank() {
                                    subgoals.push(format!(
                                        "Mine {} {}",
                                        input.count * g.count,
                                        display_name(&input.key)
                                    ));
                                }
                            }
                        }
                    }
                }
                if !subgoals.contains(&goal) {
                    subgoals.push(goal.clone());
                }
            }
            None => {
                // open-ended: the tool ladder, skipping what is already held
                for t in MANUAL_CURRICULUM.iter().chain(LADDER_EXTRAS) {
                    let done = TaskGoal::parse(reg, t).is_some_and(|g| {
                        reg.expand(&g.item).iter().any(|i| has(i))
                    });
                    if !done {
                        subgoals.push(t.to_string());
                    }
                    if subgoals.len() == 5 {
                        break;
                    }
                }
            }
        }
        let mut out = String::from("Reasoning: Work up the tool tiers before the goal.\n");
        for (i, s) in subgoals.iter().enumerate() {
            out.push_str(&format!("Subgoal {}: {s}\n", i + 1));
        }
        out
    }

    fn codegen(&self, system: &str, user: &str) -> String {
        let task = line_value(user, "Task:").unwrap_or_default();
        let name = function_name(&task);
        let skills = retrieved_skills(system);
        let salt = crate::sha256_hex(user.as_bytes()).as_bytes()[0] as usize;
        let matching = skills.iter().find(|s| base_name(s) == name);
        let body = match (self.mode, matching) {
            (OracleMode::LibraryOnly, Some(skill)) => {
                return fenced(
                    &format!("Reuse the stored skill `{skill}`."),
                    &format!("fn reuse{}() {{\n    {skill}();\n}}\n", upper_first(skill)),
                );
            }
            (OracleMode::LibraryOnly, None) => naive_body(&self.registry, &task),
            (OracleMode::Full, _) => {
                let mut gen = Gen::new(&self.registry, salt);
                gen.task(&task);
                gen.out
            }
        };
        fenced(
            "Gather every missing ingredient first, guarding each step on the inventory so the program can be rerun.",
            &format!("fn {name}() {{\n{body}}}\n"),
        )
    }
}

impl ChatProvider for OracleProvider {
    fn id(&self) -> &str {
        match self.mode {
            OracleMode::Full => "oracle",
            OracleMode::LibraryOnly => "oracle-weak",
        }
    }

    fn complete(&mut self, _model: &str, req: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let text = self.answer(req);
        Ok(ChatResponse {
            usage: TokenUsage::estimate(req, &text),
            text,
            provider_id: self.id().to_string(),
            latency_ms: 0,
        })
    }
}

fn fenced(explanation: &str, code: &str) -> String {
    format!("Explain: {explanation}\nPlan:\n1) Check the inventory.\n2) Obtain what is missing.\nCode:\n```skillscript\n{code}```\n")
}

fn line_value(text: &str, prefix: &str) -> Option<String> {
    text.lines()
        .rev()
        .find_map(|l| l.strip_prefix(prefix))
        .map(|v| v.trim().to_string())
}

fn ledger_line(text: &str, prefix: &str) -> Vec<String> {
    match line_value(text, prefix) {
        Some(v) if v != "None" => v.split(", ").map(|s| s.trim().to_string()).collect(),
        _ => Vec::new(),
    }
}

fn inventory(text: &str) -> Vec<(String, u32)> {
    text.lines()
        .find_map(|l| parse_inventory_line(l.trim()))
        .unwrap_or_default()
}

fn qa_questions(user: &str) -> String {
    let biome = line_value(user, "Biome:").unwrap_or_else(|| "plains".into());
    format!(
        "Reasoning: Learn about the surroundings and the next tools.\n\
         Question 1: What are the blocks that I can find in the {biome}?\nConcept 1: {biome}\n\
         Question 2: What are the mobs that I can find in the {biome}?\nConcept 2: {biome}\n\
         Question 3: How to craft a stone pickaxe?\nConcept 3: stone pickaxe\n\
         Question 4: How to get iron ingots?\nConcept 4: iron ingot\n\
         Question 5: What are the benefits of a furnace?\nConcept 5: furnace\n"
    )
}

fn describe(user: &str) -> String {
    let name = user
        .lines()
        .find_map(|l| l.strip_prefix("The main function is `"))
        .and_then(|l| l.strip_suffix("`."))
        .unwrap_or("skill");
    let words = camel_words(name);
    let mut used: Vec<&str> = Vec::new();
    for p in ["mineBlock", "craftItem", "smeltItem", "placeItem", "killMob", "exploreUntil", "goto"] {
        if user.contains(&format!("{p}(")) {
            used.push(p);
        }
    }
    let uses = if used.is_empty() {
        "calling other skills".to_string()
    } else {
        used.join(", ")
    };
    format!(
        "The function is about how to {}. It checks the inventory and gathers what is missing using {uses}.",
        words.join(" ")
    )
}

fn retrieved_skills(system: &str) -> Vec<String> {
    system
        .lines()
        .filter_map(|l| l.strip_prefix("fn "))
        .filter_map(|l| l.split_once('(').map(|(n, _)| n.trim().to_string()))
        .collect()
}

fn camel_words(name: &str) -> Vec<String> {
    let mut words = Vec::new();
    let mut cur = String::new();
    for c in name.chars() {
        if c.is_ascii_uppercase() && !cur.is_empty() {
            words.push(core::mem::take(&mut cur));
        }
        cur.push(c.to_ascii_lowercase());
    }
    if !cur.is_empty() {
        words.push(cur);
    }
    words
}

fn upper_first(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_ascii_uppercase().to_string() + c.as_str(),
        None => String::new(),
    }
}

/// `Mine 3 wood log` -> `mineWoodLog`.
pub fn function_name(task: &str) -> String {
    let mut out = String::new();
    for word in task
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty() && !w.chars().all(|c| c.is_ascii_digit()))
    {
        if out.is_empty() {
            out.push_str(&word.to_ascii_lowercase());
        } else {
            out.push_str(&upper_first(&word.to_ascii_lowercase()));
        }
    }
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert_str(0, "task");
    }
    out
}

fn kill_goal(reg: &Registry, task: &str) -> Option<(String, u32)> {
    let mut words = task.split_whitespace();
    if !words.next()?.eq_ignore_ascii_case("kill") {
        return None;
    }
    let rest: Vec<&str> = words.collect();
    let (n, mob) = match rest.first()?.parse::<u32>() {
        Ok(n) => (n, rest.get(1)?),
        Err(_) => (1, rest.first()?),
    };
    let mob = mob.trim_end_matches('s').to_lowercase();
    reg.mobs.contains_key(&mob).then_some((mob, n.max(1)))
}

/// A concrete member for a tag (the first one); items pass through.
fn concrete(reg: &Registry, key: &str) -> String {
    if key.starts_with('#') {
        reg.expand(key).into_iter().next().unwrap_or_else(|| key.to_string())
    } else {
        key.to_string()
    }
}

fn smelt_input(reg: &Registry, output: &str) -> Option<String> {
    reg.smelts
        .values()
        .find(|s| s.output == output)
        .map(|s| s.input.clone())
}

/// Highest pickaxe tier anywhere in the item's production tree.
fn required_tier(reg: &Registry, item: &str, seen: &mut BTreeSet<String>) -> Tier {
    if !seen.insert(item.to_string()) {
        return Tier::None;
    }
    let mut best = Tier::None;
    let mut bump = |t: Tier| {
        if t.rank() > best.rank() && t != Tier::Unbreakable {
            best = t;
        }
    };
    if let Some(r) = reg.recipe(item) {
        for i in &r.inputs {
            bump(required_tier(reg, &concrete(reg, &i.key), seen));
        }
        if let Some(s) = r.station.block_name() {
            bump(required_tier(reg, s, seen));
        }
    } else if let Some(input) = smelt_input(reg, item) {
        bump(required_tier(reg, &concrete(reg, &input), seen));
        bump(required_tier(reg, "furnace", seen));
    } else if let Some(b) = natural_sources(reg, item).first() {
        bump(reg.blocks[b].tier);
    }
    best
}

/// Blocks that drop `item`, the ones with a different name first
/// (stone before cobblestone).
fn natural_sources(reg: &Registry, item: &str) -> Vec<String> {
    let mut out: Vec<String> = reg
        .blocks
        .values()
        .filter(|b| b.drop.as_deref() == Some(item) && b.tier != Tier::Unbreakable)
        .filter(|b| !matches!(b.name.as_str(), "crafting_table" | "furnace" | "chest" | "torch"))
        .map(|b| b.name.clone())
        .collect();
    out.sort_by_key(|b| (b == item, b.clone()));
    out
}

/// What a weak model writes without help: one direct call.
fn naive_body(reg: &Registry, task: &str) -> String {
    let Some(goal) = TaskGoal::parse(reg, task) else {
        return "    chat(\"I am not sure how to do that\");\n".to_string();
    };
    let item = concrete(reg, &goal.item);
    let n = goal.count;
    let mut out = String::new();
    match goal.verb {
        Verb::Smelt => {
            let input = smelt_input(reg, &item).unwrap_or(item.clone());
            out.push_str(&format!(
                "    placeItem(\"furnace\", position_x() + 1, position_y(), position_z());\n    smeltItem(\"{}\", \"coal\", {n});\n",
                concrete(reg, &input)
            ));
        }
        _ if reg.recipe(&item).is_some() => {
            if reg.recipe(&item).and_then(|r| r.station.block_name()).is_some() {
                out.push_str("    placeItem(\"crafting_table\", position_x() + 1, position_y(), position_z());\n");
            }
            out.push_str(&format!("    craftItem(\"{item}\", {n});\n"));
        }
        _ => {
            let block = natural_sources(reg, &item).into_iter().next().unwrap_or(item);
            out.push_str(&format!("    mineBlock(\"{block}\", {n});\n"));
        }
    }
    out
}

/// Depth to dig down to before searching for a deep block.
fn search_depth(block: &str) -> Option<i32> {
    match block {
        "diamond_ore" | "redstone_ore" => Some(-20),
        "gold_ore" | "lapis_ore" => Some(-10),
        "deepslate" | "tuff" => Some(-8),
        "iron_ore" => Some(16),
        _ => None,
    }
}

/// Program writer for the full oracle.
struct Gen<'a> {
    reg: &'a Registry,
    out: String,
    indent: usize,
    next_var: usize,
    next_dir: usize,
    stack: Vec<String>,
}

impl<'a> Gen<'a> {
    fn new(reg: &'a Registry, salt: usize) -> Self {
        Gen {
            reg,
            out: String::new(),
            indent: 1,
            next_var: 0,
            next_dir: salt % DIRECTIONS.len(),
            stack: Vec::new(),
        }
    }

    fn line(&mut self, s: &str) {
        for _ in 0..self.indent {
            self.out.push_str("    ");
        }
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn open(&mut self, s: &str) {
        self.line(&format!("{s} {{"));
        self.indent += 1;
    }

    fn close(&mut self) {
        self.indent -= 1;
        self.line("}");
    }

    fn var(&mut self, prefix: &str) -> String {
        self.next_var += 1;
        format!("{prefix}{}", self.next_var)
    }

    fn direction(&mut self) -> &'static str {
        let d = DIRECTIONS[self.next_dir % DIRECTIONS.len()];
        self.next_dir += 1;
        d
    }

    fn have(&self, key: &str) -> String {
        let parts: Vec<String> = self
            .reg
            .expand(key)
            .iter()
            .map(|i| format!("inventory_count(\"{i}\")"))
            .collect();
        if parts.len() == 1 {
            parts[0].clone()
        } else {
            format!("({})", parts.join(" + "))
        }
    }

    fn task(&mut self, task: &str) {
        let reg = self.reg;
        if let Some((mob, n)) = kill_goal(reg, task) {
            let drop = reg.mobs[&mob].drops[0].0.clone();
            let t = self.var("target");
            let have = self.have(&drop);
            self.line(&format!("let {t} = {have} + {n};"));
            self.hunt(&mob, &drop, &t);
            return;
        }
        let Some(goal) = TaskGoal::parse(reg, task) else {
            self.line("chat(\"I do not know how to do that yet\");");
            return;
        };
        let t = self.var("target");
        let have = self.have(&goal.item);
        self.line(&format!("let {t} = {have} + {};", goal.count));
        self.obtain(&goal.item, &t);
        let have = self.have(&goal.item);
        self.open(&format!("if {have} >= {t}"));
        self.line(&format!("chat(\"Done: {task}\");"));
        self.close();
    }

    /// Makes sure `have(key) >= target` at runtime.
    fn obtain(&mut self, key: &str, target: &str) {
        if self.stack.iter().any(|k| k == key) || self.stack.len() > 12 {
            self.line(&format!("chat(\"I am stuck in a loop getting {key}\");"));
            return;
        }
        self.stack.push(key.to_string());
        let reg = self.reg;
        let have = self.have(key);
        self.open(&format!("if {have} < {target}"));
        if key.starts_with('#') {
            self.obtain_tag(key, target);
        } else if reg.recipe(key).is_some() {
            self.craft(key, target);
        } else if let Some(input) = smelt_input(reg, key) {
            self.smelt(key, &input, target);
        } else if !natural_sources(reg, key).is_empty() {
            self.mine(&natural_sources(reg, key), key, target);
        } else if let Some(mob) = reg.mobs.values().find(|m| m.drops.iter().any(|(d, _)| d == key)) {
            let mob = mob.name.clone();
            self.hunt(&mob, key, target);
        } else {
            self.line(&format!("chat(\"I do not know where to find {}\");", display_name(key)));
        }
        self.close();
        self.stack.pop();
    }

    fn obtain_tag(&mut self, tag: &str, target: &str) {
        let reg = self.reg;
        let members = reg.expand(tag);
        // members crafted 1:1 from another tag's members (planks from logs)
        let sources: Option<Vec<(String, String, u32)>> = members
            .iter()
            .map(|m| {
                let r = reg.recipe(m)?;
                (r.inputs.len() == 1 && !r.inputs[0].key.starts_with('#') && r.station.block_name().is_none())
                    .then(|| (m.clone(), r.inputs[0].key.clone(), r.count))
            })
            .collect();
        if let Some(sources) = sources {
            let source_tag = reg
                .tags
                .iter()
                .find(|(_, v)| sources.iter().all(|(_, s, _)| v.contains(s)))
                .map(|(k, _)| format!("#{k}"));
            if let Some(source_tag) = source_tag {
                let per = sources[0].2.max(1);
                let (n, c, t) = (self.var("need"), self.var("times"), self.var("target"));
                let have = self.have(tag);
                self.line(&format!("let {n} = {target} - {have};"));
                self.line(&format!("let {c} = ({n} + {}) / {per};", per - 1));
                let have_src = self.have(&source_tag);
                self.line(&format!("let {t} = {have_src} + {c};"));
                self.obtain(&source_tag, &t);
                for (i, (member, src, _)) in sources.iter().enumerate() {
                    let kw = if i == 0 { "if" } else { "} else if" };
                    if i > 0 {
                        self.indent -= 1;
                    }
                    self.line(&format!("{kw} inventory_count(\"{src}\") >= {c} {{"));
                    self.indent += 1;
                    self.line(&format!("craftItem(\"{member}\", {c});"));
                }
                self.close();
                return;
            }
        }
        // mined members: any block dropping any member
        let mut blocks: Vec<String> = Vec::new();
        for m in &members {
            for b in natural_sources(reg, m) {
                if !blocks.contains(&b) {
                    blocks.push(b);
                }
            }
        }
        if blocks.is_empty() {
            let first = members[0].clone();
            self.obtain(&first, target);
        } else {
            self.mine(&blocks, tag, target);
        }
    }

    /// Ensures a station is within reach, placing one from the inventory.
    fn ensure_station_item(&mut self, station: &str) {
        let t = self.var("target");
        self.open(&format!("if !block_nearby(\"{station}\")"));
        self.line(&format!("let {t} = 1;"));
        self.obtain(station, &t);
        self.close();
    }

    fn place_station(&mut self, station: &str) {
        self.open(&format!("if !block_nearby(\"{station}\")"));
        let spots = [
            ("position_x() + 1", "position_y()", "position_z()"),
            ("position_x() - 1", "position_y()", "position_z()"),
            ("position_x()", "position_y()", "position_z() + 1"),
            ("position_x()", "position_y()", "position_z() - 1"),
            ("position_x()", "position_y() + 1", "position_z()"),
            ("position_x() + 1", "position_y() + 1", "position_z()"),
        ];
        for (i, (x, y, z)) in spots.iter().enumerate() {
            let kw = if i == 0 { "if" } else { "} else if" };
            if i > 0 {
                self.indent -= 1;
            }
            self.line(&format!("{kw} block_at({x}, {y}, {z}) == \"air\" {{"));
            self.indent += 1;
            self.line(&format!("placeItem(\"{station}\", {x}, {y}, {z});"));
        }
        self.close();
        self.close();
    }

    fn craft(&mut self, item: &str, target: &str) {
        let reg = self.reg;
        let recipe = reg.recipe(item).expect("checked").clone();
        let station = recipe.station.block_name();
        if let Some(s) = station {
            self.ensure_station_item(s);
        }
        let (n, c) = (self.var("need"), self.var("times"));
        let have = self.have(item);
        self.line(&format!("let {n} = {target} - {have};"));
        self.line(&format!(
            "let {c} = ({n} + {}) / {};",
            recipe.count.max(1) - 1,
            recipe.count.max(1)
        ));
        // ingredients that consume others go first (stick before planks)
        let mut inputs = recipe.inputs.clone();
        inputs.sort_by_key(|i| {
            let uses_other = recipe.inputs.iter().any(|o| {
                o.key != i.key && depends_on(reg, &concrete(reg, &i.key), &o.key, 0)
            });
            !uses_other
        });
        for input in &inputs {
            let t = self.var("target");
            let have = self.have(&input.key);
            self.line(&format!("let {t} = {have} + {c} * {};", input.count));
            self.obtain(&input.key, &t);
        }
        if let Some(s) = station {
            self.place_station(s);
        }
        self.line(&format!("craftItem(\"{item}\", {c});"));
    }

    fn smelt(&mut self, output: &str, input: &str, target: &str) {
        let reg = self.reg;
        self.ensure_station_item("furnace");
        let n = self.var("need");
        let have = self.have(output);
        self.line(&format!("let {n} = {target} - {have};"));
        let t = self.var("target");
        let have_in = self.have(input);
        self.line(&format!("let {t} = {have_in} + {n};"));
        self.obtain(input, &t);
        // fuel: coal when there is enough, planks otherwise
        let f = self.var("target");
        let have_planks = self.have("#planks");
        self.open(&format!("if inventory_count(\"coal\") * 8 < {n}"));
        self.line(&format!("let {f} = {have_planks} + {n};"));
        self.obtain("#planks", &f);
        self.close();
        self.place_station("furnace");
        let inputs = if input.starts_with('#') {
            reg.expand(input)
        } else {
            alloc::vec![input.to_string()]
        };
        let mut first = true;
        for inp in &inputs {
            let fuels: Vec<String> = core::iter::once("coal".to_string())
                .chain(reg.expand("#planks"))
                .collect();
            for fuel in fuels {
                let kw = if first { "if" } else { "} else if" };
                if !first {
                    self.indent -= 1;
                }
                first = false;
                let need_fuel = if fuel == "coal" {
                    format!("inventory_count(\"coal\") * 8 >= {n}")
                } else {
                    format!("inventory_count(\"{fuel}\") >= {n}")
                };
                self.line(&format!("{kw} inventory_count(\"{inp}\") >= {n} && {need_fuel} {{"));
                self.indent += 1;
                self.line(&format!("smeltItem(\"{inp}\", \"{fuel}\", {n});"));
            }
        }
        self.close();
    }

    fn pickaxe_for(&mut self, tier: Tier) {
        if tier == Tier::None {
            return;
        }
        let reg = self.reg;
        let mut picks: Vec<(&str, u8)> = reg
            .tools
            .values()
            .filter(|t| t.kind == crate::registry::ToolKind::Pickaxe && t.tier.rank() >= tier.rank())
            .map(|t| (t.item.as_str(), t.tier.rank()))
            .collect();
        picks.sort_by_key(|p| p.1);
        let Some((cheapest, _)) = picks.first().copied() else {
            return;
        };
        let held: Vec<String> = picks
            .iter()
            .map(|(p, _)| format!("inventory_count(\"{p}\")"))
            .collect();
        let t = self.var("target");
        self.open(&format!("if {} < 1", held.join(" + ")));
        self.line(&format!("let {t} = 1;"));
        self.obtain(cheapest, &t);
        self.close();
    }

    fn any_nearby(blocks: &[String], query: &str) -> String {
        blocks
            .iter()
            .map(|b| format!("{query}(\"{b}\")"))
            .collect::<Vec<_>>()
            .join(" || ")
    }

    fn mine(&mut self, blocks: &[String], key: &str, target: &str) {
        let reg = self.reg;
        let tier = blocks
            .iter()
            .map(|b| reg.blocks[b].tier)
            .min_by_key(|t| t.rank())
            .unwrap_or(Tier::None);
        self.pickaxe_for(tier);
        let depth = blocks.iter().find_map(|b| search_depth(b));
        let nearby = Self::any_nearby(blocks, "block_nearby");
        let start_y = self.var("startY");
        if let Some(y) = depth {
            self.line(&format!("let {start_y} = position_y();"));
            self.open(&format!("if !({nearby})"));
            self.line(&format!("goto(position_x(), {y}, position_z(), 1);"));
            self.close();
        }
        let have = self.have(key);
        let per = reg.blocks[&blocks[0]].drop_count.max(1);
        self.open("repeat 8");
        self.open(&format!("if {have} < {target}"));
        let dir = self.direction();
        self.open(&format!("if !({nearby})"));
        self.line(&format!("exploreUntil(\"{dir}\", 96, {nearby});"));
        self.close();
        for (i, b) in blocks.iter().enumerate() {
            let kw = if i == 0 { "if" } else { "} else if" };
            if i > 0 {
                self.indent -= 1;
            }
            self.line(&format!("{kw} block_nearby(\"{b}\") {{"));
            self.indent += 1;
            self.line(&format!(
                "mineBlock(\"{b}\", ({target} - {have} + {}) / {per});",
                per - 1
            ));
        }
        self.close();
        self.close();
        self.close();
        if depth.is_some() {
            // back up to the surface; goto stops at the top of the column
            self.open(&format!("if position_y() < {start_y} - 4"));
            self.line("goto(position_x(), 320, position_z(), 0);");
            self.close();
        }
    }

    fn hunt(&mut self, mob: &str, drop: &str, target: &str) {
        let have = self.have(drop);
        self.open("repeat 8");
        self.open(&format!("if {have} < {target}"));
        let dir = self.direction();
        self.open(&format!("if !entity_nearby(\"{mob}\")"));
        self.line(&format!("exploreUntil(\"{dir}\", 128, entity_nearby(\"{mob}\"));"));
        self.close();
        self.open(&format!("if entity_nearby(\"{mob}\")"));
        self.line(&format!("killMob(\"{mob}\", 600);"));
        self.close();
        self.close();
        self.close();
    }
}

/// Whether producing `item` consumes `key` somewhere in its tree.
fn depends_on(reg: &Registry, item: &str, key: &str, depth: u32) -> bool {
    if depth > 8 {
        return false;
    }
    let Some(r) = reg.recipe(item) else {
        return false;
    };
    r.inputs.iter().any(|i| {
        i.key == key
            || reg.expand(key).iter().any(|k| reg.matches(&i.key, k))
            || depends_on(reg, &concrete(reg, &i.key), key, depth + 1)
    })
}
