//! A deterministic, seeded crafting world.
//!
//! Terrain is a pure function of [`WorldConfig`]; everything the agent changes
//! lives in an overlay of edited cells, killed mobs and opened chests. Each
//! control primitive appends one [`WorldEvent`] to the world's log.

mod gen;
mod ops;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::registry::{
    display_name, quantity_name, shortfall_message, with_article, Registry, Shortfall, Slot,
    Tier, ToolKind,
};

pub use gen::{biome_def, surface_height, BIOMES, CHUNK};
use gen::{base_block, base_layers, biome_at, chunk_coords, generate_chunk, ChunkFeatures};

/// Blocks, entities and stations are sensed within this Euclidean distance.
pub const SENSE_RADIUS: i32 = 32;
pub const MIN_Y: i32 = -64;
pub const MAX_Y: i32 = 320;
pub const MAX_STAT: u8 = 20;
const COMBAT_TICKS_PER_EXCHANGE: u32 = 20;
const GOTO_STEP_BUDGET: u32 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockPos {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl BlockPos {
    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        BlockPos { x, y, z }
    }

    pub fn dist2(&self, other: &BlockPos) -> i64 {
        let dx = (self.x - other.x) as i64;
        let dy = (self.y - other.y) as i64;
        let dz = (self.z - other.z) as i64;
        dx * dx + dy * dy + dz * dz
    }

    pub fn within(&self, other: &BlockPos, radius: i32) -> bool {
        self.dist2(other) <= (radius as i64) * (radius as i64)
    }
}

impl fmt::Display for BlockPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionBiome {
    pub rx: i32,
    pub rz: i32,
    pub biome: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiomeLayout {
    /// Side length of a square biome region, in blocks.
    pub region_size: i32,
    /// Biomes drawn (seeded) for regions without an override.
    pub palette: Vec<String>,
    #[serde(default)]
    pub overrides: Vec<RegionBiome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OreBand {
    pub block: String,
    pub min_y: i32,
    pub max_y: i32,
    /// Blocks per 32x32-column neighbourhood.
    pub abundance: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MobSpawn {
    pub mob: String,
    pub weight: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub seed: u64,
    pub biome_layout: BiomeLayout,
    pub ore_depth_table: Vec<OreBand>,
    pub mob_spawn_table: BTreeMap<String, Vec<MobSpawn>>,
    pub day_length_ticks: u64,
    /// Ticks added to the clock by every primitive call.
    #[serde(default = "default_ticks_per_call")]
    pub ticks_per_call: u64,
    /// Hunger drops by one every this many primitive calls.
    #[serde(default = "default_hunger_decay")]
    pub hunger_decay_calls: u64,
    /// Half-width of the square world, in blocks.
    #[serde(default = "default_world_radius")]
    pub world_radius: i32,
}

fn default_ticks_per_call() -> u64 {
    100
}
fn default_hunger_decay() -> u64 {
    50
}
fn default_world_radius() -> i32 {
    4096
}

impl WorldConfig {
    pub fn with_seed(seed: u64) -> Self {
        let ore = |block: &str, min_y, max_y, abundance| OreBand {
            block: block.to_string(),
            min_y,
            max_y,
            abundance,
        };
        let spawns = |list: &[(&str, u32)]| -> Vec<MobSpawn> {
            list.iter()
                .map(|(m, w)| MobSpawn {
                    mob: m.to_string(),
                    weight: *w,
                })
                .collect()
        };
        let mut mob_spawn_table = BTreeMap::new();
        mob_spawn_table.insert(
            "plains".to_string(),
            spawns(&[("sheep", 3), ("cow", 2), ("pig", 2), ("chicken", 2), ("zombie", 1)]),
        );
        mob_spawn_table.insert(
            "forest".to_string(),
            spawns(&[("pig", 2), ("sheep", 2), ("zombie", 1), ("skeleton", 1), ("spider", 1)]),
        );
        mob_spawn_table.insert(
            "birch_forest".to_string(),
            spawns(&[("chicken", 2), ("cow", 2), ("spider", 1), ("creeper", 1)]),
        );
        mob_spawn_table.insert(
            "taiga".to_string(),
            spawns(&[("sheep", 2), ("pig", 1), ("skeleton", 1), ("creeper", 1)]),
        );
        mob_spawn_table.insert(
            "snowy_plains".to_string(),
            spawns(&[("skeleton", 2), ("zombie", 1)]),
        );
        mob_spawn_table.insert(
            "desert".to_string(),
            spawns(&[("zombie", 2), ("spider", 1), ("creeper", 1)]),
        );
        mob_spawn_table.insert(
            "savanna".to_string(),
            spawns(&[("cow", 2), ("sheep", 2), ("chicken", 1), ("zombie", 1)]),
        );
        mob_spawn_table.insert(
            "meadow".to_string(),
            spawns(&[("sheep", 3), ("chicken", 2), ("cow", 1)]),
        );
        WorldConfig {
            seed,
            biome_layout: BiomeLayout {
                region_size: 64,
                palette: BIOMES.iter().map(|b| b.name.to_string()).collect(),
                overrides: Vec::new(),
            },
            ore_depth_table: vec![
                ore("coal_ore", 0, 96, 24),
                ore("iron_ore", -24, 56, 16),
                ore("copper_ore", 0, 64, 10),
                ore("gold_ore", -48, 16, 4),
                ore("lapis_ore", -48, 16, 3),
                ore("redstone_ore", -60, 0, 6),
                ore("diamond_ore", -60, 12, 4),
                ore("granite", 0, 60, 10),
                ore("diorite", 0, 60, 10),
                ore("andesite", 0, 60, 10),
                ore("tuff", -60, 0, 10),
                ore("gravel", 0, 60, 6),
                ore("clay", 50, 62, 3),
            ],
            mob_spawn_table,
            day_length_ticks: 24_000,
            ticks_per_call: default_ticks_per_call(),
            hunger_decay_calls: default_hunger_decay(),
            world_radius: default_world_radius(),
        }
    }

    /// Checks the tables against the registry, including that every item the
    /// registry mentions can actually be obtained in a world built from them.
    pub fn validate(&self, registry: &Registry) -> Result<(), ConfigError> {
        if self.biome_layout.palette.is_empty() {
            return Err(ConfigError::Malformed("biome palette is empty".into()));
        }
        if self.biome_layout.region_size < 1 {
            return Err(ConfigError::Malformed("region_size must be positive".into()));
        }
        if self.day_length_ticks == 0 || self.hunger_decay_calls == 0 {
            return Err(ConfigError::Malformed(
                "day_length_ticks and hunger_decay_calls must be positive".into(),
            ));
        }
        let biomes: BTreeSet<&str> = self
            .biome_layout
            .palette
            .iter()
            .map(String::as_str)
            .chain(self.biome_layout.overrides.iter().map(|o| o.biome.as_str()))
            .collect();
        let mut generated: BTreeSet<String> = BTreeSet::new();
        generated.insert("bedrock".into());
        generated.insert("deepslate".into());
        generated.insert("stone".into());
        for name in &biomes {
            let def = biome_def(name).ok_or_else(|| ConfigError::UnknownBiome(name.to_string()))?;
            generated.insert(def.surface.into());
            generated.insert(def.subsurface.into());
            if let Some((log, leaves)) = def.tree {
                generated.insert(log.into());
                generated.insert(leaves.into());
            }
            generated.extend(def.flora.iter().map(|f| f.to_string()));
        }
        for band in &self.ore_depth_table {
            if !registry.blocks.contains_key(&band.block) {
                return Err(ConfigError::UnknownBlock(band.block.clone()));
            }
            if band.min_y > band.max_y {
                return Err(ConfigError::Malformed(format!(
                    "ore band {} has min_y > max_y",
                    band.block
                )));
            }
            generated.insert(band.block.clone());
        }
        let mut obtainable: BTreeSet<String> = BTreeSet::new();
        for block in &generated {
            let def = registry
                .blocks
                .get(block)
                .ok_or_else(|| ConfigError::UnknownBlock(block.clone()))?;
            if def.tier != Tier::Unbreakable {
                if let Some(drop) = &def.drop {
                    obtainable.insert(drop.clone());
                }
            }
        }
        for (biome, spawns) in &self.mob_spawn_table {
            if biome_def(biome).is_none() {
                return Err(ConfigError::UnknownBiome(biome.clone()));
            }
            for spawn in spawns {
                let mob = registry
                    .mobs
                    .get(&spawn.mob)
                    .ok_or_else(|| ConfigError::UnknownMob(spawn.mob.clone()))?;
                if biomes.contains(biome.as_str()) {
                    obtainable.extend(mob.drops.iter().map(|(item, _)| item.clone()));
                }
            }
        }
        // fixpoint over recipes and smelting
        loop {
            let before = obtainable.len();
            for recipe in registry.recipes.values() {
                let ok = recipe.inputs.iter().all(|input| {
                    registry
                        .expand(&input.key)
                        .iter()
                        .any(|item| obtainable.contains(item))
                });
                if ok {
                    obtainable.insert(recipe.output.clone());
                }
            }
            for smelt in registry.smelts.values() {
                if registry
                    .expand(&smelt.input)
                    .iter()
                    .any(|item| obtainable.contains(item))
                {
                    obtainable.insert(smelt.output.clone());
                }
            }
            if obtainable.len() == before {
                break;
            }
        }
        for item in registry.all_items() {
            if !obtainable.contains(&item) {
                return Err(ConfigError::UnreachableItem(item));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("unreachable item: {0}")]
    UnreachableItem(String),
    #[error("unknown biome: {0}")]
    UnknownBiome(String),
    #[error("unknown block: {0}")]
    UnknownBlock(String),
    #[error("unknown mob: {0}")]
    UnknownMob(String),
    #[error("malformed config: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeOfDay {
    Sunrise,
    Day,
    Noon,
    Sunset,
    Night,
    Midnight,
}

impl TimeOfDay {
    /// Maps a clock reading onto the six labels, scaled to a 24000-tick day.
    pub fn from_ticks(tick: u64, day_length: u64) -> TimeOfDay {
        let t = (tick % day_length) * 24_000 / day_length;
        match t {
            0..=999 => TimeOfDay::Sunrise,
            1000..=5999 => TimeOfDay::Day,
            6000..=11_999 => TimeOfDay::Noon,
            12_000..=12_999 => TimeOfDay::Sunset,
            13_000..=17_999 => TimeOfDay::Night,
            _ => TimeOfDay::Midnight,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TimeOfDay::Sunrise => "sunrise",
            TimeOfDay::Day => "day",
            TimeOfDay::Noon => "noon",
            TimeOfDay::Sunset => "sunset",
            TimeOfDay::Night => "night",
            TimeOfDay::Midnight => "midnight",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChestContents {
    Unknown,
    Known(BTreeMap<String, u32>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownChest {
    pub position: BlockPos,
    pub contents: ChestContents,
}

/// Everything the agent can observe about itself and its surroundings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentState {
    pub inventory: BTreeMap<String, u32>,
    pub equipment: BTreeMap<Slot, String>,
    pub nearby_blocks: BTreeSet<String>,
    pub recently_seen_blocks: BTreeSet<String>,
    pub nearby_entities: BTreeSet<String>,
    pub known_chests: Vec<KnownChest>,
    pub biome: String,
    pub time_of_day: TimeOfDay,
    pub health: u8,
    pub hunger: u8,
    pub position: BlockPos,
}

impl AgentState {
    pub fn count(&self, item: &str) -> u32 {
        self.inventory.get(item).copied().unwrap_or(0)
    }
}

/// Fatal primitive failures; these surface as execution errors.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PrimitiveError {
    #[error("unknown block: {0}")]
    UnknownBlock(String),
    #[error("no recipe for {0}")]
    NoRecipe(String),
    #[error("{0} cannot be smelted")]
    NotSmeltable(String),
    #[error("item not placeable: {0}")]
    NotPlaceable(String),
    #[error("no chest at {0}")]
    NoChest(BlockPos),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Result of one primitive: chat-log feedback plus a few structured facts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpOutcome {
    pub feedback: Vec<String>,
    /// Positions the agent walked through, in order.
    pub path: Vec<BlockPos>,
    /// Whether the primitive achieved what it was asked to.
    pub success: bool,
    /// Items mined, crafted, smelted or moved.
    pub amount: u32,
}

impl OpOutcome {
    fn say(msg: String) -> Self {
        OpOutcome {
            feedback: vec![msg],
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChestDirection {
    Get,
    Deposit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldEvent {
    pub tick: u64,
    pub op: String,
    pub args: Vec<String>,
    pub feedback: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub delta: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct ChestState {
    contents: BTreeMap<String, u32>,
    opened: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Body {
    position: BlockPos,
    inventory: BTreeMap<String, u32>,
    equipment: BTreeMap<Slot, String>,
    health: u8,
    hunger: u8,
}

/// A compass step usable with `explore_until`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Direction {
    pub dx: i32,
    pub dz: i32,
}

impl Direction {
    /// Parses `+x`, `-z`, `+x-z` and friends.
    pub fn parse(s: &str) -> Option<Direction> {
        let mut dx = 0;
        let mut dz = 0;
        let bytes = s.as_bytes();
        if bytes.is_empty() || !bytes.len().is_multiple_of(2) {
            return None;
        }
        for pair in bytes.chunks(2) {
            let sign = match pair[0] {
                b'+' => 1,
                b'-' => -1,
                _ => return None,
            };
            match pair[1] {
                b'x' if dx == 0 => dx = sign,
                b'z' if dz == 0 => dz = sign,
                _ => return None,
            }
        }
        Some(Direction { dx, dz })
    }
}

#[derive(Debug, Clone)]
pub struct World {
    config: WorldConfig,
    registry: Arc<Registry>,
    tick: u64,
    calls: u64,
    body: Body,
    spawn: BlockPos,
    edits: BTreeMap<BlockPos, Option<String>>,
    killed: BTreeSet<u64>,
    chests: BTreeMap<BlockPos, ChestState>,
    seen_blocks: BTreeSet<String>,
    seen_chests: BTreeSet<BlockPos>,
    ever_held: BTreeSet<String>,
    placed_stations: Vec<BlockPos>,
    events: Vec<WorldEvent>,
    pending_extra: Vec<String>,
    cache: RefCell<BTreeMap<(i32, i32), Arc<ChunkFeatures>>>,
}

/// Builds a world from `config` and the bundled registry.
pub fn create_world(config: WorldConfig) -> Result<World, ConfigError> {
    World::new(config, Arc::new(Registry::bundled()))
}

impl World {
    pub fn new(config: WorldConfig, registry: Arc<Registry>) -> Result<World, ConfigError> {
        config.validate(&registry)?;
        let h = surface_height(config.seed, 0, 0);
        let spawn = BlockPos::new(0, h + 1, 0);
        let mut world = World {
            config,
            registry,
            tick: 0,
            calls: 0,
            body: Body {
                position: spawn,
                inventory: BTreeMap::new(),
                equipment: BTreeMap::new(),
                health: MAX_STAT,
                hunger: MAX_STAT,
            },
            spawn,
            edits: BTreeMap::new(),
            killed: BTreeSet::new(),
            chests: BTreeMap::new(),
            seen_blocks: BTreeSet::new(),
            seen_chests: BTreeSet::new(),
            ever_held: BTreeSet::new(),
            placed_stations: Vec::new(),
            events: Vec::new(),
            pending_extra: Vec::new(),
            cache: RefCell::new(BTreeMap::new()),
        };
        world.sense_and_remember();
        Ok(world)
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn registry_arc(&self) -> Arc<Registry> {
        self.registry.clone()
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn spawn_position(&self) -> BlockPos {
        self.spawn
    }

    pub fn position(&self) -> BlockPos {
        self.body.position
    }

    pub fn inventory_count(&self, item: &str) -> u32 {
        self.body.inventory.get(item).copied().unwrap_or(0)
    }

    pub fn health(&self) -> u8 {
        self.body.health
    }

    pub fn hunger(&self) -> u8 {
        self.body.hunger
    }

    pub fn events(&self) -> &[WorldEvent] {
        &self.events
    }

    /// Every item name the agent has held at some point.
    pub fn ever_held(&self) -> &BTreeSet<String> {
        &self.ever_held
    }

    pub fn biome_at(&self, x: i32, z: i32) -> &str {
        biome_at(&self.config, x, z)
    }

    pub fn surface_height(&self, x: i32, z: i32) -> i32 {
        surface_height(self.config.seed, x, z)
    }

    fn chunk(&self, cx: i32, cz: i32) -> Arc<ChunkFeatures> {
        if let Some(c) = self.cache.borrow().get(&(cx, cz)) {
            return c.clone();
        }
        let c = Arc::new(generate_chunk(&self.config, cx, cz));
        let mut cache = self.cache.borrow_mut();
        if cache.len() >= 4096 {
            cache.clear();
        }
        cache.insert((cx, cz), c.clone());
        c
    }

    /// Block at a cell, or `"air"`.
    pub fn block_at(&self, pos: BlockPos) -> String {
        if let Some(edit) = self.edits.get(&pos) {
            return edit.clone().unwrap_or_else(|| "air".to_string());
        }
        if let Some(name) = self.feature_at(pos) {
            return name;
        }
        self.terrain_at(pos).unwrap_or("air").to_string()
    }

    fn feature_at(&self, pos: BlockPos) -> Option<String> {
        let (cx, cz) = chunk_coords(pos.x, pos.z);
        self.chunk(cx, cz).blocks.get(&pos).cloned()
    }

    fn terrain_at(&self, pos: BlockPos) -> Option<&'static str> {
        let biome = biome_def(self.biome_at(pos.x, pos.z)).unwrap_or(&BIOMES[0]);
        base_block(biome, self.surface_height(pos.x, pos.z), pos.y)
    }

    fn chunks_near(&self, centre: BlockPos, radius: i32) -> Vec<Arc<ChunkFeatures>> {
        let (cx0, cz0) = chunk_coords(centre.x - radius, centre.z - radius);
        let (cx1, cz1) = chunk_coords(centre.x + radius, centre.z + radius);
        let mut out = Vec::new();
        for cx in cx0..=cx1 {
            for cz in cz0..=cz1 {
                out.push(self.chunk(cx, cz));
            }
        }
        out
    }

    /// Block names within the sensing radius, plus chest positions.
    fn sense(&self) -> (BTreeSet<String>, BTreeSet<BlockPos>) {
        let pos = self.body.position;
        let r = SENSE_RADIUS;
        let mut names: BTreeSet<String> = BTreeSet::new();
        let mut chests = BTreeSet::new();
        let mut found: BTreeSet<&'static str> = BTreeSet::new();
        for dx in -r..=r {
            for dz in -r..=r {
                let d2 = dx * dx + dz * dz;
                if d2 > r * r {
                    continue;
                }
                let reach = isqrt((r * r - d2) as u32) as i32;
                let (lo, hi) = (pos.y - reach, pos.y + reach);
                let (x, z) = (pos.x + dx, pos.z + dz);
                let biome = biome_def(self.biome_at(x, z)).unwrap_or(&BIOMES[0]);
                let h = self.surface_height(x, z);
                for (name, a, b) in base_layers(biome, h) {
                    if a <= b && a <= hi && b >= lo {
                        found.insert(name);
                    }
                }
            }
        }
        names.extend(found.into_iter().map(String::from));
        for chunk in self.chunks_near(pos, r) {
            for (cell, name) in &chunk.blocks {
                if self.edits.contains_key(cell) || !cell.within(&pos, r) {
                    continue;
                }
                if name == "chest" {
                    chests.insert(*cell);
                }
                names.insert(name.clone());
            }
        }
        for (cell, edit) in &self.edits {
            if let Some(name) = edit {
                if cell.within(&pos, r) {
                    if name == "chest" {
                        chests.insert(*cell);
                    }
                    names.insert(name.clone());
                }
            }
        }
        (names, chests)
    }

    fn sense_and_remember(&mut self) {
        let (names, chests) = self.sense();
        self.seen_blocks.extend(names);
        self.seen_chests.extend(chests);
    }

    fn nearby_mobs(&self) -> Vec<gen::MobInstance> {
        let pos = self.body.position;
        let mut mobs: Vec<gen::MobInstance> = self
            .chunks_near(pos, SENSE_RADIUS)
            .into_iter()
            .flat_map(|c| c.mobs.clone())
            .filter(|m| !self.killed.contains(&m.id) && m.pos.within(&pos, SENSE_RADIUS))
            .collect();
        mobs.sort_by_key(|m| (m.pos.dist2(&pos), m.pos, m.id));
        mobs
    }

    /// True when a block of this name is within the sensing radius.
    pub fn block_nearby(&self, name: &str) -> bool {
        self.sense().0.contains(name)
    }

    pub fn entity_nearby(&self, name: &str) -> bool {
        self.nearby_mobs().iter().any(|m| m.name == name)
    }

    /// The full, unfiltered observation.
    pub fn observe(&self) -> AgentState {
        let (nearby_blocks, chests_here) = self.sense();
        let recently_seen_blocks = self
            .seen_blocks
            .iter()
            .filter(|b| !nearby_blocks.contains(*b) && !self.body.inventory.contains_key(*b))
            .cloned()
            .collect();
        let nearby_entities = self.nearby_mobs().into_iter().map(|m| m.name).collect();
        let known_chests = self
            .seen_chests
            .iter()
            .chain(chests_here.iter())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .filter(|p| self.block_at(**p) == "chest")
            .map(|p| KnownChest {
                position: *p,
                contents: match self.chests.get(p) {
                    Some(c) if c.opened => ChestContents::Known(c.contents.clone()),
                    _ => ChestContents::Unknown,
                },
            })
            .collect();
        let pos = self.body.position;
        AgentState {
            inventory: self.body.inventory.clone(),
            equipment: self.body.equipment.clone(),
            nearby_blocks,
            recently_seen_blocks,
            nearby_entities,
            known_chests,
            biome: self.biome_at(pos.x, pos.z).to_string(),
            time_of_day: TimeOfDay::from_ticks(self.tick, self.config.day_length_ticks),
            health: self.body.health,
            hunger: self.body.hunger,
            position: pos,
        }
    }

    // ---- inventory helpers ----

    fn credit(&mut self, item: &str, n: u32) {
        if n == 0 {
            return;
        }
        *self.body.inventory.entry(item.to_string()).or_insert(0) += n;
        self.ever_held.insert(item.to_string());
    }

    fn debit(&mut self, item: &str, n: u32) {
        if let Some(have) = self.body.inventory.get_mut(item) {
            *have = have.saturating_sub(n);
            if *have == 0 {
                self.body.inventory.remove(item);
                self.body.equipment.retain(|_, held| held != item);
            }
        }
    }

    /// How many items in the inventory satisfy `key` (item or `#tag`).
    fn have_matching(&self, key: &str) -> u32 {
        self.registry
            .expand(key)
            .iter()
            .map(|i| self.inventory_count(i))
            .sum()
    }

    fn debit_matching(&mut self, key: &str, mut n: u32) {
        for item in self.registry.expand(key) {
            if n == 0 {
                break;
            }
            let take = self.inventory_count(&item).min(n);
            self.debit(&item, take);
            n -= take;
        }
    }

    fn station_nearby(&self, station: &str) -> bool {
        let pos = self.body.position;
        self.edits
            .iter()
            .any(|(cell, edit)| edit.as_deref() == Some(station) && cell.within(&pos, SENSE_RADIUS))
    }

    /// Puts the best owned tool of `kind` in hand; returns its tier.
    fn equip_best(&mut self, kind: ToolKind) -> Tier {
        let best = self
            .body
            .inventory
            .keys()
            .filter_map(|item| self.registry.tools.get(item))
            .filter(|t| t.kind == kind)
            .max_by_key(|t| (t.tier.rank(), t.tier, t.item.clone()))
            .cloned();
        match best {
            Some(tool) => {
                self.body.equipment.insert(Slot::Hand, tool.item.clone());
                tool.tier
            }
            None => Tier::None,
        }
    }

    fn equip_best_weapon(&mut self) {
        let registry = self.registry.clone();
        let best = self
            .body
            .inventory
            .keys()
            .filter(|item| registry.tools.contains_key(*item))
            .max_by_key(|item| (registry.weapon_damage(Some(item)), (*item).clone()))
            .cloned();
        if let Some(item) = best {
            self.body.equipment.insert(Slot::Hand, item);
        }
    }

    // ---- bookkeeping around every primitive ----

    fn snapshot_digest_input(&self) -> (BTreeMap<String, u32>, BlockPos, u8, u8) {
        (
            self.body.inventory.clone(),
            self.body.position,
            self.body.health,
            self.body.hunger,
        )
    }

    fn record(
        &mut self,
        op: &str,
        args: Vec<String>,
        before: (BTreeMap<String, u32>, BlockPos, u8, u8),
        result: &Result<OpOutcome, PrimitiveError>,
    ) {
        self.calls += 1;
        self.tick += self.config.ticks_per_call;
        let mut extra = Vec::new();
        if self.calls.is_multiple_of(self.config.hunger_decay_calls) {
            if self.body.hunger > 0 {
                self.body.hunger -= 1;
            } else {
                self.body.health = self.body.health.saturating_sub(1);
                extra.push("I am starving.".to_string());
            }
            if self.body.hunger >= 18 && self.body.health < MAX_STAT {
                self.body.health += 1;
            }
            if self.body.health == 0 {
                extra.extend(self.respawn());
            }
        }
        self.sense_and_remember();

        let after = self.snapshot_digest_input();
        let mut delta = String::new();
        let keys: BTreeSet<&String> = before.0.keys().chain(after.0.keys()).collect();
        for key in keys {
            let a = before.0.get(key).copied().unwrap_or(0) as i64;
            let b = after.0.get(key).copied().unwrap_or(0) as i64;
            if a != b {
                delta.push_str(&format!("{key}:{};", b - a));
            }
        }
        if before.1 != after.1 {
            delta.push_str(&format!("pos:{};", after.1));
        }
        if before.2 != after.2 || before.3 != after.3 {
            delta.push_str(&format!("hp:{}/{};", after.2, after.3));
        }
        let digest = Sha256::digest(delta.as_bytes());
        let delta_hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();

        let (mut feedback, error) = match result {
            Ok(outcome) => (outcome.feedback.clone(), None),
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
        feedback.extend(extra.iter().cloned());
        self.events.push(WorldEvent {
            tick: self.tick,
            op: op.to_string(),
            args,
            feedback,
            error,
            delta: delta_hex,
        });
        self.pending_extra = extra;
    }

    fn run_op(
        &mut self,
        op: &str,
        args: Vec<String>,
        f: impl FnOnce(&mut World) -> Result<OpOutcome, PrimitiveError>,
    ) -> Result<OpOutcome, PrimitiveError> {
        let before = self.snapshot_digest_input();
        let mut result = f(self);
        self.record(op, args, before, &result);
        let extra = core::mem::take(&mut self.pending_extra);
        if let Ok(outcome) = &mut result {
            outcome.feedback.extend(extra);
        }
        result
    }
}

fn isqrt(n: u32) -> u32 {
    let mut r = libm::sqrt(n as f64) as u32;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}
