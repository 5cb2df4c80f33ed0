//! Control primitives.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::*;

/// Columns within `r` of the origin, nearest first.
fn columns_by_distance(r: i32) -> Vec<(i32, i32, i32)> {
    let mut cols = Vec::new();
    for dx in -r..=r {
        for dz in -r..=r {
            let d2 = dx * dx + dz * dz;
            if d2 <= r * r {
                cols.push((d2, dx, dz));
            }
        }
    }
    cols.sort();
    cols
}

fn count_arg(op: &str, n: i64) -> Result<u32, PrimitiveError> {
    if n < 1 {
        return Err(PrimitiveError::Precondition(format!(
            "{op} count must be at least 1, got {n}"
        )));
    }
    Ok(n.min(u32::MAX as i64) as u32)
}

impl World {
    /// Nearest cells (within the sensing radius) holding `name`, at most `n`.
    fn find_cells(&self, name: &str, n: u32) -> Vec<BlockPos> {
        let pos = self.body.position;
        let r = SENSE_RADIUS;
        let n = n as usize;
        let mut found: Vec<(i64, BlockPos)> = Vec::new();
        for (cell, edit) in &self.edits {
            if edit.as_deref() == Some(name) && cell.within(&pos, r) {
                found.push((cell.dist2(&pos), *cell));
            }
        }
        for chunk in self.chunks_near(pos, r) {
            for (cell, block) in &chunk.blocks {
                if block == name && !self.edits.contains_key(cell) && cell.within(&pos, r) {
                    found.push((cell.dist2(&pos), *cell));
                }
            }
        }
        let mut last_d2 = -1;
        for (d2, dx, dz) in columns_by_distance(r) {
            if d2 != last_d2 {
                last_d2 = d2;
                if found.len() >= n {
                    found.sort();
                    found.truncate(n);
                    if (d2 as i64) > found[n - 1].0 {
                        break;
                    }
                }
            }
            let (x, z) = (pos.x + dx, pos.z + dz);
            let biome = biome_def(self.biome_at(x, z)).unwrap_or(&BIOMES[0]);
            let h = self.surface_height(x, z);
            let reach = isqrt((r * r - d2) as u32) as i32;
            for (layer, a, b) in base_layers(biome, h) {
                if layer != name {
                    continue;
                }
                let lo = a.max(pos.y - reach);
                let hi = b.min(pos.y + reach);
                if lo > hi {
                    continue;
                }
                // walk outwards from the agent's height
                let start = pos.y.clamp(lo, hi);
                let mut taken = 0;
                let mut offset = 0;
                while taken < n && (start - offset >= lo || start + offset <= hi) {
                    let ys: &[i32] = if offset == 0 {
                        &[start][..]
                    } else {
                        &[start - offset, start + offset][..]
                    };
                    for &y in ys {
                        if y < lo || y > hi {
                            continue;
                        }
                        let cell = BlockPos::new(x, y, z);
                        if self.edits.contains_key(&cell) || self.feature_at(cell).is_some() {
                            continue;
                        }
                        found.push((d2 as i64 + ((y - pos.y) as i64).pow(2), cell));
                        taken += 1;
                    }
                    offset += 1;
                }
            }
        }
        found.sort();
        found.dedup();
        found.truncate(n);
        found.into_iter().map(|(_, c)| c).collect()
    }

    /// What a cell would hold without any edits.
    fn original_block(&self, cell: BlockPos) -> Option<String> {
        self.feature_at(cell)
            .or_else(|| self.terrain_at(cell).map(String::from))
    }

    pub fn mine_block(&mut self, name: &str, count: i64) -> Result<OpOutcome, PrimitiveError> {
        let args = alloc::vec![name.to_string(), count.to_string()];
        self.run_op("mineBlock", args, |w| w.mine_inner(name, count))
    }

    fn mine_inner(&mut self, name: &str, count: i64) -> Result<OpOutcome, PrimitiveError> {
        // an item name mines the block that drops it, e.g. diamond -> diamond_ore
        let def = self
            .registry
            .blocks
            .get(name)
            .or_else(|| self.registry.block_dropping(name))
            .cloned()
            .ok_or_else(|| PrimitiveError::UnknownBlock(name.to_string()))?;
        let name = def.name.as_str();
        let count = count_arg("mineBlock", count)?;
        if def.tier == Tier::Unbreakable {
            return Ok(OpOutcome::say(format!(
                "I cannot break {}",
                display_name(name)
            )));
        }
        if def.tier != Tier::None {
            let have = self.equip_best(ToolKind::Pickaxe);
            if have.rank() < def.tier.rank() {
                return Ok(OpOutcome::say(format!(
                    "I need at least {} pickaxe to mine {}",
                    with_article(def.tier.name()),
                    display_name(name)
                )));
            }
        }
        let cells = self.find_cells(name, count);
        if cells.is_empty() {
            return Ok(OpOutcome::say(format!(
                "No {} nearby, please explore first",
                display_name(name)
            )));
        }
        for cell in &cells {
            self.edits.insert(*cell, None);
            self.placed_stations.retain(|p| p != cell);
            if let Some(drop) = &def.drop {
                self.credit(drop, def.drop_count);
            }
        }
        let mined = cells.len() as u32;
        let mut out = OpOutcome {
            amount: mined,
            success: mined == count,
            ..Default::default()
        };
        out.feedback
            .push(format!("Mined {} {}", mined, quantity_name(name, mined)));
        if mined < count {
            out.feedback.push(format!(
                "No more {} nearby, please explore first",
                display_name(name)
            ));
        }
        Ok(out)
    }

    pub fn craft_item(&mut self, name: &str, count: i64) -> Result<OpOutcome, PrimitiveError> {
        let args = alloc::vec![name.to_string(), count.to_string()];
        self.run_op("craftItem", args, |w| w.craft_inner(name, count))
    }

    fn craft_inner(&mut self, name: &str, count: i64) -> Result<OpOutcome, PrimitiveError> {
        let recipe = self
            .registry
            .recipe(name)
            .cloned()
            .ok_or_else(|| PrimitiveError::NoRecipe(name.to_string()))?;
        let times = count_arg("craftItem", count)?;
        let shortfalls: Vec<Shortfall> = recipe
            .inputs
            .iter()
            .filter_map(|input| {
                let need = input.count * times;
                let have = self.have_matching(&input.key);
                (have < need).then(|| Shortfall {
                    ingredient: input.key.clone(),
                    missing: need - have,
                })
            })
            .collect();
        if !shortfalls.is_empty() {
            return Ok(OpOutcome::say(shortfall_message(name, &shortfalls)));
        }
        if let Some(station) = recipe.station.block_name() {
            if !self.station_nearby(station) {
                return Ok(OpOutcome::say(format!(
                    "I cannot make {} because there is no {} nearby",
                    with_article(name),
                    display_name(station)
                )));
            }
        }
        for input in &recipe.inputs {
            self.debit_matching(&input.key, input.count * times);
        }
        let made = recipe.count * times;
        self.credit(name, made);
        Ok(OpOutcome {
            feedback: alloc::vec![format!("Crafted {} {}", made, quantity_name(name, made))],
            success: true,
            amount: made,
            ..Default::default()
        })
    }

    pub fn smelt_item(
        &mut self,
        item: &str,
        fuel: &str,
        count: i64,
    ) -> Result<OpOutcome, PrimitiveError> {
        let args = alloc::vec![item.to_string(), fuel.to_string(), count.to_string()];
        self.run_op("smeltItem", args, |w| w.smelt_inner(item, fuel, count))
    }

    fn smelt_inner(&mut self, item: &str, fuel: &str, count: i64) -> Result<OpOutcome, PrimitiveError> {
        let smelt = self
            .registry
            .smelt_for(item)
            .cloned()
            .ok_or_else(|| PrimitiveError::NotSmeltable(item.to_string()))?;
        let count = count_arg("smeltItem", count)?;
        let Some(value) = self.registry.fuel_value(fuel) else {
            return Ok(OpOutcome::say(format!(
                "{} is not a valid fuel; use one of: {}",
                display_name(fuel),
                self.registry.fuel_classes().join(", ")
            )));
        };
        if !self.station_nearby("furnace") {
            return Ok(OpOutcome::say(format!(
                "I cannot smelt {} because there is no furnace nearby",
                display_name(item)
            )));
        }
        let fuel_needed = count.div_ceil(value);
        let mut shortfalls = Vec::new();
        if item == fuel {
            let need = count + fuel_needed;
            let have = self.inventory_count(item);
            if have < need {
                shortfalls.push(Shortfall {
                    ingredient: item.to_string(),
                    missing: need - have,
                });
            }
        } else {
            for (key, need) in [(item, count), (fuel, fuel_needed)] {
                let have = self.inventory_count(key);
                if have < need {
                    shortfalls.push(Shortfall {
                        ingredient: key.to_string(),
                        missing: need - have,
                    });
                }
            }
        }
        if !shortfalls.is_empty() {
            return Ok(OpOutcome::say(shortfall_message(&smelt.output, &shortfalls)));
        }
        self.debit(item, count);
        self.debit(fuel, fuel_needed);
        self.credit(&smelt.output, count);
        Ok(OpOutcome {
            feedback: alloc::vec![format!(
                "Smelted {} {} into {} {}",
                count,
                quantity_name(item, count),
                count,
                quantity_name(&smelt.output, count)
            )],
            success: true,
            amount: count,
            ..Default::default()
        })
    }

    pub fn place_item(&mut self, name: &str, at: BlockPos) -> Result<OpOutcome, PrimitiveError> {
        let args = alloc::vec![name.to_string(), at.to_string()];
        self.run_op("placeItem", args, |w| w.place_inner(name, at))
    }

    fn place_inner(&mut self, name: &str, at: BlockPos) -> Result<OpOutcome, PrimitiveError> {
        if !self.registry.is_placeable(name) {
            return Err(PrimitiveError::NotPlaceable(name.to_string()));
        }
        if at.y < MIN_Y || at.y > MAX_Y {
            return Err(PrimitiveError::Precondition(format!(
                "position {at} is outside the world"
            )));
        }
        if self.inventory_count(name) == 0 {
            return Ok(OpOutcome::say(format!(
                "I have no {} to place",
                display_name(name)
            )));
        }
        if !at.within(&self.body.position, SENSE_RADIUS) {
            return Ok(OpOutcome::say(format!(
                "Cannot place {} at {at}: too far away",
                display_name(name)
            )));
        }
        if at == self.body.position || self.block_at(at) != "air" {
            return Ok(OpOutcome::say(format!(
                "Cannot place {} at {at}: position occupied",
                display_name(name)
            )));
        }
        self.debit(name, 1);
        self.edits.insert(at, Some(name.to_string()));
        match name {
            "crafting_table" | "furnace" => self.placed_stations.push(at),
            "chest" => {
                self.chests.insert(
                    at,
                    ChestState {
                        contents: BTreeMap::new(),
                        opened: true,
                    },
                );
                self.seen_chests.insert(at);
            }
            _ => {}
        }
        Ok(OpOutcome {
            feedback: alloc::vec![format!("Placed {} at {at}", display_name(name))],
            success: true,
            amount: 1,
            ..Default::default()
        })
    }

    pub fn kill_mob(&mut self, mob: &str, timeout: i64) -> Result<OpOutcome, PrimitiveError> {
        let args = alloc::vec![mob.to_string(), timeout.to_string()];
        self.run_op("killMob", args, |w| w.kill_inner(mob, timeout))
    }

    fn kill_inner(&mut self, mob: &str, timeout: i64) -> Result<OpOutcome, PrimitiveError> {
        let absent = || OpOutcome::say(format!("No {} nearby, please explore first", display_name(mob)));
        let Some(def) = self.registry.mobs.get(mob).cloned() else {
            return Ok(absent());
        };
        let Some(target) = self.nearby_mobs().into_iter().find(|m| m.name == mob) else {
            return Ok(absent());
        };
        self.equip_best_weapon();
        let held = self.body.equipment.get(&Slot::Hand).cloned();
        let dmg = self.registry.weapon_damage(held.as_deref()).max(1);
        let exchanges = def.hp.div_ceil(dmg);
        let worn = self
            .body
            .equipment
            .keys()
            .filter(|s| !matches!(s, Slot::Hand | Slot::OffHand))
            .count() as u32;
        let hit = def.damage.saturating_sub(worn / 2);
        let allowed = (timeout.max(0) as u64 / COMBAT_TICKS_PER_EXCHANGE as u64) as u32;
        let fought = exchanges.min(allowed.max(1));
        self.tick += fought as u64 * COMBAT_TICKS_PER_EXCHANGE as u64;
        let taken = hit * fought.saturating_sub(1) + if fought < exchanges { hit } else { 0 };
        self.body.health = self.body.health.saturating_sub(taken.min(255) as u8);
        if self.body.health == 0 {
            let mut out = OpOutcome::say(format!("I was killed by {}", with_article(mob)));
            out.feedback.extend(self.respawn());
            return Ok(out);
        }
        if fought < exchanges {
            return Ok(OpOutcome::say(format!(
                "I could not kill the {} within {timeout} ticks",
                display_name(mob)
            )));
        }
        self.killed.insert(target.id);
        let col_h = self.surface_height(target.pos.x, target.pos.z);
        self.body.position = BlockPos::new(target.pos.x, col_h + 1, target.pos.z);
        let mut out = OpOutcome {
            success: true,
            amount: 1,
            path: alloc::vec![self.body.position],
            ..Default::default()
        };
        out.feedback.push(format!("Killed {}", with_article(mob)));
        for (item, n) in &def.drops {
            self.credit(item, *n);
        }
        Ok(out)
    }

    /// Walks one column per tick in `direction` until `until` holds.
    pub fn explore_until(
        &mut self,
        direction: &str,
        max_ticks: i64,
        mut until: impl FnMut(&World) -> bool,
    ) -> Result<OpOutcome, PrimitiveError> {
        let args = alloc::vec![direction.to_string(), max_ticks.to_string()];
        let dir = Direction::parse(direction);
        self.run_op("exploreUntil", args, |w| {
            let Some(dir) = dir else {
                return Err(PrimitiveError::Precondition(format!(
                    "unknown direction {direction}; use +x, -x, +z, -z or a diagonal like +x-z"
                )));
            };
            if max_ticks < 1 {
                return Err(PrimitiveError::Precondition(format!(
                    "exploreUntil maxTime must be at least 1, got {max_ticks}"
                )));
            }
            let mut out = OpOutcome::default();
            if until(w) {
                out.success = true;
                out.feedback.push("Found it without moving".into());
                return Ok(out);
            }
            let limit = w.config.world_radius;
            for step in 1..=max_ticks {
                let pos = w.body.position;
                let (nx, nz) = (pos.x + dir.dx, pos.z + dir.dz);
                if nx.abs() > limit || nz.abs() > limit {
                    out.feedback
                        .push(format!("Reached the edge of the world at {pos}"));
                    return Ok(out);
                }
                let h_here = w.surface_height(pos.x, pos.z);
                let h_next = w.surface_height(nx, nz);
                let ny = if pos.y > h_here { h_next + 1 } else { pos.y.min(h_next) };
                w.body.position = BlockPos::new(nx, ny, nz);
                w.tick += 1;
                out.path.push(w.body.position);
                w.sense_and_remember();
                if until(w) {
                    out.success = true;
                    out.amount = step as u32;
                    out.feedback.push(format!(
                        "Explored {step} blocks towards {direction} and found it"
                    ));
                    return Ok(out);
                }
            }
            out.amount = max_ticks as u32;
            out.feedback.push(format!(
                "Explored {max_ticks} blocks towards {direction} without finding it"
            ));
            Ok(out)
        })
    }

    pub fn goto(&mut self, target: BlockPos, range: i64) -> Result<OpOutcome, PrimitiveError> {
        let args = alloc::vec![target.to_string(), range.to_string()];
        self.run_op("goto", args, |w| w.goto_inner(target, range))
    }

    fn goto_inner(&mut self, target: BlockPos, range: i64) -> Result<OpOutcome, PrimitiveError> {
        let limit = self.config.world_radius;
        if target.x.abs() > limit || target.z.abs() > limit || target.y < MIN_Y || target.y > MAX_Y
        {
            return Err(PrimitiveError::Precondition(format!(
                "target {target} is outside the world"
            )));
        }
        let range = range.max(0) as i32;
        let h = self.surface_height(target.x, target.z);
        let goal_y = target.y.clamp(MIN_Y + 1, h + 1);
        let goal = BlockPos::new(target.x, goal_y, target.z);
        let cheb = |a: BlockPos| {
            (a.x - goal.x)
                .abs()
                .max((a.y - goal.y).abs())
                .max((a.z - goal.z).abs())
        };
        let mut out = OpOutcome::default();
        let mut steps = 0;
        while cheb(self.body.position) > range && steps < GOTO_STEP_BUDGET {
            let p = self.body.position;
            let nx = p.x + (goal.x - p.x).signum();
            let nz = p.z + (goal.z - p.z).signum();
            let col_top = self.surface_height(nx, nz) + 1;
            let ny = (p.y + (goal.y - p.y).signum()).clamp(MIN_Y + 1, col_top);
            self.body.position = BlockPos::new(nx, ny, nz);
            out.path.push(self.body.position);
            steps += 1;
        }
        self.tick += steps as u64;
        self.sense_and_remember();
        let reached = cheb(self.body.position) <= range;
        if reached && goal_y == target.y {
            out.success = true;
            out.feedback
                .push(format!("Reached {}", self.body.position));
        } else {
            out.feedback.push(format!(
                "Could not reach {target}; closest position reached: {}",
                self.body.position
            ));
        }
        Ok(out)
    }

    pub fn get_item_from_chest(
        &mut self,
        at: BlockPos,
        item: &str,
        count: i64,
    ) -> Result<OpOutcome, PrimitiveError> {
        let args = alloc::vec![at.to_string(), item.to_string(), count.to_string()];
        self.run_op("getItemFromChest", args, |w| {
            w.chest_inner(at, item, count, ChestDirection::Get)
        })
    }

    pub fn deposit_item_into_chest(
        &mut self,
        at: BlockPos,
        item: &str,
        count: i64,
    ) -> Result<OpOutcome, PrimitiveError> {
        let args = alloc::vec![at.to_string(), item.to_string(), count.to_string()];
        self.run_op("depositItemIntoChest", args, |w| {
            w.chest_inner(at, item, count, ChestDirection::Deposit)
        })
    }

    fn chest_inner(
        &mut self,
        at: BlockPos,
        item: &str,
        count: i64,
        dir: ChestDirection,
    ) -> Result<OpOutcome, PrimitiveError> {
        if self.block_at(at) != "chest" {
            return Err(PrimitiveError::NoChest(at));
        }
        let count = count_arg("chest transfer", count)?;
        if !at.within(&self.body.position, SENSE_RADIUS) {
            return Ok(OpOutcome::say(format!("The chest at {at} is too far away")));
        }
        if !self.chests.contains_key(&at) {
            let (cx, cz) = chunk_coords(at.x, at.z);
            let loot = match &self.chunk(cx, cz).chest {
                Some((p, loot)) if *p == at => loot.clone(),
                _ => BTreeMap::new(),
            };
            self.chests.insert(
                at,
                ChestState {
                    contents: loot,
                    opened: false,
                },
            );
        }
        self.seen_chests.insert(at);
        let mut chest = self.chests.remove(&at).unwrap_or(ChestState {
            contents: BTreeMap::new(),
            opened: false,
        });
        chest.opened = true;
        let mut out = OpOutcome::default();
        match dir {
            ChestDirection::Get => {
                let have = chest.contents.get(item).copied().unwrap_or(0);
                let moved = have.min(count);
                if moved > 0 {
                    let left = have - moved;
                    if left == 0 {
                        chest.contents.remove(item);
                    } else {
                        chest.contents.insert(item.to_string(), left);
                    }
                    self.credit(item, moved);
                }
                out.amount = moved;
                out.success = moved == count;
                if moved < count {
                    out.feedback.push(format!(
                        "The chest only had {moved} {}",
                        quantity_name(item, moved)
                    ));
                }
                if moved > 0 {
                    out.feedback.push(format!(
                        "Took {moved} {} from the chest",
                        quantity_name(item, moved)
                    ));
                }
            }
            ChestDirection::Deposit => {
                let have = self.inventory_count(item);
                let moved = have.min(count);
                if moved > 0 {
                    self.debit(item, moved);
                    *chest.contents.entry(item.to_string()).or_insert(0) += moved;
                }
                out.amount = moved;
                out.success = moved == count;
                if moved < count {
                    out.feedback.push(format!(
                        "I only had {moved} {}",
                        quantity_name(item, moved)
                    ));
                }
                if moved > 0 {
                    out.feedback.push(format!(
                        "Deposited {moved} {} into the chest",
                        quantity_name(item, moved)
                    ));
                }
            }
        }
        self.chests.insert(at, chest);
        Ok(out)
    }

    pub fn equip(&mut self, item: &str, destination: &str) -> Result<OpOutcome, PrimitiveError> {
        let args = alloc::vec![item.to_string(), destination.to_string()];
        self.run_op("equip", args, |w| {
            let slot = Slot::parse(destination).ok_or_else(|| {
                PrimitiveError::Precondition(format!("unknown equipment slot {destination}"))
            })?;
            if w.inventory_count(item) == 0 {
                return Ok(OpOutcome::say(format!("I have no {}", display_name(item))));
            }
            if !matches!(slot, Slot::Hand | Slot::OffHand)
                && w.registry.armor.get(item) != Some(&slot)
            {
                return Ok(OpOutcome::say(format!(
                    "{} cannot be worn on the {} slot",
                    display_name(item),
                    slot.name()
                )));
            }
            w.body.equipment.insert(slot, item.to_string());
            Ok(OpOutcome {
                feedback: alloc::vec![format!("Equipped {}", display_name(item))],
                success: true,
                amount: 1,
                ..Default::default()
            })
        })
    }

    pub fn consume(&mut self, item: &str) -> Result<OpOutcome, PrimitiveError> {
        self.run_op("consume", alloc::vec![item.to_string()], |w| {
            let Some(value) = w.registry.foods.get(item).copied() else {
                return Ok(OpOutcome::say(format!("{} is not edible", display_name(item))));
            };
            if w.inventory_count(item) == 0 {
                return Ok(OpOutcome::say(format!("I have no {}", display_name(item))));
            }
            w.debit(item, 1);
            w.body.hunger = (w.body.hunger as u32 + value).min(MAX_STAT as u32) as u8;
            Ok(OpOutcome {
                feedback: alloc::vec![format!("Ate {}", with_article(item))],
                success: true,
                amount: 1,
                ..Default::default()
            })
        })
    }

    /// Respawns a dead agent. Inventory and equipment are kept.
    pub fn apply_death(&mut self) -> Result<OpOutcome, PrimitiveError> {
        self.run_op("death", Vec::new(), |w| {
            if w.body.health != 0 {
                return Err(PrimitiveError::Precondition(format!(
                    "agent is alive with {} health",
                    w.body.health
                )));
            }
            Ok(OpOutcome {
                feedback: w.respawn(),
                success: true,
                ..Default::default()
            })
        })
    }

    /// Drops health to zero and respawns, as if killed.
    pub fn force_death(&mut self) -> Result<OpOutcome, PrimitiveError> {
        self.body.health = 0;
        self.apply_death()
    }

    pub(super) fn respawn(&mut self) -> Vec<String> {
        let p = self.body.position;
        let h = self.surface_height(p.x, p.z);
        self.body.position = BlockPos::new(p.x, h + 1, p.z);
        self.body.health = MAX_STAT;
        self.body.hunger = MAX_STAT;
        alloc::vec![format!("I died and respawned at {}", self.body.position)]
    }

    /// Picks up every crafting table and furnace placed since the last call.
    pub fn recycle_stations(&mut self) -> Vec<String> {
        let placed = core::mem::take(&mut self.placed_stations);
        let result = self.run_op("recycle", Vec::new(), |w| {
            let mut out = OpOutcome {
                success: true,
                ..Default::default()
            };
            for cell in placed {
                let Some(Some(name)) = w.edits.get(&cell).cloned() else {
                    continue;
                };
                if w.original_block(cell).is_some() {
                    w.edits.insert(cell, None);
                } else {
                    w.edits.remove(&cell);
                }
                w.credit(&name, 1);
                out.amount += 1;
                out.feedback
                    .push(format!("Picked up {} at {cell}", display_name(&name)));
            }
            Ok(out)
        });
        result.map(|o| o.feedback).unwrap_or_default()
    }

    /// Test and setup helper: puts items straight into the inventory.
    pub fn give(&mut self, item: &str, n: u32) {
        self.credit(item, n);
    }

    /// Test and setup helper: moves the agent without spending ticks.
    pub fn teleport(&mut self, to: BlockPos) {
        self.body.position = to;
        self.sense_and_remember();
    }

    pub fn set_health(&mut self, health: u8) {
        self.body.health = health.min(MAX_STAT);
    }
}
