//! Primitive semantics of the crafting world.

use voyager_core::registry::Registry;
use voyager_core::world::*;

fn world(seed: u64) -> World {
    create_world(WorldConfig::with_seed(seed)).unwrap()
}

/// An empty cell next to the agent with solid ground below.
fn free_cell(w: &World) -> BlockPos {
    let p = w.position();
    for r in 1..6 {
        for (dx, dz) in [(r, 0), (0, r), (-r, 0), (0, -r), (r, r), (-r, -r)] {
            for dy in -2..=2 {
                let c = BlockPos::new(p.x + dx, p.y + dy, p.z + dz);
                let below = BlockPos::new(c.x, c.y - 1, c.z);
                if w.block_at(c) == "air" && w.block_at(below) != "air" {
                    return c;
                }
            }
        }
    }
    panic!("no free cell near {p}");
}

/// Brute-force check that some cell within the sensing radius holds `name`.
fn block_within(w: &World, at: BlockPos, name: &str) -> bool {
    let r = SENSE_RADIUS;
    for dx in -r..=r {
        for dz in -r..=r {
            for dy in -r..=r {
                if dx * dx + dy * dy + dz * dz > r * r {
                    continue;
                }
                if w.block_at(BlockPos::new(at.x + dx, at.y + dy, at.z + dz)) == name {
                    return true;
                }
            }
        }
    }
    false
}

#[test]
fn same_seed_same_world() {
    let a = world(1);
    let b = world(1);
    assert_eq!(a.spawn_position(), b.spawn_position());
    assert_eq!(a.observe(), b.observe());
}

#[test]
fn different_seeds_differ() {
    let a = world(1).observe();
    let b = world(2).observe();
    assert_ne!(a, b);
    assert_ne!(a.biome, b.biome);
}

#[test]
fn unreachable_item_is_a_config_error() {
    let mut text = String::from(include_str!("../data/registry.txt"));
    text.push_str("\nrecipe mithril_sword 1 crafting_table : mithril 2 stick 1\n");
    let registry = Registry::parse(&text).unwrap();
    let err = World::new(WorldConfig::with_seed(1), std::sync::Arc::new(registry)).unwrap_err();
    assert!(err.to_string().contains("unreachable item"), "{err}");
    assert!(err.to_string().contains("mithril"), "{err}");
}

#[test]
fn fresh_world_state() {
    let w = world(5);
    let s = w.observe();
    assert!(s.inventory.is_empty());
    assert_eq!((s.health, s.hunger), (20, 20));
    assert_eq!(w.tick(), 0);
    assert_eq!(s.position, w.spawn_position());
}

#[test]
fn mining_logs_credits_inventory() {
    let mut w = world(1);
    let out = w.mine_block("oak_log", 3).unwrap();
    assert!(out.success, "{:?}", out.feedback);
    assert_eq!(w.observe().count("oak_log"), 3);
}

#[test]
fn mining_count_must_be_positive() {
    let mut w = world(1);
    assert!(matches!(w.mine_block("oak_log", 0), Err(PrimitiveError::Precondition(_))));
    assert!(matches!(w.mine_block("mithril_ore", 1), Err(PrimitiveError::UnknownBlock(_))));
}

#[test]
fn tool_tier_gates_mining() {
    let mut w = world(1);
    w.give("stone_pickaxe", 1);
    w.equip("stone_pickaxe", "hand").unwrap();
    let p = w.position();
    w.teleport(BlockPos::new(p.x, -50, p.z));
    let out = w.mine_block("diamond_ore", 1).unwrap();
    assert_eq!(out.amount, 0);
    assert!(!out.success);
    assert_eq!(w.observe().count("diamond"), 0);
    let msg = out.feedback.join("\n");
    assert!(msg.contains("iron") && msg.contains("pickaxe"), "{msg}");

    // without any pickaxe, stone drops nothing either
    let mut w = world(1);
    let out = w.mine_block("stone", 1).unwrap();
    assert_eq!(out.amount, 0);
    assert!(out.feedback.join(" ").contains("wooden pickaxe"), "{:?}", out.feedback);
}

#[test]
fn craft_shortfall_messages() {
    let mut w = world(1);
    w.give("iron_ingot", 1);
    let out = w.craft_item("iron_chestplate", 1).unwrap();
    assert_eq!(
        out.feedback,
        ["I cannot make an iron chestplate because I need: 7 more iron ingots"]
    );
    assert_eq!(w.observe().count("iron_ingot"), 1);

    let mut w = world(1);
    let out = w.craft_item("stick", 1).unwrap();
    assert_eq!(out.feedback, ["I cannot make a stick because I need: 2 more planks"]);
}

#[test]
fn craft_planks_from_a_log() {
    let mut w = world(1);
    w.give("oak_log", 1);
    let out = w.craft_item("oak_planks", 1).unwrap();
    assert!(out.success);
    let inv = w.observe().inventory;
    assert_eq!(inv.get("oak_planks"), Some(&4));
    assert_eq!(inv.get("oak_log"), None);
}

#[test]
fn hallucinated_recipe_is_an_error() {
    let mut w = world(1);
    assert_eq!(
        w.craft_item("acacia_axe", 1),
        Err(PrimitiveError::NoRecipe("acacia_axe".into()))
    );
}

#[test]
fn station_is_required_and_placement_satisfies_it() {
    let mut w = world(1);
    w.give("oak_planks", 3);
    w.give("stick", 2);
    w.give("crafting_table", 1);
    let out = w.craft_item("wooden_pickaxe", 1).unwrap();
    assert!(!out.success);
    assert!(out.feedback[0].contains("no crafting table nearby"), "{:?}", out.feedback);
    let cell = free_cell(&w);
    assert!(w.place_item("crafting_table", cell).unwrap().success);
    assert!(w.craft_item("wooden_pickaxe", 1).unwrap().success);
    assert_eq!(w.observe().count("wooden_pickaxe"), 1);
}

#[test]
fn smelting() {
    let mut w = world(1);
    w.give("furnace", 1);
    w.give("raw_iron", 4);
    w.give("coal", 1);
    w.give("cobblestone", 5);
    let out = w.smelt_item("raw_iron", "coal", 3).unwrap();
    assert!(out.feedback[0].contains("no furnace nearby"), "{:?}", out.feedback);
    let cell = free_cell(&w);
    w.place_item("furnace", cell).unwrap();

    let out = w.smelt_item("raw_iron", "cobblestone", 1).unwrap();
    assert!(!out.success);
    assert!(out.feedback.join(" ").contains("fuel"), "{:?}", out.feedback);
    assert_eq!(w.observe().count("raw_iron"), 4);
    assert_eq!(w.observe().count("cobblestone"), 5);

    let out = w.smelt_item("raw_iron", "coal", 3).unwrap();
    assert!(out.success, "{:?}", out.feedback);
    let s = w.observe();
    assert_eq!(s.count("iron_ingot"), 3);
    assert_eq!(s.count("raw_iron"), 1);
    assert_eq!(s.count("coal"), 0);
}

#[test]
fn smelting_without_input_burns_nothing() {
    let mut w = world(1);
    w.give("furnace", 1);
    w.give("coal", 2);
    let cell = free_cell(&w);
    w.place_item("furnace", cell).unwrap();
    let out = w.smelt_item("raw_iron", "coal", 1).unwrap();
    assert!(!out.success);
    assert_eq!(w.observe().count("coal"), 2);
}

#[test]
fn placement_rules() {
    let mut w = world(1);
    let cell = free_cell(&w);
    let out = w.place_item("crafting_table", cell).unwrap();
    assert!(!out.success);
    assert!(out.feedback[0].contains("no crafting table"), "{:?}", out.feedback);

    w.give("crafting_table", 2);
    w.place_item("crafting_table", cell).unwrap();
    let out = w.place_item("crafting_table", cell).unwrap();
    assert!(out.feedback[0].contains("position occupied"));
    assert_eq!(w.observe().count("crafting_table"), 1);

    w.give("stick", 1);
    assert_eq!(
        w.place_item("stick", cell),
        Err(PrimitiveError::NotPlaceable("stick".into()))
    );
}

#[test]
fn hunting_sheep() {
    // find a world with a sheep nearby
    let mut w = (1..200)
        .map(world)
        .find(|w| w.entity_nearby("sheep"))
        .expect("some seed spawns next to sheep");
    w.give("wooden_sword", 1);
    w.equip("wooden_sword", "hand").unwrap();
    let out = w.kill_mob("sheep", 300).unwrap();
    assert!(out.success, "{:?}", out.feedback);
    let s = w.observe();
    assert!(s.count("mutton") >= 1);
    assert!(s.count("white_wool") >= 1);
}

#[test]
fn absent_mob_changes_nothing() {
    let mut w = world(1);
    let before = w.observe();
    let out = w.kill_mob("ender_dragon", 300).unwrap();
    assert!(!out.success);
    assert!(out.feedback[0].contains("No ender dragon nearby"), "{:?}", out.feedback);
    let after = w.observe();
    assert_eq!(before.inventory, after.inventory);
    assert_eq!(before.health, after.health);
    assert_eq!(before.position, after.position);
}

#[test]
fn explore_stops_when_the_predicate_holds() {
    let target = "sand";
    for seed in 1..40 {
        let mut w = world(seed);
        if w.block_nearby(target) {
            continue;
        }
        let start = w.position();
        // oracle: first step whose position has the target within range
        let mut probe = w.clone();
        let mut expected = None;
        for k in 1..=40 {
            let x = start.x + k;
            let p = BlockPos::new(x, probe.surface_height(x, start.z) + 1, start.z);
            probe.teleport(p);
            if block_within(&probe, p, target) {
                expected = Some(k);
                break;
            }
        }
        let Some(k) = expected else { continue };
        let out = w.explore_until("+x", 100, |w| w.block_nearby(target)).unwrap();
        assert!(out.success);
        assert_eq!(w.position().x - start.x, k, "seed {seed}");
        assert_eq!(w.position().z, start.z);
        return;
    }
    panic!("no seed with sand within 40 blocks east");
}

#[test]
fn explore_times_out_and_respects_a_true_predicate() {
    let mut w = world(1);
    let start = w.position();
    let out = w.explore_until("-z", 12, |_| false).unwrap();
    assert!(!out.success);
    assert_eq!(start.z - w.position().z, 12);

    let mut w = world(1);
    let start = w.position();
    let out = w.explore_until("+x", 1, |_| true).unwrap();
    assert!(out.success);
    assert!((w.position().x - start.x).abs() <= 1);
}

#[test]
fn goto_cases() {
    let mut w = world(1);
    let spawn = w.spawn_position();
    let out = w.goto(spawn, 1).unwrap();
    assert!(out.success);
    assert_eq!(w.position(), spawn);

    let x = spawn.x + 100;
    let goal = BlockPos::new(x, w.surface_height(x, spawn.z) + 1, spawn.z);
    let out = w.goto(goal, 1).unwrap();
    assert!(out.success, "{:?}", out.feedback);
    assert!(w.position().within(&goal, 1));
    assert!(out.path.len() >= 99);

    let mut w = world(1);
    let out = w.goto(BlockPos::new(spawn.x, MIN_Y, spawn.z), 0).unwrap();
    assert!(!out.success);
    assert!(out.feedback[0].contains("Could not reach"), "{:?}", out.feedback);
}

#[test]
fn chest_transfers() {
    let mut w = world(1);
    w.give("chest", 1);
    w.give("dirt", 5);
    let cell = free_cell(&w);
    w.place_item("chest", cell).unwrap();
    let out = w.deposit_item_into_chest(cell, "dirt", 5).unwrap();
    assert!(out.success);
    assert_eq!(w.observe().count("dirt"), 0);
    let chest = w.observe().known_chests.into_iter().find(|c| c.position == cell).unwrap();
    assert_eq!(
        chest.contents,
        ChestContents::Known([("dirt".to_string(), 5)].into_iter().collect())
    );

    let out = w.get_item_from_chest(cell, "dirt", 10).unwrap();
    assert!(!out.success);
    assert_eq!(out.amount, 5);
    assert!(out.feedback[0].contains("only had 5"), "{:?}", out.feedback);
    assert_eq!(w.observe().count("dirt"), 5);

    let empty = BlockPos::new(cell.x, cell.y + 3, cell.z);
    assert!(matches!(
        w.get_item_from_chest(empty, "dirt", 1),
        Err(PrimitiveError::NoChest(_))
    ));
}

#[test]
fn generated_chests_start_unknown() {
    for seed in 1..400 {
        let mut w = world(seed);
        let unknown = w
            .observe()
            .known_chests
            .into_iter()
            .find(|c| c.contents == ChestContents::Unknown);
        let Some(chest) = unknown else { continue };
        w.goto(chest.position, 2).unwrap();
        w.get_item_from_chest(chest.position, "stick", 1).unwrap();
        let after = w
            .observe()
            .known_chests
            .into_iter()
            .find(|c| c.position == chest.position)
            .unwrap();
        assert!(matches!(after.contents, ChestContents::Known(_)));
        return;
    }
    panic!("no seed spawns near a generated chest");
}

#[test]
fn death_keeps_everything() {
    let mut w = world(1);
    let spawn = w.spawn_position();
    for (i, item) in [
        "oak_log", "oak_planks", "stick", "dirt", "cobblestone", "coal", "raw_iron",
        "iron_ingot", "diamond", "torch", "wheat_seeds", "white_wool", "mutton", "sand",
        "gravel", "flint", "bone",
    ]
    .iter()
    .enumerate()
    {
        w.give(item, i as u32 + 1);
    }
    w.teleport(BlockPos::new(spawn.x + 10, -40, spawn.z + 10));
    let before = w.observe();
    assert_eq!(before.inventory.len(), 17);
    w.force_death().unwrap();
    let after = w.observe();
    assert_eq!(after.inventory, before.inventory);
    let (x, z) = (spawn.x + 10, spawn.z + 10);
    assert_eq!(after.position, BlockPos::new(x, w.surface_height(x, z) + 1, z));
    assert_eq!((after.health, after.hunger), (20, 20));

    // determinism: dying again at the same point lands in the same place
    let mut v = world(1);
    v.teleport(BlockPos::new(x, -40, z));
    v.force_death().unwrap();
    assert_eq!(v.position(), after.position);

    assert!(matches!(w.apply_death(), Err(PrimitiveError::Precondition(_))));
}

#[test]
fn stations_are_recycled() {
    let mut w = world(1);
    assert!(w.recycle_stations().is_empty());
    w.give("crafting_table", 1);
    w.give("furnace", 1);
    let a = free_cell(&w);
    w.place_item("crafting_table", a).unwrap();
    let b = free_cell(&w);
    w.place_item("furnace", b).unwrap();
    assert_eq!(w.observe().count("crafting_table"), 0);
    let msgs = w.recycle_stations();
    assert_eq!(msgs.len(), 2);
    let s = w.observe();
    assert_eq!(s.count("crafting_table"), 1);
    assert_eq!(s.count("furnace"), 1);
    assert_eq!(w.block_at(a), "air");
    assert_eq!(w.block_at(b), "air");
}

#[test]
fn far_blocks_move_to_recently_seen() {
    let mut w = world(1);
    let first = w.observe().nearby_blocks;
    let start = w.position();
    let mut moved = None;
    for k in (100..2000).step_by(100) {
        let x = start.x + k;
        w.teleport(BlockPos::new(x, w.surface_height(x, start.z) + 1, start.z));
        let s = w.observe();
        if let Some(gone) = first.iter().find(|b| !s.nearby_blocks.contains(*b)) {
            moved = Some((gone.clone(), s));
            break;
        }
    }
    let (gone, s) = moved.expect("some block left view");
    assert!(s.recently_seen_blocks.contains(&gone));
    assert!(s.nearby_blocks.is_disjoint(&s.recently_seen_blocks));
}
