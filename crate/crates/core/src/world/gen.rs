//! Procedural terrain: biomes, surface heights, base layers and per-chunk
//! features. Everything is a pure function of the seed and the config.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BlockPos, WorldConfig, MIN_Y};

pub const CHUNK: i32 = 16;
const HEIGHT_GRID: i32 = 16;
const BASE_HEIGHT: i32 = 62;
const HEIGHT_SPAN: u64 = 9;

const SALT_HEIGHT: u64 = 0x68_65_69_67;
const SALT_BIOME: u64 = 0x62_69_6f_6d;
const SALT_CHUNK: u64 = 0x63_68_6e_6b;

pub struct BiomeDef {
    pub name: &'static str,
    pub surface: &'static str,
    pub subsurface: &'static str,
    pub tree: Option<(&'static str, &'static str)>,
    pub trees_per_chunk: u32,
    pub flora: &'static [&'static str],
    pub flora_per_chunk: u32,
}

pub const BIOMES: &[BiomeDef] = &[
    BiomeDef {
        name: "plains",
        surface: "grass_block",
        subsurface: "dirt",
        tree: Some(("oak_log", "oak_leaves")),
        trees_per_chunk: 1,
        flora: &["short_grass", "dandelion", "poppy", "azure_bluet", "orange_tulip"],
        flora_per_chunk: 6,
    },
    BiomeDef {
        name: "forest",
        surface: "grass_block",
        subsurface: "dirt",
        tree: Some(("oak_log", "oak_leaves")),
        trees_per_chunk: 5,
        flora: &["short_grass", "poppy", "dandelion"],
        flora_per_chunk: 3,
    },
    BiomeDef {
        name: "birch_forest",
        surface: "grass_block",
        subsurface: "dirt",
        tree: Some(("birch_log", "birch_leaves")),
        trees_per_chunk: 5,
        flora: &["short_grass", "orange_tulip"],
        flora_per_chunk: 3,
    },
    BiomeDef {
        name: "taiga",
        surface: "grass_block",
        subsurface: "dirt",
        tree: Some(("spruce_log", "spruce_leaves")),
        trees_per_chunk: 4,
        flora: &["short_grass"],
        flora_per_chunk: 2,
    },
    BiomeDef {
        name: "snowy_plains",
        surface: "snow_block",
        subsurface: "dirt",
        tree: Some(("spruce_log", "spruce_leaves")),
        trees_per_chunk: 1,
        flora: &[],
        flora_per_chunk: 0,
    },
    BiomeDef {
        name: "desert",
        surface: "sand",
        subsurface: "sandstone",
        tree: None,
        trees_per_chunk: 0,
        flora: &["cactus", "sugar_cane"],
        flora_per_chunk: 2,
    },
    BiomeDef {
        name: "savanna",
        surface: "grass_block",
        subsurface: "dirt",
        tree: Some(("acacia_log", "acacia_leaves")),
        trees_per_chunk: 1,
        flora: &["short_grass"],
        flora_per_chunk: 4,
    },
    BiomeDef {
        name: "meadow",
        surface: "grass_block",
        subsurface: "dirt",
        tree: Some(("oak_log", "oak_leaves")),
        trees_per_chunk: 1,
        flora: &["azure_bluet", "dandelion", "poppy", "short_grass"],
        flora_per_chunk: 6,
    },
];

pub fn biome_def(name: &str) -> Option<&'static BiomeDef> {
    BIOMES.iter().find(|b| b.name == name)
}

/// Stateless 64-bit hash of a lattice coordinate (splitmix64 finalizer).
pub fn mix(seed: u64, a: i64, b: i64, salt: u64) -> u64 {
    let mut z = seed
        ^ (a as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (b as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ salt.wrapping_mul(0x1656_67B1_9E37_79F9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Top solid block of a column. Neighbouring columns differ by at most one.
pub fn surface_height(seed: u64, x: i32, z: i32) -> i32 {
    let gx = x.div_euclid(HEIGHT_GRID);
    let gz = z.div_euclid(HEIGHT_GRID);
    let fx = x.rem_euclid(HEIGHT_GRID) as i64;
    let fz = z.rem_euclid(HEIGHT_GRID) as i64;
    let corner = |dx: i32, dz: i32| -> i64 {
        (mix(seed, (gx + dx) as i64, (gz + dz) as i64, SALT_HEIGHT) % HEIGHT_SPAN) as i64
    };
    let g = HEIGHT_GRID as i64;
    let sum = corner(0, 0) * (g - fx) * (g - fz)
        + corner(1, 0) * fx * (g - fz)
        + corner(0, 1) * (g - fx) * fz
        + corner(1, 1) * fx * fz;
    BASE_HEIGHT + (sum / (g * g)) as i32
}

pub fn biome_at(config: &WorldConfig, x: i32, z: i32) -> &str {
    let layout = &config.biome_layout;
    let size = layout.region_size.max(1);
    let rx = x.div_euclid(size);
    let rz = z.div_euclid(size);
    if let Some(o) = layout.overrides.iter().find(|o| o.rx == rx && o.rz == rz) {
        return &o.biome;
    }
    let idx = mix(config.seed, rx as i64, rz as i64, SALT_BIOME) % layout.palette.len() as u64;
    &layout.palette[idx as usize]
}

/// Name of the unmodified terrain block at `y` in a column, or `None` for air.
pub fn base_block(biome: &BiomeDef, h: i32, y: i32) -> Option<&'static str> {
    if y > h {
        None
    } else if y == h {
        Some(biome.surface)
    } else if y >= h - 3 {
        Some(biome.subsurface)
    } else if y >= 0 {
        Some("stone")
    } else if y > MIN_Y {
        Some("deepslate")
    } else {
        Some("bedrock")
    }
}

/// Base layers of a column as inclusive y-intervals.
pub fn base_layers(biome: &BiomeDef, h: i32) -> [(&'static str, i32, i32); 5] {
    [
        (biome.surface, h, h),
        (biome.subsurface, h - 3, h - 1),
        ("stone", 0, h - 4),
        ("deepslate", MIN_Y + 1, -1),
        ("bedrock", MIN_Y, MIN_Y),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MobInstance {
    pub id: u64,
    pub name: String,
    pub pos: BlockPos,
}

#[derive(Debug, Clone, Default)]
pub struct ChunkFeatures {
    pub blocks: BTreeMap<BlockPos, String>,
    pub mobs: Vec<MobInstance>,
    pub chest: Option<(BlockPos, BTreeMap<String, u32>)>,
}

const CHEST_LOOT: &[(&str, u32)] = &[
    ("iron_ingot", 3),
    ("coal", 5),
    ("oak_planks", 8),
    ("string", 2),
    ("bone", 3),
];

pub fn chunk_coords(x: i32, z: i32) -> (i32, i32) {
    (x.div_euclid(CHUNK), z.div_euclid(CHUNK))
}

pub fn generate_chunk(config: &WorldConfig, cx: i32, cz: i32) -> ChunkFeatures {
    let seed = config.seed;
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, cx as i64, cz as i64, SALT_CHUNK));
    let x0 = cx * CHUNK;
    let z0 = cz * CHUNK;
    let mut out = ChunkFeatures::default();
    let centre_biome = biome_def(biome_at(config, x0 + CHUNK / 2, z0 + CHUNK / 2));

    if let Some(biome) = centre_biome {
        if let Some((log, leaves)) = biome.tree {
            for _ in 0..biome.trees_per_chunk {
                let x = x0 + rng.gen_range(2..CHUNK - 2);
                let z = z0 + rng.gen_range(2..CHUNK - 2);
                let h = surface_height(seed, x, z);
                let trunk = rng.gen_range(4..=5);
                for dy in 1..=trunk {
                    out.blocks.insert(BlockPos::new(x, h + dy, z), log.to_string());
                }
                let top = h + trunk;
                for (dx, dz) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    out.blocks
                        .entry(BlockPos::new(x + dx, top, z + dz))
                        .or_insert_with(|| leaves.to_string());
                }
                out.blocks.insert(BlockPos::new(x, top + 1, z), leaves.to_string());
            }
        }
        if !biome.flora.is_empty() {
            for _ in 0..biome.flora_per_chunk {
                let x = x0 + rng.gen_range(0..CHUNK);
                let z = z0 + rng.gen_range(0..CHUNK);
                let plant = biome.flora[rng.gen_range(0..biome.flora.len())];
                let h = surface_height(seed, x, z);
                out.blocks
                    .entry(BlockPos::new(x, h + 1, z))
                    .or_insert_with(|| plant.to_string());
            }
        }
    }

    for band in &config.ore_depth_table {
        // abundance is per 32x32 columns, a chunk covers a quarter of that
        let mut count = band.abundance / 4;
        if (rng.gen_range(0..4u32)) < band.abundance % 4 {
            count += 1;
        }
        for _ in 0..count {
            let x = x0 + rng.gen_range(0..CHUNK);
            let z = z0 + rng.gen_range(0..CHUNK);
            let h = surface_height(seed, x, z);
            let lo = band.min_y.max(MIN_Y + 1);
            let hi = band.max_y.min(h - 1);
            if lo > hi {
                continue;
            }
            let y = rng.gen_range(lo..=hi);
            out.blocks.insert(BlockPos::new(x, y, z), band.block.clone());
        }
    }

    let mob_count = rng.gen_range(0..=2u32);
    for i in 0..mob_count {
        let x = x0 + rng.gen_range(0..CHUNK);
        let z = z0 + rng.gen_range(0..CHUNK);
        let biome = biome_at(config, x, z);
        let Some(table) = config.mob_spawn_table.get(biome) else {
            continue;
        };
        let total: u32 = table.iter().map(|m| m.weight).sum();
        if total == 0 {
            continue;
        }
        let mut pick = rng.gen_range(0..total);
        let Some(spawn) = table.iter().find(|m| {
            if pick < m.weight {
                true
            } else {
                pick -= m.weight;
                false
            }
        }) else {
            continue;
        };
        let h = surface_height(seed, x, z);
        out.mobs.push(MobInstance {
            id: mix(seed, cx as i64, cz as i64, 0x6d6f62 + i as u64),
            name: spawn.mob.clone(),
            pos: BlockPos::new(x, h + 1, z),
        });
    }

    if mix(seed, cx as i64, cz as i64, 0x63686573).is_multiple_of(48) {
        let x = x0 + rng.gen_range(0..CHUNK);
        let z = z0 + rng.gen_range(0..CHUNK);
        let pos = BlockPos::new(x, surface_height(seed, x, z) + 1, z);
        let mut loot = BTreeMap::new();
        for (item, max) in CHEST_LOOT {
            let n = rng.gen_range(0..=*max);
            if n > 0 {
                loot.insert(item.to_string(), n);
            }
        }
        out.blocks.insert(pos, "chest".to_string());
        out.chest = Some((pos, loot));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbouring_heights_differ_by_at_most_one() {
        for x in -40..40 {
            for z in -40..40 {
                let h = surface_height(7, x, z);
                assert!((h - surface_height(7, x + 1, z)).abs() <= 1);
                assert!((h - surface_height(7, x, z + 1)).abs() <= 1);
            }
        }
    }

    #[test]
    fn chunks_are_deterministic() {
        let config = WorldConfig::with_seed(3);
        let a = generate_chunk(&config, 2, -1);
        let b = generate_chunk(&config, 2, -1);
        assert_eq!(a.blocks, b.blocks);
        assert_eq!(a.mobs, b.mobs);
    }
}
