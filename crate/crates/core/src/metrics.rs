//! Metrics computed from a run's event stream alone.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::events::RunEvent;

pub const TIERS: [&str; 4] = ["wooden", "stone", "iron", "diamond"];
const TOOL_KINDS: [&str; 5] = ["pickaxe", "axe", "sword", "shovel", "hoe"];

/// The material tier of a tier tool, e.g. `stone_axe` -> `stone`.
pub fn tool_tier(item: &str) -> Option<&'static str> {
    let (tier, kind) = item.split_once('_')?;
    if !TOOL_KINDS.contains(&kind) {
        return None;
    }
    TIERS.iter().copied().find(|t| *t == tier)
}

/// Distinct items held so far after each iteration, as (iteration, count).
/// Iterations without a round repeat the previous count.
pub fn unique_items_curve(events: &[RunEvent]) -> Vec<(u64, usize)> {
    let mut seen = BTreeSet::new();
    let mut by_iter: BTreeMap<u64, usize> = BTreeMap::new();
    for e in events {
        if let RunEvent::Round {
            iteration, new_items, ..
        } = e
        {
            seen.extend(new_items.iter().cloned());
            by_iter.insert(*iteration, seen.len());
        }
    }
    let last = by_iter.keys().next_back().copied().unwrap_or(0);
    let mut out = Vec::new();
    let mut current = 0;
    for i in 1..=last {
        if let Some(n) = by_iter.get(&i) {
            current = *n;
        }
        out.push((i, current));
    }
    out
}

/// First iteration at which any tool of each tier was held.
pub fn tech_tree(events: &[RunEvent]) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for e in events {
        if let RunEvent::Round {
            iteration, new_items, ..
        } = e
        {
            for item in new_items {
                if let Some(t) = tool_tier(item) {
                    out.entry(t.to_string()).or_insert(*iteration);
                }
            }
        }
    }
    out
}

/// Whether tiers were unlocked in order: each unlocked tier's predecessors
/// were unlocked no later.
pub fn tiers_in_order(tree: &BTreeMap<String, u64>) -> bool {
    let mut prev: Option<u64> = None;
    for t in TIERS {
        match (tree.get(t), prev) {
            (Some(&i), Some(p)) if i < p => return false,
            (Some(&i), _) => prev = Some(i),
            (None, _) => {
                // a later tier without this one is out of order
                return TIERS
                    .iter()
                    .skip_while(|x| **x != t)
                    .skip(1)
                    .all(|x| !tree.contains_key(*x));
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub x: f64,
    pub z: f64,
    pub r: f64,
}

const EPS: f64 = 1e-7;

impl Circle {
    pub fn contains(&self, p: (f64, f64)) -> bool {
        dist(p, (self.x, self.z)) <= self.r + EPS * (1.0 + self.r)
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    libm::hypot(a.0 - b.0, a.1 - b.1)
}

fn circle2(a: (f64, f64), b: (f64, f64)) -> Circle {
    Circle {
        x: (a.0 + b.0) / 2.0,
        z: (a.1 + b.1) / 2.0,
        r: dist(a, b) / 2.0,
    }
}

fn circle3(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Circle {
    let d = 2.0 * (a.0 * (b.1 - c.1) + b.0 * (c.1 - a.1) + c.0 * (a.1 - b.1));
    if d.abs() < 1e-12 {
        // collinear: the widest pair spans the rest
        let candidates = [circle2(a, b), circle2(a, c), circle2(b, c)];
        return candidates
            .into_iter()
            .max_by(|p, q| p.r.total_cmp(&q.r))
            .expect("three candidates");
    }
    let sq = |p: (f64, f64)| p.0 * p.0 + p.1 * p.1;
    let x = (sq(a) * (b.1 - c.1) + sq(b) * (c.1 - a.1) + sq(c) * (a.1 - b.1)) / d;
    let z = (sq(a) * (c.0 - b.0) + sq(b) * (a.0 - c.0) + sq(c) * (b.0 - a.0)) / d;
    Circle {
        x,
        z,
        r: dist(a, (x, z)),
    }
}

/// Smallest circle enclosing every point (incremental Welzl, deterministic
/// order). `None` for no points.
pub fn enclosing_circle(points: &[(f64, f64)]) -> Option<Circle> {
    let first = *points.first()?;
    let mut c = Circle {
        x: first.0,
        z: first.1,
        r: 0.0,
    };
    for i in 1..points.len() {
        if c.contains(points[i]) {
            continue;
        }
        c = Circle {
            x: points[i].0,
            z: points[i].1,
            r: 0.0,
        };
        for j in 0..i {
            if c.contains(points[j]) {
                continue;
            }
            c = circle2(points[i], points[j]);
            for k in 0..j {
                if !c.contains(points[k]) {
                    c = circle3(points[i], points[j], points[k]);
                }
            }
        }
    }
    Some(c)
}

/// Horizontal positions sampled at each round, in order.
pub fn round_positions(events: &[RunEvent]) -> Vec<(u64, (f64, f64))> {
    events
        .iter()
        .filter_map(|e| match e {
            RunEvent::Round {
                iteration, position, ..
            } => Some((*iteration, (position.x as f64, position.z as f64))),
            _ => None,
        })
        .collect()
}

/// Distinct biomes the agent stood in when asked for code.
pub fn terrains(events: &[RunEvent]) -> BTreeSet<String> {
    events
        .iter()
        .filter_map(|e| match e {
            RunEvent::Round { biome, .. } => Some(biome.clone()),
            _ => None,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub iteration: u64,
    pub unique_items: usize,
    /// Whether each tier had been reached by this iteration.
    pub tiers: [bool; 4],
    /// Radius of the smallest circle around positions so far.
    pub radius: f64,
}

pub fn metrics_rows(events: &[RunEvent]) -> Vec<MetricsRow> {
    let curve = unique_items_curve(events);
    let tree = tech_tree(events);
    let positions = round_positions(events);
    let mut rows = Vec::with_capacity(curve.len());
    let mut pts = Vec::new();
    let mut next = 0;
    let mut circle: Option<Circle> = None;
    for (iteration, unique_items) in curve {
        let before = pts.len();
        while next < positions.len() && positions[next].0 <= iteration {
            pts.push(positions[next].1);
            next += 1;
        }
        if pts.len() != before {
            // only recompute when something fell outside
            if circle.is_none_or(|c| pts[before..].iter().any(|p| !c.contains(*p))) {
                circle = enclosing_circle(&pts);
            }
        }
        let mut tiers = [false; 4];
        for (i, t) in TIERS.iter().enumerate() {
            tiers[i] = tree.get(*t).is_some_and(|first| *first <= iteration);
        }
        rows.push(MetricsRow {
            iteration,
            unique_items,
            tiers,
            radius: circle.map_or(0.0, |c| c.r),
        });
    }
    rows
}

pub const METRICS_CSV_HEADER: &str = "iteration,unique_items,wooden,stone,iron,diamond,radius";

pub fn metrics_csv(events: &[RunEvent]) -> String {
    let mut out = String::from(METRICS_CSV_HEADER);
    out.push('\n');
    for r in metrics_rows(events) {
        let t = |b: bool| if b { 1 } else { 0 };
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.3}\n",
            r.iteration,
            r.unique_items,
            t(r.tiers[0]),
            t(r.tiers[1]),
            t(r.tiers[2]),
            t(r.tiers[3]),
            r.radius
        ));
    }
    out
}

/// Headline numbers for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub iterations: u64,
    pub unique_items: usize,
    pub tech_tree: BTreeMap<String, u64>,
    pub radius: f64,
    pub terrains: BTreeSet<String>,
    pub skills_committed: usize,
    pub tasks_completed: usize,
}

pub fn summarize(events: &[RunEvent]) -> RunSummary {
    let curve = unique_items_curve(events);
    let pts: Vec<(f64, f64)> = round_positions(events).into_iter().map(|(_, p)| p).collect();
    RunSummary {
        iterations: curve.last().map_or(0, |c| c.0),
        unique_items: curve.last().map_or(0, |c| c.1),
        tech_tree: tech_tree(events),
        radius: enclosing_circle(&pts).map_or(0.0, |c| c.r),
        terrains: terrains(events),
        skills_committed: events
            .iter()
            .filter(|e| matches!(e, RunEvent::SkillCommitted { .. }))
            .count(),
        tasks_completed: events
            .iter()
            .filter(|e| matches!(e, RunEvent::EpisodeEnded { success: true, .. }))
            .count(),
    }
}
