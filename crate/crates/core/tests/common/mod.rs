#![allow(dead_code)]

use quietpath::graph::{SampledGraph, VertexKind};
use quietpath::harness::{generate_random_map, generate_scenarios, MapFile, MapGenConfig, ScenarioSpec};
use quietpath::{BatteryParams, ModeConstraint, Point2};
use rand::Rng;

/// Small synthetic instance: attached spatial graph without zones.
pub struct GuardedInstance {
    pub graph: SampledGraph,
    pub delta_q: f64,
    pub q_init: f64,
    pub q_goal: f64,
}

/// Random graph with at most 8 vertices, random edges (some electric-only)
/// and a charge step giving at most 5 levels.
pub fn guarded_instance(rng: &mut impl Rng) -> GuardedInstance {
    let params = BatteryParams::default();
    let interior = rng.gen_range(1..=6);
    let mut point = || Point2::new(rng.gen_range(0.0..700.0), rng.gen_range(0.0..700.0));
    let verts: Vec<(Point2, VertexKind, Option<u32>)> = (0..interior)
        .map(|_| (point(), VertexKind::QuietSample, None))
        .collect();
    let (start, goal) = (point(), point());
    let mut edges = Vec::new();
    for a in 0..interior {
        for b in (a + 1)..interior {
            if rng.gen_bool(0.5) {
                let c = if rng.gen_bool(0.3) {
                    ModeConstraint::ElectricOnly
                } else {
                    ModeConstraint::AnyMode
                };
                edges.push((a, b, c));
            }
        }
    }
    let base = SampledGraph::from_parts(Vec::new(), params, 1.0, &verts, &edges).unwrap();
    let (s, t) = (interior, interior + 1);
    let mut attach = Vec::new();
    for v in 0..interior {
        if rng.gen_bool(0.6) {
            attach.push((s, v, ModeConstraint::AnyMode));
        }
        if rng.gen_bool(0.6) {
            attach.push((v, t, ModeConstraint::AnyMode));
        }
    }
    if rng.gen_bool(0.2) {
        attach.push((s, t, ModeConstraint::AnyMode));
    }
    let graph = base.attach_with_edges(start, goal, &attach).unwrap();
    let delta_q = [25.0, 100.0 / 3.0, 50.0, 100.0][rng.gen_range(0..4)];
    let q_init = rng.gen_range(0.0..=100.0);
    let q_goal = if rng.gen_bool(0.5) {
        rng.gen_range(0.0..=q_init)
    } else {
        rng.gen_range(0.0..=100.0)
    };
    GuardedInstance {
        graph,
        delta_q,
        q_init,
        q_goal,
    }
}

/// Random map of `zones` zones with `count` scenarios.
pub fn map_with_scenarios(zones: usize, seed: u64, count: usize, min_dist: f64) -> (MapFile, Vec<ScenarioSpec>) {
    let map = generate_random_map(zones, seed, &MapGenConfig::default()).unwrap();
    let specs = generate_scenarios(&map, count, seed ^ 0x5eed, min_dist, 80.0, 50.0).unwrap();
    (map, specs)
}
