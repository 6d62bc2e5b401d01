//! Maps, scenarios, benchmarks, reports and plots.

mod bench;
mod map;
mod plot;
mod scenario;

pub use bench::{
    run_benchmark, run_benchmark_with, savings_percent, BenchConfig, BenchReport, BenchRow, MapRef, Stats, SummaryRow,
};
pub use map::{generate_random_map, MapFile, MapGenConfig, MAX_PLACEMENT_ATTEMPTS};
pub use plot::{
    box_plot_svg, emit_plot, plan_svg, trajectory_csv, PlotFormat, PlotSource, ELECTRIC_STROKE, GAS_STROKE,
    NO_FLY_FILL, QUIET_FILL,
};
pub use scenario::{generate_scenarios, ScenarioSpec, MAX_ENDPOINT_ATTEMPTS};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::graph::GraphError;
use crate::planner::PlanError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("placement failed: {0}")]
    Placement(String),
    #[error("report invariant violated: {0}")]
    InvariantViolation(String),
}

/// Deterministic seed derived from a list of integers (SplitMix64 steps).
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x243f_6a88_85a3_08d3;
    for &p in parts {
        h = h.wrapping_add(p).wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    h
}
