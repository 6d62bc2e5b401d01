//! Spatial and charge graphs.
//!
//! [`SampledGraph`] is the spatial graph over zone-boundary samples. It is built
//! once per map and later extended with a start and goal. [`ChargeLayer`] is
//! the precomputed product of the base vertices with a set of charge labels,
//! and [`ChargeGraph`] overlays one query's start, goal candidates and super
//! sink on top of a layer.

mod cache;
mod charge;
mod sampled;

pub use cache::{load_graph, read_graph, save_graph, write_graph, CACHE_MAGIC, CACHE_VERSION};
pub use charge::{
    build_charge_graph_exact, build_charge_graph_interval, charge_intervals, charge_levels, default_goal_intervals,
    ChargeEdgeRef, ChargeGraph, ChargeLabel, ChargeLayer, ChargeNode, EdgeFilter, LabelScheme, NodeRole,
};
pub use sampled::{build_base_graph, SampledGraph, SpatialEdge, SpatialVertex, VertexKind};

use thiserror::Error;

use crate::energy::EnergyError;
use crate::geometry::GeometryError;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("cannot load graph: {0}")]
    Load(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
