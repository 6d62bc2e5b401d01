//! Minimum-fuel path planning for a series-hybrid aerial vehicle that must fly
//! electric-only over polygonal quiet zones.
//!
//! The pipeline is:
//!
//! 1. [`graph::build_base_graph`] samples zone boundaries into a spatial
//!    visibility graph (offline), and [`graph::SampledGraph::attach_endpoints`]
//!    adds a start and goal (online).
//! 2. [`graph::ChargeLayer`] crosses the spatial vertices with charge labels:
//!    exact charge levels give a graph whose shortest path is a flyable plan
//!    (an upper bound); charge intervals give a relaxation whose shortest path
//!    is a certified lower bound.
//! 3. [`planner`] runs the searches, extracts and audits trajectories, and
//!    computes the bound gap and the avoid-the-zones baseline.
//! 4. [`harness`] generates random maps and scenarios, runs benchmark sweeps
//!    and writes CSV/SVG output.

pub mod energy;
pub mod geometry;
pub mod graph;
pub mod harness;
pub mod planner;

pub use energy::{evaluate_edge, BatteryParams, EdgeTraversal, Mode, ModeConstraint, EPS_Q};
pub use geometry::{ConvexPolygon, Point2, Zone, ZoneKind};
