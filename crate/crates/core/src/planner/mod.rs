//! Planning on charge graphs.
//!
//! The feasible plan (an upper bound on the optimal fuel cost) is a shortest
//! path through the exact-charge graph; the certified lower bound is a
//! shortest path through the interval-charge graph; the baseline is the
//! feasible plan with quiet zones turned into obstacles. Search is Dijkstra
//! with a binary heap, `O((V + E) log V)` instead of the `O(V²)` array scan.

mod oracle;
mod search;
mod trajectory;

pub use oracle::{brute_force_optimum, ORACLE_MAX_LEVELS, ORACLE_MAX_VERTICES};
pub use search::{shortest_path, Digraph, ShortestPath, WeightedDigraph};
pub use trajectory::{
    extract_trajectory, validate_trajectory, Trajectory, TrajectoryAudit, TrajectorySegment, Violation,
};

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{BatteryParams, EnergyError, EPS_Q};
use crate::geometry::{Point2, Zone};
use crate::graph::{
    build_base_graph, ChargeGraph, ChargeLabel, ChargeLayer, EdgeFilter, GraphError, LabelScheme, SampledGraph,
};

#[derive(Debug, Error)]
pub enum PlanError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error("no feasible {0} plan")]
    NoFeasiblePlan(PlanKind),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("upper bound {ub} is below lower bound {lb}")]
    BoundViolation { ub: f64, lb: f64 },
    #[error("internal error: {0}")]
    Internal(String),
}

impl PlanError {
    /// True for errors caused by bad input rather than by the search.
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            PlanError::InvalidArgument(_)
                | PlanError::Energy(_)
                | PlanError::Graph(
                    GraphError::Geometry(_)
                        | GraphError::Energy(_)
                        | GraphError::InvalidScenario(_)
                        | GraphError::InvalidArgument(_)
                )
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    UpperBound,
    LowerBound,
    Baseline,
}

impl PlanKind {
    /// Labels and edge filter of the charge layer this kind searches.
    pub fn layer_spec(self, delta_q: f64, n_l: usize) -> (LabelScheme, EdgeFilter) {
        match self {
            PlanKind::UpperBound => (LabelScheme::Exact { delta_q }, EdgeFilter::All),
            PlanKind::LowerBound => (LabelScheme::Interval { n_l, n_g: None }, EdgeFilter::All),
            PlanKind::Baseline => (LabelScheme::Exact { delta_q }, EdgeFilter::AnyModeOnly),
        }
    }

    fn of_layer(layer: &ChargeLayer) -> Result<Self, PlanError> {
        match (layer.scheme(), layer.filter()) {
            (LabelScheme::Exact { .. }, EdgeFilter::All) => Ok(PlanKind::UpperBound),
            (LabelScheme::Interval { .. }, EdgeFilter::All) => Ok(PlanKind::LowerBound),
            (LabelScheme::Exact { .. }, EdgeFilter::AnyModeOnly) => Ok(PlanKind::Baseline),
            (LabelScheme::Interval { .. }, EdgeFilter::AnyModeOnly) => Err(PlanError::InvalidArgument(
                "interval layers without electric-only edges are not a supported plan".into(),
            )),
        }
    }
}

impl fmt::Display for PlanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanKind::UpperBound => "upper-bound",
            PlanKind::LowerBound => "lower-bound",
            PlanKind::Baseline => "baseline",
        })
    }
}

/// One planning problem on one map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub zones: Vec<Zone>,
    pub start: Point2,
    pub goal: Point2,
    pub q_init: f64,
    pub q_goal: f64,
    pub delta_l: f64,
    pub delta_q: f64,
    pub n_l: usize,
    pub params: BatteryParams,
}

impl Scenario {
    /// Scenario with the default battery, `q_init = 80`, `q_goal = 50` and
    /// 40 charge samples.
    pub fn new(zones: Vec<Zone>, start: Point2, goal: Point2, delta_l: f64) -> Self {
        let params = BatteryParams::default();
        Self {
            zones,
            start,
            goal,
            q_init: 80.0,
            q_goal: 50.0,
            delta_l,
            delta_q: params.capacity() / 40.0,
            n_l: 40,
            params,
        }
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        self.params.validate()?;
        let p = &self.params;
        for (name, q) in [("initial", self.q_init), ("goal", self.q_goal)] {
            if !(q >= p.q_min - EPS_Q && q <= p.q_max + EPS_Q) {
                return Err(PlanError::InvalidArgument(format!(
                    "{name} charge {q} outside [{}, {}]",
                    p.q_min, p.q_max
                )));
            }
        }
        if !(self.delta_q > 0.0 && self.delta_q.is_finite()) {
            return Err(PlanError::InvalidArgument(format!(
                "charge step must be positive, got {}",
                self.delta_q
            )));
        }
        if self.n_l == 0 {
            return Err(PlanError::InvalidArgument("interval count must be at least 1".into()));
        }
        Ok(())
    }

    /// Map graph of this scenario, without endpoints.
    pub fn base_graph(&self) -> Result<SampledGraph, PlanError> {
        self.validate()?;
        Ok(build_base_graph(&self.zones, self.delta_l, &self.params)?)
    }
}

/// A node on a plan's path with its place and charge label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanStop {
    pub node: usize,
    pub vertex: usize,
    pub position: Point2,
    pub label: ChargeLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub kind: PlanKind,
    /// Shortest-path cost in the charge graph.
    pub cost: f64,
    pub node_sequence: Vec<usize>,
    /// Path nodes without the super sink.
    pub stops: Vec<PlanStop>,
    /// Flown schedule; absent for lower bounds.
    pub trajectory: Option<Trajectory>,
    pub audit: Option<TrajectoryAudit>,
}

impl PlanResult {
    /// Fuel cost of the flown trajectory, which can undercut `cost` when a
    /// vertex is reached with more charge than its label.
    pub fn trajectory_cost(&self, params: &BatteryParams) -> Option<f64> {
        self.trajectory.as_ref().map(|t| t.cost(params))
    }

    pub fn is_valid(&self) -> bool {
        self.audit.as_ref().is_none_or(|a| a.valid)
    }
}

/// Builds the charge layer a plan kind searches, for reuse across queries.
pub fn build_layer(base: &SampledGraph, kind: PlanKind, delta_q: f64, n_l: usize) -> Result<ChargeLayer, PlanError> {
    let (scheme, filter) = kind.layer_spec(delta_q, n_l);
    Ok(ChargeLayer::build(base, scheme, filter)?)
}

/// Solves one query on a prebuilt layer. `attached` must be the layer's base
/// graph with the query's endpoints attached. The plan kind follows from
/// the layer.
pub fn solve_on_layer(
    layer: &Arc<ChargeLayer>,
    attached: &Arc<SampledGraph>,
    q_init: f64,
    q_goal: f64,
) -> Result<PlanResult, PlanError> {
    let kind = PlanKind::of_layer(layer)?;
    let graph = ChargeGraph::new(Arc::clone(layer), Arc::clone(attached), q_init, q_goal)?;
    solve_graph(&graph, kind)
}

/// Shortest start-to-sink path of `graph`, with a trajectory and audit
/// unless `kind` is a lower bound.
pub fn solve_graph(graph: &ChargeGraph, kind: PlanKind) -> Result<PlanResult, PlanError> {
    let path = shortest_path(graph, graph.start_node(), graph.sink_node())?.ok_or(PlanError::NoFeasiblePlan(kind))?;
    let stops = path
        .nodes
        .iter()
        .filter(|&&n| n != graph.sink_node())
        .map(|&n| {
            let node = graph.node(n).expect("node on path");
            PlanStop {
                node: n,
                vertex: node.spatial_id,
                position: graph.spatial().vertex(node.spatial_id).position,
                label: node.label,
            }
        })
        .collect();
    let (trajectory, audit) = if kind == PlanKind::LowerBound {
        (None, None)
    } else {
        let traj = extract_trajectory(graph, &path.nodes)?;
        let audit = validate_trajectory(
            &traj,
            graph.spatial().zones(),
            graph.spatial().params(),
            graph.q_init(),
            graph.q_goal(),
        );
        (Some(traj), Some(audit))
    };
    Ok(PlanResult {
        kind,
        cost: path.cost,
        node_sequence: path.nodes,
        stops,
        trajectory,
        audit,
    })
}

fn plan(scenario: &Scenario, kind: PlanKind) -> Result<PlanResult, PlanError> {
    let base = scenario.base_graph()?;
    let attached = Arc::new(base.attach_endpoints(scenario.start, scenario.goal)?);
    let layer = Arc::new(build_layer(&base, kind, scenario.delta_q, scenario.n_l)?);
    solve_on_layer(&layer, &attached, scenario.q_init, scenario.q_goal)
}

/// Feasible plan through the exact-charge graph; its cost is an upper bound
/// on the optimum over the sampled graph.
pub fn plan_feasible(scenario: &Scenario) -> Result<PlanResult, PlanError> {
    plan(scenario, PlanKind::UpperBound)
}

/// Certified lower bound from the interval-charge graph. The stops carry
/// interval labels and no trajectory is produced.
pub fn compute_lower_bound(scenario: &Scenario) -> Result<PlanResult, PlanError> {
    plan(scenario, PlanKind::LowerBound)
}

/// Feasible plan that treats quiet zones as obstacles.
pub fn plan_no_fly_baseline(scenario: &Scenario) -> Result<PlanResult, PlanError> {
    plan(scenario, PlanKind::Baseline)
}

/// Gap between an upper and a lower bound, relative to the lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gap {
    Percent(f64),
    /// Zero lower bound with a positive upper bound.
    Undefined,
}

impl Gap {
    pub fn percent(self) -> Option<f64> {
        match self {
            Gap::Percent(p) => Some(p),
            Gap::Undefined => None,
        }
    }
}

/// `100 · (ub − lb) / lb`. An upper bound below the lower bound is an error.
pub fn gap_percent(ub: f64, lb: f64) -> Result<Gap, PlanError> {
    if !(ub.is_finite() && lb.is_finite()) || lb < -EPS_Q || ub < lb - EPS_Q {
        return Err(PlanError::BoundViolation { ub, lb });
    }
    if lb <= EPS_Q {
        return Ok(if ub <= EPS_Q { Gap::Percent(0.0) } else { Gap::Undefined });
    }
    Ok(Gap::Percent((100.0 * (ub - lb) / lb).max(0.0)))
}
