use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{GraphError, SampledGraph, VertexKind};
use crate::energy::{classify, evaluate_edge, BatteryParams, EdgeTraversal, ModeConstraint, EPS_Q};

/// Charge attached to a product-graph node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ChargeLabel {
    Exact(f64),
    Interval { lo: f64, hi: f64 },
}

impl ChargeLabel {
    /// Charge used when an edge leaves a node with this label: the exact
    /// value, or the upper end of the interval.
    pub fn departure(&self) -> f64 {
        match *self {
            ChargeLabel::Exact(q) => q,
            ChargeLabel::Interval { hi, .. } => hi,
        }
    }

    /// Charge used when an edge enters a node with this label: the exact
    /// value, or the lower end of the interval.
    pub fn arrival(&self) -> f64 {
        match *self {
            ChargeLabel::Exact(q) => q,
            ChargeLabel::Interval { lo, .. } => lo,
        }
    }

    pub fn contains(&self, q: f64) -> bool {
        match *self {
            ChargeLabel::Exact(x) => (q - x).abs() <= EPS_Q,
            ChargeLabel::Interval { lo, hi } => q >= lo - EPS_Q && q <= hi + EPS_Q,
        }
    }
}

/// Grid `lo, lo + step, lo + 2·step, …` below `hi`, always ending with `hi`.
pub fn charge_levels(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, GraphError> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(GraphError::InvalidArgument(format!("bad charge range [{lo}, {hi}]")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(GraphError::InvalidArgument(format!(
            "charge step must be positive, got {step}"
        )));
    }
    let mut levels = Vec::new();
    let mut k = 0u64;
    loop {
        let q = lo + k as f64 * step;
        if q >= hi - EPS_Q {
            break;
        }
        levels.push(q);
        k += 1;
    }
    levels.push(hi);
    Ok(levels)
}

/// `count` equal sub-intervals of `[lo, hi]`.
pub fn charge_intervals(lo: f64, hi: f64, count: usize) -> Result<Vec<ChargeLabel>, GraphError> {
    if count == 0 {
        return Err(GraphError::InvalidArgument("interval count must be at least 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && hi - lo > EPS_Q) {
        return Err(GraphError::InvalidArgument(format!("bad charge range [{lo}, {hi}]")));
    }
    let width = hi - lo;
    let at = |k: usize| {
        if k == count {
            hi
        } else {
            lo + width * k as f64 / count as f64
        }
    };
    Ok((0..count)
        .map(|k| ChargeLabel::Interval {
            lo: at(k),
            hi: at(k + 1),
        })
        .collect())
}

/// Goal partition count giving sub-intervals as wide as the interior ones.
pub fn default_goal_intervals(n_l: usize, q_goal: f64, params: &BatteryParams) -> usize {
    let ratio = (params.q_max - q_goal) / params.capacity();
    ((n_l as f64 * ratio - 1e-9).ceil() as usize).max(1)
}

/// How charge labels are assigned to vertices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LabelScheme {
    /// Exact charge levels spaced `delta_q` apart (upper-bound graph).
    Exact { delta_q: f64 },
    /// `n_l` equal intervals at map vertices and `n_g` at the goal
    /// (lower-bound graph). `n_g` defaults to [`default_goal_intervals`].
    Interval { n_l: usize, n_g: Option<usize> },
}

impl LabelScheme {
    fn vertex_labels(&self, params: &BatteryParams) -> Result<Vec<ChargeLabel>, GraphError> {
        match *self {
            LabelScheme::Exact { delta_q } => Ok(charge_levels(params.q_min, params.q_max, delta_q)?
                .into_iter()
                .map(ChargeLabel::Exact)
                .collect()),
            LabelScheme::Interval { n_l, .. } => charge_intervals(params.q_min, params.q_max, n_l),
        }
    }

    fn goal_labels(&self, q_goal: f64, params: &BatteryParams) -> Result<Vec<ChargeLabel>, GraphError> {
        match *self {
            LabelScheme::Exact { delta_q } => Ok(charge_levels(q_goal, params.q_max, delta_q)?
                .into_iter()
                .map(ChargeLabel::Exact)
                .collect()),
            LabelScheme::Interval { n_l, n_g } => {
                if params.q_max - q_goal <= EPS_Q {
                    return Ok(vec![ChargeLabel::Exact(params.q_max)]);
                }
                let n_g = n_g.unwrap_or_else(|| default_goal_intervals(n_l, q_goal, params));
                charge_intervals(q_goal, params.q_max, n_g)
            }
        }
    }
}

/// Which spatial edges produce charge edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeFilter {
    All,
    /// Drop electric-only edges, turning quiet zones into obstacles.
    AnyModeOnly,
}

impl EdgeFilter {
    fn admits(self, constraint: ModeConstraint) -> bool {
        match self {
            EdgeFilter::All => true,
            EdgeFilter::AnyModeOnly => constraint == ModeConstraint::AnyMode,
        }
    }
}

/// Product of the base vertices with one label set, stored in compressed
/// sparse rows. Node `v · L + k` pairs base vertex `v` with label `k`.
#[derive(Debug, Clone)]
pub struct ChargeLayer {
    scheme: LabelScheme,
    filter: EdgeFilter,
    params: BatteryParams,
    vertex_count: usize,
    base_edge_count: usize,
    labels: Vec<ChargeLabel>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    costs: Vec<f64>,
    spatial_edges: Vec<u32>,
}

impl ChargeLayer {
    /// Builds the layer over the map vertices of `graph`.
    pub fn build(graph: &SampledGraph, scheme: LabelScheme, filter: EdgeFilter) -> Result<Self, GraphError> {
        let params = *graph.params();
        let labels = scheme.vertex_labels(&params)?;
        let n = graph.base_len();
        let l = labels.len();
        if (n * l) as u64 >= u32::MAX as u64 {
            return Err(GraphError::InvalidArgument("charge layer too large".into()));
        }
        let base_edge_count = graph
            .edges()
            .iter()
            .take_while(|e| e.endpoints.0 < n && e.endpoints.1 < n)
            .count();
        let mut offsets = Vec::with_capacity(n * l + 1);
        let mut targets = Vec::new();
        let mut costs = Vec::new();
        let mut spatial_edges = Vec::new();
        offsets.push(0);
        for u in 0..n {
            for from in &labels {
                let q_dep = from.departure();
                for &(v, e) in graph.neighbors(u) {
                    let edge = graph.edge(e);
                    if v >= n || !filter.admits(edge.constraint) {
                        continue;
                    }
                    for (k, to) in labels.iter().enumerate() {
                        let Some(lambda) =
                            classify(q_dep, to.arrival(), edge.length, edge.constraint, &params).lambda()
                        else {
                            break;
                        };
                        targets.push((v * l + k) as u32);
                        costs.push(params.c_f * lambda * edge.length);
                        spatial_edges.push(e as u32);
                    }
                }
                offsets.push(targets.len());
            }
        }
        Ok(Self {
            scheme,
            filter,
            params,
            vertex_count: n,
            base_edge_count,
            labels,
            offsets,
            targets,
            costs,
            spatial_edges,
        })
    }

    pub fn scheme(&self) -> LabelScheme {
        self.scheme
    }

    pub fn filter(&self) -> EdgeFilter {
        self.filter
    }

    pub fn labels(&self) -> &[ChargeLabel] {
        &self.labels
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn node_count(&self) -> usize {
        self.vertex_count * self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeRole {
    Start,
    Interior,
    GoalCandidate,
    SuperSink,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeNode {
    pub id: usize,
    /// Spatial vertex; the super sink reports the goal vertex.
    pub spatial_id: usize,
    /// The super sink carries the whole admissible goal range.
    pub label: ChargeLabel,
    pub role: NodeRole,
}

/// Directed charge edge. `spatial_edge` is `None` on super-sink edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeEdgeRef {
    pub from: usize,
    pub to: usize,
    pub cost: f64,
    pub spatial_edge: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
struct OverlayEdge {
    to: u32,
    cost: f64,
    spatial_edge: Option<u32>,
}

/// A query's charge graph: a shared layer plus the start node, goal
/// candidates, split vertices on endpoint edges and the super sink.
///
/// The start has no incoming edges and goal candidates only lead to the
/// super sink.
#[derive(Debug, Clone)]
pub struct ChargeGraph {
    layer: Arc<ChargeLayer>,
    spatial: Arc<SampledGraph>,
    q_init: f64,
    q_goal: f64,
    start_label: [ChargeLabel; 1],
    goal_labels: Vec<ChargeLabel>,
    extra_first: Vec<usize>,
    start_node: usize,
    goal_first: usize,
    sink: usize,
    extra_out: Vec<Vec<OverlayEdge>>,
}

impl ChargeGraph {
    /// Overlays a query on `layer`. `spatial` must be the layer's base graph
    /// with endpoints attached.
    pub fn new(
        layer: Arc<ChargeLayer>,
        spatial: Arc<SampledGraph>,
        q_init: f64,
        q_goal: f64,
    ) -> Result<Self, GraphError> {
        let params = layer.params;
        if spatial.params() != &params {
            return Err(GraphError::InvalidArgument(
                "layer and spatial graph use different parameters".into(),
            ));
        }
        let (start, goal) = spatial
            .endpoints()
            .ok_or_else(|| GraphError::InvalidArgument("spatial graph has no endpoints".into()))?;
        if spatial.base_len() != layer.vertex_count || spatial.edge_count() < layer.base_edge_count {
            return Err(GraphError::InvalidArgument(
                "spatial graph does not match the charge layer".into(),
            ));
        }
        for (name, q) in [("initial", q_init), ("goal", q_goal)] {
            if !(q >= params.q_min - EPS_Q && q <= params.q_max + EPS_Q) {
                return Err(GraphError::InvalidScenario(format!(
                    "{name} charge {q} outside [{}, {}]",
                    params.q_min, params.q_max
                )));
            }
        }
        let goal_labels = layer.scheme.goal_labels(q_goal, &params)?;
        let l = layer.labels.len();
        let mut extra_first = Vec::new();
        let mut next = layer.node_count();
        for v in layer.vertex_count..spatial.vertex_count() {
            extra_first.push(next);
            next += match spatial.vertex(v).kind {
                VertexKind::Start => 1,
                VertexKind::Goal => goal_labels.len(),
                _ => l,
            };
        }
        let sink = next;
        let mut g = Self {
            start_node: extra_first[start - layer.vertex_count],
            goal_first: extra_first[goal - layer.vertex_count],
            layer,
            spatial,
            q_init,
            q_goal,
            start_label: [ChargeLabel::Exact(q_init)],
            goal_labels,
            extra_first,
            sink,
            extra_out: vec![Vec::new(); sink + 1],
        };
        g.build_overlay(start, goal);
        Ok(g)
    }

    fn build_overlay(&mut self, start: usize, goal: usize) {
        let params = self.layer.params;
        let n = self.layer.vertex_count;
        let spatial = Arc::clone(&self.spatial);
        for (e, edge) in spatial.edges().iter().enumerate().skip(self.layer.base_edge_count) {
            if !self.layer.filter.admits(edge.constraint) {
                continue;
            }
            let (a, b) = edge.endpoints;
            if a < n && b < n {
                continue;
            }
            for (u, v) in [(a, b), (b, a)] {
                if v == start || u == goal {
                    continue;
                }
                let from_labels = self.labels_of(u).to_vec();
                let to_labels = self.labels_of(v).to_vec();
                for (ku, from) in from_labels.iter().enumerate() {
                    let src = self.node_of(u, ku);
                    for (kv, to) in to_labels.iter().enumerate() {
                        let Some(lambda) =
                            classify(from.departure(), to.arrival(), edge.length, edge.constraint, &params).lambda()
                        else {
                            break;
                        };
                        let to_node = self.node_of(v, kv) as u32;
                        self.extra_out[src].push(OverlayEdge {
                            to: to_node,
                            cost: params.c_f * lambda * edge.length,
                            spatial_edge: Some(e as u32),
                        });
                    }
                }
            }
        }
        for k in 0..self.goal_labels.len() {
            self.extra_out[self.goal_first + k].push(OverlayEdge {
                to: self.sink as u32,
                cost: 0.0,
                spatial_edge: None,
            });
        }
    }

    fn labels_of(&self, v: usize) -> &[ChargeLabel] {
        match self.spatial.vertex(v).kind {
            VertexKind::Start => &self.start_label,
            VertexKind::Goal => &self.goal_labels,
            _ => &self.layer.labels,
        }
    }

    fn node_of(&self, v: usize, k: usize) -> usize {
        let n = self.layer.vertex_count;
        if v < n {
            v * self.layer.labels.len() + k
        } else {
            self.extra_first[v - n] + k
        }
    }

    /// Spatial vertex and label index of a non-sink node.
    fn locate(&self, id: usize) -> (usize, usize) {
        let l = self.layer.labels.len();
        if id < self.layer.node_count() {
            return (id / l, id % l);
        }
        let slot = self.extra_first.partition_point(|&first| first <= id) - 1;
        (self.layer.vertex_count + slot, id - self.extra_first[slot])
    }

    pub fn node_count(&self) -> usize {
        self.sink + 1
    }

    pub fn edge_count(&self) -> usize {
        self.layer.edge_count() + self.extra_out.iter().map(Vec::len).sum::<usize>()
    }

    pub fn start_node(&self) -> usize {
        self.start_node
    }

    pub fn sink_node(&self) -> usize {
        self.sink
    }

    /// Ids of the goal candidates, in ascending label order.
    pub fn goal_nodes(&self) -> std::ops::Range<usize> {
        self.goal_first..self.goal_first + self.goal_labels.len()
    }

    pub fn goal_labels(&self) -> &[ChargeLabel] {
        &self.goal_labels
    }

    pub fn layer(&self) -> &ChargeLayer {
        &self.layer
    }

    pub fn spatial(&self) -> &SampledGraph {
        &self.spatial
    }

    pub fn q_init(&self) -> f64 {
        self.q_init
    }

    pub fn q_goal(&self) -> f64 {
        self.q_goal
    }

    pub fn node(&self, id: usize) -> Option<ChargeNode> {
        if id > self.sink {
            return None;
        }
        if id == self.sink {
            let params = self.layer.params;
            let label = if params.q_max - self.q_goal > EPS_Q {
                ChargeLabel::Interval {
                    lo: self.q_goal,
                    hi: params.q_max,
                }
            } else {
                ChargeLabel::Exact(params.q_max)
            };
            return Some(ChargeNode {
                id,
                spatial_id: self.spatial.goal().expect("attached graph"),
                label,
                role: NodeRole::SuperSink,
            });
        }
        let (v, k) = self.locate(id);
        let role = match self.spatial.vertex(v).kind {
            VertexKind::Start => NodeRole::Start,
            VertexKind::Goal => NodeRole::GoalCandidate,
            _ => NodeRole::Interior,
        };
        Some(ChargeNode {
            id,
            spatial_id: v,
            label: self.labels_of(v)[k],
            role,
        })
    }

    /// Calls `f` for every outgoing edge of `id`.
    pub fn for_each_out_edge(&self, id: usize, mut f: impl FnMut(ChargeEdgeRef)) {
        if id < self.layer.node_count() {
            let (lo, hi) = (self.layer.offsets[id], self.layer.offsets[id + 1]);
            for i in lo..hi {
                f(ChargeEdgeRef {
                    from: id,
                    to: self.layer.targets[i] as usize,
                    cost: self.layer.costs[i],
                    spatial_edge: Some(self.layer.spatial_edges[i] as usize),
                });
            }
        }
        if let Some(extra) = self.extra_out.get(id) {
            for e in extra {
                f(ChargeEdgeRef {
                    from: id,
                    to: e.to as usize,
                    cost: e.cost,
                    spatial_edge: e.spatial_edge.map(|s| s as usize),
                });
            }
        }
    }

    pub fn out_edges(&self, id: usize) -> Vec<ChargeEdgeRef> {
        let mut out = Vec::new();
        self.for_each_out_edge(id, |e| out.push(e));
        out
    }

    /// Cheapest stored edge from `from` to `to`.
    pub fn find_edge(&self, from: usize, to: usize) -> Option<ChargeEdgeRef> {
        let mut best: Option<ChargeEdgeRef> = None;
        self.for_each_out_edge(from, |e| {
            if e.to == to && best.is_none_or(|b| e.cost < b.cost) {
                best = Some(e);
            }
        });
        best
    }

    /// Schedule behind a stored edge; `None` for super-sink edges.
    pub fn traversal(&self, edge: &ChargeEdgeRef) -> Option<EdgeTraversal> {
        let spatial = self.spatial.edge(edge.spatial_edge?);
        let from = self.node(edge.from)?.label.departure();
        let to = self.node(edge.to)?.label.arrival();
        evaluate_edge(from, to, spatial.length, spatial.constraint, &self.layer.params).ok()
    }
}

/// Builds the exact-charge graph for an attached spatial graph in one step.
pub fn build_charge_graph_exact(
    gs: &SampledGraph,
    delta_q: f64,
    q_init: f64,
    q_goal: f64,
) -> Result<ChargeGraph, GraphError> {
    let layer = ChargeLayer::build(gs, LabelScheme::Exact { delta_q }, EdgeFilter::All)?;
    ChargeGraph::new(Arc::new(layer), Arc::new(gs.clone()), q_init, q_goal)
}

/// Builds the interval-charge graph for an attached spatial graph in one step.
pub fn build_charge_graph_interval(
    gs: &SampledGraph,
    n_l: usize,
    n_g: Option<usize>,
    q_init: f64,
    q_goal: f64,
) -> Result<ChargeGraph, GraphError> {
    let layer = ChargeLayer::build(gs, LabelScheme::Interval { n_l, n_g }, EdgeFilter::All)?;
    ChargeGraph::new(Arc::new(layer), Arc::new(gs.clone()), q_init, q_goal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use proptest::prelude::*;

    fn params() -> BatteryParams {
        BatteryParams::default()
    }

    fn segment_graph(d: f64) -> SampledGraph {
        let base = SampledGraph::from_parts(Vec::new(), params(), 1.0, &[], &[]).unwrap();
        base.attach_endpoints(Point2::new(0.0, 0.0), Point2::new(d, 0.0))
            .unwrap()
    }

    /// Two map vertices joined by one edge of length `d`, endpoints isolated.
    fn pair_graph(d: f64, constraint: ModeConstraint) -> SampledGraph {
        let verts = [
            (Point2::new(0.0, 0.0), VertexKind::QuietSample, Some(0)),
            (Point2::new(d, 0.0), VertexKind::QuietSample, Some(0)),
        ];
        let base = SampledGraph::from_parts(Vec::new(), params(), 1.0, &verts, &[(0, 1, constraint)]).unwrap();
        base.attach_with_edges(Point2::new(0.0, 50.0), Point2::new(d, 50.0), &[])
            .unwrap()
    }

    #[test]
    fn levels_include_both_endpoints() {
        assert_eq!(
            charge_levels(0.0, 100.0, 25.0).unwrap(),
            vec![0.0, 25.0, 50.0, 75.0, 100.0]
        );
        assert_eq!(
            charge_levels(0.0, 100.0, 30.0).unwrap(),
            vec![0.0, 30.0, 60.0, 90.0, 100.0]
        );
        assert_eq!(charge_levels(0.0, 100.0, 100.0).unwrap(), vec![0.0, 100.0]);
        assert_eq!(charge_levels(0.0, 100.0, 250.0).unwrap(), vec![0.0, 100.0]);
        assert_eq!(charge_levels(100.0, 100.0, 5.0).unwrap(), vec![100.0]);
        assert!(charge_levels(0.0, 100.0, 0.0).is_err());
    }

    #[test]
    fn halving_the_step_nests_levels() {
        for step in [50.0, 25.0, 12.5, 100.0 / 3.0, 7.0] {
            let coarse = charge_levels(0.0, 100.0, step).unwrap();
            let fine = charge_levels(0.0, 100.0, step / 2.0).unwrap();
            for q in coarse {
                assert!(
                    fine.iter().any(|&f| (f - q).abs() <= 1e-12),
                    "{q} missing for step {step}"
                );
            }
        }
    }

    #[test]
    fn doubling_intervals_splits_each_in_two() {
        let coarse = charge_intervals(0.0, 100.0, 5).unwrap();
        let fine = charge_intervals(0.0, 100.0, 10).unwrap();
        for (k, c) in coarse.iter().enumerate() {
            let (a, b) = (fine[2 * k], fine[2 * k + 1]);
            assert_eq!(c.arrival(), a.arrival());
            assert_eq!(a.departure(), b.arrival());
            assert_eq!(c.departure(), b.departure());
        }
        assert_eq!(
            charge_intervals(0.0, 100.0, 1).unwrap(),
            vec![ChargeLabel::Interval { lo: 0.0, hi: 100.0 }]
        );
        assert!(charge_intervals(0.0, 100.0, 0).is_err());
    }

    #[test]
    fn goal_partition_matches_interior_width() {
        assert_eq!(default_goal_intervals(40, 50.0, &params()), 20);
        assert_eq!(default_goal_intervals(30, 50.0, &params()), 15);
        assert_eq!(default_goal_intervals(7, 50.0, &params()), 4);
        assert_eq!(default_goal_intervals(7, 100.0, &params()), 1);
    }

    #[test]
    fn exact_single_edge_example() {
        let g = build_charge_graph_exact(&segment_graph(100.0), 25.0, 80.0, 50.0).unwrap();
        assert_eq!(
            g.goal_labels(),
            &[
                ChargeLabel::Exact(50.0),
                ChargeLabel::Exact(75.0),
                ChargeLabel::Exact(100.0)
            ]
        );
        assert_eq!(g.node_count(), 1 + 3 + 1);
        let out = g.out_edges(g.start_node());
        let goals: Vec<usize> = g.goal_nodes().collect();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].to, goals[0]);
        assert_eq!(out[0].cost, 0.0);
        assert_eq!(out[1].to, goals[1]);
        assert!((out[1].cost - 50.0).abs() < 1e-9);
        for &goal in &goals {
            let sink = g.out_edges(goal);
            assert_eq!(sink.len(), 1);
            assert_eq!(sink[0].to, g.sink_node());
            assert_eq!(sink[0].cost, 0.0);
            assert!(g.traversal(&sink[0]).is_none());
        }
        let t = g.traversal(&out[1]).unwrap();
        assert!((t.lambda - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exact_node_count_formula() {
        let g = build_charge_graph_exact(&segment_graph(3000.0), 10.0, 80.0, 50.0).unwrap();
        let interior = g.spatial().vertex_count() - 2;
        assert_eq!(interior, 2);
        assert_eq!(g.node_count(), 1 + interior * 11 + 6 + 1);
        let roles: Vec<NodeRole> = (0..g.node_count()).map(|i| g.node(i).unwrap().role).collect();
        assert_eq!(roles.iter().filter(|&&r| r == NodeRole::Start).count(), 1);
        assert_eq!(roles.iter().filter(|&&r| r == NodeRole::SuperSink).count(), 1);
        assert_eq!(roles.iter().filter(|&&r| r == NodeRole::GoalCandidate).count(), 6);
        assert!(g.node(g.node_count()).is_none());
    }

    #[test]
    fn coarse_step_gives_endpoint_grid() {
        let gs = pair_graph(10.0, ModeConstraint::AnyMode);
        let layer = ChargeLayer::build(&gs, LabelScheme::Exact { delta_q: 150.0 }, EdgeFilter::All).unwrap();
        assert_eq!(layer.labels(), &[ChargeLabel::Exact(0.0), ChargeLabel::Exact(100.0)]);
    }

    #[test]
    fn electric_only_edges_never_gain_charge() {
        let gs = pair_graph(30.0, ModeConstraint::ElectricOnly);
        let g = build_charge_graph_exact(&gs, 5.0, 80.0, 50.0).unwrap();
        let mut seen = 0;
        for id in 0..g.node_count() {
            for e in g.out_edges(id) {
                if e.spatial_edge.is_some() {
                    let (a, b) = (g.node(e.from).unwrap().label, g.node(e.to).unwrap().label);
                    assert!(b.arrival() <= a.departure() - 0.2 * 30.0 + 1e-9);
                    assert_eq!(e.cost, 0.0);
                    seen += 1;
                }
            }
        }
        assert!(seen > 0);
    }

    fn interval_node(g: &ChargeGraph, v: usize, lo: f64) -> usize {
        (0..g.node_count())
            .find(|&i| {
                let n = g.node(i).unwrap();
                n.spatial_id == v && n.role == NodeRole::Interior && n.label.arrival() == lo
            })
            .unwrap()
    }

    #[test]
    fn interval_edge_uses_upper_then_lower() {
        let gs = pair_graph(100.0, ModeConstraint::AnyMode);
        let g = build_charge_graph_interval(&gs, 5, None, 80.0, 50.0).unwrap();
        let from = interval_node(&g, 0, 40.0);
        let to = interval_node(&g, 1, 60.0);
        let e = g.find_edge(from, to).unwrap();
        assert!((e.cost - 200.0 / 3.0).abs() < 1e-9);
        let same = interval_node(&g, 1, 40.0);
        assert_eq!(g.find_edge(from, same).unwrap().cost, 0.0);
    }

    #[test]
    fn single_interval_is_coarsest() {
        let gs = pair_graph(100.0, ModeConstraint::AnyMode);
        let g = build_charge_graph_interval(&gs, 1, None, 80.0, 50.0).unwrap();
        assert_eq!(g.layer().labels(), &[ChargeLabel::Interval { lo: 0.0, hi: 100.0 }]);
        assert_eq!(g.find_edge(0, 1).unwrap().cost, 0.0);
    }

    #[test]
    fn full_goal_uses_exact_label() {
        let g = build_charge_graph_interval(&segment_graph(10.0), 4, None, 100.0, 100.0).unwrap();
        assert_eq!(g.goal_labels(), &[ChargeLabel::Exact(100.0)]);
    }

    #[test]
    fn bad_charges_are_rejected() {
        assert!(build_charge_graph_exact(&segment_graph(10.0), 10.0, 120.0, 50.0).is_err());
        assert!(build_charge_graph_exact(&segment_graph(10.0), 10.0, 80.0, -1.0).is_err());
        let base = SampledGraph::from_parts(Vec::new(), params(), 1.0, &[], &[]).unwrap();
        assert!(build_charge_graph_exact(&base, 10.0, 80.0, 50.0).is_err());
    }

    #[test]
    fn construction_is_deterministic() {
        let gs = segment_graph(2500.0);
        let a = build_charge_graph_exact(&gs, 12.5, 80.0, 50.0).unwrap();
        let b = build_charge_graph_exact(&gs, 12.5, 80.0, 50.0).unwrap();
        for id in 0..a.node_count() {
            assert_eq!(a.out_edges(id), b.out_edges(id));
        }
    }

    proptest! {
        #[test]
        fn interval_edges_relax_every_member(
            n_l in 1usize..12,
            d in 1.0f64..1300.0,
            from_k in 0usize..12,
            to_k in 0usize..12,
            s in 0.0f64..=1.0,
            t in 0.0f64..=1.0,
            electric in any::<bool>(),
        ) {
            let constraint = if electric { ModeConstraint::ElectricOnly } else { ModeConstraint::AnyMode };
            let gs = pair_graph(d, constraint);
            let g = build_charge_graph_interval(&gs, n_l, None, 80.0, 50.0).unwrap();
            let labels = g.layer().labels();
            let (a, b) = (labels[from_k % n_l], labels[to_k % n_l]);
            let q_i = a.arrival() + s * (a.departure() - a.arrival());
            let q_j = b.arrival() + t * (b.departure() - b.arrival());
            let exact = evaluate_edge(q_i, q_j, d, constraint, &params()).unwrap();
            if exact.feasible {
                let edge = g.find_edge(from_k % n_l, n_l + to_k % n_l);
                prop_assert!(edge.is_some());
                prop_assert!(edge.unwrap().cost <= exact.cost + 1e-9);
            }
        }
    }
}
