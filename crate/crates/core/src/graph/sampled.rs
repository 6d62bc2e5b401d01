use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::GraphError;
use crate::energy::{BatteryParams, ModeConstraint};
use crate::geometry::{
    is_visible, point_in_interior, sample_boundary, validate_zones, Point2, Zone, ZoneKind, EPS_GEO,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    /// Boundary sample of a quiet zone.
    QuietSample,
    /// Corner of a no-fly zone.
    NoFlyCorner,
    /// Artificial vertex cutting a long edge.
    Split,
    Start,
    Goal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialVertex {
    pub id: usize,
    pub position: Point2,
    /// Zone whose boundary the vertex lies on, if any.
    pub zone_id: Option<u32>,
    pub kind: VertexKind,
}

/// Undirected spatial edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialEdge {
    pub endpoints: (usize, usize),
    pub length: f64,
    pub constraint: ModeConstraint,
}

impl SpatialEdge {
    pub fn other(&self, v: usize) -> usize {
        if self.endpoints.0 == v {
            self.endpoints.1
        } else {
            self.endpoints.0
        }
    }
}

/// Spatial graph over boundary samples.
///
/// Vertices `0..base_len()` belong to the map; vertices appended by
/// [`SampledGraph::attach_endpoints`] start at `base_len()` with the start,
/// then the goal, then any split vertices on endpoint edges.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGraph {
    zones: Arc<[Zone]>,
    params: BatteryParams,
    delta_l: f64,
    vertices: Vec<SpatialVertex>,
    edges: Vec<SpatialEdge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    base_len: usize,
    endpoints: Option<(usize, usize)>,
}

/// Builds the offline spatial graph: boundary samples of every quiet zone,
/// corners of every no-fly zone, electric-only chords between samples of the
/// same quiet zone, and free edges between every other mutually visible pair.
/// Edges longer than [`BatteryParams::split_length`] are cut into equal pieces.
pub fn build_base_graph(zones: &[Zone], delta_l: f64, params: &BatteryParams) -> Result<SampledGraph, GraphError> {
    params.validate()?;
    validate_zones(zones)?;
    let mut g = SampledGraph::empty(zones.to_vec().into(), *params, delta_l)?;
    for zone in zones {
        match zone.kind {
            ZoneKind::Quiet => {
                for p in sample_boundary(&zone.polygon, delta_l)? {
                    g.push_vertex(p, Some(zone.id), VertexKind::QuietSample);
                }
            }
            ZoneKind::NoFly => {
                for &p in zone.polygon.vertices() {
                    g.push_vertex(p, Some(zone.id), VertexKind::NoFlyCorner);
                }
            }
        }
    }
    let n = g.vertices.len();
    let boxes: Vec<_> = zones.iter().map(|z| z.polygon.bounding_box()).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (g.vertices[i], g.vertices[j]);
            if a.position.distance(b.position) <= EPS_GEO {
                continue;
            }
            let same_quiet_zone =
                a.kind == VertexKind::QuietSample && b.kind == VertexKind::QuietSample && a.zone_id == b.zone_id;
            if same_quiet_zone {
                g.push_edge(i, j, ModeConstraint::ElectricOnly);
            } else if visible_with_boxes(a.position, b.position, zones, &boxes) {
                g.push_edge(i, j, ModeConstraint::AnyMode);
            }
        }
    }
    g.base_len = g.vertices.len();
    Ok(g)
}

fn visible_with_boxes(a: Point2, b: Point2, zones: &[Zone], boxes: &[(Point2, Point2)]) -> bool {
    let lo = Point2::new(a.x.min(b.x), a.y.min(b.y));
    let hi = Point2::new(a.x.max(b.x), a.y.max(b.y));
    zones.iter().zip(boxes).all(|(z, (zlo, zhi))| {
        let disjoint = hi.x <= zlo.x || lo.x >= zhi.x || hi.y <= zlo.y || lo.y >= zhi.y;
        disjoint || is_visible(a, b, std::slice::from_ref(z))
    })
}

impl SampledGraph {
    fn empty(zones: Arc<[Zone]>, params: BatteryParams, delta_l: f64) -> Result<Self, GraphError> {
        if !(delta_l > 0.0 && delta_l.is_finite()) {
            return Err(GraphError::InvalidArgument(format!(
                "sampling interval must be positive, got {delta_l}"
            )));
        }
        Ok(Self {
            zones,
            params,
            delta_l,
            vertices: Vec::new(),
            edges: Vec::new(),
            adjacency: Vec::new(),
            base_len: 0,
            endpoints: None,
        })
    }

    /// Assembles a base graph from explicit vertices and edges; edge lengths
    /// are the Euclidean distances and long edges are split as usual.
    pub fn from_parts(
        zones: Vec<Zone>,
        params: BatteryParams,
        delta_l: f64,
        vertices: &[(Point2, VertexKind, Option<u32>)],
        edges: &[(usize, usize, ModeConstraint)],
    ) -> Result<Self, GraphError> {
        params.validate()?;
        validate_zones(&zones)?;
        let mut g = Self::empty(zones.into(), params, delta_l)?;
        for &(p, kind, zone) in vertices {
            if matches!(kind, VertexKind::Start | VertexKind::Goal) {
                return Err(GraphError::InvalidArgument(
                    "base graphs cannot contain endpoints; use attach_endpoints".into(),
                ));
            }
            if !p.is_finite() {
                return Err(GraphError::InvalidArgument("non-finite vertex position".into()));
            }
            g.push_vertex(p, zone, kind);
        }
        g.base_len = g.vertices.len();
        g.push_checked_edges(edges)?;
        g.base_len = g.vertices.len();
        Ok(g)
    }

    fn push_vertex(&mut self, position: Point2, zone_id: Option<u32>, kind: VertexKind) -> usize {
        let id = self.vertices.len();
        self.vertices.push(SpatialVertex {
            id,
            position,
            zone_id,
            kind,
        });
        self.adjacency.push(Vec::new());
        id
    }

    /// Adds an undirected edge, splitting it with artificial vertices when it
    /// is longer than the split length.
    fn push_edge(&mut self, a: usize, b: usize, constraint: ModeConstraint) {
        let pa = self.vertices[a].position;
        let pb = self.vertices[b].position;
        let length = pa.distance(pb);
        let limit = self.params.split_length();
        let pieces = if length > limit {
            (length / limit).floor() as usize + 1
        } else {
            1
        };
        let mut prev = a;
        for k in 1..=pieces {
            let next = if k == pieces {
                b
            } else {
                self.push_vertex(pa.lerp(pb, k as f64 / pieces as f64), None, VertexKind::Split)
            };
            let len = self.vertices[prev].position.distance(self.vertices[next].position);
            let id = self.edges.len();
            self.edges.push(SpatialEdge {
                endpoints: (prev, next),
                length: len,
                constraint,
            });
            self.adjacency[prev].push((next, id));
            self.adjacency[next].push((prev, id));
            prev = next;
        }
    }

    fn push_checked_edges(&mut self, edges: &[(usize, usize, ModeConstraint)]) -> Result<(), GraphError> {
        let n = self.vertices.len();
        for &(a, b, c) in edges {
            if a >= n || b >= n {
                return Err(GraphError::InvalidArgument(format!(
                    "edge ({a}, {b}) references a missing vertex"
                )));
            }
            if self.vertices[a].position.distance(self.vertices[b].position) <= EPS_GEO {
                return Err(GraphError::InvalidArgument(format!("edge ({a}, {b}) has zero length")));
            }
            self.push_edge(a, b, c);
        }
        Ok(())
    }

    fn check_endpoints(&self, start: Point2, goal: Point2) -> Result<(), GraphError> {
        if self.endpoints.is_some() {
            return Err(GraphError::InvalidArgument("graph already has endpoints".into()));
        }
        for (name, p) in [("start", start), ("goal", goal)] {
            if !p.is_finite() {
                return Err(GraphError::InvalidScenario(format!("{name} is not finite")));
            }
            if let Some(z) = self.zones.iter().find(|z| point_in_interior(p, &z.polygon)) {
                return Err(GraphError::InvalidScenario(format!(
                    "{name} ({}, {}) lies inside zone {}",
                    p.x, p.y, z.id
                )));
            }
        }
        if start.distance(goal) <= EPS_GEO {
            return Err(GraphError::InvalidScenario("start and goal coincide".into()));
        }
        Ok(())
    }

    /// Returns a copy with the start and goal attached by free edges to every
    /// visible map vertex (split vertices excluded) and to each other.
    pub fn attach_endpoints(&self, start: Point2, goal: Point2) -> Result<SampledGraph, GraphError> {
        self.check_endpoints(start, goal)?;
        let mut g = self.clone();
        let s = g.push_vertex(start, None, VertexKind::Start);
        let t = g.push_vertex(goal, None, VertexKind::Goal);
        g.endpoints = Some((s, t));
        let boxes: Vec<_> = self.zones.iter().map(|z| z.polygon.bounding_box()).collect();
        for endpoint in [s, t] {
            let p = g.vertices[endpoint].position;
            for v in 0..self.base_len {
                let vert = self.vertices[v];
                if vert.kind == VertexKind::Split || vert.position.distance(p) <= EPS_GEO {
                    continue;
                }
                if visible_with_boxes(p, vert.position, &self.zones, &boxes) {
                    g.push_edge(endpoint, v, ModeConstraint::AnyMode);
                }
            }
        }
        if visible_with_boxes(start, goal, &self.zones, &boxes) {
            g.push_edge(s, t, ModeConstraint::AnyMode);
        }
        Ok(g)
    }

    /// Attaches endpoints with caller-chosen edges instead of visibility.
    /// Indices `base_len()` and `base_len() + 1` name the start and goal.
    pub fn attach_with_edges(
        &self,
        start: Point2,
        goal: Point2,
        edges: &[(usize, usize, ModeConstraint)],
    ) -> Result<SampledGraph, GraphError> {
        self.check_endpoints(start, goal)?;
        let mut g = self.clone();
        let s = g.push_vertex(start, None, VertexKind::Start);
        let t = g.push_vertex(goal, None, VertexKind::Goal);
        g.endpoints = Some((s, t));
        if edges.iter().any(|&(a, b, _)| a < self.base_len && b < self.base_len) {
            return Err(GraphError::InvalidArgument(
                "attached edges must touch the start or goal".into(),
            ));
        }
        g.push_checked_edges(edges)?;
        Ok(g)
    }

    /// Same graph without its electric-only edges. Vertex ids are unchanged.
    pub fn without_electric_only_edges(&self) -> SampledGraph {
        let mut g = self.clone();
        g.edges.retain(|e| e.constraint == ModeConstraint::AnyMode);
        g.rebuild_adjacency();
        g
    }

    fn rebuild_adjacency(&mut self) {
        self.adjacency = vec![Vec::new(); self.vertices.len()];
        for (id, e) in self.edges.iter().enumerate() {
            self.adjacency[e.endpoints.0].push((e.endpoints.1, id));
            self.adjacency[e.endpoints.1].push((e.endpoints.0, id));
        }
    }

    pub(crate) fn from_raw(
        zones: Vec<Zone>,
        params: BatteryParams,
        delta_l: f64,
        vertices: Vec<SpatialVertex>,
        edges: Vec<SpatialEdge>,
        base_len: usize,
        endpoints: Option<(usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut g = Self::empty(zones.into(), params, delta_l)?;
        g.vertices = vertices;
        g.edges = edges;
        g.base_len = base_len;
        g.endpoints = endpoints;
        g.rebuild_adjacency();
        Ok(g)
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn params(&self) -> &BatteryParams {
        &self.params
    }

    pub fn delta_l(&self) -> f64 {
        self.delta_l
    }

    pub fn vertices(&self) -> &[SpatialVertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: usize) -> &SpatialVertex {
        &self.vertices[id]
    }

    pub fn edges(&self) -> &[SpatialEdge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &SpatialEdge {
        &self.edges[id]
    }

    /// `(neighbor, edge id)` pairs of `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of map vertices, i.e. those present before endpoints were attached.
    pub fn base_len(&self) -> usize {
        self.base_len
    }

    pub fn endpoints(&self) -> Option<(usize, usize)> {
        self.endpoints
    }

    pub fn start(&self) -> Option<usize> {
        self.endpoints.map(|e| e.0)
    }

    pub fn goal(&self) -> Option<usize> {
        self.endpoints.map(|e| e.1)
    }

    pub fn count_edges(&self, constraint: ModeConstraint) -> usize {
        self.edges.iter().filter(|e| e.constraint == constraint).count()
    }
}
