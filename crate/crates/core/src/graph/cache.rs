//! Binary graph cache.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic        7 bytes  "QPGRAPH"
//! version      u16      CACHE_VERSION
//! params       5 × f64  alpha, beta, q_min, q_max, c_f
//! delta_l      f64
//! zone count   u32
//!   id u32, kind u8 (0 quiet, 1 no-fly), vertex count u32, (x f64, y f64)*
//! vertex count u32, base_len u32, start u32, goal u32   (u32::MAX = none)
//!   kind u8 (0 quiet sample, 1 no-fly corner, 2 split, 3 start, 4 goal),
//!   zone u32 (u32::MAX = none), x f64, y f64
//! edge count   u32
//!   a u32, b u32, length f64, constraint u8 (0 any mode, 1 electric only)
//! ```
//!
//! Anything after the last edge is rejected.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{GraphError, SampledGraph, SpatialEdge, SpatialVertex, VertexKind};
use crate::energy::{BatteryParams, ModeConstraint};
use crate::geometry::{ConvexPolygon, Point2, Zone, ZoneKind};

pub const CACHE_MAGIC: &[u8; 7] = b"QPGRAPH";
pub const CACHE_VERSION: u16 = 1;
const NONE: u32 = u32::MAX;

pub fn save_graph(graph: &SampledGraph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_graph(graph, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<SampledGraph, GraphError> {
    read_graph(BufReader::new(File::open(path)?))
}

fn id32(v: usize) -> Result<u32, GraphError> {
    u32::try_from(v)
        .ok()
        .filter(|&x| x != NONE)
        .ok_or_else(|| GraphError::InvalidArgument("graph too large for the cache format".into()))
}

pub fn write_graph(graph: &SampledGraph, w: &mut impl Write) -> Result<(), GraphError> {
    let mut buf = Vec::new();
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    let p = graph.params();
    for x in [p.alpha, p.beta, p.q_min, p.q_max, p.c_f, graph.delta_l()] {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    buf.extend_from_slice(&id32(graph.zones().len())?.to_le_bytes());
    for z in graph.zones() {
        buf.extend_from_slice(&z.id.to_le_bytes());
        buf.push(match z.kind {
            ZoneKind::Quiet => 0,
            ZoneKind::NoFly => 1,
        });
        buf.extend_from_slice(&id32(z.polygon.len())?.to_le_bytes());
        for v in z.polygon.vertices() {
            buf.extend_from_slice(&v.x.to_le_bytes());
            buf.extend_from_slice(&v.y.to_le_bytes());
        }
    }
    let (start, goal) = match graph.endpoints() {
        Some((s, t)) => (id32(s)?, id32(t)?),
        None => (NONE, NONE),
    };
    for x in [id32(graph.vertex_count())?, id32(graph.base_len())?, start, goal] {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    for v in graph.vertices() {
        buf.push(match v.kind {
            VertexKind::QuietSample => 0,
            VertexKind::NoFlyCorner => 1,
            VertexKind::Split => 2,
            VertexKind::Start => 3,
            VertexKind::Goal => 4,
        });
        buf.extend_from_slice(&v.zone_id.unwrap_or(NONE).to_le_bytes());
        buf.extend_from_slice(&v.position.x.to_le_bytes());
        buf.extend_from_slice(&v.position.y.to_le_bytes());
    }
    buf.extend_from_slice(&id32(graph.edge_count())?.to_le_bytes());
    for e in graph.edges() {
        buf.extend_from_slice(&id32(e.endpoints.0)?.to_le_bytes());
        buf.extend_from_slice(&id32(e.endpoints.1)?.to_le_bytes());
        buf.extend_from_slice(&e.length.to_le_bytes());
        buf.push(match e.constraint {
            ModeConstraint::AnyMode => 0,
            ModeConstraint::ElectricOnly => 1,
        });
    }
    w.write_all(&buf)?;
    Ok(())
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], GraphError> {
        let end = self.pos + N;
        let bytes = self
            .data
            .get(self.pos..end)
            .ok_or_else(|| GraphError::Load("unexpected end of file".into()))?;
        self.pos = end;
        Ok(bytes.try_into().expect("slice length"))
    }

    fn u8(&mut self) -> Result<u8, GraphError> {
        Ok(self.take::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16, GraphError> {
        Ok(u16::from_le_bytes(self.take()?))
    }

    fn u32(&mut self) -> Result<u32, GraphError> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64, GraphError> {
        Ok(f64::from_le_bytes(self.take()?))
    }

    /// Element count, checked against the bytes left so corrupt counts
    /// cannot trigger huge allocations.
    fn count(&mut self, min_item_size: usize) -> Result<usize, GraphError> {
        let n = self.u32()? as usize;
        if n.saturating_mul(min_item_size) > self.data.len() - self.pos {
            return Err(GraphError::Load("unexpected end of file".into()));
        }
        Ok(n)
    }
}

fn bad(msg: impl Into<String>) -> GraphError {
    GraphError::Load(msg.into())
}

pub fn read_graph(mut r: impl Read) -> Result<SampledGraph, GraphError> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    let mut c = Cursor { data: &data, pos: 0 };
    if &c.take::<7>()? != CACHE_MAGIC {
        return Err(bad("not a graph cache file"));
    }
    let version = c.u16()?;
    if version != CACHE_VERSION {
        return Err(bad(format!(
            "unsupported cache version {version}, expected {CACHE_VERSION}"
        )));
    }
    let params =
        BatteryParams::new(c.f64()?, c.f64()?, c.f64()?, c.f64()?, c.f64()?).map_err(|e| bad(e.to_string()))?;
    let delta_l = c.f64()?;

    let zone_count = c.count(9)?;
    let mut zones = Vec::with_capacity(zone_count);
    for _ in 0..zone_count {
        let id = c.u32()?;
        let kind = match c.u8()? {
            0 => ZoneKind::Quiet,
            1 => ZoneKind::NoFly,
            k => return Err(bad(format!("unknown zone kind {k}"))),
        };
        let n = c.count(16)?;
        let mut pts = Vec::with_capacity(n);
        for _ in 0..n {
            pts.push(Point2::new(c.f64()?, c.f64()?));
        }
        let polygon = ConvexPolygon::new(pts).map_err(|e| bad(e.to_string()))?;
        zones.push(Zone::new(id, kind, polygon));
    }

    let vertex_count = c.count(21)?;
    let base_len = c.u32()? as usize;
    let start = c.u32()?;
    let goal = c.u32()?;
    let endpoints = match (start, goal) {
        (NONE, NONE) => None,
        (s, t) if (s as usize) < vertex_count && (t as usize) < vertex_count => Some((s as usize, t as usize)),
        _ => return Err(bad("endpoint ids out of range")),
    };
    if base_len > vertex_count {
        return Err(bad("base length exceeds vertex count"));
    }
    let mut vertices = Vec::with_capacity(vertex_count);
    for id in 0..vertex_count {
        let kind = match c.u8()? {
            0 => VertexKind::QuietSample,
            1 => VertexKind::NoFlyCorner,
            2 => VertexKind::Split,
            3 => VertexKind::Start,
            4 => VertexKind::Goal,
            k => return Err(bad(format!("unknown vertex kind {k}"))),
        };
        let zone = c.u32()?;
        let position = Point2::new(c.f64()?, c.f64()?);
        vertices.push(SpatialVertex {
            id,
            position,
            zone_id: (zone != NONE).then_some(zone),
            kind,
        });
    }

    let edge_count = c.count(17)?;
    let mut edges = Vec::with_capacity(edge_count);
    for _ in 0..edge_count {
        let a = c.u32()? as usize;
        let b = c.u32()? as usize;
        let length = c.f64()?;
        let constraint = match c.u8()? {
            0 => ModeConstraint::AnyMode,
            1 => ModeConstraint::ElectricOnly,
            k => return Err(bad(format!("unknown edge constraint {k}"))),
        };
        if a >= vertex_count || b >= vertex_count || a == b {
            return Err(bad(format!("edge ({a}, {b}) is invalid")));
        }
        edges.push(SpatialEdge {
            endpoints: (a, b),
            length,
            constraint,
        });
    }
    if c.pos != data.len() {
        return Err(bad("trailing bytes after edge table"));
    }
    SampledGraph::from_raw(zones, params, delta_l, vertices, edges, base_len, endpoints)
}
