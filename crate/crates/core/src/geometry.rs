//! Planar primitives: points, strictly convex polygons, boundary sampling and
//! the visibility predicates that decide which straight edges may be flown.
//!
//! All containment and intersection tests work on signed distances to the
//! polygon's edge lines with a fixed tolerance of [`EPS_GEO`] length units.
//! Contact with a boundary (touching, grazing a corner, sliding along a side)
//! never counts as entering the interior.

use std::collections::HashSet;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for collinearity and containment tests, in length units.
pub const EPS_GEO: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("zone ids must be unique (duplicate id {0})")]
    DuplicateZoneId(u32),
    #[error("zones {0} and {1} have overlapping interiors")]
    OverlappingZones(u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        (other - self).norm()
    }

    /// Point at fraction `t` of the way from `self` to `other`.
    pub fn lerp(self, other: Self, t: f64) -> Self {
        Self::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Self) -> Self {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Self) -> Self {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Self {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

/// A strictly convex polygon with counter-clockwise vertex order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    /// Validates and wraps a vertex ring. Clockwise input is reversed; anything
    /// that is not strictly convex is rejected.
    pub fn new(mut vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::InvalidGeometry(format!(
                "polygon needs at least 3 vertices, got {n}"
            )));
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(GeometryError::InvalidGeometry(format!(
                "non-finite vertex ({}, {})",
                p.x, p.y
            )));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if vertices[i].distance(vertices[j]) <= EPS_GEO {
                    return Err(GeometryError::InvalidGeometry(format!(
                        "repeated vertex at index {i} and {j}"
                    )));
                }
            }
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        let mut turning = 0.0;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let e1 = b - a;
            let e2 = c - b;
            // height of c above the line through a, b
            let height = e1.cross(c - a) / e1.norm();
            if height <= EPS_GEO {
                return Err(GeometryError::InvalidGeometry(format!(
                    "polygon is not strictly convex at vertex {}",
                    (i + 1) % n
                )));
            }
            turning += e1.cross(e2).atan2(e1.dot(e2));
        }
        if (turning - std::f64::consts::TAU).abs() > 1e-6 {
            return Err(GeometryError::InvalidGeometry(
                "polygon boundary winds more than once".into(),
            ));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Directed boundary edges in counter-clockwise order.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(b)).sum()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bounding_box(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Signed distance of `p` to each edge line, positive on the interior side.
    fn edge_distances(&self, p: Point2) -> impl Iterator<Item = f64> + '_ {
        self.edges().map(move |(a, b)| {
            let e = b - a;
            e.cross(p - a) / e.norm()
        })
    }

    /// Largest separation between `self` and `other` along any edge normal of
    /// either polygon. Positive means a gap of that width exists; zero or
    /// negative means the closed polygons touch or overlap.
    pub fn separation(&self, other: &ConvexPolygon) -> f64 {
        fn one_way(a: &ConvexPolygon, b: &ConvexPolygon) -> f64 {
            a.edges()
                .map(|(p, q)| {
                    let e = q - p;
                    let len = e.norm();
                    // the outward side of edge pq is where cross < 0
                    b.vertices
                        .iter()
                        .map(|&v| -e.cross(v - p) / len)
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(f64::NEG_INFINITY, f64::max)
        }
        one_way(self, other).max(one_way(other, self))
    }

    /// True when the open interiors of the two polygons intersect.
    pub fn interiors_overlap(&self, other: &ConvexPolygon) -> bool {
        self.separation(other) < -EPS_GEO
    }
}

impl<'de> Deserialize<'de> for ConvexPolygon {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            vertices: Vec<Point2>,
        }
        let raw = Raw::deserialize(deserializer)?;
        ConvexPolygon::new(raw.vertices).map_err(serde::de::Error::custom)
    }
}

fn signed_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    (0..n).map(|i| vertices[i].cross(vertices[(i + 1) % n])).sum::<f64>() * 0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZoneKind {
    /// Electric-only flight permitted.
    Quiet,
    /// No flight permitted.
    NoFly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub id: u32,
    pub kind: ZoneKind,
    pub polygon: ConvexPolygon,
}

impl Zone {
    pub fn new(id: u32, kind: ZoneKind, polygon: ConvexPolygon) -> Self {
        Self { id, kind, polygon }
    }

    pub fn quiet(id: u32, polygon: ConvexPolygon) -> Self {
        Self::new(id, ZoneKind::Quiet, polygon)
    }

    pub fn no_fly(id: u32, polygon: ConvexPolygon) -> Self {
        Self::new(id, ZoneKind::NoFly, polygon)
    }
}

/// Checks that zone ids are unique and interiors are pairwise disjoint.
pub fn validate_zones(zones: &[Zone]) -> Result<(), GeometryError> {
    let mut seen = HashSet::new();
    for z in zones {
        if !seen.insert(z.id) {
            return Err(GeometryError::DuplicateZoneId(z.id));
        }
    }
    for (i, a) in zones.iter().enumerate() {
        for b in &zones[i + 1..] {
            if a.polygon.interiors_overlap(&b.polygon) {
                return Err(GeometryError::OverlappingZones(a.id, b.id));
            }
        }
    }
    Ok(())
}

/// Samples the boundary: every corner, plus the interior points splitting
/// each side of length `L` into `ceil(L / delta_l)` equal parts, in walk order.
pub fn sample_boundary(polygon: &ConvexPolygon, delta_l: f64) -> Result<Vec<Point2>, GeometryError> {
    if !(delta_l > 0.0 && delta_l.is_finite()) {
        return Err(GeometryError::InvalidArgument(format!(
            "sampling interval must be positive and finite, got {delta_l}"
        )));
    }
    let mut out = Vec::new();
    for (a, b) in polygon.edges() {
        let parts = parts_for(a.distance(b), delta_l);
        out.push(a);
        for k in 1..parts {
            out.push(a.lerp(b, k as f64 / parts as f64));
        }
    }
    Ok(out)
}

/// `ceil(length / delta_l)`, forgiving ratios that land a hair above an integer.
fn parts_for(length: f64, delta_l: f64) -> usize {
    let ratio = length / delta_l;
    ((ratio - 1e-9).ceil() as usize).max(1)
}

/// True iff the open segment `(a, b)` meets the open interior of `polygon`.
pub fn segment_intersects_interior(a: Point2, b: Point2, polygon: &ConvexPolygon) -> bool {
    let mut t_lo = 0.0_f64;
    let mut t_hi = 1.0_f64;
    for (da, db) in polygon.edge_distances(a).zip(polygon.edge_distances(b)) {
        let a_in = da > EPS_GEO;
        let b_in = db > EPS_GEO;
        match (a_in, b_in) {
            (true, true) => {}
            (false, false) => return false,
            // the segment is strictly inside this half-plane for t < t*
            (true, false) => t_hi = t_hi.min((da - EPS_GEO) / (da - db)),
            (false, true) => t_lo = t_lo.max((EPS_GEO - da) / (db - da)),
        }
        if t_lo >= t_hi {
            return false;
        }
    }
    t_lo < t_hi
}

/// True iff the segment enters no zone interior, whatever the zone kind.
pub fn is_visible(a: Point2, b: Point2, zones: &[Zone]) -> bool {
    zones.iter().all(|z| !segment_intersects_interior(a, b, &z.polygon))
}

pub fn point_in_interior(p: Point2, polygon: &ConvexPolygon) -> bool {
    polygon.edge_distances(p).all(|d| d > EPS_GEO)
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn polygon_strategy() -> impl Strategy<Value = ConvexPolygon> {
        (3usize..9, 0.5f64..5.0, -5.0f64..5.0, -5.0f64..5.0, any::<u64>()).prop_map(|(k, r, cx, cy, seed)| {
            // evenly spread angles with a seeded jitter keep every polygon strictly convex
            let mut s = seed;
            let pts = (0..k)
                .map(|i| {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let jitter = ((s >> 33) as f64 / (1u64 << 31) as f64 - 0.5) * 0.5;
                    let a = std::f64::consts::TAU * (i as f64 + jitter) / k as f64;
                    Point2::new(cx + r * a.cos(), cy + r * a.sin())
                })
                .collect();
            ConvexPolygon::new(pts).unwrap()
        })
    }

    fn point() -> impl Strategy<Value = Point2> {
        (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(x, y)| Point2::new(x, y))
    }

    proptest! {
        #[test]
        fn sample_count_matches_ceil_rule(poly in polygon_strategy(), dl in 0.05f64..3.0) {
            let pts = sample_boundary(&poly, dl).unwrap();
            let expected: usize = poly.edges().map(|(a, b)| parts_for(a.distance(b), dl)).sum();
            prop_assert_eq!(pts.len(), expected);
            // consecutive samples never further apart than the interval
            for w in 0..pts.len() {
                let gap = pts[w].distance(pts[(w + 1) % pts.len()]);
                prop_assert!(gap <= dl + 1e-9);
            }
        }

        #[test]
        fn visibility_is_symmetric(poly in polygon_strategy(), a in point(), b in point()) {
            prop_assume!(a.distance(b) > 1e-6);
            let zones = vec![Zone::quiet(0, poly)];
            prop_assert_eq!(is_visible(a, b, &zones), is_visible(b, a, &zones));
        }

        #[test]
        fn chords_enter_interior_unless_on_one_side(poly in polygon_strategy(), i in 0usize..64, j in 0usize..64, ti in 0.0f64..1.0, tj in 0.0f64..1.0) {
            let n = poly.len();
            let (ei, ej) = (i % n, j % n);
            let vs = poly.vertices();
            let a = vs[ei].lerp(vs[(ei + 1) % n], ti);
            let b = vs[ej].lerp(vs[(ej + 1) % n], tj);
            prop_assume!(a.distance(b) > 1e-6);
            let on_common_side = poly.edges().any(|(u, v)| {
                let e = v - u;
                (e.cross(a - u) / e.norm()).abs() < 1e-9 && (e.cross(b - u) / e.norm()).abs() < 1e-9
            });
            let hit = segment_intersects_interior(a, b, &poly);
            if on_common_side {
                prop_assert!(!hit);
            } else {
                // chords that only clip a corner by less than the tolerance are boundary contact
                let mid = a.lerp(b, 0.5);
                if poly.edge_distances(mid).all(|d| d > 1e-6) {
                    prop_assert!(hit);
                }
            }
        }

        #[test]
        fn zone_order_does_not_matter(p1 in polygon_strategy(), a in point(), b in point()) {
            prop_assume!(a.distance(b) > 1e-6);
            let shifted = ConvexPolygon::new(p1.vertices().iter().map(|v| *v + Point2::new(12.0, 0.0)).collect()).unwrap();
            let fwd = vec![Zone::quiet(0, p1.clone()), Zone::no_fly(1, shifted.clone())];
            let rev = vec![Zone::no_fly(1, shifted), Zone::quiet(0, p1)];
            prop_assert_eq!(is_visible(a, b, &fwd), is_visible(a, b, &rev));
        }
    }
}
