use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::geometry::{validate_zones, ConvexPolygon, Point2, Zone, ZoneKind};

/// Map with rectangular bounds `[0, width] × [0, height]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMap", into = "RawMap")]
pub struct MapFile {
    pub name: String,
    pub bounds: (f64, f64),
    pub zones: Vec<Zone>,
}

#[derive(Serialize, Deserialize)]
struct RawZone {
    id: u32,
    kind: ZoneKind,
    vertices: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct RawMap {
    name: String,
    bounds: [f64; 2],
    zones: Vec<RawZone>,
}

impl TryFrom<RawMap> for MapFile {
    type Error = HarnessError;

    fn try_from(raw: RawMap) -> Result<Self, Self::Error> {
        let zones = raw
            .zones
            .into_iter()
            .map(|z| {
                let pts = z.vertices.iter().map(|&[x, y]| Point2::new(x, y)).collect();
                Ok(Zone::new(z.id, z.kind, ConvexPolygon::new(pts)?))
            })
            .collect::<Result<Vec<_>, HarnessError>>()?;
        MapFile::new(raw.name, (raw.bounds[0], raw.bounds[1]), zones)
    }
}

impl From<MapFile> for RawMap {
    fn from(map: MapFile) -> Self {
        RawMap {
            name: map.name,
            bounds: [map.bounds.0, map.bounds.1],
            zones: map
                .zones
                .into_iter()
                .map(|z| RawZone {
                    id: z.id,
                    kind: z.kind,
                    vertices: z.polygon.vertices().iter().map(|p| [p.x, p.y]).collect(),
                })
                .collect(),
        }
    }
}

impl MapFile {
    /// Checks that the bounds are positive, every zone lies inside them and
    /// the zones are valid and interior-disjoint.
    pub fn new(name: impl Into<String>, bounds: (f64, f64), zones: Vec<Zone>) -> Result<Self, HarnessError> {
        let (w, h) = bounds;
        if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
            return Err(HarnessError::InvalidMap(format!(
                "bounds must be positive, got {w} × {h}"
            )));
        }
        for z in &zones {
            if !z
                .polygon
                .vertices()
                .iter()
                .all(|p| (0.0..=w).contains(&p.x) && (0.0..=h).contains(&p.y))
            {
                return Err(HarnessError::InvalidMap(format!("zone {} leaves the map bounds", z.id)));
            }
        }
        validate_zones(&zones)?;
        Ok(Self {
            name: name.into(),
            bounds,
            zones,
        })
    }

    pub fn contains(&self, p: Point2) -> bool {
        (0.0..=self.bounds.0).contains(&p.x) && (0.0..=self.bounds.1).contains(&p.y)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), HarnessError> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Shape distribution of random zones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MapGenConfig {
    pub bounds: (f64, f64),
    /// Circumradius range as a fraction of the map width.
    pub radius_frac: (f64, f64),
    /// Inclusive range of side counts.
    pub sides: (usize, usize),
    /// Minimum free distance between the circumcircles of two zones.
    pub clearance: f64,
    /// Probability that a zone is no-fly instead of quiet.
    pub no_fly_fraction: f64,
}

impl Default for MapGenConfig {
    fn default() -> Self {
        Self {
            bounds: (2000.0, 2000.0),
            radius_frac: (0.03, 0.08),
            sides: (3, 8),
            clearance: 20.0,
            no_fly_fraction: 0.0,
        }
    }
}

/// Total placement attempts before giving up.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

/// Random map of `n_zones` convex polygons. Each polygon takes random points
/// on a circle of random radius, sorted by angle; a placement is redrawn when
/// its circle leaves the bounds or comes within `clearance` of another one.
pub fn generate_random_map(n_zones: usize, seed: u64, config: &MapGenConfig) -> Result<MapFile, HarnessError> {
    let (w, h) = config.bounds;
    let (r_lo, r_hi) = config.radius_frac;
    let (s_lo, s_hi) = config.sides;
    if !(r_lo > 0.0 && r_lo <= r_hi && s_lo >= 3 && s_lo <= s_hi && config.clearance >= 0.0) {
        return Err(HarnessError::InvalidConfig(format!(
            "bad map generator settings {config:?}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut circles: Vec<(Point2, f64)> = Vec::new();
    let mut zones = Vec::new();
    let mut attempts = 0;
    while zones.len() < n_zones {
        attempts += 1;
        if attempts > MAX_PLACEMENT_ATTEMPTS {
            return Err(HarnessError::Placement(format!(
                "placed {} of {n_zones} zones in {MAX_PLACEMENT_ATTEMPTS} attempts",
                zones.len()
            )));
        }
        let r = w * rng.gen_range(r_lo..=r_hi);
        let c = Point2::new(rng.gen_range(0.0..w), rng.gen_range(0.0..h));
        let sides = rng.gen_range(s_lo..=s_hi);
        let mut angles: Vec<f64> = (0..sides).map(|_| rng.gen_range(0.0..TAU)).collect();
        let no_fly = rng.gen_bool(config.no_fly_fraction.clamp(0.0, 1.0));
        if c.x - r < 0.0 || c.x + r > w || c.y - r < 0.0 || c.y + r > h {
            continue;
        }
        if circles.iter().any(|&(o, s)| o.distance(c) < r + s + config.clearance) {
            continue;
        }
        angles.sort_by(f64::total_cmp);
        let min_gap = 0.2 * TAU / sides as f64;
        let wrap = angles[0] + TAU - angles[sides - 1];
        if wrap < min_gap || angles.windows(2).any(|a| a[1] - a[0] < min_gap) {
            continue;
        }
        let pts = angles
            .iter()
            .map(|&t| Point2::new(c.x + r * t.cos(), c.y + r * t.sin()))
            .collect();
        let Ok(polygon) = ConvexPolygon::new(pts) else {
            continue;
        };
        let id = zones.len() as u32;
        let kind = if no_fly { ZoneKind::NoFly } else { ZoneKind::Quiet };
        circles.push((c, r));
        zones.push(Zone::new(id, kind, polygon));
    }
    MapFile::new(format!("random-{n_zones}-{seed}"), config.bounds, zones)
}
