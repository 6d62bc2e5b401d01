use std::fmt;

use serde::{Deserialize, Serialize};

use super::PlanError;
use crate::energy::{evaluate_edge, simulate_schedule, BatteryParams, Mode, EPS_Q};
use crate::geometry::{segment_intersects_interior, Point2, Zone, ZoneKind};
use crate::graph::ChargeGraph;

/// Stretch of the path flown in one mode. `points` is a polyline because
/// merged stretches may bend at graph vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySegment {
    pub points: Vec<Point2>,
    pub mode: Mode,
    pub length: f64,
    pub q_start: f64,
    pub q_end: f64,
}

impl TrajectorySegment {
    pub fn start(&self) -> Point2 {
        self.points[0]
    }

    pub fn end(&self) -> Point2 {
        *self.points.last().expect("segment has points")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub segments: Vec<TrajectorySegment>,
}

impl Trajectory {
    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    pub fn gas_length(&self) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.mode == Mode::Gas)
            .map(|s| s.length)
            .sum()
    }

    /// Fuel cost of the flown schedule.
    pub fn cost(&self, params: &BatteryParams) -> f64 {
        params.c_f * self.gas_length()
    }

    pub fn final_charge(&self) -> Option<f64> {
        self.segments.last().map(|s| s.q_end)
    }

    /// Appends a straight piece, merging it into the last segment when the
    /// mode matches.
    fn push(&mut self, a: Point2, b: Point2, mode: Mode, length: f64, q_start: f64, q_end: f64) {
        if let Some(last) = self.segments.last_mut() {
            if last.mode == mode {
                last.points.push(b);
                last.length += length;
                last.q_end = q_end;
                return;
            }
        }
        self.segments.push(TrajectorySegment {
            points: vec![a, b],
            mode,
            length,
            q_start,
            q_end,
        });
    }
}

/// Turns a start-to-sink node path into a flown trajectory.
///
/// Each edge is re-evaluated with the charge actually carried into it, which
/// is never below the node's label, so the trajectory is feasible and its
/// fuel cost never exceeds the path cost.
pub fn extract_trajectory(graph: &ChargeGraph, nodes: &[usize]) -> Result<Trajectory, PlanError> {
    let params = *graph.spatial().params();
    let mut traj = Trajectory::default();
    let Some(&first) = nodes.first() else {
        return Ok(traj);
    };
    if first != graph.start_node() {
        return Err(PlanError::Internal("path does not begin at the start node".into()));
    }
    let mut q = graph.q_init();
    for hop in nodes.windows(2) {
        let edge = graph
            .find_edge(hop[0], hop[1])
            .ok_or_else(|| PlanError::Internal(format!("no edge from node {} to {}", hop[0], hop[1])))?;
        let Some(spatial_id) = edge.spatial_edge else {
            continue;
        };
        let spatial = graph.spatial().edge(spatial_id);
        let from = graph.node(hop[0]).expect("node on path");
        let to = graph.node(hop[1]).expect("node on path");
        let a = graph.spatial().vertex(from.spatial_id).position;
        let b = graph.spatial().vertex(to.spatial_id).position;
        let target = to.label.arrival();
        let traversal = evaluate_edge(q, target, spatial.length, spatial.constraint, &params)
            .ok()
            .filter(|t| t.feasible)
            .ok_or_else(|| {
                PlanError::Internal(format!(
                    "edge {spatial_id} infeasible from carried charge {q} to {target}"
                ))
            })?;
        let mut along = 0.0;
        for piece in &traversal.schedule {
            let q_next = simulate_schedule(q, std::slice::from_ref(piece), &params).q_end;
            let p0 = a.lerp(b, along / spatial.length);
            along += piece.length;
            let p1 = if along >= spatial.length {
                b
            } else {
                a.lerp(b, along / spatial.length)
            };
            traj.push(p0, p1, piece.mode, piece.length, q, q_next);
            q = q_next;
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    Empty,
    InitialCharge { expected: f64, found: f64 },
    Discontinuous { segment: usize },
    ChargeJump { segment: usize },
    BadLength { segment: usize },
    BadChargeChange { segment: usize },
    OutOfBounds { segment: usize, charge: f64 },
    TerminalCharge { required: f64, found: f64 },
    GasInQuietZone { segment: usize, zone: u32 },
    EntersNoFlyZone { segment: usize, zone: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "trajectory is empty"),
            Violation::InitialCharge { expected, found } => {
                write!(f, "starts with charge {found}, expected {expected}")
            }
            Violation::Discontinuous { segment } => {
                write!(f, "segment {segment} does not start where the previous ends")
            }
            Violation::ChargeJump { segment } => write!(f, "charge jumps at the start of segment {segment}"),
            Violation::BadLength { segment } => write!(f, "segment {segment} length does not match its polyline"),
            Violation::BadChargeChange { segment } => {
                write!(f, "segment {segment} charge change does not match its mode and length")
            }
            Violation::OutOfBounds { segment, charge } => {
                write!(
                    f,
                    "segment {segment} reaches charge {charge} outside the battery bounds"
                )
            }
            Violation::TerminalCharge { required, found } => {
                write!(f, "ends with charge {found}, at least {required} required")
            }
            Violation::GasInQuietZone { segment, zone } => {
                write!(f, "segment {segment} uses gas inside quiet zone {zone}")
            }
            Violation::EntersNoFlyZone { segment, zone } => write!(f, "segment {segment} enters no-fly zone {zone}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryAudit {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

/// Audits a trajectory against the battery model and the zone rules.
pub fn validate_trajectory(
    traj: &Trajectory,
    zones: &[Zone],
    params: &BatteryParams,
    q_init: f64,
    q_goal: f64,
) -> TrajectoryAudit {
    let mut v = Vec::new();
    if traj.segments.is_empty() {
        v.push(Violation::Empty);
    }
    if let Some(first) = traj.segments.first() {
        if (first.q_start - q_init).abs() > EPS_Q {
            v.push(Violation::InitialCharge {
                expected: q_init,
                found: first.q_start,
            });
        }
    }
    for (i, s) in traj.segments.iter().enumerate() {
        if i > 0 {
            let prev = &traj.segments[i - 1];
            if s.points.is_empty() || prev.end().distance(s.start()) > 1e-9 {
                v.push(Violation::Discontinuous { segment: i });
            }
            if (prev.q_end - s.q_start).abs() > EPS_Q {
                v.push(Violation::ChargeJump { segment: i });
            }
        }
        let poly: f64 = s.points.windows(2).map(|w| w[0].distance(w[1])).sum();
        if s.points.len() < 2 || (poly - s.length).abs() > 1e-9 * (1.0 + s.length) {
            v.push(Violation::BadLength { segment: i });
        }
        let expected = params.rate(s.mode) * s.length;
        if ((s.q_end - s.q_start) - expected).abs() > EPS_Q * (1.0 + s.length) {
            v.push(Violation::BadChargeChange { segment: i });
        }
        for charge in [s.q_start, s.q_end] {
            if charge < params.q_min - EPS_Q || charge > params.q_max + EPS_Q || !charge.is_finite() {
                v.push(Violation::OutOfBounds { segment: i, charge });
            }
        }
        for w in s.points.windows(2) {
            for z in zones {
                if !segment_intersects_interior(w[0], w[1], &z.polygon) {
                    continue;
                }
                match z.kind {
                    ZoneKind::NoFly => v.push(Violation::EntersNoFlyZone { segment: i, zone: z.id }),
                    ZoneKind::Quiet if s.mode == Mode::Gas => {
                        v.push(Violation::GasInQuietZone { segment: i, zone: z.id })
                    }
                    ZoneKind::Quiet => {}
                }
            }
        }
    }
    if let Some(q_end) = traj.final_charge() {
        if q_end < q_goal - EPS_Q {
            v.push(Violation::TerminalCharge {
                required: q_goal,
                found: q_end,
            });
        }
    }
    v.dedup();
    TrajectoryAudit {
        valid: v.is_empty(),
        violations: v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexPolygon;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn seg(points: Vec<Point2>, mode: Mode, q_start: f64) -> TrajectorySegment {
        let length: f64 = points.windows(2).map(|w| w[0].distance(w[1])).sum();
        let q_end = q_start + BatteryParams::default().rate(mode) * length;
        TrajectorySegment {
            points,
            mode,
            length,
            q_start,
            q_end,
        }
    }

    fn square_zone(kind: ZoneKind) -> Zone {
        let poly = ConvexPolygon::new(vec![p(40.0, -10.0), p(60.0, -10.0), p(60.0, 10.0), p(40.0, 10.0)]).unwrap();
        Zone::new(1, kind, poly)
    }

    #[test]
    fn merge_joins_same_mode_pieces() {
        let mut t = Trajectory::default();
        t.push(p(0.0, 0.0), p(10.0, 0.0), Mode::Gas, 10.0, 50.0, 51.0);
        t.push(p(10.0, 0.0), p(10.0, 10.0), Mode::Gas, 10.0, 51.0, 52.0);
        t.push(p(10.0, 10.0), p(20.0, 10.0), Mode::Electric, 10.0, 52.0, 50.0);
        assert_eq!(t.segments.len(), 2);
        assert_eq!(t.segments[0].points.len(), 3);
        assert_eq!(t.segments[0].length, 20.0);
        assert_eq!(t.segments[0].q_end, 52.0);
        assert_eq!(t.gas_length(), 20.0);
    }

    #[test]
    fn well_formed_trajectory_passes() {
        let params = BatteryParams::default();
        let s1 = seg(vec![p(0.0, 20.0), p(30.0, 0.0)], Mode::Gas, 80.0);
        let s2 = seg(vec![p(30.0, 0.0), p(70.0, 0.0)], Mode::Electric, s1.q_end);
        let t = Trajectory { segments: vec![s1, s2] };
        let audit = validate_trajectory(&t, &[square_zone(ZoneKind::Quiet)], &params, 80.0, 50.0);
        assert!(audit.valid, "{:?}", audit.violations);
    }

    #[test]
    fn gas_through_quiet_zone_is_flagged() {
        let params = BatteryParams::default();
        let t = Trajectory {
            segments: vec![seg(vec![p(0.0, 0.0), p(100.0, 0.0)], Mode::Gas, 80.0)],
        };
        let audit = validate_trajectory(&t, &[square_zone(ZoneKind::Quiet)], &params, 80.0, 50.0);
        assert!(!audit.valid);
        assert_eq!(
            audit.violations,
            vec![Violation::GasInQuietZone { segment: 0, zone: 1 }]
        );
    }

    #[test]
    fn any_mode_through_no_fly_zone_is_flagged() {
        let params = BatteryParams::default();
        let t = Trajectory {
            segments: vec![seg(vec![p(0.0, 0.0), p(100.0, 0.0)], Mode::Electric, 80.0)],
        };
        let audit = validate_trajectory(&t, &[square_zone(ZoneKind::NoFly)], &params, 80.0, 50.0);
        assert_eq!(
            audit.violations,
            vec![Violation::EntersNoFlyZone { segment: 0, zone: 1 }]
        );
    }

    #[test]
    fn dipping_below_minimum_is_flagged() {
        let params = BatteryParams::default();
        let t = Trajectory {
            segments: vec![seg(vec![p(0.0, 0.0), p(500.0, 0.0)], Mode::Electric, 80.0)],
        };
        let audit = validate_trajectory(&t, &[], &params, 80.0, 0.0);
        assert!(!audit.valid);
        assert!(audit.violations.contains(&Violation::OutOfBounds {
            segment: 0,
            charge: -20.0
        }));
    }

    #[test]
    fn terminal_and_initial_charge_are_checked() {
        let params = BatteryParams::default();
        let t = Trajectory {
            segments: vec![seg(vec![p(0.0, 0.0), p(200.0, 0.0)], Mode::Electric, 80.0)],
        };
        let audit = validate_trajectory(&t, &[], &params, 80.0, 50.0);
        assert!(matches!(audit.violations[..], [Violation::TerminalCharge { .. }]));
        let audit = validate_trajectory(&t, &[], &params, 90.0, 0.0);
        assert!(matches!(audit.violations[..], [Violation::InitialCharge { .. }]));
    }

    #[test]
    fn broken_continuity_is_flagged() {
        let params = BatteryParams::default();
        let s1 = seg(vec![p(0.0, 0.0), p(10.0, 0.0)], Mode::Gas, 50.0);
        let mut s2 = seg(vec![p(11.0, 0.0), p(20.0, 0.0)], Mode::Electric, 51.0);
        s2.q_start += 0.5;
        s2.q_end += 0.5;
        let mut s3 = seg(vec![p(20.0, 0.0), p(30.0, 0.0)], Mode::Gas, s2.q_end);
        s3.length = 12.0;
        let audit = validate_trajectory(
            &Trajectory {
                segments: vec![s1, s2, s3],
            },
            &[],
            &params,
            50.0,
            0.0,
        );
        let v = audit.violations;
        assert!(v.contains(&Violation::Discontinuous { segment: 1 }));
        assert!(v.contains(&Violation::ChargeJump { segment: 1 }));
        assert!(v.contains(&Violation::BadLength { segment: 2 }));
        assert!(v.contains(&Violation::BadChargeChange { segment: 2 }));
        assert!(!validate_trajectory(&Trajectory::default(), &[], &params, 50.0, 0.0).valid);
    }
}
