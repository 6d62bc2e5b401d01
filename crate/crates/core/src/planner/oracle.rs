use super::PlanError;
use crate::energy::{evaluate_edge, EPS_Q};
use crate::graph::{SampledGraph, VertexKind};

/// Largest spatial graph the exhaustive search accepts.
pub const ORACLE_MAX_VERTICES: usize = 8;
/// Largest charge grid the exhaustive search accepts.
pub const ORACLE_MAX_LEVELS: usize = 5;

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut out: Vec<f64> = (0..)
        .map(|k| lo + k as f64 * step)
        .take_while(|&q| q < hi - EPS_Q)
        .collect();
    out.push(hi);
    out
}

/// Exhaustive optimum over every walk from the start to the goal in an
/// attached spatial graph, with every assignment of grid charges to the
/// visited vertices. Vertices may be revisited at different charges, so
/// recharge detours are covered. Edges are evaluated directly with
/// [`evaluate_edge`]; no charge graph is built.
///
/// Returns `Ok(None)` when no assignment is feasible.
pub fn brute_force_optimum(
    gs: &SampledGraph,
    delta_q: f64,
    q_init: f64,
    q_goal: f64,
) -> Result<Option<f64>, PlanError> {
    let params = *gs.params();
    let (start, goal) = gs
        .endpoints()
        .ok_or_else(|| PlanError::InvalidArgument("spatial graph has no endpoints".into()))?;
    if delta_q.is_nan() || delta_q <= 0.0 {
        return Err(PlanError::InvalidArgument("charge step must be positive".into()));
    }
    let levels = grid(params.q_min, params.q_max, delta_q);
    let goal_levels = grid(q_goal, params.q_max, delta_q);
    if gs.vertex_count() > ORACLE_MAX_VERTICES || levels.len() > ORACLE_MAX_LEVELS {
        return Err(PlanError::InvalidArgument(format!(
            "instance too large for exhaustive search: {} vertices, {} charge levels (limits {ORACLE_MAX_VERTICES}, {ORACLE_MAX_LEVELS})",
            gs.vertex_count(),
            levels.len()
        )));
    }
    let charges_of = |v: usize| -> Vec<f64> {
        match gs.vertex(v).kind {
            VertexKind::Start => vec![q_init],
            VertexKind::Goal => goal_levels.clone(),
            _ => levels.clone(),
        }
    };

    // state = (vertex, charge index); every feasible transition listed once
    let mut states = Vec::new();
    for v in 0..gs.vertex_count() {
        for (k, _) in charges_of(v).iter().enumerate() {
            states.push((v, k));
        }
    }
    let index = |v: usize, k: usize| states.iter().position(|&s| s == (v, k)).expect("state");
    let mut transitions = Vec::new();
    for e in gs.edges() {
        let (a, b) = e.endpoints;
        for (u, w) in [(a, b), (b, a)] {
            if w == start || u == goal {
                continue;
            }
            for (ku, &qu) in charges_of(u).iter().enumerate() {
                for (kw, &qw) in charges_of(w).iter().enumerate() {
                    let t = evaluate_edge(qu, qw, e.length, e.constraint, &params)?;
                    if t.feasible {
                        transitions.push((index(u, ku), index(w, kw), t.cost));
                    }
                }
            }
        }
    }

    // a cheapest walk never repeats a state, so |states| rounds suffice
    let mut best = vec![f64::INFINITY; states.len()];
    best[index(start, 0)] = 0.0;
    for _ in 0..states.len() {
        let mut changed = false;
        for &(from, to, cost) in &transitions {
            if best[from] + cost < best[to] {
                best[to] = best[from] + cost;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let answer = (0..goal_levels.len())
        .map(|k| best[index(goal, k)])
        .fold(f64::INFINITY, f64::min);
    Ok(answer.is_finite().then_some(answer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{BatteryParams, ModeConstraint};
    use crate::geometry::Point2;

    fn attached(d: f64) -> SampledGraph {
        SampledGraph::from_parts(Vec::new(), BatteryParams::default(), 1.0, &[], &[])
            .unwrap()
            .attach_endpoints(Point2::new(0.0, 0.0), Point2::new(d, 0.0))
            .unwrap()
    }

    #[test]
    fn two_vertex_example() {
        assert_eq!(
            brute_force_optimum(&attached(100.0), 25.0, 80.0, 50.0).unwrap(),
            Some(0.0)
        );
        let c = brute_force_optimum(&attached(100.0), 25.0, 80.0, 75.0)
            .unwrap()
            .unwrap();
        assert!((c - 50.0).abs() < 1e-9);
    }

    #[test]
    fn unreachable_goal_is_infeasible() {
        let base = SampledGraph::from_parts(Vec::new(), BatteryParams::default(), 1.0, &[], &[]).unwrap();
        let g = base
            .attach_with_edges(Point2::new(0.0, 0.0), Point2::new(5.0, 0.0), &[])
            .unwrap();
        assert_eq!(brute_force_optimum(&g, 25.0, 80.0, 50.0).unwrap(), None);
    }

    #[test]
    fn short_charge_on_electric_edge_is_infeasible() {
        let verts = [
            (Point2::new(0.0, 0.0), VertexKind::QuietSample, Some(0)),
            (Point2::new(400.0, 0.0), VertexKind::QuietSample, Some(0)),
        ];
        let base = SampledGraph::from_parts(
            Vec::new(),
            BatteryParams::default(),
            1.0,
            &verts,
            &[(0, 1, ModeConstraint::ElectricOnly)],
        )
        .unwrap();
        let g = base
            .attach_with_edges(
                Point2::new(0.0, -1.0),
                Point2::new(400.0, -1.0),
                &[(2, 0, ModeConstraint::AnyMode), (1, 3, ModeConstraint::AnyMode)],
            )
            .unwrap();
        assert_eq!(brute_force_optimum(&g, 25.0, 60.0, 50.0).unwrap(), None);
    }

    #[test]
    fn size_guard() {
        assert!(brute_force_optimum(&attached(100.0), 10.0, 80.0, 50.0).is_err());
    }
}
