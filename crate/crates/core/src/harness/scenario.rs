use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{mix_seed, HarnessError, MapFile};
use crate::energy::BatteryParams;
use crate::geometry::{point_in_interior, Point2};
use crate::planner::Scenario;

/// Endpoints and charges of one query; the discretization is chosen later.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub start: Point2,
    pub goal: Point2,
    pub q_init: f64,
    pub q_goal: f64,
}

impl ScenarioSpec {
    pub fn to_scenario(
        &self,
        map: &MapFile,
        delta_l: f64,
        delta_q: f64,
        n_l: usize,
        params: BatteryParams,
    ) -> Scenario {
        Scenario {
            zones: map.zones.clone(),
            start: self.start,
            goal: self.goal,
            q_init: self.q_init,
            q_goal: self.q_goal,
            delta_l,
            delta_q,
            n_l,
            params,
        }
    }
}

/// Endpoint draws allowed per scenario.
pub const MAX_ENDPOINT_ATTEMPTS: usize = 10_000;

/// `count` scenarios with endpoints uniform in the map bounds, outside every
/// zone interior and at least `min_dist` apart. Scenario `i` is drawn from
/// its own stream seeded by `(seed, i)`.
pub fn generate_scenarios(
    map: &MapFile,
    count: usize,
    seed: u64,
    min_dist: f64,
    q_init: f64,
    q_goal: f64,
) -> Result<Vec<ScenarioSpec>, HarnessError> {
    let (w, h) = map.bounds;
    if !(min_dist >= 0.0 && min_dist < w.hypot(h)) {
        return Err(HarnessError::InvalidConfig(format!(
            "minimum distance {min_dist} must be below the map diagonal"
        )));
    }
    let free = |p: Point2| map.zones.iter().all(|z| !point_in_interior(p, &z.polygon));
    (0..count)
        .map(|i| {
            let row_seed = mix_seed(&[seed, i as u64]);
            let mut rng = ChaCha8Rng::seed_from_u64(row_seed);
            for _ in 0..MAX_ENDPOINT_ATTEMPTS {
                let start = Point2::new(rng.gen_range(0.0..=w), rng.gen_range(0.0..=h));
                let goal = Point2::new(rng.gen_range(0.0..=w), rng.gen_range(0.0..=h));
                if free(start) && free(goal) && start.distance(goal) >= min_dist.max(1e-6) {
                    return Ok(ScenarioSpec {
                        seed: row_seed,
                        start,
                        goal,
                        q_init,
                        q_goal,
                    });
                }
            }
            Err(HarnessError::Placement(format!(
                "no endpoints for scenario {i} after {MAX_ENDPOINT_ATTEMPTS} draws"
            )))
        })
        .collect()
}
