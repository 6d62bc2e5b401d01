//! Linear battery model and the closed-form edge evaluator.
//!
//! Charge evolves with distance: it drops at `alpha` per unit length in
//! electric mode and rises at `beta` per unit length in gas mode, and must
//! stay within `[q_min, q_max]`. Because the dynamics are linear, the gas
//! fraction needed to go from one charge level to another is fixed by the
//! charge balance; switch placement only matters for staying within bounds.
//!
//! [`evaluate_edge`] is the production evaluator. [`brute_force_edge_check`]
//! is an independent grid search used to audit it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Uniform tolerance for charge comparisons, in charge units.
pub const EPS_Q: f64 = 1e-9;

/// Most switch points the evaluator will place on one edge.
pub const MAX_SWITCHES: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("invalid battery parameters: {0}")]
    InvalidParams(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryParams {
    /// Discharge per unit length in electric mode.
    pub alpha: f64,
    /// Recharge per unit length in gas mode.
    pub beta: f64,
    pub q_min: f64,
    pub q_max: f64,
    /// Fuel cost per unit length flown in gas mode.
    pub c_f: f64,
}

impl Default for BatteryParams {
    fn default() -> Self {
        Self {
            alpha: 0.2,
            beta: 0.1,
            q_min: 0.0,
            q_max: 100.0,
            c_f: 1.0,
        }
    }
}

impl BatteryParams {
    pub fn new(alpha: f64, beta: f64, q_min: f64, q_max: f64, c_f: f64) -> Result<Self, EnergyError> {
        let p = Self {
            alpha,
            beta,
            q_min,
            q_max,
            c_f,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), EnergyError> {
        let finite = [self.alpha, self.beta, self.q_min, self.q_max, self.c_f]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(EnergyError::InvalidParams("all parameters must be finite".into()));
        }
        if self.alpha <= 0.0 || self.beta <= 0.0 {
            return Err(EnergyError::InvalidParams(format!(
                "rates must be positive (alpha={}, beta={})",
                self.alpha, self.beta
            )));
        }
        if self.q_min >= self.q_max {
            return Err(EnergyError::InvalidParams(format!(
                "q_min ({}) must be below q_max ({})",
                self.q_min, self.q_max
            )));
        }
        if self.c_f < 0.0 {
            return Err(EnergyError::InvalidParams(format!(
                "c_f must be non-negative, got {}",
                self.c_f
            )));
        }
        Ok(())
    }

    pub fn capacity(&self) -> f64 {
        self.q_max - self.q_min
    }

    /// Longest edge on which three switches always suffice: one full
    /// discharge plus one full recharge.
    pub fn max_switchable_length(&self) -> f64 {
        self.capacity() * (1.0 / self.alpha + 1.0 / self.beta)
    }

    /// Length above which graph edges are split into pieces.
    pub fn split_length(&self) -> f64 {
        0.9 * self.max_switchable_length()
    }

    pub fn rate(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Gas => self.beta,
            Mode::Electric => -self.alpha,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Gas,
    Electric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConstraint {
    AnyMode,
    ElectricOnly,
}

/// One stretch of an edge flown in a single mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSegment {
    pub length: f64,
    pub mode: Mode,
}

impl ScheduleSegment {
    pub fn new(length: f64, mode: Mode) -> Self {
        Self { length, mode }
    }
}

/// Outcome of evaluating one edge between two charge levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeTraversal {
    pub feasible: bool,
    /// Gas fraction of the edge length.
    pub lambda: f64,
    pub cost: f64,
    pub schedule: Vec<ScheduleSegment>,
}

impl EdgeTraversal {
    fn infeasible() -> Self {
        Self {
            feasible: false,
            lambda: 0.0,
            cost: 0.0,
            schedule: Vec::new(),
        }
    }

    pub fn switch_count(&self) -> usize {
        self.schedule.len().saturating_sub(1)
    }
}

/// Result of the branch analysis, without building a schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Verdict {
    Infeasible,
    AllElectric,
    /// `lambda_1 + lambda_2 <= 1`: the charge has to be held near `q_max`.
    SaturatedMix {
        lambda: f64,
        lambda_1: f64,
        lambda_2: f64,
    },
    /// Gas first, then electric.
    Mix {
        lambda: f64,
    },
}

impl Verdict {
    pub(crate) fn lambda(&self) -> Option<f64> {
        match *self {
            Verdict::Infeasible => None,
            Verdict::AllElectric => Some(0.0),
            Verdict::SaturatedMix { lambda, .. } | Verdict::Mix { lambda } => Some(lambda),
        }
    }
}

pub(crate) fn check_edge_args(q_i: f64, q_j: f64, d: f64, params: &BatteryParams) -> Result<(), EnergyError> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(EnergyError::InvalidArgument(format!(
            "edge length must be positive, got {d}"
        )));
    }
    if d > params.max_switchable_length() * (1.0 + 1e-12) {
        return Err(EnergyError::InvalidArgument(format!(
            "edge length {d} exceeds {} and must be split before evaluation",
            params.max_switchable_length()
        )));
    }
    for (name, q) in [("q_i", q_i), ("q_j", q_j)] {
        if !(q >= params.q_min - EPS_Q && q <= params.q_max + EPS_Q) {
            return Err(EnergyError::InvalidArgument(format!(
                "{name}={q} outside [{}, {}]",
                params.q_min, params.q_max
            )));
        }
    }
    Ok(())
}

/// Branch analysis shared by [`evaluate_edge`] and the graph builders.
/// Arguments must already satisfy [`check_edge_args`].
pub(crate) fn classify(q_i: f64, q_j: f64, d: f64, constraint: ModeConstraint, params: &BatteryParams) -> Verdict {
    let BatteryParams {
        alpha,
        beta,
        q_min,
        q_max,
        ..
    } = *params;
    if q_j > q_max.min(q_i + beta * d) + EPS_Q {
        return Verdict::Infeasible;
    }
    let electric_arrival = q_i - alpha * d;
    if electric_arrival >= q_min - EPS_Q && q_j <= electric_arrival + EPS_Q {
        return Verdict::AllElectric;
    }
    if constraint == ModeConstraint::ElectricOnly {
        return Verdict::Infeasible;
    }
    let lambda_1 = ((q_max - q_i) / (beta * d)).max(0.0);
    let lambda_2 = ((q_max - q_j) / (alpha * d)).max(0.0);
    let (lambda, saturated) = if lambda_1 + lambda_2 <= 1.0 {
        (lambda_1 + alpha / (alpha + beta) * (1.0 - lambda_1 - lambda_2), true)
    } else {
        ((q_j - q_i + alpha * d) / ((alpha + beta) * d), false)
    };
    let slack = EPS_Q / ((alpha + beta) * d);
    if lambda < -slack || lambda > 1.0 + slack {
        return Verdict::Infeasible;
    }
    let lambda = lambda.clamp(0.0, 1.0);
    if saturated {
        Verdict::SaturatedMix {
            lambda,
            lambda_1,
            lambda_2,
        }
    } else {
        Verdict::Mix { lambda }
    }
}

/// Evaluates an edge of length `d` entered with charge `q_i` that must be left
/// with at least `q_j`. Returns the gas fraction, fuel cost and an explicit
/// switch schedule with at most three switches.
pub fn evaluate_edge(
    q_i: f64,
    q_j: f64,
    d: f64,
    constraint: ModeConstraint,
    params: &BatteryParams,
) -> Result<EdgeTraversal, EnergyError> {
    params.validate()?;
    check_edge_args(q_i, q_j, d, params)?;
    let verdict = classify(q_i, q_j, d, constraint, params);
    let Some(lambda) = verdict.lambda() else {
        return Ok(EdgeTraversal::infeasible());
    };
    let schedule = match verdict {
        Verdict::AllElectric => vec![ScheduleSegment::new(d, Mode::Electric)],
        Verdict::Mix { lambda } => gas_then_electric(lambda, d),
        Verdict::SaturatedMix { lambda, lambda_2, .. } => saturated_schedule(q_i, lambda, lambda_2, d, params),
        Verdict::Infeasible => unreachable!(),
    };
    Ok(EdgeTraversal {
        feasible: true,
        lambda,
        cost: params.c_f * lambda * d,
        schedule,
    })
}

fn gas_then_electric(lambda: f64, d: f64) -> Vec<ScheduleSegment> {
    let gas = lambda * d;
    normalize(vec![
        ScheduleSegment::new(gas, Mode::Gas),
        ScheduleSegment::new(d - gas, Mode::Electric),
    ])
}

/// Schedule for the case where gas-then-electric would overshoot `q_max`.
///
/// The last `lambda_2 * d` is electric from `q_max` down to `q_j`; before it a
/// gas stretch lands exactly on `q_max`. The remaining electric middle `y` is
/// flown first when the starting charge can absorb it (E/G/E), otherwise a
/// short gas burst `x` is inserted in front (G/E/G/E), sized halfway between
/// the least burst that keeps the dip above `q_min` and the largest that keeps
/// the first peak below `q_max`.
fn saturated_schedule(q_i: f64, lambda: f64, lambda_2: f64, d: f64, params: &BatteryParams) -> Vec<ScheduleSegment> {
    let gas = lambda * d;
    if q_i + params.beta * gas <= params.q_max + EPS_Q {
        return gas_then_electric(lambda, d);
    }
    let tail = lambda_2 * d;
    let middle = (d - gas - tail).max(0.0);
    let burst_lo = ((params.q_min - q_i + params.alpha * middle) / params.beta).max(0.0);
    let burst_hi = (params.q_max - q_i) / params.beta;
    let burst = if burst_lo <= 0.0 {
        0.0
    } else {
        (0.5 * (burst_lo + burst_hi)).min(gas)
    };
    normalize(vec![
        ScheduleSegment::new(burst, Mode::Gas),
        ScheduleSegment::new(middle, Mode::Electric),
        ScheduleSegment::new(gas - burst, Mode::Gas),
        ScheduleSegment::new(d - gas - middle, Mode::Electric),
    ])
}

/// Drops empty pieces and merges neighbours that share a mode. The total
/// length is preserved exactly by construction of the callers.
fn normalize(pieces: Vec<ScheduleSegment>) -> Vec<ScheduleSegment> {
    let mut out: Vec<ScheduleSegment> = Vec::with_capacity(pieces.len());
    for seg in pieces {
        if seg.length <= 0.0 {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.mode == seg.mode => last.length += seg.length,
            _ => out.push(seg),
        }
    }
    out
}

/// End charge and the extremes reached along a schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeTrace {
    pub q_end: f64,
    pub q_lo: f64,
    pub q_hi: f64,
}

/// Integrates the charge along a schedule. Extremes of a piecewise-linear
/// profile sit at segment endpoints, so only those are inspected.
pub fn simulate_schedule(q_start: f64, schedule: &[ScheduleSegment], params: &BatteryParams) -> ChargeTrace {
    let mut q = q_start;
    let mut trace = ChargeTrace {
        q_end: q_start,
        q_lo: q_start,
        q_hi: q_start,
    };
    for seg in schedule {
        q += params.rate(seg.mode) * seg.length;
        trace.q_lo = trace.q_lo.min(q);
        trace.q_hi = trace.q_hi.max(q);
    }
    trace.q_end = q;
    trace
}

/// Exhaustive grid search over switch placements, independent of
/// [`evaluate_edge`]: the edge is cut into `ceil(d / grid)` equal cells and
/// every mode pattern with at most [`MAX_SWITCHES`] switches on cell
/// boundaries, starting in either mode, is tried.
pub fn brute_force_edge_check(
    q_i: f64,
    q_j: f64,
    d: f64,
    constraint: ModeConstraint,
    params: &BatteryParams,
    grid: f64,
) -> bool {
    brute_force_edge_check_with_slack(q_i, q_j, d, constraint, params, grid, EPS_Q)
}

/// [`brute_force_edge_check`] with a caller-chosen tolerance on the charge
/// bounds and the arrival requirement.
pub fn brute_force_edge_check_with_slack(
    q_i: f64,
    q_j: f64,
    d: f64,
    constraint: ModeConstraint,
    params: &BatteryParams,
    grid: f64,
    slack: f64,
) -> bool {
    assert!(grid > 0.0 && d > 0.0, "grid and edge length must be positive");
    let cells = ((d / grid - 1e-9).ceil() as usize).max(1);
    let h = d / cells as f64;
    let BatteryParams {
        alpha,
        beta,
        q_min,
        q_max,
        ..
    } = *params;
    // After k cells of which g were gas, the charge is q_i + (beta*g - alpha*(k-g))*h.
    let charge = |k: usize, g: usize| q_i + (beta * g as f64 - alpha * (k - g) as f64) * h;
    let modes: &[Mode] = match constraint {
        ModeConstraint::AnyMode => &[Mode::Gas, Mode::Electric],
        ModeConstraint::ElectricOnly => &[Mode::Electric],
    };
    let max_switches = match constraint {
        ModeConstraint::AnyMode => MAX_SWITCHES,
        ModeConstraint::ElectricOnly => 0,
    };
    if !(q_i >= q_min - slack && q_i <= q_max + slack) {
        return false;
    }
    // reach[mode][switches] = set of gas-cell counts g reachable at the current cell boundary
    let words = (cells + 1).div_ceil(64);
    let mut reach = vec![vec![Bits::new(words); max_switches + 1]; 2];
    let mut next = reach.clone();
    for k in 0..cells {
        for set in next.iter_mut().flatten() {
            set.clear();
        }
        if k == 0 {
            for &m in modes {
                let mut start = Bits::new(words);
                start.set(0);
                advance_into(&start, m, &mut next[m as usize][0]);
            }
        } else {
            for &m in modes {
                for s in 0..=max_switches {
                    let cur = &reach[m as usize][s];
                    if cur.is_empty() {
                        continue;
                    }
                    advance_into(cur, m, &mut next[m as usize][s]);
                    if s < max_switches {
                        for &m2 in modes.iter().filter(|&&m2| m2 != m) {
                            advance_into(cur, m2, &mut next[m2 as usize][s + 1]);
                        }
                    }
                }
            }
        }
        // keep only gas counts whose charge is within bounds at boundary k+1;
        // charge grows with g, so the admissible counts form a range
        let kk = k + 1;
        let in_bounds = |g: usize| {
            let q = charge(kk, g);
            q >= q_min - slack && q <= q_max + slack
        };
        let Some((g_lo, g_hi)) = admissible_range(kk, in_bounds) else {
            return false;
        };
        for set in next.iter_mut().flatten() {
            set.retain_range(g_lo, g_hi);
        }
        std::mem::swap(&mut reach, &mut next);
    }
    reach
        .iter()
        .flatten()
        .any(|set| set.any_in(cells, |g| charge(cells, g) >= q_j - slack))
}

/// Smallest and largest `g` in `0..=k` passing `ok`, assuming `ok` holds on a
/// contiguous range.
fn admissible_range(k: usize, ok: impl Fn(usize) -> bool) -> Option<(usize, usize)> {
    let lo = (0..=k).find(|&g| ok(g))?;
    let hi = (lo..=k).rev().find(|&g| ok(g))?;
    Some((lo, hi))
}

fn advance_into(src: &Bits, mode: Mode, dst: &mut Bits) {
    match mode {
        Mode::Gas => dst.or_shifted_by_one(src),
        Mode::Electric => dst.or(src),
    }
}

/// Minimal fixed-width bitset for the grid search.
#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(words: usize) -> Self {
        Bits(vec![0; words])
    }
    fn clear(&mut self) {
        self.0.iter_mut().for_each(|w| *w = 0);
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
    fn or(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }
    fn or_shifted_by_one(&mut self, other: &Bits) {
        let mut carry = 0;
        for (a, &b) in self.0.iter_mut().zip(&other.0) {
            *a |= (b << 1) | carry;
            carry = b >> 63;
        }
    }
    /// Clears every bit outside `lo..=hi`.
    fn retain_range(&mut self, lo: usize, hi: usize) {
        for (w, word) in self.0.iter_mut().enumerate() {
            let base = w * 64;
            let mut mask = u64::MAX;
            if lo > base {
                mask &= if lo - base >= 64 { 0 } else { u64::MAX << (lo - base) };
            }
            if hi < base + 63 {
                mask &= if hi < base { 0 } else { u64::MAX >> (63 - (hi - base)) };
            }
            *word &= mask;
        }
    }
    fn any_in(&self, max: usize, pred: impl Fn(usize) -> bool) -> bool {
        (0..=max).any(|i| self.get(i) && pred(i))
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn params() -> BatteryParams {
        BatteryParams::default()
    }

    fn constraint() -> impl Strategy<Value = ModeConstraint> {
        prop_oneof![Just(ModeConstraint::AnyMode), Just(ModeConstraint::ElectricOnly)]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn feasible_schedules_respect_bounds(q_i in 0.0f64..=100.0, q_j in 0.0f64..=100.0, d in 0.01f64..1500.0, c in constraint()) {
            let p = params();
            let t = evaluate_edge(q_i, q_j, d, c, &p).unwrap();
            if t.feasible {
                prop_assert!((0.0..=1.0).contains(&t.lambda));
                prop_assert!((t.cost - p.c_f * t.lambda * d).abs() < 1e-9);
                let trace = simulate_schedule(q_i, &t.schedule, &p);
                prop_assert!(trace.q_end >= q_j - EPS_Q);
                prop_assert!(trace.q_lo >= p.q_min - EPS_Q);
                prop_assert!(trace.q_hi <= p.q_max + EPS_Q);
                prop_assert!(t.schedule.len() <= MAX_SWITCHES + 1);
                if c == ModeConstraint::ElectricOnly {
                    prop_assert_eq!(t.cost, 0.0);
                    prop_assert_eq!(t.lambda, 0.0);
                }
            }
        }

        #[test]
        fn two_segment_charge_balance(q_i in 0.0f64..=100.0, q_j in 0.0f64..=100.0, d in 1.0f64..1500.0) {
            let p = params();
            if let Verdict::Mix { lambda } = classify(q_i, q_j, d, ModeConstraint::AnyMode, &p) {
                let arrival = q_i + lambda * p.beta * d - (1.0 - lambda) * p.alpha * d;
                prop_assert!((arrival - q_j).abs() < 1e-9);
            }
        }

        #[test]
        fn cost_is_monotone_in_target(q_i in 0.0f64..=100.0, q_j in 0.0f64..=100.0, lower in 0.0f64..=1.0, d in 0.01f64..1500.0) {
            let p = params();
            let hi = evaluate_edge(q_i, q_j, d, ModeConstraint::AnyMode, &p).unwrap();
            let q_lower = q_j * lower;
            let lo = evaluate_edge(q_i, q_lower, d, ModeConstraint::AnyMode, &p).unwrap();
            if hi.feasible {
                prop_assert!(lo.feasible);
                prop_assert!(lo.cost <= hi.cost + 1e-9);
            }
        }

        #[test]
        fn agrees_with_grid_search(q_i in 0.0f64..=100.0, q_j in 0.0f64..=100.0, d in 1.0f64..1500.0, c in constraint()) {
            let p = params();
            let grid = d / 1000.0;
            let tol = 2.0 * (p.alpha + p.beta) * grid;
            let t = evaluate_edge(q_i, q_j, d, c, &p).unwrap();
            let brute = brute_force_edge_check(q_i, q_j, d, c, &p, grid);
            if t.feasible && !brute {
                prop_assert!(brute_force_edge_check_with_slack(q_i, q_j, d, c, &p, grid, tol));
            }
            if !t.feasible && brute {
                let relaxed = evaluate_edge(q_i, (q_j - tol).max(p.q_min), d, c, &p).unwrap();
                prop_assert!(relaxed.feasible);
            }
        }
    }
}
