use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{generate_random_map, generate_scenarios, mix_seed, HarnessError, MapFile, MapGenConfig, ScenarioSpec};
use crate::energy::{BatteryParams, EPS_Q};
use crate::graph::{build_base_graph, ChargeLayer, SampledGraph};
use crate::planner::{build_layer, gap_percent, solve_on_layer, PlanKind, PlanResult};

/// Where a benchmark map comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapRef {
    /// Random map; the seed defaults to one derived from the config seed.
    Random {
        zones: usize,
        seed: Option<u64>,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub maps: Vec<MapRef>,
    pub scenarios_per_map: usize,
    pub seed: u64,
    /// Charge samples per unit battery range; `delta_q = capacity / N`.
    pub discretizations: Vec<usize>,
    /// Interval counts per discretization; empty means equal to it.
    pub n_l: Vec<usize>,
    pub params: BatteryParams,
    pub min_dist: f64,
    pub delta_l: f64,
    pub q_init: f64,
    pub q_goal: f64,
    pub map_gen: MapGenConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            maps: [10, 15, 20, 25]
                .into_iter()
                .map(|zones| MapRef::Random { zones, seed: None })
                .collect(),
            scenarios_per_map: 50,
            seed: 1,
            discretizations: vec![20, 30, 40],
            n_l: Vec::new(),
            params: BatteryParams::default(),
            min_dist: 1000.0,
            delta_l: 100.0,
            q_init: 80.0,
            q_goal: 50.0,
            map_gen: MapGenConfig::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.params
            .validate()
            .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        let bad = |msg: &str| Err(HarnessError::InvalidConfig(msg.into()));
        if self.maps.is_empty() {
            return bad("at least one map is required");
        }
        if self.scenarios_per_map == 0 {
            return bad("scenarios_per_map must be at least 1");
        }
        if self.discretizations.is_empty() || self.discretizations.contains(&0) {
            return bad("discretizations must be non-empty and positive");
        }
        if !self.n_l.is_empty() && (self.n_l.len() != self.discretizations.len() || self.n_l.contains(&0)) {
            return bad("n_l must be empty or give one positive count per discretization");
        }
        if self.delta_l.is_nan() || self.delta_l <= 0.0 {
            return bad("delta_l must be positive");
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    fn n_l_for(&self, index: usize) -> usize {
        self.n_l.get(index).copied().unwrap_or(self.discretizations[index])
    }

    fn resolve_map(&self, index: usize) -> Result<MapFile, HarnessError> {
        match &self.maps[index] {
            MapRef::Random { zones, seed } => {
                let seed = seed.unwrap_or_else(|| mix_seed(&[self.seed, index as u64, 0x6d6170]));
                generate_random_map(*zones, seed, &self.map_gen)
            }
            MapRef::File { path } => MapFile::load(path),
        }
    }
}

/// One (map, scenario, discretization) measurement. Costs are absent when
/// the corresponding plan failed; `status` then names the failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub map: String,
    pub map_index: usize,
    pub scenario: usize,
    pub seed: u64,
    pub discretization: usize,
    pub n_l: usize,
    pub start_x: f64,
    pub start_y: f64,
    pub goal_x: f64,
    pub goal_y: f64,
    pub ub: Option<f64>,
    pub ub_trajectory: Option<f64>,
    pub lb: Option<f64>,
    pub gap_pct: Option<f64>,
    pub baseline: Option<f64>,
    pub savings_pct: Option<f64>,
    pub valid: Option<bool>,
    pub status: String,
    pub offline_ms: f64,
    pub online_ms: f64,
    pub lb_ms: f64,
    pub baseline_ms: f64,
}

const HEADER: [&str; 22] = [
    "map",
    "map_index",
    "scenario",
    "seed",
    "discretization",
    "n_l",
    "start_x",
    "start_y",
    "goal_x",
    "goal_y",
    "ub",
    "ub_trajectory",
    "lb",
    "gap_pct",
    "baseline",
    "savings_pct",
    "valid",
    "status",
    "offline_ms",
    "online_ms",
    "lb_ms",
    "baseline_ms",
];

impl BenchRow {
    /// The row without its wall-clock columns.
    pub fn without_timings(&self) -> BenchRow {
        BenchRow {
            offline_ms: 0.0,
            online_ms: 0.0,
            lb_ms: 0.0,
            baseline_ms: 0.0,
            ..self.clone()
        }
    }
}

/// Percentage saved by the hybrid plan relative to the baseline.
pub fn savings_percent(baseline: f64, ub: f64) -> Option<f64> {
    if baseline > EPS_Q {
        Some(100.0 * (baseline - ub) / baseline)
    } else if ub <= EPS_Q {
        Some(0.0)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    /// Summary of `values`, with linearly interpolated quartiles. `None` for
    /// an empty sample.
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Some(Stats {
            count: v.len(),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            median: q(0.5),
            q1: q(0.25),
            q3: q(0.75),
            min: v[0],
            max: v[v.len() - 1],
        })
    }
}

/// Aggregates for one discretization, optionally restricted to one map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub map: Option<String>,
    pub discretization: usize,
    pub rows: usize,
    pub failures: usize,
    pub gap: Option<Stats>,
    pub savings: Option<Stats>,
    pub online_ms: Option<Stats>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    rows: Vec<BenchRow>,
}

impl BenchReport {
    /// Wraps rows after checking UB ≥ LB and baseline ≥ UB in every row.
    pub fn from_rows(rows: Vec<BenchRow>) -> Result<Self, HarnessError> {
        let mut problems = Vec::new();
        for r in &rows {
            let tag = format!(
                "map {} scenario {} discretization {}",
                r.map, r.scenario, r.discretization
            );
            if let (Some(ub), Some(lb)) = (r.ub, r.lb) {
                if ub < lb - EPS_Q {
                    problems.push(format!("{tag}: upper bound {ub} below lower bound {lb}"));
                }
            }
            if let (Some(ub), Some(base)) = (r.ub, r.baseline) {
                if base < ub - EPS_Q {
                    problems.push(format!("{tag}: baseline {base} below upper bound {ub}"));
                }
            }
        }
        if !problems.is_empty() {
            return Err(HarnessError::InvariantViolation(problems.join("; ")));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[BenchRow] {
        &self.rows
    }

    pub fn discretizations(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.rows.iter().map(|r| r.discretization).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    fn summarize<'a>(
        map: Option<String>,
        discretization: usize,
        rows: impl Iterator<Item = &'a BenchRow>,
    ) -> SummaryRow {
        let rows: Vec<&BenchRow> = rows.collect();
        let pick = |f: fn(&BenchRow) -> Option<f64>| Stats::of(&rows.iter().filter_map(|r| f(r)).collect::<Vec<_>>());
        SummaryRow {
            map,
            discretization,
            rows: rows.len(),
            failures: rows.iter().filter(|r| r.status != "ok").count(),
            gap: pick(|r| r.gap_pct),
            savings: pick(|r| r.savings_pct),
            online_ms: pick(|r| r.ub.map(|_| r.online_ms)),
        }
    }

    /// Aggregates per discretization over all maps.
    pub fn summary(&self) -> Vec<SummaryRow> {
        self.discretizations()
            .into_iter()
            .map(|d| Self::summarize(None, d, self.rows.iter().filter(|r| r.discretization == d)))
            .collect()
    }

    /// Aggregates per map and discretization.
    pub fn summary_by_map(&self) -> Vec<SummaryRow> {
        let mut maps: Vec<(usize, String)> = self.rows.iter().map(|r| (r.map_index, r.map.clone())).collect();
        maps.sort();
        maps.dedup();
        let mut out = Vec::new();
        for (index, name) in maps {
            for d in self.discretizations() {
                let rows = self
                    .rows
                    .iter()
                    .filter(|r| r.map_index == index && r.discretization == d);
                out.push(Self::summarize(Some(name.clone()), d, rows));
            }
        }
        out
    }

    pub fn write_csv(&self, w: impl Write) -> Result<(), HarnessError> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        out.write_record(HEADER)?;
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, HarnessError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Parses a report written by [`BenchReport::write_csv`], re-checking
    /// the row invariants.
    pub fn read_csv(r: impl Read) -> Result<Self, HarnessError> {
        let mut reader = csv::Reader::from_reader(r);
        let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
        if header != HEADER {
            return Err(HarnessError::InvalidConfig("unexpected report header".into()));
        }
        let rows = reader.deserialize().collect::<Result<Vec<BenchRow>, _>>()?;
        Self::from_rows(rows)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), HarnessError> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// Charge layers of one discretization, shared by all its queries.
struct Layers {
    upper: Arc<ChargeLayer>,
    lower: Arc<ChargeLayer>,
    baseline: Arc<ChargeLayer>,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Runs every (map, scenario, discretization) combination. Failures of
/// single queries are recorded in their rows; the run itself only fails on
/// bad configuration, unusable maps or violated bound invariants.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport, HarnessError> {
    run_benchmark_with(config, |_| {})
}

/// [`run_benchmark`] calling `on_row` after each finished row.
pub fn run_benchmark_with(
    config: &BenchConfig,
    mut on_row: impl FnMut(&BenchRow),
) -> Result<BenchReport, HarnessError> {
    config.validate()?;
    let mut rows = Vec::new();
    for map_index in 0..config.maps.len() {
        let map = config.resolve_map(map_index)?;
        let t = Instant::now();
        let base = build_base_graph(&map.zones, config.delta_l, &config.params)?;
        let base_ms = ms(t);
        let specs = generate_scenarios(
            &map,
            config.scenarios_per_map,
            mix_seed(&[config.seed, map_index as u64]),
            config.min_dist,
            config.q_init,
            config.q_goal,
        )?;
        for (di, &n) in config.discretizations.iter().enumerate() {
            let delta_q = config.params.capacity() / n as f64;
            let n_l = config.n_l_for(di);
            let t = Instant::now();
            let layers = Layers {
                upper: Arc::new(build_layer(&base, PlanKind::UpperBound, delta_q, n_l)?),
                lower: Arc::new(build_layer(&base, PlanKind::LowerBound, delta_q, n_l)?),
                baseline: Arc::new(build_layer(&base, PlanKind::Baseline, delta_q, n_l)?),
            };
            let offline_ms = base_ms + ms(t);
            for (si, spec) in specs.iter().enumerate() {
                let mut row = BenchRow {
                    map: map.name.clone(),
                    map_index,
                    scenario: si,
                    seed: spec.seed,
                    discretization: n,
                    n_l,
                    start_x: spec.start.x,
                    start_y: spec.start.y,
                    goal_x: spec.goal.x,
                    goal_y: spec.goal.y,
                    ub: None,
                    ub_trajectory: None,
                    lb: None,
                    gap_pct: None,
                    baseline: None,
                    savings_pct: None,
                    valid: None,
                    status: String::new(),
                    offline_ms,
                    online_ms: 0.0,
                    lb_ms: 0.0,
                    baseline_ms: 0.0,
                };
                run_row(&base, &layers, spec, &config.params, &mut row);
                on_row(&row);
                rows.push(row);
            }
        }
    }
    BenchReport::from_rows(rows)
}

fn run_row(base: &SampledGraph, layers: &Layers, spec: &ScenarioSpec, params: &BatteryParams, row: &mut BenchRow) {
    let mut failures = Vec::new();
    let t = Instant::now();
    let attached = match base.attach_endpoints(spec.start, spec.goal) {
        Ok(g) => Arc::new(g),
        Err(e) => {
            row.status = e.to_string();
            return;
        }
    };
    let upper = solve_on_layer(&layers.upper, &attached, spec.q_init, spec.q_goal);
    row.online_ms = ms(t);
    let t = Instant::now();
    let lower = solve_on_layer(&layers.lower, &attached, spec.q_init, spec.q_goal);
    row.lb_ms = ms(t);
    let t = Instant::now();
    let baseline = solve_on_layer(&layers.baseline, &attached, spec.q_init, spec.q_goal);
    row.baseline_ms = ms(t);

    let mut valid = None;
    let mut audit = |r: &PlanResult| {
        valid = Some(valid.unwrap_or(true) && r.is_valid());
    };
    match &upper {
        Ok(r) => {
            row.ub = Some(r.cost);
            row.ub_trajectory = r.trajectory_cost(params);
            audit(r);
        }
        Err(e) => failures.push(e.to_string()),
    }
    match &lower {
        Ok(r) => row.lb = Some(r.cost),
        Err(e) => failures.push(e.to_string()),
    }
    match &baseline {
        Ok(r) => {
            row.baseline = Some(r.cost);
            audit(r);
        }
        Err(e) => failures.push(e.to_string()),
    }
    row.valid = valid;
    if let (Some(ub), Some(lb)) = (row.ub, row.lb) {
        row.gap_pct = gap_percent(ub, lb).ok().and_then(|g| g.percent());
    }
    if let (Some(ub), Some(base)) = (row.ub, row.baseline) {
        row.savings_pct = savings_percent(base, ub);
    }
    if row.valid == Some(false) {
        failures.push("trajectory audit failed".into());
    }
    row.status = if failures.is_empty() {
        "ok".into()
    } else {
        failures.join("; ")
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> BenchConfig {
        BenchConfig {
            maps: vec![MapRef::Random {
                zones: 4,
                seed: Some(3),
            }],
            scenarios_per_map: 3,
            seed: 5,
            discretizations: vec![5, 10],
            min_dist: 600.0,
            delta_l: 150.0,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn stats_quartiles() {
        let s = Stats::of(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!(
            (s.min, s.q1, s.median, s.q3, s.max, s.mean),
            (1.0, 2.0, 3.0, 4.0, 5.0, 3.0)
        );
        let s = Stats::of(&[1.0, 2.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (1.25, 1.5, 1.75));
        assert!(Stats::of(&[]).is_none());
    }

    #[test]
    fn savings_use_baseline_denominator() {
        assert_eq!(savings_percent(200.0, 150.0), Some(25.0));
        assert_eq!(savings_percent(0.0, 0.0), Some(0.0));
        assert_eq!(savings_percent(0.0, 1.0), None);
    }

    #[test]
    fn small_benchmark_rows_hold_invariants() {
        let cfg = small_config();
        let report = run_benchmark(&cfg).unwrap();
        assert_eq!(report.rows().len(), 6);
        for r in report.rows() {
            if let (Some(ub), Some(lb)) = (r.ub, r.lb) {
                assert!(ub >= lb - EPS_Q);
            }
            if let Some(s) = r.savings_pct {
                assert!(s >= -1e-9);
            }
            assert!(r.valid != Some(false), "{}", r.status);
        }
        let again = run_benchmark(&cfg).unwrap();
        let strip = |r: &BenchReport| r.rows().iter().map(BenchRow::without_timings).collect::<Vec<_>>();
        assert_eq!(strip(&report), strip(&again));
        assert_eq!(report.summary().len(), 2);
        assert_eq!(report.summary_by_map().len(), 2);
    }

    #[test]
    fn csv_round_trip() {
        let report = run_benchmark(&small_config()).unwrap();
        let text = report.to_csv_string().unwrap();
        assert_eq!(BenchReport::read_csv(text.as_bytes()).unwrap(), report);
    }

    #[test]
    fn empty_report_is_header_only() {
        let text = BenchReport::default().to_csv_string().unwrap();
        assert_eq!(text.trim_end(), HEADER.join(","));
        assert_eq!(BenchReport::read_csv(text.as_bytes()).unwrap(), BenchReport::default());
    }

    fn row(ub: Option<f64>, lb: Option<f64>, baseline: Option<f64>) -> BenchRow {
        BenchRow {
            map: "m".into(),
            map_index: 0,
            scenario: 0,
            seed: 0,
            discretization: 20,
            n_l: 20,
            start_x: 0.0,
            start_y: 0.0,
            goal_x: 1.0,
            goal_y: 1.0,
            ub,
            ub_trajectory: ub,
            lb,
            gap_pct: None,
            baseline,
            savings_pct: None,
            valid: Some(true),
            status: "ok".into(),
            offline_ms: 0.0,
            online_ms: 0.0,
            lb_ms: 0.0,
            baseline_ms: 0.0,
        }
    }

    #[test]
    fn aggregation_rechecks_invariants() {
        assert!(BenchReport::from_rows(vec![row(Some(10.0), Some(9.0), Some(12.0))]).is_ok());
        assert!(matches!(
            BenchReport::from_rows(vec![row(Some(10.0), Some(20.0), None)]),
            Err(HarnessError::InvariantViolation(_))
        ));
        assert!(matches!(
            BenchReport::from_rows(vec![row(Some(10.0), None, Some(5.0))]),
            Err(HarnessError::InvariantViolation(_))
        ));
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_config();
        cfg.n_l = vec![1];
        assert!(cfg.validate().is_err());
        cfg.n_l.clear();
        cfg.discretizations.clear();
        assert!(cfg.validate().is_err());
        let parsed: BenchConfig =
            serde_json::from_str(r#"{"maps":[{"random":{"zones":3,"seed":null}}],"scenarios_per_map":2}"#).unwrap();
        assert_eq!(parsed.discretizations, vec![20, 30, 40]);
    }
}
