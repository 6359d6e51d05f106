//! Benchmark suites: deterministic instance generation, planner sweeps,
//! per-size aggregation and CSV/JSON output.
//!
//! Seeds are derived, never drawn: instance `i` of size `n` uses
//! `derive_seed(master, [INSTANCE, n, i])`, and every planner run on it uses
//! one seed derived from that. Adding or removing planners therefore leaves
//! the instances and the other planners' results untouched.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrangement::{verify_solution, Instance};
use crate::error::{Error, Result};
use crate::generate::{
    buffer_space_available, gen_monotone_instance, gen_random_instance, GenParams, DEFAULT_BUFFER_PROBES,
    DEFAULT_GENERATION_BUDGET,
};
use crate::geometry::{Workspace, DEFAULT_RADIUS};
use crate::planner::{PlanResult, Planner};
use crate::seed::{derive_seed, rng_from_seed, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    #[default]
    Random,
    Monotone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerEntry {
    pub id: String,
    pub planner: Planner,
    /// For restart baselines: use the mean collision checks of this planner
    /// at the same object count as the budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_from: Option<String>,
}

fn default_radius() -> f64 {
    DEFAULT_RADIUS
}
fn default_epsilon() -> f64 {
    crate::arrangement::DEFAULT_EPSILON
}
fn default_probes() -> usize {
    DEFAULT_BUFFER_PROBES
}
fn default_budget() -> usize {
    DEFAULT_GENERATION_BUDGET
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub master_seed: u64,
    pub n_min: usize,
    pub n_max: usize,
    pub instances_per_n: usize,
    #[serde(default)]
    pub generator: Generator,
    #[serde(default)]
    pub workspace: Workspace,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_probes")]
    pub buffer_probes: usize,
    #[serde(default = "default_budget")]
    pub generation_budget: usize,
    /// Wall times are zeroed unless set, so output is byte-reproducible.
    #[serde(default)]
    pub record_wall_time: bool,
    pub planners: Vec<PlannerEntry>,
}

impl SuiteSpec {
    /// Random instances on the default workspace, no planners yet.
    pub fn new(master_seed: u64, n_min: usize, n_max: usize, instances_per_n: usize) -> Self {
        Self {
            master_seed,
            n_min,
            n_max,
            instances_per_n,
            generator: Generator::Random,
            workspace: Workspace::default(),
            radius: default_radius(),
            epsilon: default_epsilon(),
            buffer_probes: default_probes(),
            generation_budget: default_budget(),
            record_wall_time: false,
            planners: Vec::new(),
        }
    }

    pub fn with_planner(mut self, id: &str, planner: Planner) -> Self {
        self.planners.push(PlannerEntry {
            id: id.to_string(),
            planner,
            budget_from: None,
        });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::InvalidConfig(format!(
                "object range {}..={} is empty or starts at zero",
                self.n_min, self.n_max
            )));
        }
        if self.buffer_probes == 0 {
            return Err(Error::InvalidConfig("buffer_probes must be >= 1".into()));
        }
        self.workspace.validate_for_radius(self.radius)?;
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidEpsilon(self.epsilon));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (pos, e) in self.planners.iter().enumerate() {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate planner id {:?}", e.id)));
            }
            match &e.planner {
                Planner::Mcts(c) => c.validate()?,
                Planner::Baseline(c) | Planner::Randperm(c) => c.validate()?,
            }
            if let Some(src) = &e.budget_from {
                let ok = self.planners[..pos].iter().any(|p| &p.id == src && p.budget_from.is_none());
                if !ok || !matches!(e.planner, Planner::Randperm(_)) {
                    return Err(Error::InvalidConfig(format!(
                        "planner {:?}: budget_from must name an earlier planner without its own budget_from, on a randperm planner",
                        e.id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn gen_params(&self) -> GenParams {
        GenParams {
            workspace: self.workspace,
            radius: self.radius,
            epsilon: self.epsilon,
            budget: self.generation_budget,
        }
    }

    pub fn instance_seed(&self, n: usize, index: usize) -> u64 {
        derive_seed(self.master_seed, &[stream::INSTANCE, n as u64, index as u64])
    }
}

/// One (planner, instance) run. Column order of the CSV follows field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub planner: String,
    pub n_objects: usize,
    pub seed: u64,
    pub solved: bool,
    pub n_motions: usize,
    pub collision_checks: u64,
    pub iterations: u64,
    pub wall_time_ms: f64,
    pub epsilon: f64,
    /// Exploration constant; empty for non-MCTS planners.
    pub c: Option<f64>,
    pub buffer_available: bool,
    /// `ok`, or `infeasible` when the instance could not be generated.
    pub status: String,
}

/// A generated suite instance with its derived seed.
#[derive(Debug, Clone)]
pub struct SuiteInstance {
    pub n: usize,
    pub index: usize,
    pub seed: u64,
    pub instance: Option<Instance>,
    pub buffer_available: bool,
}

pub fn generate_suite_instances(spec: &SuiteSpec) -> Vec<SuiteInstance> {
    let params = spec.gen_params();
    let mut out = Vec::new();
    for n in spec.n_min..=spec.n_max {
        for index in 0..spec.instances_per_n {
            let seed = spec.instance_seed(n, index);
            let mut rng = rng_from_seed(seed);
            let instance = match spec.generator {
                Generator::Random => gen_random_instance(n, &params, &mut rng).ok(),
                Generator::Monotone => gen_monotone_instance(n, &params, &mut rng).ok().map(|m| m.instance),
            };
            let buffer_available = instance.as_ref().is_some_and(|inst| {
                let mut probe = rng_from_seed(derive_seed(seed, &[stream::BUFFER_PROBE]));
                buffer_space_available(inst, &mut probe, spec.buffer_probes)
            });
            out.push(SuiteInstance {
                n,
                index,
                seed,
                instance,
                buffer_available,
            });
        }
    }
    out
}

fn record_for(
    id: &str,
    planner: &Planner,
    si: &SuiteInstance,
    result: Option<&PlanResult>,
    spec: &SuiteSpec,
) -> BenchRecord {
    let c = match planner {
        Planner::Mcts(cfg) => Some(cfg.exploration_c),
        _ => None,
    };
    let (solved, n_motions, collision_checks, iterations, wall) = match result {
        Some(r) => (r.solved, r.plan.len(), r.collision_checks, r.iterations, r.wall_time),
        None => (false, 0, 0, 0, Duration::ZERO),
    };
    BenchRecord {
        planner: id.to_string(),
        n_objects: si.n,
        seed: si.seed,
        solved,
        n_motions,
        collision_checks,
        iterations,
        wall_time_ms: if spec.record_wall_time {
            wall.as_secs_f64() * 1e3
        } else {
            0.0
        },
        epsilon: spec.epsilon,
        c,
        buffer_available: si.buffer_available,
        status: if si.instance.is_some() { "ok" } else { "infeasible" }.to_string(),
    }
}

/// Runs `planner` on one suite instance. Solved plans are replayed and
/// checked; a plan that fails the replay is a bug, so it panics.
pub fn run_one(planner: &Planner, si: &SuiteInstance) -> Option<PlanResult> {
    let inst = si.instance.as_ref()?;
    let seeded = planner.with_seed(derive_seed(si.seed, &[stream::PLANNER]));
    let r = seeded.solve(inst);
    if r.solved {
        if let Err(e) = verify_solution(inst, &r.plan) {
            panic!("planner produced an invalid plan on instance seed {}: {e}", si.seed);
        }
    }
    Some(r)
}

/// Runs every planner on every instance of the suite. Records come back
/// sorted by planner id, then object count, then seed.
pub fn run_suite(spec: &SuiteSpec, jobs: usize) -> Result<Vec<BenchRecord>> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| run_suite_inner(spec))
}

fn run_suite_inner(spec: &SuiteSpec) -> Result<Vec<BenchRecord>> {
    if spec.planners.is_empty() {
        return Ok(Vec::new());
    }
    let instances = generate_suite_instances(spec);
    let mut by_id: BTreeMap<String, Vec<BenchRecord>> = BTreeMap::new();

    for entry in &spec.planners {
        let budgets: Option<BTreeMap<usize, u64>> = entry.budget_from.as_ref().map(|src| {
            let mut sums: BTreeMap<usize, (u64, u64)> = BTreeMap::new();
            for r in by_id[src].iter().filter(|r| r.status == "ok") {
                let s = sums.entry(r.n_objects).or_default();
                s.0 += r.collision_checks;
                s.1 += 1;
            }
            sums.into_iter()
                .map(|(n, (sum, cnt))| (n, sum.div_ceil(cnt).max(1)))
                .collect()
        });
        let records: Vec<BenchRecord> = instances
            .par_iter()
            .map(|si| {
                let planner = match (&budgets, &entry.planner) {
                    (Some(b), Planner::Randperm(cfg)) => {
                        let budget = b.get(&si.n).copied().unwrap_or(1);
                        Planner::Randperm(cfg.clone().with_budget(budget))
                    }
                    _ => entry.planner.clone(),
                };
                let result = run_one(&planner, si);
                record_for(&entry.id, &planner, si, result.as_ref(), spec)
            })
            .collect();
        by_id.insert(entry.id.clone(), records);
    }

    let mut all: Vec<BenchRecord> = by_id.into_values().flatten().collect();
    all.sort_by(|a, b| {
        (a.planner.as_str(), a.n_objects, a.seed).cmp(&(b.planner.as_str(), b.n_objects, b.seed))
    });
    Ok(all)
}

/// Per (planner, object count) statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub planner: String,
    pub n_objects: usize,
    pub runs: usize,
    pub solved: usize,
    pub success_rate: f64,
    /// Motion statistics cover solved runs only.
    pub mean_motions: Option<f64>,
    pub median_motions: Option<usize>,
    pub mean_collision_checks: f64,
    pub mean_iterations: f64,
    pub mean_wall_time_ms: f64,
    pub buffer_fraction: f64,
}

/// Lower median: element `(len - 1) / 2` of the sorted values.
pub fn lower_median<T: Ord + Copy>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    Some(v[(v.len() - 1) / 2])
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Groups records by planner and object count. Infeasible instances are
/// left out.
pub fn aggregate(records: &[BenchRecord]) -> Vec<Summary> {
    let mut groups: BTreeMap<(&str, usize), Vec<&BenchRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.status == "ok") {
        groups.entry((r.planner.as_str(), r.n_objects)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((planner, n), rs)| {
            let solved: Vec<usize> = rs.iter().filter(|r| r.solved).map(|r| r.n_motions).collect();
            Summary {
                planner: planner.to_string(),
                n_objects: n,
                runs: rs.len(),
                solved: solved.len(),
                success_rate: solved.len() as f64 / rs.len() as f64,
                mean_motions: (!solved.is_empty()).then(|| mean(solved.iter().map(|&m| m as f64))),
                median_motions: lower_median(&solved),
                mean_collision_checks: mean(rs.iter().map(|r| r.collision_checks as f64)),
                mean_iterations: mean(rs.iter().map(|r| r.iterations as f64)),
                mean_wall_time_ms: mean(rs.iter().map(|r| r.wall_time_ms)),
                buffer_fraction: rs.iter().filter(|r| r.buffer_available).count() as f64 / rs.len() as f64,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidConfig(format!("unknown format {other:?}"))),
        }
    }
}

/// Rounds to six significant digits and prints the shortest decimal form.
pub fn fmt_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("scientific float parses");
    format!("{rounded}")
}

/// Rows that can be written as CSV with formatted floats.
pub trait CsvRow {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

fn opt<T, F: Fn(&T) -> String>(v: &Option<T>, f: F) -> String {
    v.as_ref().map(f).unwrap_or_default()
}

impl CsvRow for BenchRecord {
    fn header() -> &'static [&'static str] {
        &[
            "planner",
            "n_objects",
            "seed",
            "solved",
            "n_motions",
            "collision_checks",
            "iterations",
            "wall_time_ms",
            "epsilon",
            "c",
            "buffer_available",
            "status",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.planner.clone(),
            self.n_objects.to_string(),
            self.seed.to_string(),
            self.solved.to_string(),
            self.n_motions.to_string(),
            self.collision_checks.to_string(),
            self.iterations.to_string(),
            fmt_float(self.wall_time_ms),
            fmt_float(self.epsilon),
            opt(&self.c, |c| fmt_float(*c)),
            self.buffer_available.to_string(),
            self.status.clone(),
        ]
    }
}

impl CsvRow for Summary {
    fn header() -> &'static [&'static str] {
        &[
            "planner",
            "n_objects",
            "runs",
            "solved",
            "success_rate",
            "mean_motions",
            "median_motions",
            "mean_collision_checks",
            "mean_iterations",
            "mean_wall_time_ms",
            "buffer_fraction",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.planner.clone(),
            self.n_objects.to_string(),
            self.runs.to_string(),
            self.solved.to_string(),
            fmt_float(self.success_rate),
            opt(&self.mean_motions, |m| fmt_float(*m)),
            opt(&self.median_motions, |m| m.to_string()),
            fmt_float(self.mean_collision_checks),
            fmt_float(self.mean_iterations),
            fmt_float(self.mean_wall_time_ms),
            fmt_float(self.buffer_fraction),
        ]
    }
}

pub fn to_csv<T: CsvRow>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(T::header())?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn emit<T: CsvRow + Serialize>(rows: &[T], format: Format) -> Result<String> {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(rows)?;
            s.push('\n');
            Ok(s)
        }
    }
}

pub fn records_from_json(s: &str) -> Result<Vec<BenchRecord>> {
    Ok(serde_json::from_str(s)?)
}

/// Parses records written by [`to_csv`].
pub fn records_from_csv(s: &str) -> Result<Vec<BenchRecord>> {
    let mut rd = csv::Reader::from_reader(s.as_bytes());
    let mut out = Vec::new();
    for row in rd.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn write_to<W: Write>(mut w: W, doc: &str) -> Result<()> {
    w.write_all(doc.as_bytes())?;
    Ok(())
}
