//! Monte-Carlo experiment harness.
//!
//! Every policy is replayed on the same set of request paths (common random
//! numbers). Path `i` is drawn from its own random stream
//! [`rng::stream`]`(seed, i)`, so the path set does not depend on the worker
//! count or on execution order, and every `(path, policy)` run is keyed by
//! its indices.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::demand::{sample_path, sample_totals, PathHeader, RequestPath};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::policy::{run_policy, PolicyKind, PolicyRunResult, SolutionPeriods};
use crate::routing::{Budget, SolveStatus, SolverConfig};
use crate::rng;

pub const RESULTS_FILE: &str = "results.csv";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const RUNS_FILE: &str = "runs.jsonl";
pub const PATHS_DIR: &str = "paths";

/// One policy entry of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    /// Column label; defaults to the policy name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Solution periods as fractions of the horizon; defaults to `[0.0]`, or
    /// `[0.0, 0.5]` for BLPR.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<SolutionPeriods>,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind) -> Self {
        PolicySpec {
            kind,
            name: None,
            periods: None,
        }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.to_string())
    }

    pub fn periods(&self) -> SolutionPeriods {
        self.periods.clone().unwrap_or_else(|| self.kind.default_periods())
    }
}

/// Experiment description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Instance file; relative paths are resolved against the spec file.
    pub instance: PathBuf,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_cv")]
    pub cv: f64,
    pub seed: u64,
    /// Wall-clock limit per routing solve, in seconds.
    #[serde(default = "default_budget")]
    pub budget_s: f64,
    /// Branch-and-bound node limit per solve; makes truncation reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_limit: Option<u64>,
    /// Read request paths from this directory instead of sampling them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default = "default_policies", rename = "policy")]
    pub policies: Vec<PolicySpec>,
}

fn default_paths() -> usize {
    50
}

fn default_cv() -> f64 {
    0.1
}

fn default_budget() -> f64 {
    60.0
}

fn default_policies() -> Vec<PolicySpec> {
    PolicyKind::ALL.into_iter().map(PolicySpec::new).collect()
}

impl ExperimentSpec {
    pub fn new(instance: impl Into<PathBuf>, seed: u64) -> Self {
        ExperimentSpec {
            instance: instance.into(),
            paths: default_paths(),
            cv: default_cv(),
            seed,
            budget_s: default_budget(),
            node_limit: None,
            paths_dir: None,
            workers: None,
            policies: default_policies(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Reads a spec file, resolves its relative paths and checks that the
    /// files it names exist.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        spec.instance = base.join(&spec.instance);
        if let Some(dir) = &spec.paths_dir {
            spec.paths_dir = Some(base.join(dir));
        }
        if !spec.instance.is_file() {
            return Err(Error::InvalidArgument(format!(
                "instance file {} does not exist",
                spec.instance.display()
            )));
        }
        if let Some(dir) = spec.paths_dir.as_ref().filter(|d| !d.is_dir()) {
            return Err(Error::InvalidArgument(format!("paths directory {} does not exist", dir.display())));
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.paths == 0 {
            return bad("path count must be at least 1".into());
        }
        if !(self.cv.is_finite() && self.cv >= 0.0) {
            return bad(format!("cv {} is negative", self.cv));
        }
        if !(self.budget_s.is_finite() && self.budget_s > 0.0) {
            return bad(format!("budget_s {} must be positive", self.budget_s));
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        if self.policies.is_empty() {
            return bad("no policies selected".into());
        }
        let mut seen = Vec::new();
        for p in &self.policies {
            let label = p.label();
            if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return bad(format!("policy label {label:?} must be non-empty and use only [A-Za-z0-9_-]"));
            }
            if seen.contains(&label) {
                return bad(format!("policy label {label} appears twice"));
            }
            if let Some(periods) = &p.periods {
                SolutionPeriods::new(periods.fractions().to_vec())?;
            }
            seen.push(label);
        }
        Ok(())
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig::default().with_budget(Budget {
            time: Some(std::time::Duration::from_secs_f64(self.budget_s)),
            nodes: self.node_limit,
        })
    }
}

/// Samples `count` paths; path `i` uses stream `i` of `seed`.
pub fn generate_paths(inst: &Instance, count: usize, cv: f64, seed: u64) -> Result<Vec<RequestPath>> {
    (0..count)
        .map(|i| {
            let mut r = rng::stream(seed, i as u64);
            let totals = sample_totals(&inst.mean_demand, cv, &mut r)?;
            sample_path(&totals, inst.horizon, &mut r)
        })
        .collect()
}

/// File name of path `index` inside a paths directory.
pub fn path_file_name(index: usize) -> String {
    format!("path_{index:04}.txt")
}

/// Reads the first `count` path files (by name) of `dir`.
pub fn load_paths(dir: &Path, inst: &Instance, count: usize) -> Result<Vec<RequestPath>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    if files.len() < count {
        return Err(Error::InvalidArgument(format!(
            "{} holds {} path files, {count} requested",
            dir.display(),
            files.len()
        )));
    }
    files
        .iter()
        .take(count)
        .map(|f| {
            let (_, path) = RequestPath::load(f)?;
            if path.n() != inst.n() || path.horizon != inst.horizon {
                return Err(Error::InvalidArgument(format!(
                    "{}: path for n = {}, T = {} does not match the instance",
                    f.display(),
                    path.n(),
                    path.horizon
                )));
            }
            Ok(path)
        })
        .collect()
}

/// Paths for `spec`: loaded from `paths_dir` if given, otherwise sampled.
pub fn prepare_paths(spec: &ExperimentSpec, inst: &Instance) -> Result<Vec<RequestPath>> {
    match &spec.paths_dir {
        Some(dir) => load_paths(dir, inst, spec.paths),
        None => generate_paths(inst, spec.paths, spec.cv, spec.seed),
    }
}

/// One policy replayed on one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub path: usize,
    pub label: String,
    pub result: PolicyRunResult,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub spec: ExperimentSpec,
    pub instance: Instance,
    pub paths: Vec<RequestPath>,
    /// Ordered by path, then by policy as listed in the spec.
    pub runs: Vec<Run>,
    pub report: Report,
    pub workers: usize,
    pub wall_seconds: f64,
}

/// Replays every policy of `spec` on every path using up to `workers`
/// threads. Runs stopped by the solver budget are flagged, not dropped.
pub fn run_experiment(
    spec: &ExperimentSpec,
    inst: &Instance,
    paths: Vec<RequestPath>,
    workers: usize,
) -> Result<Experiment> {
    spec.validate()?;
    let start = Instant::now();
    let solver = spec.solver();
    let tasks: Vec<(usize, &PolicySpec)> = (0..paths.len())
        .flat_map(|i| spec.policies.iter().map(move |p| (i, p)))
        .collect();
    let one = |&(i, p): &(usize, &PolicySpec)| -> Result<Run> {
        let t0 = Instant::now();
        let result = run_policy(p.kind, inst, &paths[i], &p.periods(), &solver)?;
        Ok(Run {
            path: i,
            label: p.label(),
            result,
            seconds: t0.elapsed().as_secs_f64(),
        })
    };
    let workers = workers.max(1);
    let runs: Vec<Run> = if workers == 1 {
        tasks.iter().map(one).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Internal(format!("worker pool: {e}")))?;
        pool.install(|| tasks.par_iter().map(one).collect::<Result<_>>())?
    };
    let rows = result_rows(&runs);
    let timings = timing_rows(&runs);
    let labels: Vec<String> = spec.policies.iter().map(PolicySpec::label).collect();
    let report = build_report(&rows, Some(&timings), &labels)?;
    Ok(Experiment {
        spec: spec.clone(),
        instance: inst.clone(),
        paths,
        runs,
        report,
        workers,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// One line of `results.csv`. Contains no timings, so identical inputs give
/// identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub path: usize,
    pub policy: String,
    pub profit: f64,
    pub revenue: f64,
    pub routing_cost: f64,
    pub accepted: usize,
    pub rejected: usize,
    /// Final state, space-separated.
    pub state: String,
    pub solves: usize,
    /// `incumbent` if any booking-limit solve stopped on its budget.
    pub solve_status: SolveStatus,
    pub final_status: SolveStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub path: usize,
    pub policy: String,
    pub solve_seconds: f64,
    pub final_seconds: f64,
    pub total_seconds: f64,
}

pub fn result_rows(runs: &[Run]) -> Vec<ResultRow> {
    runs.iter()
        .map(|r| {
            let res = &r.result;
            let solve_status = if res.solve_log.iter().any(|s| s.status == SolveStatus::Incumbent) {
                SolveStatus::Incumbent
            } else {
                SolveStatus::Optimal
            };
            ResultRow {
                path: r.path,
                policy: r.label.clone(),
                profit: res.profit,
                revenue: res.revenue,
                routing_cost: res.operational.cost,
                accepted: res.accepted(),
                rejected: res.decisions.len() - res.accepted(),
                state: res.final_state.to_string(),
                solves: res.solve_log.len(),
                solve_status,
                final_status: res.operational.status,
            }
        })
        .collect()
}

pub fn timing_rows(runs: &[Run]) -> Vec<TimingRow> {
    runs.iter()
        .map(|r| TimingRow {
            path: r.path,
            policy: r.label.clone(),
            solve_seconds: r.result.solve_log.iter().map(|s| s.seconds).sum(),
            final_seconds: r.result.operational.seconds,
            total_seconds: r.seconds,
        })
        .collect()
}

/// A point of an empirical CDF: fraction `y` of values `<= x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcdfPoint {
    pub x: f64,
    pub y: f64,
}

/// Empirical CDF, one point per distinct value in ascending order.
pub fn ecdf(values: &[f64]) -> Result<Vec<EcdfPoint>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("empirical CDF of an empty sample".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("empirical CDF of a sample containing NaN".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut out: Vec<EcdfPoint> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        if i + 1 < n && sorted[i + 1] == x {
            continue;
        }
        out.push(EcdfPoint {
            x,
            y: (i + 1) as f64 / n as f64,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator); 0 for one value.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// Sum of run times, when known.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_seconds: Option<f64>,
}

pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("summary of an empty sample".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(Summary {
        count: values.len(),
        mean,
        std,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        wall_seconds: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyReport {
    pub label: String,
    /// Profits sorted ascending.
    pub profits: Vec<f64>,
    pub ecdf: Vec<EcdfPoint>,
    pub summary: Summary,
    /// Runs in which some solve stopped on its budget.
    pub truncated_runs: usize,
}

/// Ordering of two policies' profit distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: String,
    pub b: String,
    pub mean_difference: f64,
    pub a_mean_at_least_b: bool,
    pub a_std_below_b: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub policies: Vec<PolicyReport>,
    pub comparisons: Vec<Comparison>,
}

impl Report {
    pub fn policy(&self, label: &str) -> Option<&PolicyReport> {
        self.policies.iter().find(|p| p.label == label)
    }

    pub fn comparison(&self, a: &str, b: &str) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.a == a && c.b == b)
    }
}

/// Per-policy ECDFs and summaries plus every ordered pairwise comparison.
/// `order` fixes the policy order; labels missing from it follow in order
/// of first appearance.
pub fn build_report(rows: &[ResultRow], timings: Option<&[TimingRow]>, order: &[String]) -> Result<Report> {
    let mut labels: Vec<String> = order.to_vec();
    for r in rows {
        if !labels.contains(&r.policy) {
            labels.push(r.policy.clone());
        }
    }
    let mut policies = Vec::new();
    for label in labels {
        let mine: Vec<&ResultRow> = rows.iter().filter(|r| r.policy == label).collect();
        if mine.is_empty() {
            continue;
        }
        let profits: Vec<f64> = mine.iter().map(|r| r.profit).collect();
        let mut summary = summarize(&profits)?;
        summary.wall_seconds =
            timings.map(|t| t.iter().filter(|r| r.policy == label).map(|r| r.total_seconds).sum());
        let mut sorted = profits.clone();
        sorted.sort_by(f64::total_cmp);
        policies.push(PolicyReport {
            ecdf: ecdf(&profits)?,
            profits: sorted,
            summary,
            truncated_runs: mine
                .iter()
                .filter(|r| r.solve_status == SolveStatus::Incumbent || r.final_status == SolveStatus::Incumbent)
                .count(),
            label,
        });
    }
    let mut comparisons = Vec::new();
    for a in &policies {
        for b in &policies {
            if a.label == b.label {
                continue;
            }
            comparisons.push(Comparison {
                a: a.label.clone(),
                b: b.label.clone(),
                mean_difference: a.summary.mean - b.summary.mean,
                a_mean_at_least_b: a.summary.mean >= b.summary.mean,
                a_std_below_b: a.summary.std < b.summary.std,
            });
        }
    }
    Ok(Report { policies, comparisons })
}

/// Two-column `profit fraction` text, readable by gnuplot and friends.
pub fn ecdf_text(report: &PolicyReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {} profit ECDF over {} runs", report.label, report.summary.count);
    let _ = writeln!(s, "# profit fraction");
    for p in &report.ecdf {
        let _ = writeln!(s, "{:.3} {:.3}", p.x, p.y);
    }
    s
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Everything an experiment leaves on disk: the consumed paths, per-run
/// results and timings, per-run decision logs, ECDF files and a summary.
pub fn write_outputs(exp: &Experiment, dir: &Path) -> Result<()> {
    let paths_dir = dir.join(PATHS_DIR);
    std::fs::create_dir_all(&paths_dir).map_err(|e| Error::io(&paths_dir, e))?;
    for (i, p) in exp.paths.iter().enumerate() {
        let header = PathHeader {
            label: exp.instance.label,
            seed: exp.spec.seed,
            index: i as u64,
        };
        p.save(&header, paths_dir.join(path_file_name(i)))?;
    }
    write_csv(&dir.join(RESULTS_FILE), &result_rows(&exp.runs))?;
    write_csv(&dir.join(TIMINGS_FILE), &timing_rows(&exp.runs))?;

    let mut jsonl = String::new();
    for r in &exp.runs {
        jsonl.push_str(&serde_json::to_string(r)?);
        jsonl.push('\n');
    }
    let runs_path = dir.join(RUNS_FILE);
    std::fs::write(&runs_path, jsonl).map_err(|e| Error::io(&runs_path, e))?;
    write_report_files(&exp.report, dir)?;

    let doc = serde_json::json!({
        "tool": "rmroute",
        "version": crate::VERSION,
        "seed": exp.spec.seed,
        "config": exp.spec,
        "solver": exp.spec.solver(),
        "workers": exp.workers,
        "common_random_numbers": true,
        "instance": {
            "label": exp.instance.label,
            "n": exp.instance.n(),
            "vehicles": exp.instance.vehicles(),
            "capacity": exp.instance.fleet,
            "horizon": exp.instance.horizon,
            "load_factor": exp.instance.load_factor().ok(),
        },
        "wall_seconds": exp.wall_seconds,
        "report": exp.report,
    });
    let summary_path = dir.join(SUMMARY_FILE);
    std::fs::write(&summary_path, serde_json::to_string_pretty(&doc)? + "\n")
        .map_err(|e| Error::io(&summary_path, e))
}

/// Writes one `ecdf_<label>.dat` per policy.
pub fn write_report_files(report: &Report, dir: &Path) -> Result<()> {
    for p in &report.policies {
        let path = dir.join(format!("ecdf_{}.dat", p.label));
        std::fs::write(&path, ecdf_text(p)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Rebuilds the report of an output directory from its CSV files.
pub fn read_report(dir: &Path) -> Result<Report> {
    let rows: Vec<ResultRow> = read_csv(&dir.join(RESULTS_FILE))?;
    let timings_path = dir.join(TIMINGS_FILE);
    let timings: Option<Vec<TimingRow>> = if timings_path.is_file() {
        Some(read_csv(&timings_path)?)
    } else {
        None
    };
    build_report(&rows, timings.as_deref(), &[])
}

/// Profit of one policy label per path index.
pub fn profits_by_path(runs: &[Run], label: &str) -> BTreeMap<usize, f64> {
    runs.iter()
        .filter(|r| r.label == label)
        .map(|r| (r.path, r.result.profit))
        .collect()
}
