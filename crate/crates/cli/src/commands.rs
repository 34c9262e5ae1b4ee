use std::path::Path;

use rmroute_core::demand::{arrival_probabilities, expected_future_demand, PathHeader};
use rmroute_core::dp::{DpConfig, ValueTable};
use rmroute_core::routing::milp::write_lp;
use rmroute_core::routing::{
    solve_cvrp, solve_pmvrp, verify_solution, Budget, Engine, SolveStatus, SolverConfig,
};
use rmroute_core::sim::{self, ExperimentSpec};
use rmroute_core::solomon::{self, CapacityRule, GenerateOptions, Kappa};
use rmroute_core::state::parse_numbers;
use rmroute_core::{rng, Error, Instance, SystemState, VERSION};
use serde_json::json;

use crate::output::{document, emit, io_error, report_table, write_text};
use crate::{DpArgs, EngineArg, Failure, GenArgs, Outcome, PathsArgs, ReportArgs, SimulateArgs, SolveArgs};

type Res = Result<Outcome, Failure>;

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn load_state(path: Option<&Path>, inst: &Instance) -> Result<SystemState, Failure> {
    let w = match path {
        Some(p) => read(p)?.parse::<SystemState>()?,
        None => SystemState::zeros(inst.n()),
    };
    if w.len() != inst.n() {
        return usage(format!("state has {} entries, instance has {} nodes", w.len(), inst.n()));
    }
    Ok(w)
}

fn positive(name: &str, v: f64) -> Result<(), Failure> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        usage(format!("--{name} must be a positive number, got {v}"))
    }
}

fn parse_kappa(s: &str) -> Result<Kappa, Failure> {
    match s {
        "auto" => Ok(Kappa::Auto),
        _ => match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(Kappa::Value(v)),
            _ => usage(format!("--kappa expects `auto` or a positive number, got {s:?}")),
        },
    }
}

fn parse_capacity(s: &str) -> Result<CapacityRule, Failure> {
    match s {
        "auto" => Ok(CapacityRule::Auto),
        "file" => Ok(CapacityRule::File),
        _ => match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(CapacityRule::Fixed(v)),
            _ => usage(format!("--capacity expects `auto`, `file` or a positive number, got {s:?}")),
        },
    }
}

pub fn gen(a: &GenArgs, quiet: bool) -> Res {
    positive("lf-min", a.lf_min)?;
    positive("lf-max", a.lf_max)?;
    if a.lf_min > a.lf_max {
        return usage(format!("--lf-min {} exceeds --lf-max {}", a.lf_min, a.lf_max));
    }
    if a.n == 0 {
        return usage("--n must be at least 1");
    }
    let kappa = parse_kappa(&a.kappa)?;
    let capacity = parse_capacity(&a.capacity)?;

    let data = match (&a.source, a.synthetic) {
        (Some(path), _) => solomon::parse_solomon(&read(path)?)?,
        (None, Some(class)) => {
            solomon::synthesize(class, a.n, &mut rng::stream(a.seed, rng::GENERATION_STREAM))
        }
        (None, None) => return usage("pass --source <file> or --synthetic <class>"),
    };
    let opts = GenerateOptions {
        n: a.n,
        class: a.class.or(a.synthetic),
        lf_min: a.lf_min,
        lf_max: a.lf_max,
        kappa,
        capacity,
        horizon: a.horizon,
        seed: Some(a.seed),
    };
    let inst = solomon::build_instance(&data, &opts)?;
    if let Some(path) = &a.write_source {
        write_text(&solomon::write_solomon(&data), Some(path))?;
    }
    let config = serde_json::to_string(a).map_err(Error::from)?;
    let text = format!(
        "# rmroute {VERSION} gen\n# config: {config}\n{}",
        inst.to_toml()?
    );
    write_text(&text, a.out.as_deref())?;
    if !quiet {
        eprintln!(
            "{}: {} vehicles of capacity {}, load factor {:.3}, horizon {}",
            inst.label,
            inst.vehicles(),
            inst.fleet[0],
            inst.load_factor()?,
            inst.horizon
        );
    }
    Ok(Outcome::Done)
}

pub fn paths(a: &PathsArgs, quiet: bool) -> Res {
    if a.count == 0 {
        return usage("--count must be at least 1");
    }
    if !(a.cv.is_finite() && a.cv >= 0.0) {
        return usage(format!("--cv must be non-negative, got {}", a.cv));
    }
    let inst = Instance::load(&a.instance)?;
    let paths = sim::generate_paths(&inst, a.count, a.cv, a.seed)?;
    std::fs::create_dir_all(&a.out).map_err(|e| io_error(&a.out, e))?;
    for (i, p) in paths.iter().enumerate() {
        let header = PathHeader {
            label: inst.label,
            seed: a.seed,
            index: i as u64,
        };
        p.save(&header, a.out.join(sim::path_file_name(i)))?;
    }
    let requests: Vec<usize> = paths.iter().map(|p| p.events.len()).collect();
    let doc = document(
        "paths",
        a,
        Some(a.seed),
        json!({ "instance": inst.label, "horizon": inst.horizon, "requests": requests }),
    )?;
    emit(&doc, Some(&a.out.join("manifest.json")))?;
    if !quiet {
        eprintln!("wrote {} paths to {}", paths.len(), a.out.display());
    }
    Ok(Outcome::Done)
}

pub fn solve(a: &SolveArgs) -> Res {
    positive("budget-s", a.budget_s)?;
    let inst = Instance::load(&a.instance)?;
    let w = load_state(a.state.as_deref(), &inst)?;
    let mu_t = if a.pmvrp {
        Some(match (&a.mu_t, a.t) {
            (Some(path), _) => {
                let mu: Vec<f64> = parse_numbers(&read(path)?)?;
                if mu.len() != inst.n() {
                    return usage(format!("--mu-t has {} entries, instance has {} nodes", mu.len(), inst.n()));
                }
                mu
            }
            (None, t) => expected_future_demand(&inst.mean_demand, t.unwrap_or(1), inst.horizon)?,
        })
    } else {
        None
    };
    if let Some(path) = &a.export_lp {
        write_lp(&inst, &w, mu_t.as_deref(), path)?;
    }
    let cfg = SolverConfig::default()
        .with_engine(match a.engine {
            EngineArg::Auto => Engine::Auto,
            EngineArg::SubsetDp => Engine::SubsetDp,
            EngineArg::BranchAndBound => Engine::BranchAndBound,
        })
        .with_budget(Budget {
            time: Some(std::time::Duration::from_secs_f64(a.budget_s)),
            nodes: a.node_limit,
        });

    let (status, body) = match &mu_t {
        None => {
            let sol = solve_cvrp(&inst, &w, &cfg)?;
            if sol.is_feasible() {
                verify_solution(&inst, &w, None, &sol).map_err(|v| Error::Internal(v.to_string()))?;
            }
            (sol.status, json!({ "problem": "cvrp", "state": w, "solution": sol }))
        }
        Some(mu) => {
            let sol = solve_pmvrp(&inst, &w, mu, &cfg)?;
            if sol.status != SolveStatus::Infeasible {
                verify_solution(&inst, &w, Some(&sol.y), &sol.plan).map_err(|v| Error::Internal(v.to_string()))?;
            }
            (sol.status, json!({ "problem": "pmvrp", "state": w, "mu_t": mu, "solution": sol }))
        }
    };
    emit(&document("solve", a, inst.seed, body)?, a.out.as_deref())?;
    Ok(match status {
        SolveStatus::Infeasible => Outcome::Infeasible,
        SolveStatus::Incumbent if a.strict => Outcome::Truncated,
        _ => Outcome::Done,
    })
}

pub fn dp(a: &DpArgs) -> Res {
    let inst = Instance::load(&a.instance)?;
    if a.t == 0 || a.t > inst.horizon + 1 {
        return usage(format!("--t must lie in 1..={}", inst.horizon + 1));
    }
    let w = load_state(a.state.as_deref(), &inst)?;
    let arrivals = arrival_probabilities(&inst.mean_demand, inst.horizon)?;
    let cfg = DpConfig {
        state_cap: a.state_cap as u128,
        ..DpConfig::default()
    };
    let table = ValueTable::build(&inst, &arrivals, &cfg)?;
    let value = table.value(a.t, &w)?;
    let accept: Option<Vec<bool>> = if a.t <= inst.horizon && value.is_feasible() {
        Some(
            (1..=inst.n())
                .map(|j| table.optimal_control(a.t, &w, j))
                .collect::<Result<_, _>>()?,
        )
    } else {
        None
    };
    let mut body = json!({
        "horizon": inst.horizon,
        "t": a.t,
        "state": w,
        "value": value,
        "feasible": value.is_feasible(),
        "accept": accept,
        "states": table.states().count(),
    });
    if a.controls {
        body["controls"] = serde_json::to_value(table.controls()).map_err(Error::from)?;
    }
    emit(&document("dp", a, inst.seed, body)?, a.out.as_deref())?;
    Ok(if value.is_feasible() { Outcome::Done } else { Outcome::Infeasible })
}

pub fn simulate(a: &SimulateArgs, quiet: bool) -> Res {
    if a.workers == Some(0) {
        return usage("--workers must be at least 1");
    }
    let mut spec = ExperimentSpec::load(&a.spec)?;
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    if let Some(n) = a.paths {
        spec.paths = n;
    }
    if let Some(b) = a.budget_s {
        spec.budget_s = b;
    }
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let inst = Instance::load(&spec.instance)?;
    let paths = sim::prepare_paths(&spec, &inst)?;
    let workers = a
        .workers
        .or(spec.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if !quiet {
        eprintln!(
            "{}: {} paths x {} policies on {} worker(s)",
            inst.label,
            paths.len(),
            spec.policies.len(),
            workers
        );
    }
    let exp = sim::run_experiment(&spec, &inst, paths, workers)?;
    std::fs::create_dir_all(&a.out).map_err(|e| io_error(&a.out, e))?;
    sim::write_outputs(&exp, &a.out)?;
    if !quiet {
        eprint!("{}", report_table(&exp.report));
        eprintln!("wrote {} ({:.1} s)", a.out.display(), exp.wall_seconds);
    }
    Ok(Outcome::Done)
}

pub fn report(a: &ReportArgs) -> Res {
    let report = sim::read_report(&a.dir)?;
    sim::write_report_files(&report, &a.dir)?;
    if a.json {
        emit(&document("report", a, None, json!({ "report": report }))?, None)?;
    } else {
        write_text(&report_table(&report), None)?;
    }
    Ok(Outcome::Done)
}
