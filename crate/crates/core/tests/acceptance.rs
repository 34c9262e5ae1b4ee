//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero if a correctness criterion fails.

mod common;

use std::process::Command;
use std::time::Instant;

use common::{all_states, brute_cvrp, brute_pmvrp, random_instance, Fill};
use rand::Rng;
use rmroute_core::demand::{arrival_probabilities, expected_future_demand, RequestPath};
use rmroute_core::dp::{DpConfig, Value, ValueTable};
use rmroute_core::instance::CostMatrix;
use rmroute_core::policy::{run_booking_limit, run_policy, PolicyKind, SolutionPeriods};
use rmroute_core::routing::milp::export_lp;
use rmroute_core::routing::{
    feasible, solve_cvrp, solve_pmvrp, Budget, Engine, SolveStatus, SolverConfig,
};
use rmroute_core::sim::{self, ecdf, summarize, ExperimentSpec};
use rmroute_core::solomon::{build_instance, synthesize, GenerateOptions};
use rmroute_core::{rng, Instance, InstanceClass, SystemState};

enum Verdict {
    Pass(String),
    Fail(String),
    /// An empirical claim that did not hold. Reported as a failure but does
    /// not change the exit status.
    Unmet(String),
    Skip(String),
}

type Criterion = (&'static str, fn() -> Verdict);

fn exact() -> SolverConfig {
    SolverConfig::default().with_budget(Budget::unlimited())
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("solver matches brute-force enumeration", solver_oracle),
        ("policies stay below the exact DP value", dp_dominance),
        ("routing cost, PMVRP value and DP value are monotone", monotonicity),
        ("booking limits are robust and perfect knowledge bounds them", robustness),
        ("booking-limit hand trace", hand_trace),
        ("simulation is deterministic and ECDFs are valid", determinism),
        ("exported MILP agrees with an external solver", cross_solver),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        let start = Instant::now();
        let verdict = check();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match verdict {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::Unmet(d) => ("FAIL", format!("{d}; empirical claim, exit status unaffected")),
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("[{tag}] {}. {name}: {detail} ({secs:.1} s)", i + 1);
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn random_case(seed: u64) -> (Instance, SystemState, Vec<f64>) {
    let mut r = rng::stream(seed, 1);
    let n = r.random_range(1..=6);
    let k = r.random_range(1..=3);
    let cap = r.random_range(2..=6) as f64;
    let inst = random_instance(n, k, cap, seed);
    let w = SystemState((0..n).map(|_| r.random_range(0..=3)).collect());
    let mu = (0..n).map(|_| r.random_range(0..=12) as f64 * 0.25).collect();
    (inst, w, mu)
}

fn solver_oracle() -> Verdict {
    let mut mismatches = Vec::new();
    let mut feasible_cases = 0;
    for seed in 0..100u64 {
        let (inst, w, mu) = random_case(1000 + seed);
        for engine in [Engine::SubsetDp, Engine::BranchAndBound] {
            let cfg = exact().with_engine(engine);
            let cvrp = solve_cvrp(&inst, &w, &cfg).unwrap();
            match brute_cvrp(&inst, &w) {
                Some(best) if (cvrp.cost - best).abs() > 1e-9 => {
                    mismatches.push(format!("seed {seed} {engine:?} CVRP {} vs {best}", cvrp.cost))
                }
                None if cvrp.is_feasible() => mismatches.push(format!("seed {seed} {engine:?} CVRP feasible")),
                _ => {}
            }
            let pm = solve_pmvrp(&inst, &w, &mu, &cfg).unwrap();
            let exact_best = brute_pmvrp(&inst, &w, &mu, Fill::Exact);
            let grid_best = brute_pmvrp(&inst, &w, &mu, Fill::Grid(0.25));
            match (exact_best, grid_best) {
                (Some(e), Some(g)) => {
                    if pm.objective < g - 1e-9 {
                        mismatches.push(format!("seed {seed} {engine:?} PMVRP {} below grid {g}", pm.objective));
                    }
                    if (pm.objective - e).abs() > 1e-6 {
                        mismatches.push(format!("seed {seed} {engine:?} PMVRP {} vs {e}", pm.objective));
                    }
                }
                _ if pm.status != SolveStatus::Infeasible => {
                    mismatches.push(format!("seed {seed} {engine:?} PMVRP feasible"))
                }
                _ => {}
            }
        }
        feasible_cases += brute_cvrp(&inst, &w).is_some() as usize;
    }
    let detail = format!("100 instances ({feasible_cases} feasible), 2 engines, {} mismatches", mismatches.len());
    if mismatches.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(format!("{detail}; first: {}", mismatches[0]))
    }
}

/// Three customers, two vehicles of capacity 2, ten booking periods.
fn tiny_dp_instance() -> Instance {
    Instance::new(
        "RC.3".parse().unwrap(),
        CostMatrix::euclidean(&[[0.0, 0.0], [4.0, 3.0], [-5.0, 1.0], [2.0, -6.0]]),
        vec![2.0, 2.0],
        vec![12.0, 18.0, 9.0],
        vec![1.5, 1.0, 2.0],
        10,
    )
    .unwrap()
}

fn dp_dominance() -> Verdict {
    let inst = tiny_dp_instance();
    let arrivals = arrival_probabilities(&inst.mean_demand, inst.horizon).unwrap();
    let table = ValueTable::build(&inst, &arrivals, &DpConfig::default()).unwrap();
    let Value::Finite(pi) = table.value(1, &SystemState::zeros(3)).unwrap() else {
        return Verdict::Fail("pi_1(0) is infeasible".into());
    };
    let paths: Vec<RequestPath> = (0..1000)
        .map(|i| arrivals.sample_path(&mut rng::stream(7, i)))
        .collect();
    let cfg = exact();
    let mut parts = vec![format!("pi_1(0) = {pi:.3}")];
    let mut ok = true;
    let mut pkp_ok = true;
    for kind in [PolicyKind::Blp, PolicyKind::Fcfs, PolicyKind::Pkp] {
        let profits: Vec<f64> = paths
            .iter()
            .map(|p| run_policy(kind, &inst, p, &SolutionPeriods::start(), &cfg).unwrap().profit)
            .collect();
        let s = summarize(&profits).unwrap();
        let se = s.std / (profits.len() as f64).sqrt();
        let within = s.mean <= pi + 3.0 * se;
        if kind == PolicyKind::Pkp {
            pkp_ok = within;
        } else {
            ok &= within;
        }
        parts.push(format!("{kind} {:.3} +- {se:.3}{}", s.mean, if within { "" } else { " (above)" }));
    }
    // the DP policy itself should attain pi_1(0) on average
    let dp_profits: Vec<f64> = paths.iter().map(|p| replay_dp(&inst, &table, p)).collect();
    let s = summarize(&dp_profits).unwrap();
    let se = s.std / 1000f64.sqrt();
    parts.push(format!("DP policy {:.3} +- {se:.3}", s.mean));
    ok &= (s.mean - pi).abs() <= 3.0 * se;
    let detail = format!("1000 paths; {}", parts.join(", "));
    match (ok, pkp_ok) {
        (true, true) => Verdict::Pass(detail),
        (true, false) => Verdict::Unmet(format!("{detail}; PKP sees the realized path, so pi_1(0) does not bound it")),
        _ => Verdict::Fail(detail),
    }
}

fn replay_dp(inst: &Instance, table: &ValueTable, path: &RequestPath) -> f64 {
    let mut w = SystemState::zeros(inst.n());
    for &(t, j) in &path.events {
        if table.optimal_control(t, &w, j).unwrap() {
            w = w.plus_unit(j);
        }
    }
    let cost = solve_cvrp(inst, &w, &exact()).unwrap().cost;
    (1..=inst.n()).map(|j| inst.price_of(j) * w.get(j) as f64).sum::<f64>() - cost
}

fn monotonicity() -> Verdict {
    let mut violations = Vec::new();
    let mut checks = 0u64;
    for seed in 0..20u64 {
        let mut r = rng::stream(seed, 2);
        let n = r.random_range(3..=4);
        let k = r.random_range(1..=2);
        let cap = r.random_range(2..=3);
        let inst = random_instance(n, k, cap as f64, 500 + seed);
        let mu = expected_future_demand(&inst.mean_demand, 1, inst.horizon).unwrap();
        let states: Vec<SystemState> = all_states(n, cap).into_iter().filter(|w| feasible(&inst, w)).collect();
        let cvrp = |w: &SystemState| solve_cvrp(&inst, w, &exact()).unwrap().cost;
        let pmvrp = |w: &SystemState| solve_pmvrp(&inst, w, &mu, &exact()).unwrap().objective;
        for w in &states {
            let (z, pt) = (cvrp(w), pmvrp(w));
            checks += 1;
            if pt < -z - 1e-9 {
                violations.push(format!("seed {seed}: PMVRP {pt} < -z* {} at {w}", -z));
            }
            for j in 1..=n {
                let next = w.plus_unit(j);
                if !feasible(&inst, &next) {
                    continue;
                }
                checks += 2;
                if cvrp(&next) < z - 1e-9 {
                    violations.push(format!("seed {seed}: z* falls from {w} along {j}"));
                }
                if pmvrp(&next) > pt + 1e-9 {
                    violations.push(format!("seed {seed}: PMVRP rises from {w} along {j}"));
                }
            }
        }
    }
    let inst = tiny_dp_instance();
    let arrivals = arrival_probabilities(&inst.mean_demand, inst.horizon).unwrap();
    let table = ValueTable::build(&inst, &arrivals, &DpConfig::default()).unwrap();
    for w in table.states() {
        for t in 1..=table.horizon() {
            if let (Value::Finite(a), Value::Finite(b)) = (table.value(t, &w).unwrap(), table.value(t + 1, &w).unwrap()) {
                checks += 1;
                if a < b - 1e-9 {
                    violations.push(format!("pi_{t}({w}) = {a} < pi_{}({w}) = {b}", t + 1));
                }
            }
        }
    }
    let detail = format!("20 instances + DP table, {checks} comparisons, {} violations", violations.len());
    if violations.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(format!("{detail}; first: {}", violations[0]))
    }
}

fn robustness() -> Verdict {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut std_wins = 0;
    let mut mean_wins = 0;
    let mut parts = Vec::new();
    for class in InstanceClass::ALL {
        let seed = 1;
        let data = synthesize(class, 15, &mut rng::stream(seed, rng::GENERATION_STREAM));
        let mut opts = GenerateOptions::new(15);
        opts.class = Some(class);
        opts.seed = Some(seed);
        let inst = build_instance(&data, &opts).unwrap();
        let lf = inst.load_factor().unwrap();
        let spec = ExperimentSpec::new("generated", 42);
        let paths = sim::generate_paths(&inst, spec.paths, spec.cv, spec.seed).unwrap();
        let exp = sim::run_experiment(&spec, &inst, paths, workers).unwrap();
        let blp = &exp.report.policy("BLP").unwrap().summary;
        let pkp = &exp.report.policy("PKP").unwrap().summary;
        let truncated: usize = exp.report.policies.iter().map(|p| p.truncated_runs).sum();
        std_wins += (blp.std < pkp.std) as usize;
        mean_wins += (pkp.mean >= blp.mean) as usize;
        parts.push(format!(
            "{} (LF {lf:.2}, K={}): std BLP {:.1} vs PKP {:.1}, mean BLP {:.1} vs PKP {:.1}, {truncated} truncated",
            inst.label,
            inst.vehicles(),
            blp.std,
            pkp.std,
            blp.mean,
            pkp.mean
        ));
    }
    let detail = format!(
        "std(BLP) < std(PKP) on {std_wins}/3, mean(PKP) >= mean(BLP) on {mean_wins}/3; {}",
        parts.join("; ")
    );
    if std_wins == 3 && mean_wins >= 2 {
        Verdict::Pass(detail)
    } else {
        Verdict::Unmet(detail)
    }
}

fn hand_trace() -> Verdict {
    let inst = Instance::new(
        "C.1".parse().unwrap(),
        CostMatrix::euclidean(&[[0.0, 0.0], [2.0, 0.0]]),
        vec![5.0],
        vec![100.0],
        vec![2.5],
        10,
    )
    .unwrap();
    let path = RequestPath::from_events(1, 10, vec![(2, 1), (4, 1), (5, 1), (9, 1)]).unwrap();
    let r = run_booking_limit(&inst, &path, &SolutionPeriods::start(), &exact()).unwrap();
    let limits: Vec<f64> = r.decisions.iter().map(|d| d.limit.unwrap()).collect();
    let z = brute_cvrp(&inst, &r.final_state).unwrap();
    let identity = 100.0 * r.final_state.get(1) as f64 - z;
    let detail = format!(
        "limits {limits:?}, {} accepted, profit {} vs p.w - z*(w) = {identity}",
        r.accepted(),
        r.profit
    );
    if r.accepted() == 2 && limits == [2.5, 1.5, 0.5, 0.5] && (r.profit - identity).abs() <= 1e-6 {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn determinism() -> Verdict {
    let data = synthesize(InstanceClass::RC, 10, &mut rng::stream(3, rng::GENERATION_STREAM));
    let mut opts = GenerateOptions::new(10);
    opts.class = Some(InstanceClass::RC);
    let inst = build_instance(&data, &opts).unwrap();
    let mut spec = ExperimentSpec::new("generated", 2024);
    spec.paths = 20;
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    let mut problems = Vec::new();
    for (run, workers) in [(0, 1), (1, 4)] {
        let paths = sim::generate_paths(&inst, spec.paths, spec.cv, spec.seed).unwrap();
        let exp = sim::run_experiment(&spec, &inst, paths, workers).unwrap();
        let out = dir.path().join(format!("run{run}"));
        std::fs::create_dir_all(&out).unwrap();
        sim::write_outputs(&exp, &out).unwrap();
        for p in &exp.report.policies {
            let points = ecdf(&p.profits).unwrap();
            let valid = points.windows(2).all(|w| w[0].x < w[1].x && w[0].y <= w[1].y)
                && points.first().is_some_and(|f| f.y > 0.0)
                && points.last().is_some_and(|l| l.y == 1.0);
            if !valid || points != p.ecdf {
                problems.push(format!("run {run}: ECDF of {} is invalid", p.label));
            }
            let text = std::fs::read_to_string(out.join(format!("ecdf_{}.dat", p.label))).unwrap();
            if !text.trim_end().ends_with(" 1.000") {
                problems.push(format!("run {run}: ecdf_{}.dat does not end at 1.000", p.label));
            }
        }
        outputs.push(std::fs::read(out.join(sim::RESULTS_FILE)).unwrap());
    }
    if outputs[0] != outputs[1] {
        problems.push("results.csv differs between runs".into());
    }
    let detail = format!(
        "2 runs x 20 paths x 4 policies (1 and 4 workers), results.csv {} bytes, {} problems",
        outputs[0].len(),
        problems.len()
    );
    if problems.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(format!("{detail}; first: {}", problems[0]))
    }
}

const HIGHS_SCRIPT: &str = r#"
import sys
import highspy
h = highspy.Highs()
h.setOptionValue("output_flag", False)
h.setOptionValue("mip_rel_gap", 0.0)
h.setOptionValue("mip_abs_gap", 1e-9)
h.readModel(sys.argv[1])
h.run()
print(h.modelStatusToString(h.getModelStatus()))
print(repr(h.getInfo().objective_function_value))
"#;

fn highs_available() -> bool {
    Command::new("python3")
        .args(["-c", "import highspy"])
        .output()
        .is_ok_and(|o| o.status.success())
}

fn cross_solver() -> Verdict {
    if !highs_available() {
        return Verdict::Skip("python3 with highspy not found".into());
    }
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("highs.py");
    std::fs::write(&script, HIGHS_SCRIPT).unwrap();
    let mut compared = 0;
    let mut problems = Vec::new();
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let mut r = rng::stream(seed, 3);
        let n = r.random_range(2..=5);
        let k = r.random_range(1..=2);
        let inst = random_instance(n, k, 4.0, 900 + seed);
        let w = loop {
            let w = SystemState((0..n).map(|_| r.random_range(0..=2)).collect());
            if feasible(&inst, &w) {
                break w;
            }
        };
        let mu: Vec<f64> = (0..n).map(|_| r.random_range(0..=8) as f64 * 0.5).collect();
        let cases: [(&str, Option<&[f64]>, f64); 2] = [
            ("cvrp", None, solve_cvrp(&inst, &w, &exact()).unwrap().cost),
            ("pmvrp", Some(&mu), solve_pmvrp(&inst, &w, &mu, &exact()).unwrap().objective),
        ];
        for (kind, mu_t, ours) in cases {
            let lp = dir.path().join(format!("{kind}_{seed}.lp"));
            std::fs::write(&lp, export_lp(&inst, &w, mu_t).unwrap()).unwrap();
            let out = Command::new("python3").arg(&script).arg(&lp).output().unwrap();
            let text = String::from_utf8_lossy(&out.stdout);
            let mut lines = text.lines();
            let status = lines.next().unwrap_or("");
            let theirs: Option<f64> = lines.next().and_then(|v| v.trim().parse().ok());
            match theirs {
                Some(v) if status == "Optimal" => {
                    compared += 1;
                    worst = worst.max((v - ours).abs());
                    if (v - ours).abs() > 1e-4 {
                        problems.push(format!("{kind} seed {seed}: HiGHS {v} vs {ours}"));
                    }
                }
                _ => problems.push(format!(
                    "{kind} seed {seed}: HiGHS returned {status:?} {}",
                    String::from_utf8_lossy(&out.stderr).trim()
                )),
            }
        }
    }
    let detail = format!("{compared} models on 10 instances (n <= 5), largest gap {worst:.2e}");
    if problems.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(format!("{detail}; first: {}", problems[0]))
    }
}
