use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rmroute"))
}

fn data(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    p.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("RMROUTE_WORKERS").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn gen_instance(dir: &Path, class: &str, n: usize, seed: u64) -> PathBuf {
    let path = dir.join(format!("{class}{n}.toml"));
    let out = run(&[
        "gen",
        "--synthetic",
        class,
        "--n",
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "-q",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn solve_zero_state_costs_nothing() {
    let out = run(&["solve", "--instance", &data("c15.toml")]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["solution"]["cost"], 0.0);
    assert_eq!(doc["solution"]["status"], "optimal");
    assert_eq!(doc["tool"], "rmroute");
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config"]["budget_s"], 60.0);
    assert!(doc["seed"].is_u64());
}

#[test]
fn solve_pmvrp_reports_limits() {
    let out = run(&[
        "solve",
        "--instance",
        &data("c15.toml"),
        "--state",
        &data("c15-state.txt"),
        "--pmvrp",
        "--t",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert_eq!(doc["problem"], "pmvrp");
    let y = doc["solution"]["y"].as_array().unwrap();
    assert_eq!(y.len(), 15);
    assert!(doc["solution"]["objective"].as_f64().unwrap() > 0.0);
}

#[test]
fn dp_hand_example() {
    let out = run(&["dp", "--instance", &data("single.toml"), "--controls"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["value"], 3.0);
    assert_eq!(doc["accept"][0], true);
    assert_eq!(doc["controls"].as_array().unwrap().len(), 4);
}

#[test]
fn infeasible_state_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("w.txt");
    std::fs::write(&state, "1000 0 0 0 0 0 0 0 0 0 0 0 0 0 0\n").unwrap();
    let out = run(&[
        "solve",
        "--instance",
        &data("c15.toml"),
        "--state",
        state.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["solution"]["status"], "infeasible");
}

#[test]
fn strict_truncated_solve_exits_with_4() {
    let args = [
        "solve",
        "--instance",
        &data("c15.toml"),
        "--state",
        &data("c15-state.txt"),
        "--pmvrp",
        "--engine",
        "branch-and-bound",
        "--node-limit",
        "5",
    ];
    let lenient = run(&args);
    assert_eq!(lenient.status.code(), Some(0));
    assert_eq!(json(&lenient)["solution"]["status"], "incumbent");
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(run(&strict).status.code(), Some(4));
}

#[test]
fn usage_errors_exit_with_2() {
    assert_eq!(run(&["solve", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["gen", "--n", "5"]).status.code(), Some(2));
    let out = run(&["gen", "--synthetic", "C", "--lf-min", "2", "--lf-max", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--lf-min"));
    let out = run(&["solve", "--instance", &data("c15.toml"), "--mu-t", "x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_exits_with_1() {
    let out = run(&["solve", "--instance", "/nonexistent/instance.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/instance.toml"));
}

#[test]
fn gen_is_reproducible_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_instance(dir.path(), "RC", 10, 5);
    let first = std::fs::read(&a).unwrap();
    let b = gen_instance(dir.path(), "RC", 10, 5);
    assert_eq!(first, std::fs::read(&b).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with(&format!("# rmroute {} gen", env!("CARGO_PKG_VERSION"))));
    assert!(text.contains("seed = 5"));
    let inst = rmroute_core::Instance::load(&a).unwrap();
    assert_eq!(inst.n(), 10);
    let lf = inst.load_factor().unwrap();
    assert!((1.0..=1.5).contains(&lf), "load factor {lf}");
}

#[test]
fn gen_round_trips_a_solomon_file() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("r.txt");
    let first = dir.path().join("first.toml");
    let out = run(&[
        "gen", "--synthetic", "R", "--n", "12", "--seed", "3", "-q",
        "--write-source", src.to_str().unwrap(), "-o", first.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let second = dir.path().join("second.toml");
    let out = run(&[
        "gen", "--source", src.to_str().unwrap(), "--class", "R", "--n", "12", "--seed", "3", "-q",
        "-o", second.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a = rmroute_core::Instance::load(&first).unwrap();
    let b = rmroute_core::Instance::load(&second).unwrap();
    assert_eq!(a, b);
}

#[test]
fn paths_writes_parseable_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("paths");
    let out = run(&[
        "paths", "--instance", &data("c15.toml"), "--count", "3", "--seed", "9", "-q",
        "--out", out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    for i in 0..3 {
        let (header, path) = rmroute_core::demand::RequestPath::load(out_dir.join(format!("path_{i:04}.txt"))).unwrap();
        assert_eq!(header.seed, 9);
        assert_eq!(header.index, i);
        assert!(!path.events.is_empty());
    }
    let manifest: Value = serde_json::from_slice(&std::fs::read(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["requests"].as_array().unwrap().len(), 3);
}

fn simulate(spec: &Path, out: &Path, workers: &str) -> Output {
    bin()
        .args(["simulate", "-q", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("RMROUTE_WORKERS", workers)
        .output()
        .unwrap()
}

#[test]
fn simulate_is_byte_reproducible_and_leaves_inputs_alone() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_instance(dir.path(), "C", 8, 2);
    let spec = dir.path().join("exp.toml");
    std::fs::write(
        &spec,
        format!("instance = {:?}\npaths = 6\nseed = 17\n", inst.file_name().unwrap().to_str().unwrap()),
    )
    .unwrap();
    let before = (std::fs::read(&inst).unwrap(), std::fs::read(&spec).unwrap());

    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let out = simulate(&spec, &a, "1");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(simulate(&spec, &b, "3").status.success());
    let results = std::fs::read(a.join("results.csv")).unwrap();
    assert_eq!(results, std::fs::read(b.join("results.csv")).unwrap());
    for i in 0..6 {
        let name = format!("paths/path_{i:04}.txt");
        assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap());
    }
    assert_eq!(before, (std::fs::read(&inst).unwrap(), std::fs::read(&spec).unwrap()));

    let summary: Value = serde_json::from_slice(&std::fs::read(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 17);
    assert_eq!(summary["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(summary["config"]["paths"], 6);
    assert_eq!(summary["report"]["policies"].as_array().unwrap().len(), 4);

    let ecdf = std::fs::read_to_string(a.join("ecdf_FCFS.dat")).unwrap();
    let rows: Vec<(f64, f64)> = ecdf
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let mut it = l.split_whitespace().map(|x| x.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
    assert_eq!(rows.last().unwrap().1, 1.0);

    std::fs::remove_file(a.join("ecdf_FCFS.dat")).unwrap();
    let out = run(&["report", "--dir", a.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("FCFS"));
    assert_eq!(std::fs::read_to_string(a.join("ecdf_FCFS.dat")).unwrap(), ecdf);
}

#[test]
fn simulate_replays_a_paths_directory() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_instance(dir.path(), "R", 6, 4);
    let paths = dir.path().join("paths");
    assert!(run(&[
        "paths", "--instance", inst.to_str().unwrap(), "--count", "4", "--seed", "1", "-q",
        "--out", paths.to_str().unwrap(),
    ])
    .status
    .success());
    let spec = dir.path().join("exp.toml");
    std::fs::write(
        &spec,
        "instance = \"R6.toml\"\npaths = 4\nseed = 99\npaths_dir = \"paths\"\n[[policy]]\nkind = \"FCFS\"\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = simulate(&spec, &out_dir, "2");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for i in 0..4 {
        let name = format!("path_{i:04}.txt");
        let (_, original) = rmroute_core::demand::RequestPath::load(paths.join(&name)).unwrap();
        let (_, used) = rmroute_core::demand::RequestPath::load(out_dir.join("paths").join(&name)).unwrap();
        assert_eq!(original, used);
    }
}
