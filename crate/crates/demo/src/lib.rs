//! Browser bindings for the static demo page: generate an instance, solve
//! its routes at a chosen state, and simulate the four policies.
//!
//! Exported functions exchange JSON text.

use rmroute_core::demand::expected_future_demand;
use rmroute_core::routing::{solve_cvrp, solve_pmvrp, Budget, SolveStatus, SolverConfig};
use rmroute_core::sim::{self, ExperimentSpec, Report};
use rmroute_core::solomon::{build_instance, synthesize, GenerateOptions};
use rmroute_core::{rng, Error, Instance, InstanceClass, SystemState};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest customer count the page offers.
pub const MAX_CUSTOMERS: usize = 25;
/// Largest number of simulated paths the page offers.
pub const MAX_PATHS: usize = 200;

#[derive(Debug, Serialize)]
pub struct InstanceView {
    pub toml: String,
    pub label: String,
    pub n: usize,
    pub vehicles: usize,
    pub capacity: f64,
    pub load_factor: f64,
    pub horizon: usize,
    /// Depot first.
    pub coords: Vec<[f64; 2]>,
    pub price: Vec<f64>,
    pub mean_demand: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct SolveView {
    pub problem: &'static str,
    pub status: SolveStatus,
    pub routes: Vec<Vec<usize>>,
    pub cost: f64,
    /// Optional load per node, PMVRP only.
    pub y: Option<Vec<f64>>,
    pub revenue: Option<f64>,
    pub objective: Option<f64>,
    pub seconds: f64,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub fn generate(class: &str, n: usize, seed: u64) -> Result<InstanceView, Error> {
    if n == 0 || n > MAX_CUSTOMERS {
        return Err(bad(format!("customer count must lie in 1..={MAX_CUSTOMERS}")));
    }
    let class: InstanceClass = class.parse()?;
    let data = synthesize(class, n, &mut rng::stream(seed, rng::GENERATION_STREAM));
    let mut opts = GenerateOptions::new(n);
    opts.class = Some(class);
    opts.seed = Some(seed);
    let inst = build_instance(&data, &opts)?;
    view(&inst)
}

fn view(inst: &Instance) -> Result<InstanceView, Error> {
    Ok(InstanceView {
        toml: inst.to_toml()?,
        label: inst.label.to_string(),
        n: inst.n(),
        vehicles: inst.vehicles(),
        capacity: inst.max_capacity(),
        load_factor: inst.load_factor()?,
        horizon: inst.horizon,
        coords: inst.coords.clone().unwrap_or_default(),
        price: inst.price.clone(),
        mean_demand: inst.mean_demand.clone(),
    })
}

/// CVRP at `state`, or the PMVRP with the full-horizon expected demand as
/// bounds when `pmvrp` is set.
pub fn solve(toml: &str, state: &[u32], pmvrp: bool, budget_s: f64) -> Result<SolveView, Error> {
    let inst = Instance::from_toml(toml)?;
    if state.len() != inst.n() {
        return Err(bad(format!("state has {} entries, instance has {} nodes", state.len(), inst.n())));
    }
    if !(budget_s.is_finite() && budget_s > 0.0) {
        return Err(bad("budget must be a positive number of seconds"));
    }
    let w = SystemState(state.to_vec());
    let cfg = SolverConfig::default().with_budget(Budget::seconds(budget_s));
    if pmvrp {
        let mu = expected_future_demand(&inst.mean_demand, 1, inst.horizon)?;
        let sol = solve_pmvrp(&inst, &w, &mu, &cfg)?;
        Ok(SolveView {
            problem: "pmvrp",
            status: sol.status,
            routes: sol.plan.routes,
            cost: sol.plan.cost,
            y: Some(sol.y),
            revenue: Some(sol.revenue),
            objective: Some(sol.objective),
            seconds: sol.plan.seconds,
        })
    } else {
        let sol = solve_cvrp(&inst, &w, &cfg)?;
        Ok(SolveView {
            problem: "cvrp",
            status: sol.status,
            routes: sol.routes,
            cost: sol.cost,
            y: None,
            revenue: None,
            objective: None,
            seconds: sol.seconds,
        })
    }
}

/// All four policies on `paths` shared request paths, single-threaded.
pub fn simulate(toml: &str, paths: usize, seed: u64, budget_s: f64) -> Result<Report, Error> {
    if paths == 0 || paths > MAX_PATHS {
        return Err(bad(format!("path count must lie in 1..={MAX_PATHS}")));
    }
    let inst = Instance::from_toml(toml)?;
    let mut spec = ExperimentSpec::new("browser", seed);
    spec.paths = paths;
    spec.budget_s = budget_s;
    let requests = sim::generate_paths(&inst, spec.paths, spec.cv, spec.seed)?;
    Ok(sim::run_experiment(&spec, &inst, requests, 1)?.report)
}

fn to_js<T: Serialize>(r: Result<T, Error>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = generateInstance)]
pub fn generate_instance(class: &str, n: usize, seed: u32) -> Result<String, JsError> {
    to_js(generate(class, n, seed.into()))
}

#[wasm_bindgen(js_name = solveRoutes)]
pub fn solve_routes(toml: &str, state: &[u32], pmvrp: bool, budget_s: f64) -> Result<String, JsError> {
    to_js(solve(toml, state, pmvrp, budget_s))
}

#[wasm_bindgen(js_name = simulatePolicies)]
pub fn simulate_policies(toml: &str, paths: usize, seed: u32, budget_s: f64) -> Result<String, JsError> {
    to_js(simulate(toml, paths, seed.into(), budget_s))
}
