//! Operational routing: feasibility, CVRP cost minimisation and the profit
//! maximisation VRP used to set booking limits.
//!
//! Both optimisation problems are solved by one engine over a common
//! formulation: every candidate node carries a mandatory load `w_j`, an upper
//! bound on optional extra load and a unit price. A vehicle serving a set of
//! nodes must carry all their mandatory load; its residual capacity is filled
//! with optional load in decreasing price order (the exact solution of the
//! continuous knapsack that remains once the partition is fixed). The CVRP is
//! the special case with no optional load.
//!
//! Zero-load nodes are only visited when they can earn revenue, so shortcuts
//! through idle nodes are never taken. That is exact whenever arc costs obey
//! the triangle inequality, as Euclidean instances do.

mod binpack;
mod bnb;
pub mod milp;
mod problem;
mod subset_dp;
pub mod tsp;
pub mod verify;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::state::SystemState;

pub use binpack::{feasible, pack};
pub use tsp::{tsp_cost, Tour};
pub use verify::{verify_solution, Violation};

use problem::RouteProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    /// Best solution found before the budget ran out.
    Incumbent,
    Infeasible,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Incumbent => "incumbent",
            SolveStatus::Infeasible => "infeasible",
        })
    }
}

/// Search limits. `None` means unlimited.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Budget {
    pub time: Option<Duration>,
    /// Branch-and-bound node limit, for reproducible truncation in tests.
    pub nodes: Option<u64>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn seconds(s: f64) -> Self {
        Budget {
            time: Some(Duration::from_secs_f64(s)),
            nodes: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// Subset DP when the candidate count allows it, branch-and-bound otherwise.
    Auto,
    SubsetDp,
    BranchAndBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub engine: Engine,
    /// Largest candidate count handled by the subset DP.
    pub dp_limit: usize,
    /// Largest route handled by the Held-Karp kernel.
    pub hk_limit: usize,
    pub budget: Budget,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            engine: Engine::Auto,
            dp_limit: 16,
            hk_limit: 15,
            budget: Budget::seconds(60.0),
        }
    }
}

impl SolverConfig {
    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }
}

/// A feasible routing plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationalSolution {
    /// One entry per vehicle: `[0, ..., 0]`, or `[0, 0]` when unused.
    pub routes: Vec<Vec<usize>>,
    /// `collected[k][j-1]`: items vehicle `k` collects at node `j`.
    pub collected: Vec<Vec<f64>>,
    /// Total arc cost; infinite when infeasible.
    #[serde(with = "finite_or_null")]
    pub cost: f64,
    pub status: SolveStatus,
    pub seconds: f64,
}

impl OperationalSolution {
    pub fn infeasible(inst: &Instance, seconds: f64) -> Self {
        OperationalSolution {
            routes: vec![vec![0, 0]; inst.vehicles()],
            collected: vec![vec![0.0; inst.n()]; inst.vehicles()],
            cost: f64::INFINITY,
            status: SolveStatus::Infeasible,
            seconds,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.status != SolveStatus::Infeasible
    }

    pub fn used_vehicles(&self) -> usize {
        self.routes.iter().filter(|r| r.len() > 2).count()
    }

    /// Sum of arc costs along the routes, recomputed from the matrix.
    pub fn recompute_cost(&self, inst: &Instance) -> f64 {
        self.routes
            .iter()
            .map(|r| r.windows(2).map(|a| inst.cost.get(a[0], a[1])).sum::<f64>())
            .sum()
    }
}

/// Solution of the profit-maximisation problem at a given state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmvrpSolution {
    /// Booking limits per node, `0 <= y_j <= mu_j(t)`.
    pub y: Vec<f64>,
    /// Plan serving `w + y`.
    pub plan: OperationalSolution,
    pub revenue: f64,
    /// `p.y - cost`; negative infinity when infeasible.
    #[serde(with = "neg_finite_or_null")]
    pub objective: f64,
    pub status: SolveStatus,
}

/// Minimum-cost routing of the accepted state `w`.
pub fn solve_cvrp(inst: &Instance, w: &SystemState, cfg: &SolverConfig) -> Result<OperationalSolution> {
    let zeros = vec![0.0; inst.n()];
    let sol = solve(inst, w, &zeros, cfg)?;
    Ok(sol.plan)
}

/// Profit-maximising booking limits at state `w` with expected future demand `mu_t`.
pub fn solve_pmvrp(
    inst: &Instance,
    w: &SystemState,
    mu_t: &[f64],
    cfg: &SolverConfig,
) -> Result<PmvrpSolution> {
    if mu_t.len() != inst.n() {
        return Err(Error::InvalidArgument(format!(
            "demand bound has {} entries for {} nodes",
            mu_t.len(),
            inst.n()
        )));
    }
    if let Some(m) = mu_t.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
        return Err(Error::InvalidArgument(format!("demand bound {m} is negative")));
    }
    solve(inst, w, mu_t, cfg)
}

fn solve(inst: &Instance, w: &SystemState, mu_t: &[f64], cfg: &SolverConfig) -> Result<PmvrpSolution> {
    if w.len() != inst.n() {
        return Err(Error::InvalidArgument(format!(
            "state has {} entries for {} nodes",
            w.len(),
            inst.n()
        )));
    }
    if inst.n() > 63 {
        return Err(Error::InvalidArgument(format!(
            "{} customers exceed the 63-node limit of the built-in solver",
            inst.n()
        )));
    }
    let start = Instant::now();
    let deadline = cfg.budget.time.map(|d| start + d);
    let infeasible = |start: Instant| PmvrpSolution {
        y: vec![0.0; inst.n()],
        plan: OperationalSolution::infeasible(inst, start.elapsed().as_secs_f64()),
        revenue: 0.0,
        objective: f64::NEG_INFINITY,
        status: SolveStatus::Infeasible,
    };

    let loads = w.as_loads();
    let Some(certificate) = pack(&loads, &inst.fleet) else {
        return Ok(infeasible(start));
    };
    let problem = RouteProblem::new(inst, &loads, mu_t);
    let use_dp = match cfg.engine {
        Engine::SubsetDp => true,
        Engine::BranchAndBound => false,
        Engine::Auto => problem.len() <= cfg.dp_limit,
    };
    let raw = if use_dp {
        if problem.len() > 24 {
            return Err(Error::InvalidArgument(format!(
                "subset DP over {} candidate nodes is out of reach",
                problem.len()
            )));
        }
        subset_dp::solve(&problem)
    } else {
        bnb::solve(&problem, &certificate, cfg.hk_limit, deadline, cfg.budget.nodes)
    };
    let Some(raw) = raw else {
        return Ok(infeasible(start));
    };
    Ok(problem.finish(raw, start.elapsed().as_secs_f64()))
}

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

mod neg_finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        super::finite_or_null::serialize(v, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}
