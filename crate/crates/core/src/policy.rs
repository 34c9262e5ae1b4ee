//! Accept/reject controls replayed against a realised request path.
//!
//! * BLP / BLPR: booking limits from the PMVRP at expected future demand,
//!   solved at the start of the horizon (and, for BLPR, again at its middle).
//! * PKP: the same procedure with the realised remaining demand of the path in
//!   place of its expectation.
//! * FCFS: accept whenever the accepted load plus the new request can still
//!   be routed.
//!
//! Every run ends by routing the accepted load with the CVRP solver.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::demand::{expected_future_demand, RequestPath};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::routing::{feasible, solve_cvrp, solve_pmvrp, OperationalSolution, SolveStatus, SolverConfig};
use crate::state::SystemState;
use crate::EPS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PolicyKind {
    Blp,
    Blpr,
    Fcfs,
    Pkp,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [PolicyKind::Blp, PolicyKind::Blpr, PolicyKind::Fcfs, PolicyKind::Pkp];

    /// Solution periods used when none are given.
    pub fn default_periods(self) -> SolutionPeriods {
        match self {
            PolicyKind::Blpr => SolutionPeriods::start_and_middle(),
            _ => SolutionPeriods::start(),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyKind::Blp => "BLP",
            PolicyKind::Blpr => "BLPR",
            PolicyKind::Fcfs => "FCFS",
            PolicyKind::Pkp => "PKP",
        })
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BLP" => Ok(PolicyKind::Blp),
            "BLPR" => Ok(PolicyKind::Blpr),
            "FCFS" => Ok(PolicyKind::Fcfs),
            "PKP" => Ok(PolicyKind::Pkp),
            _ => Err(Error::InvalidArgument(format!(
                "unknown policy {s:?} (expected BLP, BLPR, FCFS or PKP)"
            ))),
        }
    }
}

/// Periods at which booking limits are recomputed, stored as fractions of
/// the horizon: fraction `f` maps to period `floor(f * T) + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SolutionPeriods(Vec<f64>);

impl SolutionPeriods {
    /// Fractions must lie in `[0, 1)` and include `0` (the first period).
    pub fn new(mut fractions: Vec<f64>) -> Result<Self> {
        if let Some(f) = fractions.iter().find(|f| !(**f >= 0.0 && **f < 1.0)) {
            return Err(Error::InvalidArgument(format!("solution period fraction {f} outside [0, 1)")));
        }
        if !fractions.contains(&0.0) {
            return Err(Error::InvalidArgument("solution periods must include the first period (fraction 0)".into()));
        }
        fractions.sort_by(f64::total_cmp);
        fractions.dedup();
        Ok(SolutionPeriods(fractions))
    }

    pub fn start() -> Self {
        SolutionPeriods(vec![0.0])
    }

    pub fn start_and_middle() -> Self {
        SolutionPeriods(vec![0.0, 0.5])
    }

    pub fn fractions(&self) -> &[f64] {
        &self.0
    }

    /// Distinct periods in `1..=horizon`, ascending.
    pub fn periods(&self, horizon: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .0
            .iter()
            .map(|f| ((f * horizon as f64).floor() as usize + 1).min(horizon.max(1)))
            .collect();
        out.dedup();
        out
    }
}

/// One request and what the policy did with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub period: usize,
    pub node: usize,
    pub accepted: bool,
    /// Residual booking limit of the node just before the decision
    /// (booking-limit policies only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub limit: Option<f64>,
}

/// One PMVRP solve made during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub period: usize,
    pub objective: f64,
    pub status: SolveStatus,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRunResult {
    pub policy: PolicyKind,
    pub final_state: SystemState,
    pub decisions: Vec<Decision>,
    /// `p . w - z*(w)` with the final routing cost.
    pub profit: f64,
    pub revenue: f64,
    pub operational: OperationalSolution,
    pub solve_log: Vec<SolveRecord>,
}

impl PolicyRunResult {
    pub fn accepted(&self) -> usize {
        self.decisions.iter().filter(|d| d.accepted).count()
    }

    /// True when any solve of the run stopped on its budget.
    pub fn truncated(&self) -> bool {
        self.operational.status == SolveStatus::Incumbent
            || self.solve_log.iter().any(|r| r.status == SolveStatus::Incumbent)
    }
}

/// Runs `kind` on `path`. `periods` is ignored by FCFS.
pub fn run_policy(
    kind: PolicyKind,
    inst: &Instance,
    path: &RequestPath,
    periods: &SolutionPeriods,
    cfg: &SolverConfig,
) -> Result<PolicyRunResult> {
    match kind {
        PolicyKind::Blp | PolicyKind::Blpr => run_limits(kind, inst, path, periods, cfg, |t| {
            expected_future_demand(&inst.mean_demand, t, path.horizon)
        }),
        PolicyKind::Pkp => run_limits(kind, inst, path, periods, cfg, |t| Ok(path.remaining_from(t))),
        PolicyKind::Fcfs => run_fcfs(inst, path, cfg),
    }
}

/// Booking-limit policy at expected future demand.
pub fn run_booking_limit(
    inst: &Instance,
    path: &RequestPath,
    periods: &SolutionPeriods,
    cfg: &SolverConfig,
) -> Result<PolicyRunResult> {
    let kind = if periods.periods(path.horizon).len() > 1 {
        PolicyKind::Blpr
    } else {
        PolicyKind::Blp
    };
    run_policy(kind, inst, path, periods, cfg)
}

/// Booking-limit policy at the realised remaining demand of `path`.
pub fn run_pkp(
    inst: &Instance,
    path: &RequestPath,
    periods: &SolutionPeriods,
    cfg: &SolverConfig,
) -> Result<PolicyRunResult> {
    run_policy(PolicyKind::Pkp, inst, path, periods, cfg)
}

/// First-come first-served: accept iff the new state is still routable.
pub fn run_fcfs(inst: &Instance, path: &RequestPath, cfg: &SolverConfig) -> Result<PolicyRunResult> {
    check_path(inst, path)?;
    let mut w = SystemState::zeros(inst.n());
    let mut decisions = Vec::with_capacity(path.events.len());
    for &(period, node) in &path.events {
        let next = w.plus_unit(node);
        let accepted = feasible(inst, &next);
        if accepted {
            w = next;
        }
        decisions.push(Decision {
            period,
            node,
            accepted,
            limit: None,
        });
    }
    finish(PolicyKind::Fcfs, inst, w, decisions, Vec::new(), cfg)
}

fn run_limits(
    kind: PolicyKind,
    inst: &Instance,
    path: &RequestPath,
    periods: &SolutionPeriods,
    cfg: &SolverConfig,
    bound: impl Fn(usize) -> Result<Vec<f64>>,
) -> Result<PolicyRunResult> {
    check_path(inst, path)?;
    let n = inst.n();
    let schedule = if path.horizon == 0 {
        Vec::new()
    } else {
        periods.periods(path.horizon)
    };
    let mut w = SystemState::zeros(n);
    let mut limit = vec![0.0; n];
    let mut decisions = Vec::with_capacity(path.events.len());
    let mut log = Vec::with_capacity(schedule.len());
    let mut pending = schedule.iter().copied().peekable();

    let mut resolve = |t: usize, w: &SystemState, limit: &mut Vec<f64>| -> Result<()> {
        let sol = solve_pmvrp(inst, w, &bound(t)?, cfg)?;
        if sol.status == SolveStatus::Infeasible {
            return Err(Error::Internal(format!("PMVRP infeasible at period {t} in state {w}")));
        }
        *limit = sol.y;
        log.push(SolveRecord {
            period: t,
            objective: sol.objective,
            status: sol.status,
            seconds: sol.plan.seconds,
        });
        Ok(())
    };

    for &(period, node) in &path.events {
        while let Some(t) = pending.next_if(|&t| t <= period) {
            resolve(t, &w, &mut limit)?;
        }
        let before = limit[node - 1];
        let accepted = before >= 1.0 - EPS;
        if accepted {
            w = w.plus_unit(node);
            limit[node - 1] -= 1.0;
        }
        decisions.push(Decision {
            period,
            node,
            accepted,
            limit: Some(before),
        });
    }
    for t in pending {
        resolve(t, &w, &mut limit)?;
    }
    finish(kind, inst, w, decisions, log, cfg)
}

fn check_path(inst: &Instance, path: &RequestPath) -> Result<()> {
    if path.n() != inst.n() {
        return Err(Error::InvalidArgument(format!(
            "request path has {} nodes, instance has {}",
            path.n(),
            inst.n()
        )));
    }
    if path.horizon != inst.horizon {
        return Err(Error::InvalidArgument(format!(
            "request path horizon {} differs from instance horizon {}",
            path.horizon, inst.horizon
        )));
    }
    Ok(())
}

fn finish(
    policy: PolicyKind,
    inst: &Instance,
    w: SystemState,
    decisions: Vec<Decision>,
    solve_log: Vec<SolveRecord>,
    cfg: &SolverConfig,
) -> Result<PolicyRunResult> {
    let operational = solve_cvrp(inst, &w, cfg)?;
    if !operational.is_feasible() {
        return Err(Error::Internal(format!("{policy} accepted unroutable state {w}")));
    }
    let revenue: f64 = (1..=inst.n()).map(|j| inst.price_of(j) * w.get(j) as f64).sum();
    Ok(PolicyRunResult {
        policy,
        profit: revenue - operational.cost,
        revenue,
        final_state: w,
        decisions,
        operational,
        solve_log,
    })
}
