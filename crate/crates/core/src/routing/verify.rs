//! Independent check of a routing plan against the model constraints.

use std::fmt;

use crate::instance::Instance;
use crate::state::SystemState;

use super::OperationalSolution;

const TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation(pub String);

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Violation {}

/// Checks that `sol` serves `w + y` (`y = None` for a pure CVRP plan):
/// closed depot routes, at most one visit per node, collection only on
/// visited nodes, vehicle capacities, demand fulfilment and the stated cost.
pub fn verify_solution(
    inst: &Instance,
    w: &SystemState,
    y: Option<&[f64]>,
    sol: &OperationalSolution,
) -> Result<(), Violation> {
    let fail = |msg: String| Err(Violation(msg));
    let n = inst.n();
    if sol.routes.len() != inst.vehicles() || sol.collected.len() != inst.vehicles() {
        return fail(format!(
            "{} routes / {} load vectors for {} vehicles",
            sol.routes.len(),
            sol.collected.len(),
            inst.vehicles()
        ));
    }
    let mut visited_by = vec![None; n + 1];
    for (k, route) in sol.routes.iter().enumerate() {
        if route.is_empty() {
            continue;
        }
        if route.len() < 2 || route[0] != 0 || route[route.len() - 1] != 0 {
            return fail(format!("route {k} does not start and end at the depot: {route:?}"));
        }
        for &v in &route[1..route.len() - 1] {
            if v == 0 || v > n {
                return fail(format!("route {k} visits invalid node {v}"));
            }
            if let Some(other) = visited_by[v] {
                return fail(format!("node {v} visited by routes {other} and {k}"));
            }
            visited_by[v] = Some(k);
        }
    }
    for (k, q) in sol.collected.iter().enumerate() {
        if q.len() != n {
            return fail(format!("load vector {k} has {} entries", q.len()));
        }
        let mut total = 0.0;
        for (i, &amount) in q.iter().enumerate() {
            if amount < -TOL {
                return fail(format!("vehicle {k} collects {amount} at node {}", i + 1));
            }
            if amount > TOL && visited_by[i + 1] != Some(k) {
                return fail(format!("vehicle {k} collects at node {} without visiting it", i + 1));
            }
            total += amount;
        }
        if total > inst.fleet[k] + TOL {
            return fail(format!("vehicle {k} carries {total} > capacity {}", inst.fleet[k]));
        }
    }
    for j in 1..=n {
        let served: f64 = sol.collected.iter().map(|q| q[j - 1]).sum();
        let wanted = w.get(j) as f64 + y.map_or(0.0, |y| y[j - 1]);
        if (served - wanted).abs() > TOL {
            return fail(format!("node {j}: collected {served}, required {wanted}"));
        }
    }
    let recomputed = sol.recompute_cost(inst);
    if (recomputed - sol.cost).abs() > TOL {
        return fail(format!("stated cost {} but routes cost {recomputed}", sol.cost));
    }
    Ok(())
}
