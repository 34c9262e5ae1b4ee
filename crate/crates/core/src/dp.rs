//! Exact backward recursion over `(period, state)`.
//!
//! `pi_t(w) = lambda_0^t pi_{t+1}(w)
//!          + sum_j lambda_j^t max(pi_{t+1}(w), p_j + pi_{t+1}(w + e_j))`
//! with terminal value `pi_{T+1}(w) = -z*(w)`. A request is only accepted
//! when the resulting state can still be routed. The table covers every state
//! with `0 <= w_j <= floor(max_k Q_k)`; anything larger is never routable.

use serde::{Deserialize, Serialize};

use crate::demand::ArrivalModel;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::routing::{feasible, solve_cvrp, Budget, SolveStatus, SolverConfig};
use crate::state::SystemState;
use crate::EPS;

/// Default cap on `prod_j (w_max_j + 1) * T`.
pub const DEFAULT_STATE_CAP: u128 = 2_000_000;

/// Expected profit-to-go, or the marker for a state no fleet can serve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Finite(f64),
    Infeasible,
}

impl Value {
    pub fn finite(self) -> Option<f64> {
        match self {
            Value::Finite(v) => Some(v),
            Value::Infeasible => None,
        }
    }

    pub fn is_feasible(self) -> bool {
        matches!(self, Value::Finite(_))
    }
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.finite().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.map_or(Value::Infeasible, Value::Finite))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpConfig {
    pub state_cap: u128,
    /// Used for every terminal CVRP; should be unlimited for exact values.
    pub solver: SolverConfig,
}

impl Default for DpConfig {
    fn default() -> Self {
        DpConfig {
            state_cap: DEFAULT_STATE_CAP,
            solver: SolverConfig::default().with_budget(Budget::unlimited()),
        }
    }
}

/// One row of the accept/reject table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Control {
    pub t: usize,
    pub state: SystemState,
    pub node: usize,
    pub accept: bool,
}

/// `pi_t(w)` for `t = 1..=T+1` over the whole bounded state grid.
#[derive(Debug, Clone)]
pub struct ValueTable {
    horizon: usize,
    w_max: Vec<u32>,
    stride: Vec<usize>,
    size: usize,
    price: Vec<f64>,
    /// `values[(t - 1) * size + index(w)]`.
    values: Vec<Value>,
}

impl ValueTable {
    pub fn build(inst: &Instance, arrivals: &ArrivalModel, cfg: &DpConfig) -> Result<Self> {
        let n = inst.n();
        let horizon = arrivals.horizon();
        if arrivals.n() != n && horizon > 0 {
            return Err(Error::InvalidArgument(format!(
                "arrival model has {} nodes, instance has {n}",
                arrivals.n()
            )));
        }
        let cap = (inst.max_capacity() + EPS).floor().max(0.0) as u32;
        let w_max = vec![cap; n];
        let mut needed: u128 = horizon.max(1) as u128;
        for &m in &w_max {
            needed = needed.saturating_mul(m as u128 + 1);
        }
        if needed > cfg.state_cap {
            return Err(Error::StateSpaceTooLarge {
                needed,
                cap: cfg.state_cap,
            });
        }
        let mut stride = Vec::with_capacity(n);
        let mut size = 1usize;
        for &m in &w_max {
            stride.push(size);
            size *= m as usize + 1;
        }
        let mut table = ValueTable {
            horizon,
            w_max,
            stride,
            size,
            price: inst.price.clone(),
            values: vec![Value::Infeasible; size * (horizon + 1)],
        };

        let terminal = horizon * size;
        for idx in 0..size {
            let w = table.state_at(idx);
            if !feasible(inst, &w) {
                continue;
            }
            let sol = solve_cvrp(inst, &w, &cfg.solver)?;
            if sol.status != SolveStatus::Optimal {
                return Err(Error::Internal(format!("terminal routing of state {w} is {}", sol.status)));
            }
            table.values[terminal + idx] = Value::Finite(-sol.cost);
        }

        for t in (1..=horizon).rev() {
            let next = t * size;
            let here = (t - 1) * size;
            let lambda0 = arrivals.lambda0[t - 1];
            for idx in 0..size {
                let Value::Finite(stay) = table.values[next + idx] else {
                    continue;
                };
                let mut v = lambda0 * stay;
                for j in 1..=n {
                    v += arrivals.prob(t, j) * table.best_response(t, idx, j).1.max(stay);
                }
                table.values[here + idx] = Value::Finite(v);
            }
        }
        Ok(table)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n(&self) -> usize {
        self.w_max.len()
    }

    /// Largest count per node kept in the table.
    pub fn w_max(&self) -> &[u32] {
        &self.w_max
    }

    /// `pi_t(w)` for `1 <= t <= T + 1`.
    pub fn value(&self, t: usize, w: &SystemState) -> Result<Value> {
        self.check(t, self.horizon + 1, w)?;
        Ok(match self.index(w) {
            Some(idx) => self.values[(t - 1) * self.size + idx],
            None => Value::Infeasible,
        })
    }

    /// Whether a request for node `j` at period `t` in state `w` should be
    /// accepted: `p_j >= pi_{t+1}(w) - pi_{t+1}(w + e_j)` and `w + e_j` is
    /// routable.
    pub fn optimal_control(&self, t: usize, w: &SystemState, j: usize) -> Result<bool> {
        self.check(t, self.horizon, w)?;
        if j == 0 || j > self.n() {
            return Err(Error::InvalidArgument(format!("node {j} outside 1..={}", self.n())));
        }
        let Some(idx) = self.index(w) else {
            return Ok(false);
        };
        Ok(self.best_response(t, idx, j).0)
    }

    /// Every state of the grid, in table order.
    pub fn states(&self) -> impl Iterator<Item = SystemState> + '_ {
        (0..self.size).map(|idx| self.state_at(idx))
    }

    /// Accept/reject decision for every period, feasible state and node.
    pub fn controls(&self) -> Vec<Control> {
        let mut out = Vec::new();
        for t in 1..=self.horizon {
            for idx in 0..self.size {
                if !self.values[t * self.size + idx].is_feasible() {
                    continue;
                }
                let state = self.state_at(idx);
                for j in 1..=self.n() {
                    out.push(Control {
                        t,
                        state: state.clone(),
                        node: j,
                        accept: self.best_response(t, idx, j).0,
                    });
                }
            }
        }
        out
    }

    /// Decision and value of a request for `j` at period `t` in state `idx`,
    /// assuming `pi_{t+1}(w)` is finite.
    fn best_response(&self, t: usize, idx: usize, j: usize) -> (bool, f64) {
        let next = t * self.size;
        let Value::Finite(stay) = self.values[next + idx] else {
            return (false, f64::NEG_INFINITY);
        };
        let w_j = (idx / self.stride[j - 1]) % (self.w_max[j - 1] as usize + 1);
        if w_j as u32 >= self.w_max[j - 1] {
            return (false, stay);
        }
        match self.values[next + idx + self.stride[j - 1]] {
            Value::Finite(after) if self.price[j - 1] + after >= stay => (true, self.price[j - 1] + after),
            _ => (false, stay),
        }
    }

    fn check(&self, t: usize, last: usize, w: &SystemState) -> Result<()> {
        if t == 0 || t > last {
            return Err(Error::PeriodOutOfRange { t, horizon: last });
        }
        if w.len() != self.n() {
            return Err(Error::InvalidArgument(format!(
                "state has {} entries for {} nodes",
                w.len(),
                self.n()
            )));
        }
        Ok(())
    }

    fn index(&self, w: &SystemState) -> Option<usize> {
        let mut idx = 0;
        for (j, &x) in w.0.iter().enumerate() {
            if x > self.w_max[j] {
                return None;
            }
            idx += x as usize * self.stride[j];
        }
        Some(idx)
    }

    fn state_at(&self, mut idx: usize) -> SystemState {
        SystemState(
            self.w_max
                .iter()
                .map(|&m| {
                    let base = m as usize + 1;
                    let x = idx % base;
                    idx /= base;
                    x as u32
                })
                .collect(),
        )
    }
}
