//! Anytime branch-and-bound over node-to-vehicle assignments.
//!
//! Nodes are branched in a fixed order (mandatory ones by decreasing load,
//! then optional ones by decreasing best-case margin). Each node goes to one
//! vehicle or, if optional, is skipped. Empty vehicles of equal capacity are
//! interchangeable, so only the first of them is tried.
//!
//! Upper bound on the final profit: the exact value of every partial route
//! (Held-Karp tour, greedy fill) plus, per unassigned node, its best-case
//! revenue minus its cheapest possible detour. Adding a node to a tour costs
//! at least that detour, and adding nodes to a route never raises the revenue
//! of the nodes already on it, so the bound is valid for any cost matrix.

use std::collections::HashMap;

use web_time::Instant;

use super::problem::{bits, RawSolution, RouteProblem};
use super::tsp::{heuristic_tour, HeldKarp};
use super::SolveStatus;
use crate::EPS;

pub(crate) fn solve(
    p: &RouteProblem,
    certificate: &[Option<usize>],
    hk_limit: usize,
    deadline: Option<Instant>,
    node_limit: Option<u64>,
) -> Option<RawSolution> {
    let caps = &p.inst.fleet;
    let max_cap = p.inst.max_capacity();

    let mut order: Vec<usize> = (0..p.len()).collect();
    let margin = |c: usize| p.price[c] * p.bound[c] - p.detour[c];
    order.sort_by(|&a, &b| {
        let ma = p.mandatory & (1 << a) != 0;
        let mb = p.mandatory & (1 << b) != 0;
        mb.cmp(&ma)
            .then_with(|| {
                if ma {
                    p.load[b].total_cmp(&p.load[a])
                } else {
                    margin(b).total_cmp(&margin(a))
                }
            })
            .then(a.cmp(&b))
    });
    let mut suffix = vec![0.0; order.len() + 1];
    for k in (0..order.len()).rev() {
        let c = order[k];
        let ub = if p.mandatory & (1 << c) != 0 {
            p.price[c] * p.bound[c].min((max_cap - p.load[c]).max(0.0)) - p.detour[c]
        } else {
            margin(c).max(0.0)
        };
        suffix[k] = suffix[k + 1] + ub;
    }

    let mut search = Search {
        p,
        caps,
        order,
        suffix,
        routes: vec![0; caps.len()],
        loads: vec![0.0; caps.len()],
        tours: HashMap::new(),
        hk_limit,
        best_value: f64::NEG_INFINITY,
        best_routes: None,
        visited: 0,
        deadline,
        node_limit,
        aborted: false,
        hk_skipped: false,
    };

    // incumbent from the packing certificate
    let mut start_routes = vec![Vec::new(); caps.len()];
    let mut start_value = 0.0;
    for (k, cap) in caps.iter().enumerate() {
        let members: Vec<usize> = (0..p.len())
            .filter(|&c| certificate[p.nodes[c] - 1] == Some(k))
            .collect();
        if members.is_empty() {
            continue;
        }
        let mask = members.iter().fold(0u64, |m, &c| m | 1 << c);
        let (tour, seq) = if members.len() <= hk_limit {
            let t = search.tour(mask);
            let node_ids: Vec<usize> = members.iter().map(|&c| p.nodes[c]).collect();
            let table = HeldKarp::build(&p.inst.cost, &node_ids);
            let seq = table.order((1 << members.len()) - 1).into_iter().map(|i| members[i]).collect();
            (t, seq)
        } else {
            let node_ids: Vec<usize> = members.iter().map(|&c| p.nodes[c]).collect();
            let (t, ids) = heuristic_tour(&p.inst.cost, &node_ids);
            let seq = ids
                .into_iter()
                .map(|v| members[node_ids.iter().position(|&x| x == v).expect("member")])
                .collect();
            search.hk_skipped = true;
            (t, seq)
        };
        start_value += p.fill_value(mask, *cap)? - tour;
        start_routes[k] = seq;
    }
    search.best_value = start_value;

    search.dfs(0, 0.0);

    let status = if search.aborted || search.hk_skipped {
        SolveStatus::Incumbent
    } else {
        SolveStatus::Optimal
    };
    let routes = match search.best_routes.take() {
        Some(masks) => masks
            .iter()
            .map(|&mask| {
                let members: Vec<usize> = bits(mask).collect();
                let node_ids: Vec<usize> = members.iter().map(|&c| p.nodes[c]).collect();
                let table = HeldKarp::build(&p.inst.cost, &node_ids);
                table
                    .order((1u64 << members.len()) - 1)
                    .into_iter()
                    .map(|i| members[i])
                    .collect()
            })
            .collect(),
        None => start_routes,
    };
    Some(RawSolution { routes, status })
}

struct Search<'p, 'a> {
    p: &'p RouteProblem<'a>,
    caps: &'p [f64],
    order: Vec<usize>,
    suffix: Vec<f64>,
    routes: Vec<u64>,
    loads: Vec<f64>,
    tours: HashMap<u64, f64>,
    hk_limit: usize,
    best_value: f64,
    best_routes: Option<Vec<u64>>,
    visited: u64,
    deadline: Option<Instant>,
    node_limit: Option<u64>,
    aborted: bool,
    hk_skipped: bool,
}

impl Search<'_, '_> {
    fn tour(&mut self, mask: u64) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        if let Some(&t) = self.tours.get(&mask) {
            return t;
        }
        let ids: Vec<usize> = bits(mask).map(|c| self.p.nodes[c]).collect();
        let t = HeldKarp::build(&self.p.inst.cost, &ids).tour_cost((1u64 << ids.len()) - 1);
        self.tours.insert(mask, t);
        t
    }

    fn route_value(&mut self, mask: u64, k: usize) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        let rev = self.p.fill_value(mask, self.caps[k]).unwrap_or(f64::NEG_INFINITY);
        rev - self.tour(mask)
    }

    fn out_of_budget(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        self.visited += 1;
        self.aborted = self.node_limit.is_some_and(|lim| self.visited > lim)
            || (self.visited.is_multiple_of(256) && self.deadline.is_some_and(|d| Instant::now() >= d));
        self.aborted
    }

    fn dfs(&mut self, depth: usize, value: f64) {
        if self.out_of_budget() {
            return;
        }
        if value + self.suffix[depth] <= self.best_value + EPS {
            return;
        }
        if depth == self.order.len() {
            self.best_value = value;
            self.best_routes = Some(self.routes.clone());
            return;
        }
        let c = self.order[depth];
        let bit = 1u64 << c;
        let load = self.p.load[c];
        let mut options: Vec<(f64, Option<usize>)> = Vec::with_capacity(self.caps.len() + 1);
        for k in 0..self.caps.len() {
            if self.loads[k] + load > self.caps[k] + EPS {
                continue;
            }
            let empty = self.routes[k] == 0;
            if empty && (0..k).any(|e| self.routes[e] == 0 && self.caps[e] == self.caps[k]) {
                continue;
            }
            if self.routes[k].count_ones() as usize >= self.hk_limit {
                self.hk_skipped = true;
                continue;
            }
            let before = self.route_value(self.routes[k], k);
            let after = self.route_value(self.routes[k] | bit, k);
            options.push((after - before, Some(k)));
        }
        if self.p.mandatory & bit == 0 {
            options.push((0.0, None));
        }
        options.sort_by(|a, b| b.0.total_cmp(&a.0));
        for (delta, target) in options {
            match target {
                Some(k) => {
                    self.routes[k] |= bit;
                    self.loads[k] += load;
                    self.dfs(depth + 1, value + delta);
                    self.routes[k] &= !bit;
                    self.loads[k] -= load;
                }
                None => self.dfs(depth + 1, value),
            }
            if self.aborted {
                return;
            }
        }
    }
}
