//! Brute-force oracles shared by the integration tests. Nothing here calls the
//! solver code paths it is used to check.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use rmroute_core::instance::{CostMatrix, Instance};
use rmroute_core::rng;
use rmroute_core::SystemState;

/// Random Euclidean instance: real-valued points in a 100x100 square,
/// `vehicles` identical vehicles of the given capacity, prices in `[5, 60)`.
pub fn random_instance(n: usize, vehicles: usize, capacity: f64, seed: u64) -> Instance {
    let mut r = rng::stream(seed, 0);
    let pts: Vec<[f64; 2]> = (0..=n)
        .map(|_| [r.random_range(0.0..100.0), r.random_range(0.0..100.0)])
        .collect();
    let price = (0..n).map(|_| r.random_range(5.0..60.0)).collect();
    let mean = (0..n).map(|_| r.random_range(1..=3) as f64).collect();
    let mut inst = Instance::new(
        format!("R.{n}").parse().unwrap(),
        CostMatrix::euclidean(&pts),
        vec![capacity; vehicles],
        price,
        mean,
        20,
    )
    .unwrap();
    inst.coords = Some(pts);
    inst
}

/// Route cost of visiting `order` from and back to the depot.
pub fn route_cost(inst: &Instance, order: &[usize]) -> f64 {
    let mut prev = 0;
    let mut total = 0.0;
    for &v in order {
        total += inst.cost.get(prev, v);
        prev = v;
    }
    total + inst.cost.get(prev, 0)
}

pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Cheapest tour over all permutations.
pub fn brute_tour(inst: &Instance, nodes: &[usize]) -> f64 {
    if nodes.is_empty() {
        return 0.0;
    }
    permutations(nodes)
        .iter()
        .map(|p| route_cost(inst, p))
        .fold(f64::INFINITY, f64::min)
}

/// Every way to send each listed node to one of `k` vehicles, or (when
/// `optional[i]`) to no vehicle. Yields vehicle per node, `None` = skipped.
pub fn assignments(optional: &[bool], k: usize) -> Vec<Vec<Option<usize>>> {
    let mut out = vec![Vec::new()];
    for &opt in optional {
        let mut next = Vec::new();
        for partial in &out {
            for v in 0..k {
                let mut a: Vec<Option<usize>> = partial.clone();
                a.push(Some(v));
                next.push(a);
            }
            if opt {
                let mut a = partial.clone();
                a.push(None);
                next.push(a);
            }
        }
        out = next;
    }
    out
}

/// Exhaustive CVRP optimum over (assignment, permutation) pairs; `None` if
/// infeasible.
pub fn brute_cvrp(inst: &Instance, w: &SystemState) -> Option<f64> {
    let nodes: Vec<usize> = (1..=inst.n()).filter(|&j| w.get(j) > 0).collect();
    let k = inst.vehicles();
    let mut memo: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut best: Option<f64> = None;
    for a in assignments(&vec![false; nodes.len()], k) {
        let mut groups = vec![Vec::new(); k];
        for (i, v) in a.iter().enumerate() {
            groups[v.unwrap()].push(nodes[i]);
        }
        let fits = groups.iter().enumerate().all(|(v, g)| {
            g.iter().map(|&j| w.get(j) as f64).sum::<f64>() <= inst.fleet[v] + 1e-9
        });
        if !fits {
            continue;
        }
        let total: f64 = groups
            .iter()
            .map(|g| *memo.entry(g.clone()).or_insert_with(|| brute_tour(inst, g)))
            .sum();
        if best.is_none_or(|b| total < b) {
            best = Some(total);
        }
    }
    best
}

/// Exact continuous knapsack by enumerating LP vertices: a set of items at
/// their upper bound plus at most one item partially filled.
pub fn knapsack_vertices(prices: &[f64], bounds: &[f64], residual: f64) -> f64 {
    let m = prices.len();
    let mut best = 0.0_f64;
    for full in 0u32..(1 << m) {
        let used: f64 = (0..m).filter(|i| full & (1 << i) != 0).map(|i| bounds[i]).sum();
        if used > residual + 1e-9 {
            continue;
        }
        let base: f64 = (0..m).filter(|i| full & (1 << i) != 0).map(|i| prices[i] * bounds[i]).sum();
        best = best.max(base);
        for f in (0..m).filter(|i| full & (1 << i) == 0) {
            let part = bounds[f].min(residual - used).max(0.0);
            best = best.max(base + prices[f] * part);
        }
    }
    best
}

/// Best revenue with every `y_j` restricted to multiples of `step` (and at
/// most its bound), by enumeration over the grid.
pub fn knapsack_grid(prices: &[f64], bounds: &[f64], residual: f64, step: f64) -> f64 {
    fn rec(i: usize, prices: &[f64], bounds: &[f64], left: f64, step: f64) -> f64 {
        if i == prices.len() {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        let mut y = 0.0;
        while y <= bounds[i] + 1e-12 && y <= left + 1e-12 {
            best = best.max(prices[i] * y + rec(i + 1, prices, bounds, left - y, step));
            y += step;
        }
        best
    }
    rec(0, prices, bounds, residual, step)
}

#[derive(Clone, Copy, PartialEq)]
pub enum Fill {
    Exact,
    Grid(f64),
}

/// Exhaustive PMVRP optimum: every node goes to a vehicle or (if `w_j = 0`)
/// is skipped, each route takes its cheapest permutation, and the residual
/// capacity is filled by [`knapsack_vertices`] or [`knapsack_grid`].
pub fn brute_pmvrp(inst: &Instance, w: &SystemState, mu_t: &[f64], fill: Fill) -> Option<f64> {
    let n = inst.n();
    let nodes: Vec<usize> = (1..=n).collect();
    let optional: Vec<bool> = nodes.iter().map(|&j| w.get(j) == 0).collect();
    let k = inst.vehicles();
    let mut tours: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut fills: HashMap<(Vec<usize>, u64), f64> = HashMap::new();
    let mut best: Option<f64> = None;
    for a in assignments(&optional, k) {
        let mut groups = vec![Vec::new(); k];
        for (i, v) in a.iter().enumerate() {
            if let Some(v) = v {
                groups[*v].push(nodes[i]);
            }
        }
        let mut total = 0.0;
        let mut ok = true;
        for (v, g) in groups.iter().enumerate() {
            let load: f64 = g.iter().map(|&j| w.get(j) as f64).sum();
            if load > inst.fleet[v] + 1e-9 {
                ok = false;
                break;
            }
            let residual = inst.fleet[v] - load;
            let revenue = *fills.entry((g.clone(), inst.fleet[v].to_bits())).or_insert_with(|| {
                let prices: Vec<f64> = g.iter().map(|&j| inst.price_of(j)).collect();
                let bounds: Vec<f64> = g.iter().map(|&j| mu_t[j - 1]).collect();
                match fill {
                    Fill::Exact => knapsack_vertices(&prices, &bounds, residual),
                    Fill::Grid(step) => knapsack_grid(&prices, &bounds, residual, step),
                }
            });
            let tour = *tours.entry(g.clone()).or_insert_with(|| brute_tour(inst, g));
            total += revenue - tour;
        }
        if ok && best.is_none_or(|b| total > b) {
            best = Some(total);
        }
    }
    best
}

/// Every state with `0 <= w_j <= cap` in lexicographic order.
pub fn all_states(n: usize, cap: u32) -> Vec<SystemState> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u32>| {
                (0..=cap).map(move |x| {
                    let mut v = v.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(SystemState).collect()
}
