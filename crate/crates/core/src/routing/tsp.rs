//! Depot-anchored directed tours: the exact Held-Karp kernel and a fallback
//! heuristic for routes too large for it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{CostMatrix, Instance};

/// A closed tour `0 -> ... -> 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    pub cost: f64,
    pub order: Vec<usize>,
}

/// Exact minimum-cost tour from the depot through every node in `nodes`.
pub fn tsp_cost(inst: &Instance, nodes: &[usize], limit: usize) -> Result<Tour> {
    if nodes.len() > limit {
        return Err(Error::TourTooLarge {
            size: nodes.len(),
            limit,
        });
    }
    if let Some(&bad) = nodes.iter().find(|&&v| v == 0 || v > inst.n()) {
        return Err(Error::InvalidArgument(format!("node {bad} is not a customer")));
    }
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let table = HeldKarp::build(&inst.cost, &sorted);
    let full = (1u64 << sorted.len()) - 1;
    let mut order = vec![0];
    order.extend(table.order(full).into_iter().map(|i| sorted[i]));
    order.push(0);
    Ok(Tour {
        cost: table.tour_cost(full),
        order,
    })
}

/// Held-Karp table over every subset of a node list: `path[S][last]` is the
/// cheapest path leaving the depot, visiting exactly `S` and stopping at
/// `last`. Closing any subset's path gives that subset's optimal tour.
pub(crate) struct HeldKarp {
    size: usize,
    parent: Vec<u8>,
    tour: Vec<f64>,
    tour_last: Vec<u8>,
}

impl HeldKarp {
    pub fn build(cost: &CostMatrix, nodes: &[usize]) -> Self {
        let r = nodes.len();
        assert!(r <= 24, "Held-Karp table over {r} nodes");
        let full = 1usize << r;
        let mut path = vec![f64::INFINITY; full * r];
        let mut parent = vec![u8::MAX; full * r];
        for (i, &v) in nodes.iter().enumerate() {
            path[(1 << i) * r + i] = cost.get(0, v);
        }
        for mask in 1..full {
            for last in 0..r {
                if mask & (1 << last) == 0 {
                    continue;
                }
                let here = path[mask * r + last];
                if !here.is_finite() {
                    continue;
                }
                let from = nodes[last];
                for next in 0..r {
                    if mask & (1 << next) != 0 {
                        continue;
                    }
                    let to = mask | (1 << next);
                    let cand = here + cost.get(from, nodes[next]);
                    let slot = to * r + next;
                    if cand < path[slot] {
                        path[slot] = cand;
                        parent[slot] = last as u8;
                    }
                }
            }
        }
        let mut tour = vec![f64::INFINITY; full];
        let mut tour_last = vec![u8::MAX; full];
        tour[0] = 0.0;
        for mask in 1..full {
            for last in 0..r {
                if mask & (1 << last) == 0 {
                    continue;
                }
                let cand = path[mask * r + last] + cost.get(nodes[last], 0);
                if cand < tour[mask] {
                    tour[mask] = cand;
                    tour_last[mask] = last as u8;
                }
            }
        }
        HeldKarp {
            size: r,
            parent,
            tour,
            tour_last,
        }
    }

    pub fn tour_cost(&self, mask: u64) -> f64 {
        self.tour[mask as usize]
    }

    /// Visiting order (indices into the node list) of the optimal tour of `mask`.
    pub fn order(&self, mask: u64) -> Vec<usize> {
        let mut mask = mask as usize;
        if mask == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut last = self.tour_last[mask] as usize;
        loop {
            out.push(last);
            let prev = self.parent[mask * self.size + last];
            mask &= !(1 << last);
            if mask == 0 {
                break;
            }
            last = prev as usize;
        }
        out.reverse();
        out
    }
}

/// Cost of visiting `order` between two depot stops.
pub(crate) fn path_cost(cost: &CostMatrix, order: &[usize]) -> f64 {
    let mut total = 0.0;
    let mut prev = 0;
    for &v in order {
        total += cost.get(prev, v);
        prev = v;
    }
    total + cost.get(prev, 0)
}

/// Nearest-neighbour construction improved by segment reversal until no move
/// helps. Not optimal; used only for routes beyond the Held-Karp limit.
pub(crate) fn heuristic_tour(cost: &CostMatrix, nodes: &[usize]) -> (f64, Vec<usize>) {
    let mut left: Vec<usize> = nodes.to_vec();
    left.sort_unstable();
    let mut order = Vec::with_capacity(left.len());
    let mut at = 0;
    while !left.is_empty() {
        let (pos, _) = left
            .iter()
            .enumerate()
            .min_by(|a, b| cost.get(at, *a.1).total_cmp(&cost.get(at, *b.1)))
            .expect("non-empty");
        at = left.remove(pos);
        order.push(at);
    }
    let mut best = path_cost(cost, &order);
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..order.len() {
            for j in i + 1..order.len() {
                order[i..=j].reverse();
                let c = path_cost(cost, &order);
                if c < best - crate::EPS {
                    best = c;
                    improved = true;
                } else {
                    order[i..=j].reverse();
                }
            }
        }
    }
    (best, order)
}
