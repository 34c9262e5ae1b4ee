//! Exact engine for small candidate sets.
//!
//! One Held-Karp table prices the optimal tour of every candidate subset.
//! A second DP over subsets then picks the best partition into at most `K`
//! routes: `best_k[U]` is the most profitable way to serve exactly `U` with
//! the first `k` vehicles. With identical vehicles the block holding the
//! lowest member of `U` is enumerated alone, which removes vehicle
//! permutations from the search.

use std::collections::HashMap;

use super::problem::{RawSolution, RouteProblem};
use super::tsp::HeldKarp;
use super::SolveStatus;
use crate::EPS;

const NONE: f64 = f64::NEG_INFINITY;

pub(crate) fn solve(p: &RouteProblem) -> Option<RawSolution> {
    let m = p.len();
    let full = 1usize << m;
    let fleet = &p.inst.fleet;
    let table = HeldKarp::build(&p.inst.cost, &p.nodes);

    // route value per subset, one table per distinct capacity
    let mut values: HashMap<u64, Vec<f64>> = HashMap::new();
    for &cap in fleet {
        values.entry(cap.to_bits()).or_insert_with(|| {
            (0..full)
                .map(|mask| match p.fill_value(mask as u64, cap) {
                    Some(rev) => rev - table.tour_cost(mask as u64),
                    None => NONE,
                })
                .collect()
        });
    }
    let identical = fleet.windows(2).all(|w| w[0] == w[1]);

    let mut best = vec![NONE; full];
    best[0] = 0.0;
    let mut choice: Vec<Vec<u32>> = Vec::with_capacity(fleet.len());
    for &cap in fleet {
        let value = &values[&cap.to_bits()];
        let mut next = best.clone();
        let mut pick = vec![0u32; full];
        for u in 1..full {
            // blocks are `fixed | s` for every submask `s` of `spread`
            let (fixed, spread) = if identical {
                let low = u & u.wrapping_neg();
                (low, u ^ low)
            } else {
                (0, u)
            };
            let mut s = spread;
            loop {
                let t = fixed | s;
                if t != 0 {
                    let rest = best[u ^ t];
                    let v = value[t];
                    if rest > NONE && v > NONE && v + rest > next[u] + EPS {
                        next[u] = v + rest;
                        pick[u] = t as u32;
                    }
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & spread;
            }
        }
        best = next;
        choice.push(pick);
    }

    // best served set among supersets of the mandatory nodes
    let mandatory = p.mandatory as usize;
    let free = (full - 1) & !mandatory;
    let mut best_u = None;
    let mut best_v = NONE;
    let mut extra = free;
    loop {
        let u = extra | mandatory;
        if best[u] > NONE && (best_u.is_none() || best[u] > best_v + EPS) {
            best_u = Some(u);
            best_v = best[u];
        }
        if extra == 0 {
            break;
        }
        extra = (extra - 1) & free;
    }
    let mut u = best_u?;

    let mut routes = vec![Vec::new(); fleet.len()];
    for k in (0..fleet.len()).rev() {
        let t = choice[k][u] as usize;
        if t != 0 {
            routes[k] = table.order(t as u64);
            u ^= t;
        }
    }
    debug_assert_eq!(u, 0);
    Some(RawSolution {
        routes,
        status: SolveStatus::Optimal,
    })
}
