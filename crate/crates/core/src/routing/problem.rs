use crate::instance::Instance;
use crate::EPS;

use super::{OperationalSolution, PmvrpSolution, SolveStatus};

/// Candidate-node view of one solve. Candidate `c` is customer `nodes[c]`;
/// subsets of candidates are bit masks.
pub(crate) struct RouteProblem<'a> {
    pub inst: &'a Instance,
    pub nodes: Vec<usize>,
    pub load: Vec<f64>,
    pub bound: Vec<f64>,
    pub price: Vec<f64>,
    pub mandatory: u64,
    /// Lower bound on the cost increase of adding the candidate to any tour.
    pub detour: Vec<f64>,
    /// Candidates by decreasing price, ties by index.
    by_price: Vec<usize>,
}

/// Engine output: per vehicle, candidate indices in visiting order.
pub(crate) struct RawSolution {
    pub routes: Vec<Vec<usize>>,
    pub status: SolveStatus,
}

/// Smallest possible cost of inserting `v` between two stops of a tour
/// (or of a dedicated depot round trip).
pub(crate) fn min_detour(inst: &Instance, v: usize) -> f64 {
    let c = &inst.cost;
    let mut best = c.get(0, v) + c.get(v, 0);
    let dim = c.dim();
    for a in 0..dim {
        if a == v {
            continue;
        }
        for b in 0..dim {
            if b == v || b == a {
                continue;
            }
            best = best.min(c.get(a, v) + c.get(v, b) - c.get(a, b));
        }
    }
    best
}

impl<'a> RouteProblem<'a> {
    /// Mandatory nodes carry `loads > 0`. Zero-load nodes become candidates
    /// only if their best-case revenue `p_j * bound_j` covers the cheapest
    /// possible detour.
    pub fn new(inst: &'a Instance, loads: &[f64], bound: &[f64]) -> Self {
        let mut p = RouteProblem {
            inst,
            nodes: Vec::new(),
            load: Vec::new(),
            bound: Vec::new(),
            price: Vec::new(),
            mandatory: 0,
            detour: Vec::new(),
            by_price: Vec::new(),
        };
        for j in 1..=inst.n() {
            let w = loads[j - 1];
            let mu = bound[j - 1];
            let price = inst.price_of(j);
            let detour = min_detour(inst, j);
            let keep = w > 0.0 || (mu > EPS && price * mu >= detour - EPS);
            if !keep {
                continue;
            }
            if w > 0.0 {
                p.mandatory |= 1 << p.nodes.len();
            }
            p.nodes.push(j);
            p.load.push(w);
            p.bound.push(mu);
            p.price.push(price);
            p.detour.push(detour);
        }
        let mut order: Vec<usize> = (0..p.nodes.len()).collect();
        order.sort_by(|&a, &b| p.price[b].total_cmp(&p.price[a]).then(a.cmp(&b)));
        p.by_price = order;
        p
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn load_of(&self, mask: u64) -> f64 {
        bits(mask).map(|c| self.load[c]).sum()
    }

    /// Revenue of the best optional fill of a route serving `mask` with the
    /// given capacity, or `None` if the mandatory load does not fit.
    pub fn fill_value(&self, mask: u64, capacity: f64) -> Option<f64> {
        let load = self.load_of(mask);
        if load > capacity + EPS {
            return None;
        }
        let mut residual = (capacity - load).max(0.0);
        let mut revenue = 0.0;
        for &c in &self.by_price {
            if residual <= 0.0 {
                break;
            }
            if mask & (1 << c) != 0 {
                let y = self.bound[c].min(residual);
                revenue += self.price[c] * y;
                residual -= y;
            }
        }
        Some(revenue)
    }

    /// Optional load per candidate for a route; same rule as [`fill_value`].
    pub fn fill(&self, mask: u64, capacity: f64, y: &mut [f64]) {
        let mut residual = (capacity - self.load_of(mask)).max(0.0);
        for &c in &self.by_price {
            if mask & (1 << c) != 0 {
                let take = self.bound[c].min(residual);
                y[c] = take;
                residual -= take;
            }
        }
    }

    pub fn finish(&self, raw: RawSolution, seconds: f64) -> PmvrpSolution {
        let inst = self.inst;
        let n = inst.n();
        let mut y_cand = vec![0.0; self.len()];
        let mut routes = Vec::with_capacity(inst.vehicles());
        let mut collected = vec![vec![0.0; n]; inst.vehicles()];
        for (k, route) in raw.routes.iter().enumerate() {
            let mask = route.iter().fold(0u64, |m, &c| m | 1 << c);
            self.fill(mask, inst.fleet[k], &mut y_cand);
            let mut seq = Vec::with_capacity(route.len() + 2);
            seq.push(0);
            seq.extend(route.iter().map(|&c| self.nodes[c]));
            seq.push(0);
            routes.push(seq);
            for &c in route {
                collected[k][self.nodes[c] - 1] = self.load[c] + y_cand[c];
            }
        }
        let mut y = vec![0.0; n];
        let mut revenue = 0.0;
        for (c, &yc) in y_cand.iter().enumerate() {
            y[self.nodes[c] - 1] = yc;
            revenue += self.price[c] * yc;
        }
        let mut plan = OperationalSolution {
            routes,
            collected,
            cost: 0.0,
            status: raw.status,
            seconds,
        };
        plan.cost = plan.recompute_cost(inst);
        PmvrpSolution {
            y,
            objective: revenue - plan.cost,
            revenue,
            status: raw.status,
            plan,
        }
    }
}

/// Indices of the set bits, ascending.
pub(crate) fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let b = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(b)
        }
    })
}
