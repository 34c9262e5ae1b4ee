//! Exact feasibility of a state.
//!
//! Split collection is not allowed and the graph is complete, so a state can be
//! served iff the positive loads can be packed into the vehicles' capacities.

use crate::instance::Instance;
use crate::state::SystemState;
use crate::EPS;

pub fn feasible(inst: &Instance, w: &SystemState) -> bool {
    pack(&w.as_loads(), &inst.fleet).is_some()
}

/// Assigns every positive load to a bin. Returns the bin per entry (`None`
/// for zero loads), or `None` if no packing exists.
///
/// First-fit decreasing is tried first; when it fails, a depth-first search
/// over bins decides exactly, skipping bins whose capacity and residual match
/// one already tried for the same item.
pub fn pack(loads: &[f64], caps: &[f64]) -> Option<Vec<Option<usize>>> {
    let mut items: Vec<usize> = (0..loads.len()).filter(|&i| loads[i] > 0.0).collect();
    items.sort_by(|&a, &b| loads[b].total_cmp(&loads[a]).then(a.cmp(&b)));
    let mut out = vec![None; loads.len()];
    if items.is_empty() {
        return Some(out);
    }
    if caps.is_empty() {
        return None;
    }
    let max_cap = caps.iter().copied().fold(0.0, f64::max);
    let total: f64 = items.iter().map(|&i| loads[i]).sum();
    if loads[items[0]] > max_cap + EPS || total > caps.iter().sum::<f64>() + EPS {
        return None;
    }

    let mut residual = caps.to_vec();
    let mut ffd_ok = true;
    for &i in &items {
        match residual.iter().position(|&r| r + EPS >= loads[i]) {
            Some(b) => {
                residual[b] -= loads[i];
                out[i] = Some(b);
            }
            None => {
                ffd_ok = false;
                break;
            }
        }
    }
    if ffd_ok {
        return Some(out);
    }

    let mut residual = caps.to_vec();
    let mut assign = vec![0usize; items.len()];
    let mut suffix = vec![0.0; items.len() + 1];
    for k in (0..items.len()).rev() {
        suffix[k] = suffix[k + 1] + loads[items[k]];
    }
    let ok = search(0, &items, loads, caps, &mut residual, &mut assign, &suffix);
    if !ok {
        return None;
    }
    for (k, &i) in items.iter().enumerate() {
        out[i] = Some(assign[k]);
    }
    Some(out)
}

fn search(
    k: usize,
    items: &[usize],
    loads: &[f64],
    caps: &[f64],
    residual: &mut [f64],
    assign: &mut [usize],
    suffix: &[f64],
) -> bool {
    if k == items.len() {
        return true;
    }
    let free: f64 = residual.iter().filter(|&&r| r + EPS >= loads[items[items.len() - 1]]).sum();
    if suffix[k] > free + EPS {
        return false;
    }
    let load = loads[items[k]];
    for b in 0..residual.len() {
        if residual[b] + EPS < load {
            continue;
        }
        let dup = (0..b).any(|e| caps[e] == caps[b] && residual[e] == residual[b]);
        if dup {
            continue;
        }
        residual[b] -= load;
        assign[k] = b;
        if search(k + 1, items, loads, caps, residual, assign, suffix) {
            return true;
        }
        residual[b] += load;
    }
    false
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    /// Tries every node-to-vehicle assignment.
    fn brute(loads: &[f64], caps: &[f64]) -> bool {
        let items: Vec<usize> = (0..loads.len()).filter(|&i| loads[i] > 0.0).collect();
        let k = caps.len();
        let combos = k.pow(items.len() as u32);
        (0..combos).any(|mut code| {
            let mut used = vec![0.0; k];
            for &i in &items {
                used[code % k] += loads[i];
                code /= k;
            }
            used.iter().zip(caps).all(|(u, c)| *u <= c + EPS)
        })
    }

    #[test]
    fn examples() {
        assert!(pack(&[0.0, 0.0], &[5.0]).is_some());
        assert!(pack(&[3.0, 2.0], &[5.0]).is_some());
        assert!(pack(&[3.0, 3.0], &[5.0]).is_none());
        assert!(pack(&[6.0], &[5.0, 5.0]).is_none());
    }

    #[test]
    fn ffd_failure_recovered_by_search() {
        // FFD fills 5+4 and 4+3+2, stranding the last 2; 5+3+2 / 4+4+2 fits.
        let loads = [5.0, 4.0, 4.0, 3.0, 2.0, 2.0];
        let caps = [10.0, 10.0];
        assert!(brute(&loads, &caps));
        let sol = pack(&loads, &caps).unwrap();
        let mut used = [0.0; 2];
        for (i, b) in sol.iter().enumerate() {
            used[b.unwrap()] += loads[i];
        }
        assert!(used.iter().all(|&u| u <= 10.0));
    }

    proptest! {
        #[test]
        fn agrees_with_brute_force(
            loads in proptest::collection::vec(0u32..6, 1..7),
            caps in proptest::collection::vec(1u32..9, 1..4),
        ) {
            let loads: Vec<f64> = loads.into_iter().map(f64::from).collect();
            let caps: Vec<f64> = caps.into_iter().map(f64::from).collect();
            let got = pack(&loads, &caps);
            prop_assert_eq!(got.is_some(), brute(&loads, &caps));
            if let Some(assign) = got {
                let mut used = vec![0.0; caps.len()];
                for (i, b) in assign.iter().enumerate() {
                    match b {
                        Some(b) => used[*b] += loads[i],
                        None => prop_assert_eq!(loads[i], 0.0),
                    }
                }
                for (u, c) in used.iter().zip(&caps) {
                    prop_assert!(*u <= c + EPS);
                }
            }
        }
    }
}
