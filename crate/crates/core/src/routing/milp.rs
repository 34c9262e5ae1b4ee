//! MILP model export in CPLEX LP format, for cross-checking the built-in
//! solver with an external one.
//!
//! Variables, per vehicle `k`:
//!
//! | name        | meaning                                   | domain        |
//! |-------------|-------------------------------------------|---------------|
//! | `a_k_i_j`   | arc `(i, j)` used                         | binary        |
//! | `b_k_i`     | node `i` visited (`i = 0` is the depot)   | binary        |
//! | `q_k_j`     | items collected at customer `j`           | `>= 0`        |
//! | `f_k_i_j`   | connectivity flow on arc `(i, j)`, `j > 0`| `>= 0`        |
//! | `y_j`       | booking limit (PMVRP only)                | `[0, mu_j]`   |
//!
//! Subtour elimination uses a single-commodity flow: the depot emits one unit
//! per visited customer, each visited customer absorbs one unit, and flow may
//! only travel on used arcs. This is polynomial in size and admits exactly the
//! connected route sets.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::state::SystemState;

/// Renders the CVRP (`mu_t = None`) or PMVRP model for state `w`.
pub fn export_lp(inst: &Instance, w: &SystemState, mu_t: Option<&[f64]>) -> Result<String> {
    let n = inst.n();
    if w.len() != n || mu_t.is_some_and(|m| m.len() != n) {
        return Err(Error::InvalidArgument("state or demand bound length mismatch".into()));
    }
    let vs = 0..=n;
    let ks = 0..inst.vehicles();
    let mut s = String::new();
    let mut line = Terms::default();

    let _ = writeln!(s, "\\ rmroute {} model for {}", if mu_t.is_some() { "PMVRP" } else { "CVRP" }, inst.label);
    let _ = writeln!(s, "\\ state: {w}");
    if mu_t.is_some() {
        let _ = writeln!(s, "Maximize");
        for j in 1..=n {
            line.add(inst.price_of(j), format!("y_{j}"));
        }
        for k in ks.clone() {
            for i in vs.clone() {
                for j in vs.clone().filter(|&j| j != i) {
                    line.add(-inst.cost.get(i, j), format!("a_{k}_{i}_{j}"));
                }
            }
        }
    } else {
        let _ = writeln!(s, "Minimize");
        for k in ks.clone() {
            for i in vs.clone() {
                for j in vs.clone().filter(|&j| j != i) {
                    line.add(inst.cost.get(i, j), format!("a_{k}_{i}_{j}"));
                }
            }
        }
    }
    let _ = writeln!(s, " obj: {}", line.take());

    let _ = writeln!(s, "Subject To");
    for k in ks.clone() {
        for i in vs.clone() {
            for j in vs.clone().filter(|&j| j != i) {
                line.add(1.0, format!("a_{k}_{i}_{j}"));
            }
            line.add(-1.0, format!("b_{k}_{i}"));
            let _ = writeln!(s, " out_{k}_{i}: {} = 0", line.take());
            for j in vs.clone().filter(|&j| j != i) {
                line.add(1.0, format!("a_{k}_{j}_{i}"));
            }
            line.add(-1.0, format!("b_{k}_{i}"));
            let _ = writeln!(s, " in_{k}_{i}: {} = 0", line.take());
        }
    }
    for j in 1..=n {
        for k in ks.clone() {
            line.add(1.0, format!("b_{k}_{j}"));
        }
        let _ = writeln!(s, " once_{j}: {} <= 1", line.take());
    }
    for k in ks.clone() {
        line.add(1.0, format!("b_{k}_0"));
    }
    let _ = writeln!(s, " fleet: {} <= {}", line.take(), inst.vehicles());
    for k in ks.clone() {
        for j in 1..=n {
            line.add(1.0, format!("f_{k}_0_{j}"));
        }
        for j in 1..=n {
            line.add(-1.0, format!("b_{k}_{j}"));
        }
        let _ = writeln!(s, " source_{k}: {} = 0", line.take());
        for i in 1..=n {
            for h in vs.clone().filter(|&h| h != i) {
                line.add(1.0, format!("f_{k}_{h}_{i}"));
            }
            for j in (1..=n).filter(|&j| j != i) {
                line.add(-1.0, format!("f_{k}_{i}_{j}"));
            }
            line.add(-1.0, format!("b_{k}_{i}"));
            let _ = writeln!(s, " absorb_{k}_{i}: {} = 0", line.take());
        }
        for i in vs.clone() {
            for j in (1..=n).filter(|&j| j != i) {
                line.add(1.0, format!("f_{k}_{i}_{j}"));
                line.add(-(n as f64), format!("a_{k}_{i}_{j}"));
                let _ = writeln!(s, " link_{k}_{i}_{j}: {} <= 0", line.take());
            }
        }
    }
    for k in ks.clone() {
        let cap = inst.fleet[k];
        for j in 1..=n {
            line.add(1.0, format!("q_{k}_{j}"));
            line.add(-cap, format!("b_{k}_{j}"));
            let _ = writeln!(s, " vcap_{k}_{j}: {} <= 0", line.take());
        }
        for j in 1..=n {
            line.add(1.0, format!("q_{k}_{j}"));
        }
        let _ = writeln!(s, " rcap_{k}: {} <= {}", line.take(), num(cap));
    }
    for j in 1..=n {
        for k in ks.clone() {
            line.add(1.0, format!("q_{k}_{j}"));
        }
        if mu_t.is_some() {
            line.add(-1.0, format!("y_{j}"));
        }
        let _ = writeln!(s, " serve_{j}: {} = {}", line.take(), w.get(j));
    }

    let _ = writeln!(s, "Bounds");
    if let Some(mu) = mu_t {
        for j in 1..=n {
            let _ = writeln!(s, " 0 <= y_{j} <= {}", num(mu[j - 1]));
        }
    }
    let _ = writeln!(s, "Binaries");
    for k in ks {
        for i in vs.clone() {
            let _ = writeln!(s, " b_{k}_{i}");
            for j in vs.clone().filter(|&j| j != i) {
                let _ = writeln!(s, " a_{k}_{i}_{j}");
            }
        }
    }
    let _ = writeln!(s, "End");
    Ok(s)
}

pub fn write_lp(inst: &Instance, w: &SystemState, mu_t: Option<&[f64]>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, export_lp(inst, w, mu_t)?).map_err(|e| Error::io(path, e))
}

fn num(v: f64) -> String {
    format!("{v}")
}

#[derive(Default)]
struct Terms(String);

impl Terms {
    fn add(&mut self, coef: f64, var: String) {
        let sign = if coef < 0.0 { "-" } else { "+" };
        let mag = coef.abs();
        if self.0.is_empty() {
            if coef < 0.0 {
                self.0.push_str("- ");
            }
        } else {
            let _ = write!(self.0, " {sign} ");
        }
        if mag != 1.0 {
            let _ = write!(self.0, "{} ", num(mag));
        }
        self.0.push_str(&var);
    }

    fn take(&mut self) -> String {
        std::mem::take(&mut self.0)
    }
}
