//! Solomon-format benchmark files and instance generation from them.
//!
//! Accepted layout (whitespace separated, blank lines ignored):
//!
//! ```text
//! C101
//! VEHICLE
//! NUMBER     CAPACITY
//!   25         200
//! CUSTOMER
//! CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME
//!     0      40         50          0          0       1236          0
//!     1      45         68         10        912        967         90
//! ```
//!
//! Only the first four customer columns (id, x, y, demand) are used; time
//! windows and service times are read past. The row with id 0 is the depot.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::instance::{
    default_horizon, default_kappa, select_fleet, set_prices, CostMatrix, Instance, InstanceClass,
    Label,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SolomonCustomer {
    pub id: usize,
    pub xy: [f64; 2],
    pub demand: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolomonData {
    pub name: String,
    pub vehicles: usize,
    pub capacity: f64,
    pub depot: [f64; 2],
    pub customers: Vec<SolomonCustomer>,
}

impl SolomonData {
    /// Depot followed by the first `n` customers.
    pub fn points(&self, n: usize) -> Vec<[f64; 2]> {
        std::iter::once(self.depot)
            .chain(self.customers.iter().take(n).map(|c| c.xy))
            .collect()
    }

    pub fn demands(&self, n: usize) -> Vec<f64> {
        self.customers.iter().take(n).map(|c| c.demand).collect()
    }

    /// Depot coordinates and arc costs for the first `n` customers.
    pub fn cost_matrix(&self, n: usize) -> CostMatrix {
        CostMatrix::euclidean(&self.points(n))
    }
}

#[derive(PartialEq)]
enum Section {
    Name,
    Vehicle,
    Customer,
}

pub fn parse_solomon(text: &str) -> Result<SolomonData> {
    let mut name = None;
    let mut fleet: Option<(usize, f64)> = None;
    let mut depot = None;
    let mut customers = Vec::new();
    let mut section = Section::Name;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let upper = line.to_ascii_uppercase();
        if upper.starts_with("VEHICLE") {
            section = Section::Vehicle;
            continue;
        }
        if upper.starts_with("CUSTOMER") {
            section = Section::Customer;
            continue;
        }
        let first_is_numeric = line
            .split_whitespace()
            .next()
            .is_some_and(|t| t.parse::<f64>().is_ok());
        match section {
            Section::Name => {
                if name.is_none() {
                    name = Some(line.to_string());
                } else {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("unexpected content before VEHICLE section: {line:?}"),
                    });
                }
            }
            Section::Vehicle => {
                // column header ("NUMBER CAPACITY")
                if !first_is_numeric {
                    continue;
                }
                let nums = numeric_fields(line, line_no, 2)?;
                if fleet.is_some() {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "duplicate vehicle line".into(),
                    });
                }
                fleet = Some((nums[0] as usize, nums[1]));
            }
            Section::Customer => {
                if !first_is_numeric {
                    if upper.starts_with("CUST") {
                        continue;
                    }
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected a customer row, found {line:?}"),
                    });
                }
                let nums = numeric_fields(line, line_no, 4)?;
                let id = nums[0] as usize;
                if nums[3] < 0.0 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "negative demand".into(),
                    });
                }
                let row = SolomonCustomer {
                    id,
                    xy: [nums[1], nums[2]],
                    demand: nums[3],
                };
                if id == 0 {
                    depot = Some(row.xy);
                } else {
                    customers.push(row);
                }
            }
        }
    }

    let (vehicles, capacity) = fleet.ok_or(Error::Parse {
        line: 0,
        msg: "missing VEHICLE section".into(),
    })?;
    let depot = depot.ok_or(Error::Parse {
        line: 0,
        msg: "missing depot row (customer id 0)".into(),
    })?;
    Ok(SolomonData {
        name: name.unwrap_or_default(),
        vehicles,
        capacity,
        depot,
        customers,
    })
}

fn numeric_fields(line: &str, line_no: usize, min: usize) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (col, tok) in line.split_whitespace().enumerate() {
        let v: f64 = tok.parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("column {} is not numeric: {tok:?}", col + 1),
        })?;
        out.push(v);
    }
    if out.len() < min {
        return Err(Error::Parse {
            line: line_no,
            msg: format!("expected at least {min} numeric columns, found {}", out.len()),
        });
    }
    Ok(out)
}

/// Writes data back in Solomon layout. Time-window columns are filled with a
/// wide-open window and zero service time.
pub fn write_solomon(data: &SolomonData) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let _ = writeln!(s, "{}\n\nVEHICLE\nNUMBER     CAPACITY", data.name);
    let _ = writeln!(s, "{:>5}{:>13}\n", data.vehicles, data.capacity);
    let _ = writeln!(
        s,
        "CUSTOMER\nCUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME\n"
    );
    let row = |s: &mut String, id: usize, xy: [f64; 2], d: f64| {
        let _ = writeln!(
            s,
            "{id:>5}{:>11}{:>11}{:>11}{:>11}{:>11}{:>11}",
            xy[0], xy[1], d, 0, 1000, 0
        );
    };
    row(&mut s, 0, data.depot, 0.0);
    for c in &data.customers {
        row(&mut s, c.id, c.xy, c.demand);
    }
    s
}

/// Random Solomon-style network: `R` scatters customers uniformly over the
/// 100x100 square, `C` places them around a few cluster centres, `RC` mixes
/// both halves. Demands are integers in `10..=40`.
pub fn synthesize<R: Rng + ?Sized>(
    class: InstanceClass,
    customers: usize,
    rng: &mut R,
) -> SolomonData {
    let clamp = |v: f64| v.clamp(0.0, 100.0).round();
    let uniform = |rng: &mut R| [rng.random_range(0..=100) as f64, rng.random_range(0..=100) as f64];
    let centres: Vec<[f64; 2]> = (0..customers.div_ceil(8).max(2))
        .map(|_| [rng.random_range(15..=85) as f64, rng.random_range(15..=85) as f64])
        .collect();
    let spread = Normal::new(0.0, 6.0).expect("finite std");
    let clustered = |rng: &mut R| {
        let c = centres[rng.random_range(0..centres.len())];
        [clamp(c[0] + spread.sample(rng)), clamp(c[1] + spread.sample(rng))]
    };
    let rows = (1..=customers)
        .map(|id| {
            let xy = match class {
                InstanceClass::R => uniform(rng),
                InstanceClass::C => clustered(rng),
                InstanceClass::RC if id % 2 == 0 => uniform(rng),
                InstanceClass::RC => clustered(rng),
            };
            SolomonCustomer {
                id,
                xy,
                demand: rng.random_range(10..=40) as f64,
            }
        })
        .collect();
    SolomonData {
        name: format!("{class}-synthetic"),
        vehicles: 25,
        capacity: 200.0,
        depot: match class {
            InstanceClass::R => [35.0, 35.0],
            _ => [40.0, 50.0],
        },
        customers: rows,
    }
}

/// How vehicle capacity is chosen when building an instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CapacityRule {
    /// Use the capacity stated in the Solomon file.
    File,
    /// Fixed capacity.
    Fixed(f64),
    /// Integer capacity giving a load factor of 1.25 with `max(1, round(n/8))`
    /// vehicles.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kappa {
    Auto,
    Value(f64),
}

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub n: usize,
    pub class: Option<InstanceClass>,
    pub lf_min: f64,
    pub lf_max: f64,
    pub kappa: Kappa,
    pub capacity: CapacityRule,
    pub horizon: Option<usize>,
    pub seed: Option<u64>,
}

impl GenerateOptions {
    pub fn new(n: usize) -> Self {
        GenerateOptions {
            n,
            class: None,
            lf_min: 1.0,
            lf_max: 1.5,
            kappa: Kappa::Auto,
            capacity: CapacityRule::Auto,
            horizon: None,
            seed: None,
        }
    }
}

/// Builds an experiment instance from the first `n` customers: demands become
/// expected demands, prices follow the inverse-proportionality rule, and the
/// fleet size is the largest one with a load factor in range.
pub fn build_instance(data: &SolomonData, opts: &GenerateOptions) -> Result<Instance> {
    let n = opts.n;
    if n == 0 || data.customers.len() < n {
        return Err(Error::InvalidArgument(format!(
            "requested {n} customers but the source has {}",
            data.customers.len()
        )));
    }
    let class = match opts.class {
        Some(c) => c,
        None => class_from_name(&data.name)?,
    };
    let mean_demand = data.demands(n);
    let total: f64 = mean_demand.iter().sum();
    let capacity = match opts.capacity {
        CapacityRule::File => data.capacity,
        CapacityRule::Fixed(q) => q,
        CapacityRule::Auto => {
            let k = ((n as f64 / 8.0).round() as usize).max(1);
            (total / (k as f64 * 1.25)).round().max(1.0)
        }
    };
    let k = select_fleet(&mean_demand, capacity, opts.lf_min, opts.lf_max)?;
    let cost = data.cost_matrix(n);
    let kappa = match opts.kappa {
        Kappa::Auto => default_kappa(&mean_demand, &cost),
        Kappa::Value(v) => v,
    };
    let price = set_prices(&mean_demand, kappa)?;
    let horizon = opts.horizon.unwrap_or_else(|| default_horizon(&mean_demand));
    let mut inst = Instance::new(
        Label { class, n },
        cost,
        vec![capacity; k],
        price,
        mean_demand,
        horizon,
    )?;
    inst.coords = Some(data.points(n));
    inst.kappa = Some(kappa);
    inst.seed = opts.seed;
    Ok(inst)
}

/// Infers the class from a Solomon instance name such as `RC101` or `c205`.
pub fn class_from_name(name: &str) -> Result<InstanceClass> {
    let upper = name.trim().to_ascii_uppercase();
    if upper.starts_with("RC") {
        Ok(InstanceClass::RC)
    } else if upper.starts_with('R') {
        Ok(InstanceClass::R)
    } else if upper.starts_with('C') {
        Ok(InstanceClass::C)
    } else {
        Err(Error::InvalidArgument(format!(
            "cannot infer the instance class from name {name:?}; pass it explicitly"
        )))
    }
}
