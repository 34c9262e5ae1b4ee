//! Static problem data: network, fleet, prices and expected demand.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Decimal places kept when deriving arc costs from coordinates.
pub const COST_DECIMALS: i32 = 4;

/// Rounds a Euclidean distance to [`COST_DECIMALS`] places.
pub fn round_cost(d: f64) -> f64 {
    let scale = 10f64.powi(COST_DECIMALS);
    (d * scale).round() / scale
}

/// Solomon instance family the network was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InstanceClass {
    C,
    R,
    RC,
}

impl InstanceClass {
    pub const ALL: [InstanceClass; 3] = [InstanceClass::C, InstanceClass::R, InstanceClass::RC];
}

impl fmt::Display for InstanceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstanceClass::C => "C",
            InstanceClass::R => "R",
            InstanceClass::RC => "RC",
        })
    }
}

impl FromStr for InstanceClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "C" => Ok(InstanceClass::C),
            "R" => Ok(InstanceClass::R),
            "RC" => Ok(InstanceClass::RC),
            _ => Err(Error::InvalidArgument(format!(
                "unknown instance class {s:?} (expected C, R or RC)"
            ))),
        }
    }
}

/// Instance name of the form `I.n`, e.g. `RC.15`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Label {
    pub class: InstanceClass,
    pub n: usize,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.class, self.n)
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (class, n) = s
            .split_once('.')
            .ok_or_else(|| Error::InvalidArgument(format!("label {s:?} is not of the form I.n")))?;
        let n = n
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("label {s:?} has a non-numeric size")))?;
        Ok(Label {
            class: class.parse()?,
            n,
        })
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Dense `(n+1) x (n+1)` arc-cost matrix; index 0 is the depot.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidInstance(format!(
                    "cost row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        let m = CostMatrix { dim, data };
        for i in 0..dim {
            for j in 0..dim {
                let c = m.get(i, j);
                if i != j && !(c.is_finite() && c >= 0.0) {
                    return Err(Error::InvalidInstance(format!(
                        "cost[{i}][{j}] = {c} is not a nonnegative number"
                    )));
                }
            }
        }
        Ok(m)
    }

    /// Euclidean distances between points, rounded to [`COST_DECIMALS`] places.
    pub fn euclidean(points: &[[f64; 2]]) -> Self {
        let dim = points.len();
        let mut data = vec![0.0; dim * dim];
        for (i, a) in points.iter().enumerate() {
            for (j, b) in points.iter().enumerate() {
                if i != j {
                    data[i * dim + j] = round_cost((a[0] - b[0]).hypot(a[1] - b[1]));
                }
            }
        }
        CostMatrix { dim, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// Mean over all off-diagonal arcs.
    pub fn mean_arc(&self) -> f64 {
        if self.dim < 2 {
            return 0.0;
        }
        let mut sum = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    sum += self.get(i, j);
                }
            }
        }
        sum / (self.dim * (self.dim - 1)) as f64
    }

    /// Largest violation of `c_ij <= c_ik + c_kj` over all triples.
    pub fn triangle_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i == j {
                    continue;
                }
                for k in 0..self.dim {
                    if k == i || k == j {
                        continue;
                    }
                    worst = worst.max(self.get(i, j) - self.get(i, k) - self.get(k, j));
                }
            }
        }
        worst
    }
}

/// Complete problem data for one experiment instance.
///
/// Customer nodes are numbered `1..=n`; vectors indexed by customer use
/// position `j - 1` for node `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub label: Label,
    pub cost: CostMatrix,
    pub fleet: Vec<f64>,
    pub price: Vec<f64>,
    pub mean_demand: Vec<f64>,
    pub horizon: usize,
    /// Depot first; only used for display.
    pub coords: Option<Vec<[f64; 2]>>,
    /// Price constant used by [`set_prices`], if the prices came from it.
    pub kappa: Option<f64>,
    /// Seed used to generate the instance, if any.
    pub seed: Option<u64>,
}

impl Instance {
    pub fn new(
        label: Label,
        cost: CostMatrix,
        fleet: Vec<f64>,
        price: Vec<f64>,
        mean_demand: Vec<f64>,
        horizon: usize,
    ) -> Result<Self> {
        let inst = Instance {
            label,
            cost,
            fleet,
            price,
            mean_demand,
            horizon,
            coords: None,
            kappa: None,
            seed: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if self.cost.dim() != n + 1 {
            return bad(format!(
                "cost matrix is {0}x{0} but there are {n} customers",
                self.cost.dim()
            ));
        }
        if self.price.len() != n {
            return bad(format!("{} prices for {n} customers", self.price.len()));
        }
        if self.label.n != n {
            return bad(format!("label {} does not match n = {n}", self.label));
        }
        if self.fleet.is_empty() {
            return bad("fleet is empty".into());
        }
        if let Some(q) = self.fleet.iter().find(|q| !(q.is_finite() && **q > 0.0)) {
            return bad(format!("vehicle capacity {q} is not positive"));
        }
        if let Some(p) = self.price.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return bad(format!("price {p} is not positive"));
        }
        if let Some(m) = self.mean_demand.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return bad(format!("mean demand {m} is negative"));
        }
        if self.horizon == 0 {
            return bad("horizon must be at least one period".into());
        }
        if let Some(c) = &self.coords {
            if c.len() != n + 1 {
                return bad(format!("{} coordinates for {} nodes", c.len(), n + 1));
            }
        }
        Ok(())
    }

    /// Number of customer nodes.
    pub fn n(&self) -> usize {
        self.mean_demand.len()
    }

    pub fn vehicles(&self) -> usize {
        self.fleet.len()
    }

    pub fn max_capacity(&self) -> f64 {
        self.fleet.iter().copied().fold(0.0, f64::max)
    }

    pub fn total_capacity(&self) -> f64 {
        self.fleet.iter().sum()
    }

    /// Price of customer node `j` (1-based).
    pub fn price_of(&self, j: usize) -> f64 {
        self.price[j - 1]
    }

    pub fn load_factor(&self) -> Result<f64> {
        load_factor(&self.mean_demand, &self.fleet)
    }

    pub fn is_metric(&self) -> bool {
        self.cost.triangle_violation() <= 2.0 * 10f64.powi(-COST_DECIMALS)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(&InstanceDoc::from(self))?)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: InstanceDoc = toml::from_str(text)?;
        doc.try_into()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }
}

/// On-disk layout of an instance file.
#[derive(Debug, Serialize, Deserialize)]
struct InstanceDoc {
    label: Label,
    n: usize,
    horizon: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    fleet: Vec<f64>,
    price: Vec<f64>,
    mean_demand: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<[f64; 2]>>,
    cost: Vec<Vec<f64>>,
}

impl From<&Instance> for InstanceDoc {
    fn from(inst: &Instance) -> Self {
        InstanceDoc {
            label: inst.label,
            n: inst.n(),
            horizon: inst.horizon,
            kappa: inst.kappa,
            seed: inst.seed,
            fleet: inst.fleet.clone(),
            price: inst.price.clone(),
            mean_demand: inst.mean_demand.clone(),
            coords: inst.coords.clone(),
            cost: inst.cost.rows(),
        }
    }
}

impl TryFrom<InstanceDoc> for Instance {
    type Error = Error;

    fn try_from(doc: InstanceDoc) -> Result<Self> {
        if doc.mean_demand.len() != doc.n {
            return Err(Error::InvalidInstance(format!(
                "n = {} but mean_demand has {} entries",
                doc.n,
                doc.mean_demand.len()
            )));
        }
        let inst = Instance {
            label: doc.label,
            cost: CostMatrix::from_rows(doc.cost)?,
            fleet: doc.fleet,
            price: doc.price,
            mean_demand: doc.mean_demand,
            horizon: doc.horizon,
            coords: doc.coords,
            kappa: doc.kappa,
            seed: doc.seed,
        };
        inst.validate()?;
        Ok(inst)
    }
}

/// Prices inversely proportional to expected demand: `p_j = kappa / mu_j`.
pub fn set_prices(mean_demand: &[f64], kappa: f64) -> Result<Vec<f64>> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::InvalidArgument(format!("price constant {kappa} must be positive")));
    }
    mean_demand
        .iter()
        .enumerate()
        .map(|(i, &mu)| {
            if mu > 0.0 {
                Ok(kappa / mu)
            } else {
                Err(Error::UndefinedPrice { node: i + 1 })
            }
        })
        .collect()
}

/// Default price constant: mean demand per node times the mean arc cost, so
/// that revenues and routing costs have the same order of magnitude.
pub fn default_kappa(mean_demand: &[f64], cost: &CostMatrix) -> f64 {
    let n = mean_demand.len().max(1) as f64;
    mean_demand.iter().sum::<f64>() / n * cost.mean_arc()
}

/// Default booking horizon: five periods per expected request.
pub fn default_horizon(mean_demand: &[f64]) -> usize {
    5 * (mean_demand.iter().sum::<f64>().ceil() as usize).max(1)
}

/// Total expected demand over total fleet capacity.
pub fn load_factor(mean_demand: &[f64], fleet: &[f64]) -> Result<f64> {
    if fleet.is_empty() {
        return Err(Error::InvalidArgument("load factor of an empty fleet".into()));
    }
    Ok(mean_demand.iter().sum::<f64>() / fleet.iter().sum::<f64>())
}

/// Largest homogeneous fleet size whose load factor lies in `[lf_min, lf_max]`.
pub fn select_fleet(mean_demand: &[f64], capacity: f64, lf_min: f64, lf_max: f64) -> Result<usize> {
    if !(capacity > 0.0 && lf_min > 0.0 && lf_min <= lf_max) {
        return Err(Error::InvalidArgument(format!(
            "need capacity > 0 and 0 < lf_min <= lf_max (got Q = {capacity}, [{lf_min}, {lf_max}])"
        )));
    }
    let total: f64 = mean_demand.iter().sum();
    let lf = |k: usize| total / (k as f64 * capacity);
    let k_max = (total / (capacity * lf_min) + crate::EPS).floor() as usize;
    if k_max >= 1 && lf(k_max) <= lf_max + crate::EPS {
        return Ok(k_max);
    }
    let shown: Vec<String> = (1..=k_max.max(1) + 1)
        .take(4)
        .map(|k| format!("K={k}: {:.4}", lf(k)))
        .collect();
    Err(Error::NoFeasibleFleet {
        lf_min,
        lf_max,
        attainable: shown.join(", "),
    })
}
