//! Stochastic demand: request totals, arrival times and arrival probabilities.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::instance::Label;

/// One realised booking process: at most one request per period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestPath {
    pub horizon: usize,
    /// `(period, node)` pairs sorted by strictly increasing period; nodes are 1-based.
    pub events: Vec<(usize, usize)>,
    /// Number of events per node (`totals[j - 1]` for node `j`).
    pub totals: Vec<u32>,
}

impl RequestPath {
    pub fn empty(n: usize, horizon: usize) -> Self {
        RequestPath {
            horizon,
            events: Vec::new(),
            totals: vec![0; n],
        }
    }

    /// Builds a path from events, checking ordering and node range.
    pub fn from_events(n: usize, horizon: usize, events: Vec<(usize, usize)>) -> Result<Self> {
        let mut totals = vec![0u32; n];
        let mut last = 0;
        for &(t, j) in &events {
            if t <= last || t > horizon {
                return Err(Error::InvalidArgument(format!(
                    "event period {t} out of order or outside 1..={horizon}"
                )));
            }
            if j == 0 || j > n {
                return Err(Error::InvalidArgument(format!("event node {j} outside 1..={n}")));
            }
            totals[j - 1] += 1;
            last = t;
        }
        Ok(RequestPath {
            horizon,
            events,
            totals,
        })
    }

    pub fn n(&self) -> usize {
        self.totals.len()
    }

    /// Realised number of requests per node in periods `t..=T`.
    pub fn remaining_from(&self, t: usize) -> Vec<f64> {
        let mut rest = vec![0.0; self.n()];
        for &(_, j) in self.events.iter().filter(|(p, _)| *p >= t) {
            rest[j - 1] += 1.0;
        }
        rest
    }

    /// Plain-text form; see [`RequestPath::parse`].
    pub fn to_text(&self, header: &PathHeader) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rmroute-path 1");
        let _ = writeln!(s, "label {}", header.label);
        let _ = writeln!(s, "seed {}", header.seed);
        let _ = writeln!(s, "index {}", header.index);
        let _ = writeln!(s, "n {}", self.n());
        let _ = writeln!(s, "horizon {}", self.horizon);
        let _ = writeln!(s, "events {}", self.events.len());
        for (t, j) in &self.events {
            let _ = writeln!(s, "{t} {j}");
        }
        s
    }

    /// Parses the request-path file format:
    ///
    /// ```text
    /// rmroute-path 1
    /// label C.15
    /// seed 42
    /// index 0
    /// n 15
    /// horizon 1275
    /// events 2
    /// 17 4
    /// 230 11
    /// ```
    pub fn parse(text: &str) -> Result<(PathHeader, RequestPath)> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut field = |key: &str| -> Result<String> {
            let (idx, line) = lines.next().ok_or(Error::Parse {
                line: 0,
                msg: format!("missing {key:?} header"),
            })?;
            match line.trim().split_once(' ') {
                Some((k, v)) if k == key => Ok(v.trim().to_string()),
                _ => Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected {key:?} header, found {line:?}"),
                }),
            }
        };
        let version = field("rmroute-path")?;
        if version != "1" {
            return Err(Error::Parse {
                line: 1,
                msg: format!("unsupported path format version {version}"),
            });
        }
        let num = |s: String, what: &str| -> Result<u64> {
            s.parse().map_err(|_| Error::Parse {
                line: 0,
                msg: format!("{what} is not an integer: {s:?}"),
            })
        };
        let label: Label = field("label")?.parse()?;
        let seed = num(field("seed")?, "seed")?;
        let index = num(field("index")?, "index")?;
        let n = num(field("n")?, "n")? as usize;
        let horizon = num(field("horizon")?, "horizon")? as usize;
        let count = num(field("events")?, "events")? as usize;
        let mut events = Vec::with_capacity(count);
        for (idx, line) in lines {
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(t)), Some(Ok(j)), None) => events.push((t, j)),
                _ => {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: format!("expected \"period node\", found {line:?}"),
                    })
                }
            }
        }
        if events.len() != count {
            return Err(Error::Parse {
                line: 0,
                msg: format!("header announces {count} events, found {}", events.len()),
            });
        }
        let path = RequestPath::from_events(n, horizon, events)?;
        Ok((PathHeader { label, seed, index }, path))
    }

    pub fn save(&self, header: &PathHeader, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text(header)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(PathHeader, RequestPath)> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

/// Provenance recorded at the top of a request-path file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathHeader {
    pub label: Label,
    pub seed: u64,
    pub index: u64,
}

/// Per-period arrival probabilities `lambda[t-1][j-1]` and the no-arrival
/// probability `lambda0[t-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalModel {
    pub lambda: Vec<Vec<f64>>,
    pub lambda0: Vec<f64>,
}

impl ArrivalModel {
    pub fn horizon(&self) -> usize {
        self.lambda0.len()
    }

    pub fn n(&self) -> usize {
        self.lambda.first().map_or(0, Vec::len)
    }

    /// Arrival probability of node `j` (1-based) in period `t` (1-based).
    pub fn prob(&self, t: usize, j: usize) -> f64 {
        self.lambda[t - 1][j - 1]
    }

    /// Draws a path period by period: node `j` arrives with probability
    /// `lambda_j^t`, nothing with `lambda_0^t`.
    pub fn sample_path<R: Rng + ?Sized>(&self, rng: &mut R) -> RequestPath {
        let n = self.n();
        let mut events = Vec::new();
        let mut totals = vec![0u32; n];
        for (t, row) in self.lambda.iter().enumerate() {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (j, p) in row.iter().enumerate() {
                acc += p;
                if u < acc {
                    events.push((t + 1, j + 1));
                    totals[j] += 1;
                    break;
                }
            }
        }
        RequestPath {
            horizon: self.horizon(),
            events,
            totals,
        }
    }
}

/// Number of requests per node: `Normal(mu, (cv*mu)^2)` truncated below at
/// zero by rejection, then rounded to the nearest integer.
pub fn sample_totals<R: Rng + ?Sized>(mean: &[f64], cv: f64, rng: &mut R) -> Result<Vec<u32>> {
    if !(cv.is_finite() && cv >= 0.0) {
        return Err(Error::InvalidArgument(format!("coefficient of variation {cv} is negative")));
    }
    mean.iter()
        .map(|&mu| {
            if !(mu.is_finite() && mu >= 0.0) {
                return Err(Error::InvalidArgument(format!("mean demand {mu} is negative")));
            }
            let sd = cv * mu;
            if sd == 0.0 {
                return Ok(mu.round() as u32);
            }
            let normal = Normal::new(mu, sd).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            loop {
                let x = normal.sample(rng);
                if x >= 0.0 {
                    return Ok(x.round() as u32);
                }
            }
        })
        .collect()
}

/// Assigns each request a distinct period drawn uniformly without
/// replacement from `1..=horizon`, node identities shuffled uniformly.
pub fn sample_path<R: Rng + ?Sized>(totals: &[u32], horizon: usize, rng: &mut R) -> Result<RequestPath> {
    let requests: u64 = totals.iter().map(|&c| c as u64).sum();
    if requests > horizon as u64 {
        return Err(Error::HorizonTooShort { requests, horizon });
    }
    let mut periods: Vec<usize> = index::sample(rng, horizon, requests as usize)
        .into_iter()
        .map(|p| p + 1)
        .collect();
    periods.sort_unstable();
    let mut nodes: Vec<usize> = totals
        .iter()
        .enumerate()
        .flat_map(|(j, &c)| std::iter::repeat_n(j + 1, c as usize))
        .collect();
    nodes.shuffle(rng);
    Ok(RequestPath {
        horizon,
        events: periods.into_iter().zip(nodes).collect(),
        totals: totals.to_vec(),
    })
}

/// Expected requests per node over periods `t..=T` under stationary arrivals.
pub fn expected_future_demand(mean: &[f64], t: usize, horizon: usize) -> Result<Vec<f64>> {
    if t == 0 || t > horizon {
        return Err(Error::PeriodOutOfRange { t, horizon });
    }
    let share = (horizon - t + 1) as f64 / horizon as f64;
    Ok(mean.iter().map(|mu| mu * share).collect())
}

/// Time-homogeneous arrival probabilities `lambda_j^t = mu_j / T`.
pub fn arrival_probabilities(mean: &[f64], horizon: usize) -> Result<ArrivalModel> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    let total: f64 = mean.iter().sum();
    if total > horizon as f64 + crate::EPS {
        return Err(Error::InvalidArgument(format!(
            "expected demand {total} exceeds the {horizon}-period horizon"
        )));
    }
    if let Some(mu) = mean.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
        return Err(Error::InvalidArgument(format!("mean demand {mu} is negative")));
    }
    let row: Vec<f64> = mean.iter().map(|mu| mu / horizon as f64).collect();
    let none = (1.0 - row.iter().sum::<f64>()).max(0.0);
    Ok(ArrivalModel {
        lambda: vec![row; horizon],
        lambda0: vec![none; horizon],
    })
}
