use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accepted request counts per customer node; entry `j - 1` belongs to node `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SystemState(pub Vec<u32>);

impl SystemState {
    pub fn zeros(n: usize) -> Self {
        SystemState(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Count at customer node `j` (1-based).
    pub fn get(&self, j: usize) -> u32 {
        self.0[j - 1]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&w| w as u64).sum()
    }

    /// `w + e_j` for customer node `j` (1-based).
    pub fn plus_unit(&self, j: usize) -> Self {
        let mut next = self.clone();
        next.0[j - 1] += 1;
        next
    }

    pub fn as_loads(&self) -> Vec<f64> {
        self.0.iter().map(|&w| w as f64).collect()
    }
}

impl fmt::Display for SystemState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

/// Parses whitespace-separated counts; `#` starts a comment.
impl FromStr for SystemState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_numbers(s).map(SystemState)
    }
}

/// Whitespace-separated numbers with `#` comments, as used by the state and
/// demand-bound files.
pub fn parse_numbers<T: FromStr>(s: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (idx, raw) in s.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            let v = tok.parse::<T>().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("not a valid number: {tok:?}"),
            })?;
            out.push(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_with_comments() {
        let w: SystemState = "# accepted\n1 0\n2 # tail\n".parse().unwrap();
        assert_eq!(w, SystemState(vec![1, 0, 2]));
        assert_eq!(w.to_string(), "1 0 2");
        assert_eq!(w.plus_unit(2).get(2), 1);
    }

    #[test]
    fn parse_error_reports_line() {
        let err = "1 2\n3 x\n".parse::<SystemState>().unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
