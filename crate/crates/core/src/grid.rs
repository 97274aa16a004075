use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Query points, either listed or evenly spaced over `[min, max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QueryGrid {
    Range { min: f64, max: f64, count: usize },
    List(Vec<f64>),
}

impl QueryGrid {
    /// Parses `min:max:count`.
    pub fn parse_range(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let [min, max, count] = parts.as_slice() else {
            return Err(Error::InvalidConfig(format!(
                "grid must look like min:max:count, got {text:?}"
            )));
        };
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad grid bound {s:?}")))
        };
        let count = count
            .parse::<usize>()
            .map_err(|_| Error::InvalidConfig(format!("bad grid count {count:?}")))?;
        Ok(Self::Range {
            min: num(min)?,
            max: num(max)?,
            count,
        })
    }

    /// Parses `x1,x2,...`.
    pub fn parse_list(text: &str) -> Result<Self> {
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidConfig(format!("bad grid point {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::List)
    }

    /// Materialises the points, checking that there is at least one and that
    /// all are finite.
    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = match *self {
            Self::Range { min, max, count } => {
                if count == 0 {
                    return Err(Error::InvalidConfig("grid count must be at least 1".into()));
                }
                if !(min.is_finite() && max.is_finite()) || min > max {
                    return Err(Error::InvalidConfig(format!(
                        "grid range [{min}, {max}] is not a finite interval"
                    )));
                }
                if count == 1 {
                    vec![min]
                } else {
                    let step = (max - min) / (count - 1) as f64;
                    (0..count)
                        .map(|i| {
                            if i + 1 == count {
                                max
                            } else {
                                min + i as f64 * step
                            }
                        })
                        .collect()
                }
            }
            Self::List(ref xs) => xs.clone(),
        };
        if pts.is_empty() {
            return Err(Error::InvalidConfig("query grid is empty".into()));
        }
        if let Some(bad) = pts.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "grid point {bad} is not finite"
            )));
        }
        Ok(pts)
    }
}
