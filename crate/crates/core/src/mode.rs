use serde::{Deserialize, Serialize};
use std::fmt;

use crate::analytic::Cost;
use crate::error::{Error, Result};

/// Which search technology the decision maker controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SearchMode {
    /// Every alternative diffuses at once, total cost `c` per unit time.
    Parallel { c: Cost },
    /// One chosen alternative diffuses at cost `cprime`; the rest are frozen.
    Sequential { cprime: Cost },
    /// Per instant choice between parallel search at `c` and single-alternative
    /// search at `cprime`, with `c/2 < cprime < c`.
    Hybrid { c: Cost, cprime: Cost },
}

impl SearchMode {
    pub fn parallel(c: f64) -> Result<Self> {
        Ok(SearchMode::Parallel { c: Cost::new(c)? })
    }

    pub fn sequential(cprime: f64) -> Result<Self> {
        Ok(SearchMode::Sequential {
            cprime: Cost::new(cprime)?,
        })
    }

    /// Economies of scale only exist for `c/2 < cprime < c`; outside that
    /// window one technology dominates and the hybrid problem degenerates.
    pub fn hybrid(c: f64, cprime: f64) -> Result<Self> {
        let c = Cost::new(c)?;
        let cprime = Cost::new(cprime)?;
        let (cv, cp) = (c.value(), cprime.value());
        if !(cp > 0.5 * cv && cp < cv) {
            return Err(Error::InvalidParameter {
                name: "cprime",
                value: cp,
                reason: format!(
                    "hybrid search needs c/2 < cprime < c, i.e. cprime in ({}, {})",
                    0.5 * cv,
                    cv
                ),
            });
        }
        Ok(SearchMode::Hybrid { c, cprime })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SearchMode::Parallel { .. } => "parallel",
            SearchMode::Sequential { .. } => "sequential",
            SearchMode::Hybrid { .. } => "hybrid",
        }
    }

    /// Parallel search cost, if that action is available.
    pub fn parallel_cost(&self) -> Option<f64> {
        match *self {
            SearchMode::Parallel { c } | SearchMode::Hybrid { c, .. } => Some(c.value()),
            SearchMode::Sequential { .. } => None,
        }
    }

    /// Single-alternative search cost, if that action is available.
    pub fn single_cost(&self) -> Option<f64> {
        match *self {
            SearchMode::Sequential { cprime } | SearchMode::Hybrid { cprime, .. } => {
                Some(cprime.value())
            }
            SearchMode::Parallel { .. } => None,
        }
    }

    /// Cost per unit time of diffusing one alternative against the outside
    /// option, with the cheapest available technology.
    pub(crate) fn one_alternative_cost(&self) -> f64 {
        match *self {
            SearchMode::Parallel { c } => c.value(),
            SearchMode::Sequential { cprime } => cprime.value(),
            SearchMode::Hybrid { c, cprime } => c.value().min(cprime.value()),
        }
    }

    /// Curvature parameter θ of the two-alternative profile `eta_theta` that
    /// the cheapest available technology produces far along the diagonal.
    /// Single-alternative search moves `x1 - x2` with half the variance of
    /// parallel search, which doubles the effective parameter.
    pub fn pair_theta(&self) -> f64 {
        match *self {
            SearchMode::Parallel { c } => c.value(),
            SearchMode::Sequential { cprime } => 2.0 * cprime.value(),
            SearchMode::Hybrid { c, cprime } => c.value().min(2.0 * cprime.value()),
        }
    }

    /// Smallest cost in play; sets the natural length scale `1/c`.
    pub fn min_cost(&self) -> f64 {
        match *self {
            SearchMode::Parallel { c } => c.value(),
            SearchMode::Sequential { cprime } => cprime.value(),
            SearchMode::Hybrid { c, cprime } => c.value().min(cprime.value()),
        }
    }
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchMode::Parallel { c } => write!(f, "parallel(c={})", c.value()),
            SearchMode::Sequential { cprime } => write!(f, "sequential(c'={})", cprime.value()),
            SearchMode::Hybrid { c, cprime } => {
                write!(f, "hybrid(c={}, c'={})", c.value(), cprime.value())
            }
        }
    }
}
