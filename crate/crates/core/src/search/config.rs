use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::tree::Strategy;
use crate::error::Error;
use crate::rules::{rule_pool, RuleId};

/// Which way the stages are traversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    /// Search the stage-reversed instance and mirror the result.
    Backward,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "fwd",
            Direction::Backward => "bwd",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Directions {
    Forward,
    Backward,
    #[default]
    Both,
}

impl FromStr for Directions {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fwd" => Ok(Directions::Forward),
            "bwd" => Ok(Directions::Backward),
            "both" => Ok(Directions::Both),
            other => Err(Error::Config(format!(
                "unknown direction {other:?} (fwd, bwd or both)"
            ))),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "top" => Ok(Strategy::TopFirst),
            "bottom" => Ok(Strategy::BottomFirst),
            other => Err(Error::Config(format!(
                "unknown strategy {other:?} (top or bottom)"
            ))),
        }
    }
}

/// Starting rules: the whole restart pool, or one fixed rule without restarts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleChoice {
    #[default]
    Auto,
    Single(RuleId),
}

impl FromStr for RuleChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(RuleChoice::Auto),
            other => other.parse().map(RuleChoice::Single),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Deepest level where a discrepancy may occur; `None` means `ceil(n/2)`.
    pub depth_bound: Option<usize>,
    pub strategy: Strategy,
    /// Leaf budget of the first restart; `None` means `100 * n`.
    pub node_budget: Option<u64>,
    /// Growth factor of the budget from one restart to the next.
    pub budget_factor: Ratio<u64>,
    pub max_restarts: usize,
    pub time_limit: Duration,
    pub directions: Directions,
    pub rules: RuleChoice,
    /// Recorded in reports; the search itself is deterministic.
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            depth_bound: None,
            strategy: Strategy::TopFirst,
            node_budget: None,
            budget_factor: Ratio::new(13, 10),
            max_restarts: 4,
            time_limit: Duration::from_secs(60),
            directions: Directions::Both,
            rules: RuleChoice::Auto,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn depth_bound_for(&self, n: usize) -> usize {
        self.depth_bound.unwrap_or(n.div_ceil(2))
    }

    pub fn node_budget_for(&self, n: usize) -> u64 {
        self.node_budget.unwrap_or(100 * n as u64)
    }

    /// Rules in the order the restarts use them.
    pub fn rule_sequence(&self) -> Vec<RuleId> {
        match self.rules {
            RuleChoice::Auto => rule_pool().into_iter().take(self.max_restarts).collect(),
            RuleChoice::Single(rule) => vec![rule],
        }
    }

    /// Leaf budget of every restart: `ceil(base * f^k)`, computed exactly.
    pub fn restart_budgets(&self, n: usize) -> Vec<u64> {
        let base = u128::from(self.node_budget_for(n));
        let (num, den) = (
            u128::from(*self.budget_factor.numer()),
            u128::from(*self.budget_factor.denom()),
        );
        let (mut pn, mut pd) = (1u128, 1u128);
        let mut out = Vec::new();
        for _ in 0..self.rule_sequence().len() {
            let budget = base
                .checked_mul(pn)
                .map(|x| x.div_ceil(pd))
                .and_then(|x| u64::try_from(x).ok())
                .unwrap_or(u64::MAX);
            out.push(budget);
            match (pn.checked_mul(num), pd.checked_mul(den)) {
                (Some(a), Some(b)) => (pn, pd) = (a, b),
                // Past this point the budget saturates anyway.
                _ => (pn, pd) = (u128::MAX, 1),
            }
        }
        out
    }

    pub fn validate(&self, n: usize) -> Result<(), Error> {
        if let Some(d) = self.depth_bound {
            if d == 0 || d > n {
                return Err(Error::Config(format!(
                    "depth bound {d} must lie in 1..={n}"
                )));
            }
        }
        if self.budget_factor <= Ratio::from_integer(1) {
            return Err(Error::Config(format!(
                "budget factor {} must exceed 1",
                self.budget_factor
            )));
        }
        if self.node_budget == Some(0) {
            return Err(Error::Config("node budget must be positive".into()));
        }
        if self.max_restarts == 0 {
            return Err(Error::Config("at least one restart is needed".into()));
        }
        Ok(())
    }
}

/// Parses `"1.3"` or `"13/10"` into an exact ratio.
pub fn parse_ratio(s: &str) -> Result<Ratio<u64>, Error> {
    let bad = || Error::Config(format!("cannot read {s:?} as a positive number"));
    if let Some((a, b)) = s.split_once('/') {
        let (a, b): (u64, u64) = (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        );
        if b == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(a, b));
    }
    let (int, frac) = s.trim().split_once('.').unwrap_or((s.trim(), ""));
    if frac.len() > 9 || (int.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    let den = 10u64.pow(frac.len() as u32);
    let int: u64 = if int.is_empty() {
        0
    } else {
        int.parse().map_err(|_| bad())?
    };
    let frac: u64 = if frac.is_empty() {
        0
    } else {
        frac.parse().map_err(|_| bad())?
    };
    let num = int
        .checked_mul(den)
        .and_then(|x| x.checked_add(frac))
        .ok_or_else(bad)?;
    Ok(Ratio::new(num, den))
}
