//! The binary discrepancy tree over job orderings.
//!
//! Depth `k` of the tree picks the `k`-th job of the list. Following the
//! reference takes the first job the reference still has left; a discrepancy
//! takes the second one. Leaves are enumerated with all discrepancies in one
//! contiguous run that ends no deeper than the depth bound.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Schedule};
use crate::rules::PriorityList;
use crate::sgs::parallel_sgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Choice {
    Follow,
    Deviate,
}

/// Order in which discrepancy runs of equal length are visited.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Runs starting near the root first.
    #[default]
    TopFirst,
    /// Runs starting near the depth bound first.
    BottomFirst,
}

/// One branch choice per depth, with the discrepancies forming one
/// contiguous run (possibly empty).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DecisionSequence {
    choices: Vec<Choice>,
}

impl DecisionSequence {
    /// Rejects sequences whose discrepancies are not adjacent.
    pub fn new(choices: Vec<Choice>) -> Result<Self> {
        let seq = DecisionSequence { choices };
        let devs = seq.deviations();
        if devs.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::Config(format!(
                "discrepancies at depths {:?} are not adjacent",
                devs.iter().map(|d| d + 1).collect::<Vec<_>>()
            )));
        }
        Ok(seq)
    }

    /// All `Follow`: the reference itself.
    pub fn follow_all(depth: usize) -> Self {
        DecisionSequence {
            choices: vec![Choice::Follow; depth],
        }
    }

    /// Discrepancies at zero-based depths `start..start + len`.
    pub fn with_run(depth: usize, start: usize, len: usize) -> Self {
        let mut choices = vec![Choice::Follow; depth];
        choices[start..start + len].fill(Choice::Deviate);
        DecisionSequence { choices }
    }

    pub fn choices(&self) -> &[Choice] {
        &self.choices
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    /// Zero-based depths holding a discrepancy, ascending.
    pub fn deviations(&self) -> Vec<usize> {
        self.choices
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == Choice::Deviate)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn discrepancies(&self) -> usize {
        self.choices
            .iter()
            .filter(|&&c| c == Choice::Deviate)
            .count()
    }

    /// Zero-based depth of the first discrepancy; also the length of the
    /// prefix shared with the reference.
    pub fn first_deviation(&self) -> Option<usize> {
        self.choices.iter().position(|&c| c == Choice::Deviate)
    }

    /// True when no discrepancy sits deeper than `bound` (one-based).
    pub fn within_depth(&self, bound: usize) -> bool {
        self.deviations().last().is_none_or(|&k| k < bound)
    }
}

impl fmt::Display for DecisionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.choices {
            f.write_str(match c {
                Choice::Follow => "F",
                Choice::Deviate => "D",
            })?;
        }
        Ok(())
    }
}

/// Leaves of the depth-bounded adjacent discrepancy tree, in visiting order.
///
/// Iteration 0 is the reference path; iteration `i` holds every run of
/// exactly `i` adjacent discrepancies inside depths `1..=bound`.
#[derive(Debug, Clone)]
pub struct DadsLeaves {
    depth: usize,
    bound: usize,
    strategy: Strategy,
    /// Run length being enumerated; 0 is the reference path.
    len: usize,
    /// Position within the current iteration.
    k: usize,
}

impl Iterator for DadsLeaves {
    type Item = DecisionSequence;

    fn next(&mut self) -> Option<Self::Item> {
        if self.len == 0 {
            self.len = 1;
            return Some(DecisionSequence::follow_all(self.depth));
        }
        if self.len > self.bound {
            return None;
        }
        let starts = self.bound - self.len + 1;
        let start = match self.strategy {
            Strategy::TopFirst => self.k,
            Strategy::BottomFirst => starts - 1 - self.k,
        };
        let seq = DecisionSequence::with_run(self.depth, start, self.len);
        self.k += 1;
        if self.k == starts {
            self.k = 0;
            self.len += 1;
        }
        Some(seq)
    }
}

/// Enumerates leaves of a tree of `depth` binary decisions, allowing
/// discrepancies only in the first `bound` of them.
///
/// Yields `1 + bound * (bound + 1) / 2` sequences.
pub fn dads_leaves(depth: usize, bound: usize, strategy: Strategy) -> DadsLeaves {
    assert!(
        bound <= depth,
        "depth bound {bound} exceeds tree depth {depth}"
    );
    DadsLeaves {
        depth,
        bound,
        strategy,
        len: 0,
        k: 0,
    }
}

/// Number of leaves [`dads_leaves`] yields.
pub fn leaf_count(bound: usize) -> usize {
    1 + bound * (bound + 1) / 2
}

/// Applies `seq` to the reference ordering; depths past the end of `seq`
/// follow the reference.
pub fn apply_decisions(reference: &PriorityList, seq: &DecisionSequence) -> Result<PriorityList> {
    let mut remaining: Vec<usize> = reference.jobs().to_vec();
    let mut order = Vec::with_capacity(remaining.len());
    for (depth, &choice) in seq.choices().iter().enumerate() {
        if remaining.is_empty() {
            break;
        }
        let pick = match choice {
            Choice::Follow => 0,
            Choice::Deviate if remaining.len() >= 2 => 1,
            Choice::Deviate => {
                return Err(Error::InfeasibleDecision {
                    depth: depth + 1,
                    remaining: remaining.len(),
                })
            }
        };
        order.push(remaining.remove(pick));
    }
    order.extend(remaining);
    Ok(PriorityList::from_vec_unchecked(order))
}

/// Builds the leaf's job ordering and schedules it with the parallel scheme.
pub fn realize_leaf(
    inst: &Instance,
    reference: &PriorityList,
    seq: &DecisionSequence,
) -> Result<(PriorityList, Schedule)> {
    let order = apply_decisions(reference, seq)?;
    let sched = parallel_sgs(inst, &order);
    Ok((order, sched))
}
