//! Priority rules that order jobs for list scheduling.
//!
//! Every rule sorts ascending by a per-job key and breaks ties by the smaller
//! job index, so the output is fully determined by the instance.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{Instance, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleId {
    /// Normalized SPT on the last stage.
    NsptLastStage,
    /// Smallest total `p * size` first.
    Energy,
    /// Smallest total processing time first.
    Spt,
    /// Smallest total processor requirement first.
    Spr,
}

impl RuleId {
    pub fn name(self) -> &'static str {
        match self {
            RuleId::NsptLastStage => "nspt",
            RuleId::Energy => "energy",
            RuleId::Spt => "spt",
            RuleId::Spr => "spr",
        }
    }

    pub fn rank(self, inst: &Instance) -> PriorityList {
        match self {
            RuleId::NsptLastStage => rank_nspt_last_stage(inst),
            RuleId::Energy => rank_energy(inst),
            RuleId::Spt => rank_spt(inst),
            RuleId::Spr => rank_spr(inst),
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nspt" => Ok(RuleId::NsptLastStage),
            "energy" => Ok(RuleId::Energy),
            "spt" => Ok(RuleId::Spt),
            "spr" => Ok(RuleId::Spr),
            other => Err(Error::Config(format!(
                "unknown rule {other:?} (expected nspt, energy, spt or spr)"
            ))),
        }
    }
}

/// The restart order: best-performing rule first.
pub fn rule_pool() -> [RuleId; 4] {
    [
        RuleId::NsptLastStage,
        RuleId::Energy,
        RuleId::Spt,
        RuleId::Spr,
    ]
}

/// A job ordering (zero-based job indices, highest priority first).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PriorityList(Vec<usize>);

impl PriorityList {
    /// Wraps `order`, which must be a permutation of `0..order.len()`.
    pub fn new(order: Vec<usize>) -> Result<Self, Error> {
        let mut seen = vec![false; order.len()];
        for &j in &order {
            if j >= seen.len() || std::mem::replace(&mut seen[j], true) {
                return Err(Error::Config(format!("{order:?} is not a permutation")));
            }
        }
        Ok(PriorityList(order))
    }

    pub(crate) fn from_vec_unchecked(order: Vec<usize>) -> Self {
        PriorityList(order)
    }

    pub fn jobs(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `rank[job]` = position of `job` in the list.
    pub fn ranks(&self) -> Vec<usize> {
        let mut rank = vec![0; self.0.len()];
        for (pos, &j) in self.0.iter().enumerate() {
            rank[j] = pos;
        }
        rank
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

fn sort_by_key<K: Ord>(n: usize, key: impl Fn(usize) -> K) -> PriorityList {
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps index order among equal keys
    order.sort_by_key(|&j| key(j));
    PriorityList(order)
}

pub fn rank_spt(inst: &Instance) -> PriorityList {
    sort_by_key(inst.n(), |j| inst.total_time(j))
}

pub fn rank_spr(inst: &Instance) -> PriorityList {
    sort_by_key(inst.n(), |j| {
        inst.job_sizes(j).iter().map(|&s| u64::from(s)).sum::<u64>()
    })
}

pub fn rank_energy(inst: &Instance) -> PriorityList {
    sort_by_key(inst.n(), |j| {
        (0..inst.m()).map(|i| inst.energy(j, i)).sum::<Time>()
    })
}

/// Ranking index of every job: `(max_k p_mk - p_mj + 1) / (max_k p_mk + 1)`
/// over the last stage `m`.
pub fn ranking_indices(inst: &Instance) -> Vec<Ratio<u64>> {
    let last = inst.m() - 1;
    let pmax = (0..inst.n()).map(|j| inst.p(j, last)).max().unwrap_or(0);
    (0..inst.n())
        .map(|j| Ratio::new(pmax - inst.p(j, last) + 1, pmax + 1))
        .collect()
}

/// Jobs by descending ranking index, i.e. shortest last-stage task first.
pub fn rank_nspt_last_stage(inst: &Instance) -> PriorityList {
    let ri = ranking_indices(inst);
    sort_by_key(inst.n(), |j| std::cmp::Reverse(ri[j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::t1;

    fn single_stage(p: &[u64], size: &[u32], procs: u32) -> Instance {
        Instance::new(
            vec![procs],
            p.iter().map(|&x| vec![x]).collect(),
            size.iter().map(|&x| vec![x]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn t1_orders() {
        let inst = t1();
        assert_eq!(rank_spt(&inst).jobs(), &[0, 1]);
        assert_eq!(rank_spr(&inst).jobs(), &[0, 1]);
        assert_eq!(rank_energy(&inst).jobs(), &[0, 1]);
    }

    #[test]
    fn ties_keep_index_order() {
        let inst = single_stage(&[4, 4, 4], &[1, 1, 1], 2);
        for rule in rule_pool() {
            assert_eq!(rule.rank(&inst).jobs(), &[0, 1, 2], "{rule}");
        }
    }

    #[test]
    fn single_job() {
        let inst = single_stage(&[4], &[2], 2);
        assert_eq!(rank_spr(&inst).jobs(), &[0]);
    }

    #[test]
    fn energy_single_stage() {
        // energies 4, 2, 9
        let inst = single_stage(&[4, 1, 3], &[1, 2, 3], 3);
        assert_eq!(rank_energy(&inst).jobs(), &[1, 0, 2]);
    }

    #[test]
    fn nspt_indices() {
        let inst = single_stage(&[10, 5, 1], &[1, 1, 1], 1);
        assert_eq!(
            ranking_indices(&inst),
            vec![Ratio::new(1, 11), Ratio::new(6, 11), Ratio::new(10, 11)]
        );
        assert_eq!(rank_nspt_last_stage(&inst).jobs(), &[2, 1, 0]);
    }

    #[test]
    fn nspt_equal_times() {
        let inst = single_stage(&[7, 7], &[1, 1], 1);
        assert_eq!(ranking_indices(&inst), vec![Ratio::new(1, 8); 2]);
        assert_eq!(rank_nspt_last_stage(&inst).jobs(), &[0, 1]);
    }

    #[test]
    fn pool_order() {
        let pool = rule_pool();
        assert_eq!(pool.len(), 4);
        assert_eq!(pool[0], RuleId::NsptLastStage);
        assert_eq!(pool[1], RuleId::Energy);
        assert_eq!(pool[2], RuleId::Spt);
        assert_eq!(pool[3], RuleId::Spr);
    }

    #[test]
    fn names_parse_back() {
        for rule in rule_pool() {
            assert_eq!(rule.name().parse::<RuleId>().unwrap(), rule);
        }
        assert!("lpt".parse::<RuleId>().is_err());
    }

    #[test]
    fn priority_list_rejects_non_permutations() {
        assert!(PriorityList::new(vec![0, 0]).is_err());
        assert!(PriorityList::new(vec![0, 2]).is_err());
        assert_eq!(
            PriorityList::new(vec![2, 0, 1]).unwrap().ranks(),
            vec![1, 2, 0]
        );
    }
}
