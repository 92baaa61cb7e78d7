//! Exact optimum of tiny instances.
//!
//! Active schedules contain an optimum, and every active schedule comes out
//! of the serial scheme for some precedence-feasible task list. Enumerating
//! all interleavings of the job chains therefore finds the optimum. Lists
//! sharing a prefix share their partial schedule, so the enumeration is a
//! depth-first walk that extends one partial schedule task by task.

use std::sync::atomic::{AtomicBool, Ordering};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Instance, Schedule, Task, Time};
use crate::sgs::StageProfile;

pub const DEFAULT_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub optimum: Time,
    pub optimal_schedule: Schedule,
    /// A task list whose serial schedule is optimal.
    pub witness: Vec<Task>,
    pub sequences_enumerated: u64,
}

/// Number of task lists respecting every chain: `(nm)! / (m!)^n`.
/// `None` if it does not fit in 128 bits.
pub fn interleavings(n: usize, m: usize) -> Option<u128> {
    // prod_{k=1..n} C(k*m, m)
    let mut total: u128 = 1;
    for k in 1..=n as u128 {
        let mut c: u128 = 1;
        for r in 1..=m as u128 {
            c = c.checked_mul(k * m as u128 - m as u128 + r)? / r;
        }
        total = total.checked_mul(c)?;
    }
    Some(total)
}

struct Walk<'a> {
    inst: &'a Instance,
    next: Vec<usize>,
    ready: Vec<Time>,
    start: Vec<Vec<Time>>,
    profiles: Vec<StageProfile>,
    list: Vec<Task>,
    count: u64,
    best: Option<(Time, Vec<Vec<Time>>, Vec<Task>)>,
    cancel: Option<&'a AtomicBool>,
}

impl Walk<'_> {
    fn run(&mut self) -> Result<()> {
        let (n, m) = (self.inst.n(), self.inst.m());
        if self.list.len() == n * m {
            self.count += 1;
            if self.count.is_multiple_of(4096)
                && self.cancel.is_some_and(|c| c.load(Ordering::Relaxed))
            {
                return Err(Error::Cancelled);
            }
            let makespan = self.ready.iter().copied().max().unwrap_or(0);
            if self.best.as_ref().is_none_or(|b| makespan < b.0) {
                self.best = Some((makespan, self.start.clone(), self.list.clone()));
            }
            return Ok(());
        }
        for job in 0..n {
            let stage = self.next[job];
            if stage == m {
                continue;
            }
            let (p, size) = (self.inst.p(job, stage), self.inst.size(job, stage));
            let saved = self.profiles[stage].clone();
            let prev_ready = self.ready[job];
            let s = self.profiles[stage].earliest_fit(prev_ready, p, size);
            self.profiles[stage].reserve(s, p, size);
            self.start[job][stage] = s;
            self.ready[job] = s + p;
            self.next[job] += 1;
            self.list.push(Task::new(job, stage));

            let res = self.run();

            self.list.pop();
            self.next[job] -= 1;
            self.ready[job] = prev_ready;
            self.profiles[stage] = saved;
            res?;
        }
        Ok(())
    }
}

/// Minimum makespan over the serial schedules of every task list.
///
/// Refuses instances with more than `limit` task lists; `cancel` is polled
/// during the walk.
pub fn brute_force_optimum_with_cancel(
    inst: &Instance,
    limit: u64,
    cancel: Option<&AtomicBool>,
) -> Result<OracleResult> {
    let needed = interleavings(inst.n(), inst.m());
    match needed {
        Some(k) if k <= u128::from(limit) => {}
        Some(k) => {
            return Err(Error::LimitExceeded {
                needed: k.to_string(),
                limit,
            })
        }
        None => {
            return Err(Error::LimitExceeded {
                needed: "more than 2^128".into(),
                limit,
            })
        }
    }
    let mut walk = Walk {
        inst,
        next: vec![0; inst.n()],
        ready: vec![0; inst.n()],
        start: vec![vec![0; inst.m()]; inst.n()],
        profiles: inst
            .all_procs()
            .iter()
            .map(|&c| StageProfile::new(c))
            .collect(),
        list: Vec::with_capacity(inst.n() * inst.m()),
        count: 0,
        best: None,
        cancel,
    };
    walk.run()?;
    let (optimum, start, witness) = walk.best.expect("at least one task list exists");
    Ok(OracleResult {
        optimum,
        optimal_schedule: Schedule::from_starts(inst, start),
        witness,
        sequences_enumerated: walk.count,
    })
}

pub fn brute_force_optimum(inst: &Instance, limit: u64) -> Result<OracleResult> {
    brute_force_optimum_with_cancel(inst, limit, None)
}

/// Whether the instance and its stage reversal have the same optimum.
pub fn check_symmetry(inst: &Instance, limit: u64) -> Result<bool> {
    let fwd = brute_force_optimum(inst, limit)?;
    let bwd = brute_force_optimum(&inst.reversed(), limit)?;
    Ok(fwd.optimum == bwd.optimum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::t1;
    use crate::model::verify_schedule;
    use crate::sgs::serial_sgs;

    #[test]
    fn interleaving_counts() {
        assert_eq!(interleavings(2, 2), Some(6));
        assert_eq!(interleavings(1, 5), Some(1));
        assert_eq!(interleavings(3, 1), Some(6));
        assert_eq!(interleavings(4, 3), Some(369_600));
        assert_eq!(interleavings(100, 8), None);
    }

    #[test]
    fn t1_optimum() {
        let inst = t1();
        let res = brute_force_optimum(&inst, DEFAULT_LIMIT).unwrap();
        assert_eq!(res.optimum, 7);
        assert_eq!(res.sequences_enumerated, 6);
        assert!(verify_schedule(&inst, &res.optimal_schedule)
            .unwrap()
            .is_empty());
        assert_eq!(serial_sgs(&inst, &res.witness).unwrap().makespan(), 7);
    }

    #[test]
    fn single_job_is_its_chain() {
        let inst = Instance::new(vec![1, 2], vec![vec![4, 3]], vec![vec![1, 2]]).unwrap();
        assert_eq!(brute_force_optimum(&inst, 10).unwrap().optimum, 7);
    }

    #[test]
    fn full_width_single_stage_serializes() {
        let inst = Instance::new(
            vec![2],
            vec![vec![4], vec![1], vec![6]],
            vec![vec![2], vec![2], vec![2]],
        )
        .unwrap();
        assert_eq!(brute_force_optimum(&inst, 10).unwrap().optimum, 11);
    }

    #[test]
    fn refuses_above_limit() {
        let err = brute_force_optimum(&t1(), 5).unwrap_err();
        assert!(matches!(err, Error::LimitExceeded { .. }));
    }

    #[test]
    fn cancellation_stops_the_walk() {
        let inst = Instance::new(
            vec![2, 2, 2],
            vec![vec![1, 2, 3]; 4],
            vec![vec![1, 1, 1]; 4],
        )
        .unwrap();
        let flag = AtomicBool::new(true);
        let res = brute_force_optimum_with_cancel(&inst, DEFAULT_LIMIT, Some(&flag));
        assert!(matches!(res, Err(Error::Cancelled)));
    }

    #[test]
    fn t1_is_symmetric() {
        assert!(check_symmetry(&t1(), DEFAULT_LIMIT).unwrap());
        let single =
            Instance::new(vec![3], vec![vec![2], vec![5]], vec![vec![2], vec![3]]).unwrap();
        assert!(check_symmetry(&single, DEFAULT_LIMIT).unwrap());
    }
}
