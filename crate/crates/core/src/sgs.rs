//! Schedule generation schemes.
//!
//! [`parallel_sgs`] walks forward in time and, at every decision instant,
//! starts whichever ready tasks fit, in priority order. It always yields a
//! non-delay schedule. [`serial_sgs`] takes tasks one by one in list order and
//! puts each at its earliest capacity-feasible start, yielding an active
//! schedule.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::model::{Instance, Schedule, Task, Time};
use crate::rules::PriorityList;

/// Free processors of one stage as a step function of time.
///
/// `steps[k] = (t, free)` means `free` processors are idle on
/// `[t, steps[k + 1].0)`; the last step extends to infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageProfile {
    capacity: u32,
    steps: Vec<(Time, u32)>,
}

impl StageProfile {
    pub fn new(capacity: u32) -> Self {
        StageProfile {
            capacity,
            steps: vec![(0, capacity)],
        }
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn steps(&self) -> &[(Time, u32)] {
        &self.steps
    }

    /// Index of the step covering `t`.
    fn segment(&self, t: Time) -> usize {
        self.steps.partition_point(|&(s, _)| s <= t) - 1
    }

    pub fn free_at(&self, t: Time) -> u32 {
        self.steps[self.segment(t)].1
    }

    /// Smallest free capacity over `[from, to)`; `to > from`.
    pub fn min_free(&self, from: Time, to: Time) -> u32 {
        let first = self.segment(from);
        self.steps[first..]
            .iter()
            .take_while(|&&(s, _)| s < to)
            .map(|&(_, f)| f)
            .min()
            .unwrap_or(self.capacity)
    }

    /// Earliest `t >= ready` such that `size` processors stay free on
    /// `[t, t + duration)`.
    pub fn earliest_fit(&self, ready: Time, duration: Time, size: u32) -> Time {
        let mut t = ready;
        let mut k = self.segment(t);
        loop {
            let end = t + duration;
            let mut blocked = None;
            let mut q = k;
            while q < self.steps.len() && self.steps[q].0 < end {
                if self.steps[q].1 < size {
                    blocked = Some(q);
                }
                q += 1;
            }
            match blocked {
                None => return t,
                // The last step is never blocked: every reservation ends.
                Some(b) => {
                    k = b + 1;
                    t = self.steps[k].0;
                }
            }
        }
    }

    fn split_at(&mut self, t: Time) -> usize {
        let k = self.segment(t);
        if self.steps[k].0 == t {
            k
        } else {
            self.steps.insert(k + 1, (t, self.steps[k].1));
            k + 1
        }
    }

    /// Occupies `size` processors on `[start, start + duration)`.
    ///
    /// Panics if that would overload the stage.
    pub fn reserve(&mut self, start: Time, duration: Time, size: u32) {
        let lo = self.split_at(start);
        let hi = self.split_at(start + duration);
        for step in &mut self.steps[lo..hi] {
            step.1 = step.1.checked_sub(size).expect("stage capacity exceeded");
        }
    }
}

/// Chronological list scheduling driven by a job priority list.
///
/// Decision instants are time zero and task completions. At each one, ready
/// tasks are taken in list order and started when their stage still has
/// `size` idle processors; a task that does not fit waits for the next
/// completion while lower-priority tasks may go ahead.
pub fn parallel_sgs(inst: &Instance, zeta: &PriorityList) -> Schedule {
    let (n, m) = (inst.n(), inst.m());
    let order = zeta.jobs();
    debug_assert_eq!(order.len(), n);
    let rank = zeta.ranks();

    let mut start = vec![vec![0; m]; n];
    let mut next_stage = vec![0usize; n];
    let mut free: Vec<u32> = inst.all_procs().to_vec();
    // Jobs whose task at a stage is ready but not started, bucketed by the
    // processors that task needs; each bucket is in reverse list order so
    // its best-ranked job sits at the end. Walking the waiting jobs in list
    // order and starting each one that fits is the same as repeatedly
    // starting the best-ranked job that fits: a job skipped for lack of
    // room stays too wide as the free capacity only shrinks.
    let mut buckets: Vec<Vec<Vec<usize>>> = inst
        .all_procs()
        .iter()
        .map(|&c| vec![Vec::new(); c as usize])
        .collect();
    for &job in order.iter().rev() {
        buckets[0][inst.size(job, 0) as usize - 1].push(job);
    }
    // Placements at one instant never interact across stages, so only
    // stages whose waiting jobs or capacity changed need a new look.
    let mut dirty = vec![false; m];
    dirty[0] = true;
    let mut running: BinaryHeap<Reverse<(Time, usize)>> = BinaryHeap::with_capacity(n);
    let mut t: Time = 0;

    loop {
        for stage in 0..m {
            if !std::mem::take(&mut dirty[stage]) {
                continue;
            }
            let stage_buckets = &mut buckets[stage];
            loop {
                let best = stage_buckets[..free[stage] as usize]
                    .iter()
                    .enumerate()
                    .filter_map(|(b, jobs)| jobs.last().map(|&j| (rank[j], b)))
                    .min();
                let Some((_, b)) = best else { break };
                let job = stage_buckets[b].pop().expect("bucket is non-empty");
                free[stage] -= inst.size(job, stage);
                start[job][stage] = t;
                running.push(Reverse((t + inst.p(job, stage), job)));
            }
        }

        let Some(&Reverse((next, _))) = running.peek() else {
            break;
        };
        t = next;
        while let Some(&Reverse((end, job))) = running.peek() {
            if end != t {
                break;
            }
            running.pop();
            let stage = next_stage[job];
            free[stage] += inst.size(job, stage);
            dirty[stage] = true;
            next_stage[job] += 1;
            if next_stage[job] < m {
                let bucket = &mut buckets[stage + 1][inst.size(job, stage + 1) as usize - 1];
                let pos = bucket.partition_point(|&w| rank[w] > rank[job]);
                bucket.insert(pos, job);
                dirty[stage + 1] = true;
            }
        }
    }
    Schedule::from_starts(inst, start)
}

/// Expands a job ordering stage by stage: all of stage 1 in list order, then
/// all of stage 2, and so on.
pub fn job_list_to_task_list(zeta: &PriorityList, m: usize) -> Vec<Task> {
    (0..m)
        .flat_map(|stage| zeta.jobs().iter().map(move |&job| Task::new(job, stage)))
        .collect()
}

/// Checks that `tasks` lists every task exactly once, each after its
/// predecessor in the job's chain.
pub fn check_task_list(inst: &Instance, tasks: &[Task]) -> Result<()> {
    let (n, m) = (inst.n(), inst.m());
    if tasks.len() != n * m {
        return Err(Error::PrecedenceInfeasible(format!(
            "{} tasks listed, instance has {}",
            tasks.len(),
            n * m
        )));
    }
    let mut next = vec![0usize; n];
    for &task in tasks {
        if task.job >= n || task.stage >= m {
            return Err(Error::PrecedenceInfeasible(format!(
                "{task} does not exist"
            )));
        }
        if next[task.job] != task.stage {
            return Err(Error::PrecedenceInfeasible(format!(
                "{task} listed while stage {} of that job is expected next",
                next[task.job] + 1
            )));
        }
        next[task.job] += 1;
    }
    Ok(())
}

/// Serial schedule generation: each listed task goes to its earliest start
/// given its chain predecessor and the tasks already placed.
pub fn serial_sgs(inst: &Instance, tasks: &[Task]) -> Result<Schedule> {
    check_task_list(inst, tasks)?;
    let mut profiles: Vec<StageProfile> = inst
        .all_procs()
        .iter()
        .map(|&c| StageProfile::new(c))
        .collect();
    let mut start = vec![vec![0; inst.m()]; inst.n()];
    let mut ready = vec![0; inst.n()];
    for &Task { job, stage } in tasks {
        let (p, size) = (inst.p(job, stage), inst.size(job, stage));
        let s = profiles[stage].earliest_fit(ready[job], p, size);
        profiles[stage].reserve(s, p, size);
        start[job][stage] = s;
        ready[job] = s + p;
    }
    Ok(Schedule::from_starts(inst, start))
}
