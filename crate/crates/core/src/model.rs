//! Problem and solution data for `Fm(m1,...,mm)|size_ij|Cmax`.
//!
//! Jobs and stages are zero-based in code and one-based in anything meant for
//! humans (error messages, reports). Every job visits every stage in order;
//! a task `(j, i)` needs `size(j, i)` of the `procs(i)` identical processors of
//! stage `i` for `p(j, i)` consecutive time units.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer time; all durations and start times are exact.
pub type Time = u64;

/// A `(job, stage)` pair, both zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Task {
    pub job: usize,
    pub stage: usize,
}

impl Task {
    pub fn new(job: usize, stage: usize) -> Self {
        Task { job, stage }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(job {}, stage {})", self.job + 1, self.stage + 1)
    }
}

/// Optional provenance carried along with an instance.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub name: Option<String>,
    /// Benchmark class: 1 (random processor counts) or 2 (five per stage).
    pub kind: Option<u8>,
    pub seed: Option<u64>,
    pub cell: Option<usize>,
}

/// One broken instance invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    NoJobs,
    NoStages,
    ZeroProcessors {
        stage: usize,
    },
    RowLength {
        job: usize,
        expected: usize,
        found: usize,
    },
    JobCount {
        expected: usize,
        found: usize,
    },
    ZeroTime {
        job: usize,
        stage: usize,
    },
    SizeOutOfRange {
        job: usize,
        stage: usize,
        size: u32,
        capacity: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::NoJobs => write!(f, "instance has no jobs"),
            Violation::NoStages => write!(f, "instance has no stages"),
            Violation::ZeroProcessors { stage } => {
                write!(f, "stage {} has no processors", stage + 1)
            }
            Violation::RowLength {
                job,
                expected,
                found,
            } => write!(
                f,
                "job {} has {found} stage entries, expected {expected}",
                job + 1
            ),
            Violation::JobCount { expected, found } => {
                write!(f, "size matrix has {found} jobs, expected {expected}")
            }
            Violation::ZeroTime { job, stage } => {
                write!(f, "p at (stage {}, job {}) is zero", stage + 1, job + 1)
            }
            Violation::SizeOutOfRange {
                job,
                stage,
                size,
                capacity,
            } => write!(
                f,
                "size {size} at (stage {}, job {}) outside 1..={capacity}",
                stage + 1,
                job + 1
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    procs: Vec<u32>,
    /// `p[job][stage]`
    p: Vec<Vec<Time>>,
    /// `size[job][stage]`
    size: Vec<Vec<u32>>,
    meta: Meta,
}

impl Instance {
    /// Builds an instance and rejects it unless every invariant holds.
    pub fn new(procs: Vec<u32>, p: Vec<Vec<Time>>, size: Vec<Vec<u32>>) -> Result<Self> {
        let inst = Self::from_parts(procs, p, size);
        let violations = inst.validate();
        if violations.is_empty() {
            Ok(inst)
        } else {
            Err(Error::InvalidInstance(violations))
        }
    }

    /// Builds an instance without checking it. Everything except
    /// [`Instance::validate`] assumes a valid instance.
    pub fn from_parts(procs: Vec<u32>, p: Vec<Vec<Time>>, size: Vec<Vec<u32>>) -> Self {
        Instance {
            procs,
            p,
            size,
            meta: Meta::default(),
        }
    }

    pub fn with_meta(mut self, meta: Meta) -> Self {
        self.meta = meta;
        self
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn m(&self) -> usize {
        self.procs.len()
    }

    pub fn procs(&self, stage: usize) -> u32 {
        self.procs[stage]
    }

    pub fn all_procs(&self) -> &[u32] {
        &self.procs
    }

    pub fn p(&self, job: usize, stage: usize) -> Time {
        self.p[job][stage]
    }

    pub fn size(&self, job: usize, stage: usize) -> u32 {
        self.size[job][stage]
    }

    pub fn job_times(&self, job: usize) -> &[Time] {
        &self.p[job]
    }

    pub fn job_sizes(&self, job: usize) -> &[u32] {
        &self.size[job]
    }

    /// `p * size` of one task.
    pub fn energy(&self, job: usize, stage: usize) -> Time {
        self.p[job][stage] * Time::from(self.size[job][stage])
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    /// Lists every invariant violation; empty means the instance is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let (n, m) = (self.n(), self.m());
        if n == 0 {
            out.push(Violation::NoJobs);
        }
        if m == 0 {
            out.push(Violation::NoStages);
        }
        for (stage, &c) in self.procs.iter().enumerate() {
            if c == 0 {
                out.push(Violation::ZeroProcessors { stage });
            }
        }
        if self.size.len() != n {
            out.push(Violation::JobCount {
                expected: n,
                found: self.size.len(),
            });
        }
        for job in 0..n {
            let rows = [Some(self.p[job].len()), self.size.get(job).map(Vec::len)];
            for found in rows.into_iter().flatten() {
                if found != m {
                    out.push(Violation::RowLength {
                        job,
                        expected: m,
                        found,
                    });
                }
            }
            for stage in 0..m {
                if self.p[job].get(stage) == Some(&0) {
                    out.push(Violation::ZeroTime { job, stage });
                }
                if let Some(&size) = self.size.get(job).and_then(|r| r.get(stage)) {
                    let capacity = self.procs[stage];
                    if size == 0 || size > capacity {
                        out.push(Violation::SizeOutOfRange {
                            job,
                            stage,
                            size,
                            capacity,
                        });
                    }
                }
            }
        }
        out
    }

    /// Same jobs with the stage order reversed.
    pub fn reversed(&self) -> Instance {
        let flip = |row: &Vec<Time>| row.iter().rev().copied().collect::<Vec<_>>();
        Instance {
            procs: self.procs.iter().rev().copied().collect(),
            p: self.p.iter().map(flip).collect(),
            size: self
                .size
                .iter()
                .map(|r| r.iter().rev().copied().collect())
                .collect(),
            meta: self.meta.clone(),
        }
    }

    /// Sum of processing times of one job over all stages.
    pub fn total_time(&self, job: usize) -> Time {
        self.p[job].iter().sum()
    }
}

/// Stage-reversed copy of `inst`.
pub fn reverse_instance(inst: &Instance) -> Instance {
    inst.reversed()
}

/// Start times of every task plus the resulting makespan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    /// `start[job][stage]`
    start: Vec<Vec<Time>>,
    makespan: Time,
}

impl Schedule {
    /// Builds a schedule, deriving the makespan from the starts.
    pub fn from_starts(inst: &Instance, start: Vec<Vec<Time>>) -> Self {
        let makespan = start
            .iter()
            .enumerate()
            .flat_map(|(j, row)| row.iter().enumerate().map(move |(i, &s)| (j, i, s)))
            .map(|(j, i, s)| s + inst.p(j, i))
            .max()
            .unwrap_or(0);
        Schedule { start, makespan }
    }

    /// Builds a schedule with an explicitly stored makespan, which
    /// [`verify_schedule`] will check.
    pub fn with_makespan(start: Vec<Vec<Time>>, makespan: Time) -> Self {
        Schedule { start, makespan }
    }

    pub fn start(&self, job: usize, stage: usize) -> Time {
        self.start[job][stage]
    }

    pub fn starts(&self) -> &[Vec<Time>] {
        &self.start
    }

    pub fn makespan(&self) -> Time {
        self.makespan
    }

    pub fn completion(&self, inst: &Instance, job: usize, stage: usize) -> Time {
        self.start[job][stage] + inst.p(job, stage)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScheduleViolation {
    Precedence {
        job: usize,
        stage: usize,
        start: Time,
        ready: Time,
    },
    Capacity {
        stage: usize,
        time: Time,
        used: u64,
        capacity: u32,
    },
    Makespan {
        stored: Time,
        actual: Time,
    },
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ScheduleViolation::Precedence {
                job,
                stage,
                start,
                ready,
            } => write!(
                f,
                "job {} starts stage {} at {start} before its previous stage ends at {ready}",
                job + 1,
                stage + 1
            ),
            ScheduleViolation::Capacity {
                stage,
                time,
                used,
                capacity,
            } => write!(
                f,
                "stage {} uses {used} of {capacity} processors at t={time}",
                stage + 1
            ),
            ScheduleViolation::Makespan { stored, actual } => {
                write!(f, "stored makespan {stored} but tasks end at {actual}")
            }
        }
    }
}

/// Checks chain precedence, processor capacity and the stored makespan.
///
/// Capacity is checked by an event sweep over task starts and ends at each
/// stage; this deliberately shares no code with the schedule generators.
pub fn verify_schedule(inst: &Instance, sched: &Schedule) -> Result<Vec<ScheduleViolation>> {
    let (n, m) = (inst.n(), inst.m());
    if sched.start.len() != n || sched.start.iter().any(|r| r.len() != m) {
        return Err(Error::Dimension(format!(
            "schedule is not {n} jobs x {m} stages"
        )));
    }
    let mut out = Vec::new();

    for job in 0..n {
        for stage in 1..m {
            let ready = sched.start[job][stage - 1] + inst.p(job, stage - 1);
            let start = sched.start[job][stage];
            if start < ready {
                out.push(ScheduleViolation::Precedence {
                    job,
                    stage,
                    start,
                    ready,
                });
            }
        }
    }

    for stage in 0..m {
        // (time, delta): ends sort before starts at the same instant.
        let mut events: Vec<(Time, i64)> = Vec::with_capacity(2 * n);
        for job in 0..n {
            let s = sched.start[job][stage];
            let sz = i64::from(inst.size(job, stage));
            events.push((s, sz));
            events.push((s + inst.p(job, stage), -sz));
        }
        events.sort_unstable();
        let capacity = inst.procs(stage);
        let mut used = 0i64;
        let mut k = 0;
        while k < events.len() {
            let t = events[k].0;
            while k < events.len() && events[k].0 == t {
                used += events[k].1;
                k += 1;
            }
            if used > i64::from(capacity) {
                out.push(ScheduleViolation::Capacity {
                    stage,
                    time: t,
                    used: used as u64,
                    capacity,
                });
            }
        }
    }

    let actual = (0..n)
        .flat_map(|j| (0..m).map(move |i| (j, i)))
        .map(|(j, i)| sched.start[j][i] + inst.p(j, i))
        .max()
        .unwrap_or(0);
    if actual != sched.makespan {
        out.push(ScheduleViolation::Makespan {
            stored: sched.makespan,
            actual,
        });
    }
    Ok(out)
}

/// Maps a schedule of the stage-reversed instance back onto `inst`.
///
/// Time is read backwards from `horizon`, then every start is shifted so the
/// earliest one is zero.
pub fn mirror_schedule(inst: &Instance, sched_rev: &Schedule, horizon: Time) -> Result<Schedule> {
    let rev = inst.reversed();
    let violations = verify_schedule(&rev, sched_rev)?;
    if let Some(v) = violations.first() {
        return Err(Error::InfeasibleSchedule(v.to_string()));
    }
    if horizon < sched_rev.makespan {
        return Err(Error::InfeasibleSchedule(format!(
            "horizon {horizon} is below makespan {}",
            sched_rev.makespan
        )));
    }
    let m = inst.m();
    let mut start: Vec<Vec<Time>> = (0..inst.n())
        .map(|j| {
            (0..m)
                .map(|i| horizon - (sched_rev.start[j][m - 1 - i] + inst.p(j, i)))
                .collect()
        })
        .collect();
    let shift = start.iter().flatten().copied().min().unwrap_or(0);
    for s in start.iter_mut().flatten() {
        *s -= shift;
    }
    Ok(Schedule::from_starts(inst, start))
}
