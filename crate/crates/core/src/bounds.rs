//! Makespan lower bounds.
//!
//! The root bound is `max(LB^j, LB^s)`: the longest job chain, and for every
//! stage the cheapest possible head, the stage's own processing load, and the
//! cheapest possible tail. The node bound tightens the same ideas with the
//! tasks a partial schedule has already fixed.

use num_rational::Ratio;
use serde::Serialize;

use crate::model::{Instance, Schedule, Time};
use crate::rules::PriorityList;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub lb_job: Time,
    pub lb_stage: Time,
    /// One bound per stage; `lb_stage` is their maximum.
    pub per_stage: Vec<Time>,
    pub lb: Time,
}

/// Longest total processing time of a single job.
pub fn lb_job(inst: &Instance) -> Time {
    (0..inst.n()).map(|j| inst.total_time(j)).max().unwrap_or(0)
}

/// `ceil(sum_j p_ij * size_ij / m_i)`: the stage's energy spread over all its
/// processors.
pub fn stage_load_m1(inst: &Instance, stage: usize) -> Time {
    let energy: Time = (0..inst.n()).map(|j| inst.energy(j, stage)).sum();
    energy.div_ceil(Time::from(inst.procs(stage)))
}

/// Jobs that cannot overlap each other at one stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageHalves {
    /// Jobs needing more than half of the stage's processors.
    pub wide: Vec<usize>,
    /// Jobs needing exactly half of them.
    pub half: Vec<usize>,
    /// `sum_{wide} p + (1/2) sum_{half} p`.
    pub value: Ratio<Time>,
}

pub fn stage_halves_m2(inst: &Instance, stage: usize) -> StageHalves {
    let cap = inst.procs(stage);
    let (mut wide, mut half) = (Vec::new(), Vec::new());
    let (mut wide_sum, mut half_sum): (Time, Time) = (0, 0);
    for j in 0..inst.n() {
        let twice = 2 * inst.size(j, stage);
        if twice > cap {
            wide.push(j);
            wide_sum += inst.p(j, stage);
        } else if twice == cap {
            half.push(j);
            half_sum += inst.p(j, stage);
        }
    }
    StageHalves {
        wide,
        half,
        value: Ratio::new(2 * wide_sum + half_sum, 2),
    }
}

/// `min_j sum_{l < stage} p_lj`, zero for the first stage.
pub fn min_head(inst: &Instance, stage: usize) -> Time {
    (0..inst.n())
        .map(|j| inst.job_times(j)[..stage].iter().sum::<Time>())
        .min()
        .unwrap_or(0)
}

/// `min_j sum_{l > stage} p_lj`, zero for the last stage.
pub fn min_tail(inst: &Instance, stage: usize) -> Time {
    (0..inst.n())
        .map(|j| inst.job_times(j)[stage + 1..].iter().sum::<Time>())
        .min()
        .unwrap_or(0)
}

/// Stage bound: head + `max(M1, M2, max_j p_ij)` + tail, rounded up once at
/// the end since `M2` may be a half-integer.
pub fn lb_stage(inst: &Instance, stage: usize) -> Time {
    let longest = (0..inst.n()).map(|j| inst.p(j, stage)).max().unwrap_or(0);
    let core = Ratio::from_integer(stage_load_m1(inst, stage).max(longest))
        .max(stage_halves_m2(inst, stage).value);
    let total = core + Ratio::from_integer(min_head(inst, stage) + min_tail(inst, stage));
    total.ceil().to_integer()
}

pub fn lb_root(inst: &Instance) -> BoundReport {
    let per_stage: Vec<Time> = (0..inst.m()).map(|i| lb_stage(inst, i)).collect();
    let lb_stage = per_stage.iter().copied().max().unwrap_or(0);
    let lb_job = lb_job(inst);
    BoundReport {
        lb_job,
        lb_stage,
        per_stage,
        lb: lb_job.max(lb_stage),
    }
}

/// Tasks fixed by a partially explored branch of the search tree.
///
/// A branch is identified by a prefix of the job priority list. Under the
/// parallel scheme, every list sharing that prefix reproduces the reference
/// run up to `cut`: the first instant a job outside the prefix starts. The
/// state keeps the tasks started before `cut`, plus the prefix jobs' tasks
/// started exactly at `cut`; every other task starts at `cut` or later.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialState {
    /// `None` when every task is fixed.
    cut: Option<Time>,
    /// Number of leading stages fixed, per job.
    fixed: Vec<usize>,
    start: Vec<Vec<Time>>,
    /// Bound carried over from shallower states of the same branch.
    floor: Time,
}

impl PartialState {
    /// Nothing fixed yet.
    pub fn empty(inst: &Instance) -> Self {
        PartialState {
            cut: Some(0),
            fixed: vec![0; inst.n()],
            start: vec![vec![0; inst.m()]; inst.n()],
            floor: 0,
        }
    }

    /// Every task fixed as in `sched`.
    pub fn complete(inst: &Instance, sched: &Schedule) -> Self {
        PartialState {
            cut: None,
            fixed: vec![inst.m(); inst.n()],
            start: sched.starts().to_vec(),
            floor: 0,
        }
    }

    /// State shared by every list whose first `depth` jobs match `reference`,
    /// given `sched`, the parallel-scheme schedule of `reference` itself.
    pub fn for_prefix(
        inst: &Instance,
        reference: &PriorityList,
        sched: &Schedule,
        depth: usize,
    ) -> Self {
        let (cut, fixed) = prefix_cut(inst, &reference.ranks(), sched, depth);
        PartialState {
            cut,
            fixed,
            start: sched.starts().to_vec(),
            floor: 0,
        }
    }

    pub fn cut(&self) -> Option<Time> {
        self.cut
    }

    pub fn fixed_stages(&self, job: usize) -> usize {
        self.fixed[job]
    }

    pub fn is_complete(&self) -> bool {
        self.cut.is_none()
    }
}

/// Cut time and fixed stage counts for the first `depth` jobs of the list
/// with ranks `rank`.
fn prefix_cut(
    inst: &Instance,
    rank: &[usize],
    sched: &Schedule,
    depth: usize,
) -> (Option<Time>, Vec<usize>) {
    let m = inst.m();
    let cut = (0..inst.n())
        .filter(|&j| rank[j] >= depth)
        .map(|j| sched.start(j, 0))
        .min();
    let fixed = (0..inst.n())
        .map(|j| match cut {
            None => m,
            Some(c) => (0..m)
                .take_while(|&i| {
                    let s = sched.start(j, i);
                    s < c || (s == c && rank[j] < depth)
                })
                .count(),
        })
        .collect();
    (cut, fixed)
}

/// States for every prefix depth `0..=n` of `reference`, each carrying the
/// bounds of the shallower ones so the sequence of node bounds never drops.
pub fn prefix_states(
    inst: &Instance,
    reference: &PriorityList,
    sched: &Schedule,
) -> Vec<PartialState> {
    let mut floor = 0;
    (0..=inst.n())
        .map(|depth| {
            let mut state = PartialState::for_prefix(inst, reference, sched, depth);
            state.floor = floor;
            floor = floor.max(node_terms(inst, &state));
            state
        })
        .collect()
}

/// Lower bound on the makespan of any completion of `state`.
pub fn lb_node(inst: &Instance, state: &PartialState, global_lb: Time) -> Time {
    global_lb.max(state.floor).max(node_terms(inst, state))
}

/// The node bounds of [`prefix_states`], computed lazily and only as deep
/// as asked: `lb(k)` equals `lb_node(&prefix_states(..)[k], global_lb)`.
#[derive(Debug, Clone)]
pub struct PrefixBounds<'a> {
    inst: &'a Instance,
    rank: Vec<usize>,
    sched: &'a Schedule,
    global_lb: Time,
    /// Chained bounds of depths `0..chain.len()`.
    chain: Vec<Time>,
}

impl<'a> PrefixBounds<'a> {
    pub fn new(
        inst: &'a Instance,
        reference: &PriorityList,
        sched: &'a Schedule,
        global_lb: Time,
    ) -> Self {
        PrefixBounds {
            inst,
            rank: reference.ranks(),
            sched,
            global_lb,
            chain: Vec::new(),
        }
    }

    pub fn lb(&mut self, depth: usize) -> Time {
        while self.chain.len() <= depth {
            let d = self.chain.len();
            let (cut, fixed) = prefix_cut(self.inst, &self.rank, self.sched, d);
            let terms = terms(self.inst, cut, &fixed, self.sched.starts());
            let prev = self.chain.last().copied().unwrap_or(self.global_lb);
            self.chain.push(prev.max(terms));
        }
        self.chain[depth]
    }
}

fn node_terms(inst: &Instance, state: &PartialState) -> Time {
    terms(inst, state.cut, &state.fixed, &state.start)
}

fn terms(inst: &Instance, cut: Option<Time>, fixed: &[usize], start: &[Vec<Time>]) -> Time {
    let (n, m) = (inst.n(), inst.m());
    let end = |j: usize, i: usize| start[j][i] + inst.p(j, i);

    let mut bound = (0..n)
        .flat_map(|j| (0..fixed[j]).map(move |i| (j, i)))
        .map(|(j, i)| end(j, i))
        .max()
        .unwrap_or(0);
    let Some(cut) = cut else { return bound };

    // Earliest start of each job's first open task.
    let open: Vec<Time> = (0..n)
        .map(|j| match fixed[j] {
            0 => cut,
            f => end(j, f - 1).max(cut),
        })
        .collect();
    for j in 0..n {
        let f = fixed[j];
        if f < m {
            bound = bound.max(open[j] + inst.job_times(j)[f..].iter().sum::<Time>());
        }
    }

    for i in 0..m {
        let mut release = Time::MAX;
        let mut tail = Time::MAX;
        let mut longest = 0;
        let mut energy: Time = 0;
        for j in (0..n).filter(|&j| fixed[j] <= i) {
            let times = inst.job_times(j);
            release = release.min(open[j] + times[fixed[j]..i].iter().sum::<Time>());
            tail = tail.min(times[i + 1..].iter().sum());
            longest = longest.max(times[i]);
            energy += inst.energy(j, i);
        }
        if release == Time::MAX {
            continue;
        }
        // Fixed tasks still occupying the stage after `release`; the last
        // task to finish may be one of them, so their tails count too.
        for j in (0..n).filter(|&j| fixed[j] > i) {
            let (s, e) = (start[j][i], end(j, i));
            if e > release {
                energy += (e - s.max(release)) * Time::from(inst.size(j, i));
                tail = tail.min(inst.job_times(j)[i + 1..].iter().sum());
            }
        }
        let load = energy.div_ceil(Time::from(inst.procs(i)));
        bound = bound.max(release + load.max(longest) + tail);
    }
    bound
}
