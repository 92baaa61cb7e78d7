//! Test-only oracles that share no code with the library's schedulers.
#![allow(dead_code)]

use hfsmp::{Instance, Schedule, Time};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random instance with n <= 4, m <= 3, m_i <= 3, p <= 9.
pub fn tiny_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=3);
    let procs: Vec<u32> = (0..m).map(|_| rng.gen_range(1..=3)).collect();
    let mut p = Vec::new();
    let mut size = Vec::new();
    for _ in 0..n {
        p.push((0..m).map(|_| rng.gen_range(1..=9)).collect());
        size.push(procs.iter().map(|&c| rng.gen_range(1..=c)).collect());
    }
    Instance::new(procs, p, size).unwrap()
}

pub fn tiny_set(count: u64, salt: u64) -> Vec<Instance> {
    (0..count)
        .map(|k| tiny_instance(salt.wrapping_mul(1_000_003) + k))
        .collect()
}

struct Chrono<'a> {
    inst: &'a Instance,
    /// Next unstarted stage of every job.
    next: Vec<usize>,
    /// Completion of every job's last started task.
    done_at: Vec<Time>,
    /// (stage, end, size) of tasks started so far.
    running: Vec<(usize, Time, u32)>,
    best: Time,
}

impl Chrono<'_> {
    fn usage(&self, stage: usize, t: Time) -> u32 {
        self.running
            .iter()
            .filter(|&&(s, end, _)| s == stage && end > t)
            .map(|r| r.2)
            .sum()
    }

    fn bound(&self, t: Time) -> Time {
        let (n, m) = (self.inst.n(), self.inst.m());
        let mut lb = self.running.iter().map(|r| r.1).max().unwrap_or(0);
        for j in 0..n {
            let rest: Time = (self.next[j]..m).map(|i| self.inst.p(j, i)).sum();
            if rest > 0 {
                lb = lb.max(t.max(self.done_at[j]) + rest);
            }
        }
        lb
    }

    /// At time `t`, start any capacity-feasible subset of the ready tasks,
    /// then jump to the next completion.
    fn step(&mut self, t: Time) {
        let (n, m) = (self.inst.n(), self.inst.m());
        if (0..n).all(|j| self.next[j] == m) {
            let makespan = self.running.iter().map(|r| r.1).max().unwrap_or(0);
            self.best = self.best.min(makespan);
            return;
        }
        if self.bound(t) >= self.best {
            return;
        }
        let ready: Vec<usize> = (0..n)
            .filter(|&j| self.next[j] < m && self.done_at[j] <= t)
            .collect();
        // Larger subsets first so good schedules appear early.
        let mut subsets: Vec<u32> = (0..1u32 << ready.len()).collect();
        subsets.sort_by_key(|s| std::cmp::Reverse(s.count_ones()));
        for mask in subsets {
            let chosen: Vec<usize> = (0..ready.len())
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| ready[b])
                .collect();
            let fits = (0..m).all(|i| {
                let add: u32 = chosen
                    .iter()
                    .filter(|&&j| self.next[j] == i)
                    .map(|&j| self.inst.size(j, i))
                    .sum();
                self.usage(i, t) + add <= self.inst.procs(i)
            });
            if !fits {
                continue;
            }
            let saved = (self.next.clone(), self.done_at.clone(), self.running.len());
            for &j in &chosen {
                let i = self.next[j];
                let end = t + self.inst.p(j, i);
                self.running.push((i, end, self.inst.size(j, i)));
                self.next[j] += 1;
                self.done_at[j] = end;
            }
            if let Some(next_t) = self.running.iter().map(|r| r.1).filter(|&e| e > t).min() {
                self.step(next_t);
            }
            self.next = saved.0;
            self.done_at = saved.1;
            self.running.truncate(saved.2);
        }
    }
}

/// Exact optimum by chronological branching: every schedule whose starts
/// are 0 or completion times is enumerated, and some optimum is of that
/// form (shift each task left until it hits one).
pub fn chrono_optimum(inst: &Instance) -> Time {
    let serial: Time = (0..inst.n())
        .map(|j| (0..inst.m()).map(|i| inst.p(j, i)).sum::<Time>())
        .sum();
    let mut c = Chrono {
        inst,
        next: vec![0; inst.n()],
        done_at: vec![0; inst.n()],
        running: Vec::new(),
        best: serial + 1,
    };
    c.step(0);
    c.best
}

fn usage_at(inst: &Instance, sched: &Schedule, stage: usize, t: Time, skip: Option<usize>) -> u32 {
    (0..inst.n())
        .filter(|&j| Some(j) != skip)
        .filter(|&j| sched.start(j, stage) <= t && t < sched.start(j, stage) + inst.p(j, stage))
        .map(|j| inst.size(j, stage))
        .sum()
}

fn release(inst: &Instance, sched: &Schedule, j: usize, i: usize) -> Time {
    if i == 0 {
        0
    } else {
        sched.start(j, i - 1) + inst.p(j, i - 1)
    }
}

/// No task waits through an instant where its stage had room for it.
pub fn is_non_delay(inst: &Instance, sched: &Schedule) -> bool {
    (0..inst.n()).all(|j| {
        (0..inst.m()).all(|i| {
            (release(inst, sched, j, i)..sched.start(j, i))
                .all(|t| usage_at(inst, sched, i, t, None) + inst.size(j, i) > inst.procs(i))
        })
    })
}

/// No task alone can move to an earlier start.
pub fn is_active(inst: &Instance, sched: &Schedule) -> bool {
    (0..inst.n()).all(|j| {
        (0..inst.m()).all(|i| {
            let p = inst.p(j, i);
            (release(inst, sched, j, i)..sched.start(j, i)).all(|t| {
                (t..t + p)
                    .any(|u| usage_at(inst, sched, i, u, Some(j)) + inst.size(j, i) > inst.procs(i))
            })
        })
    })
}

/// Every permutation of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for perm in permutations(n - 1) {
        for pos in 0..=perm.len() {
            let mut p = perm.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}
