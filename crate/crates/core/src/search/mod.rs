//! Climbing depth-bounded adjacent discrepancy search.
//!
//! A *pass* walks the discrepancy tree around a reference ordering and stops
//! at the first leaf that beats the reference. A *climb* repeats passes,
//! each time promoting the improving leaf to be the new reference, until a
//! pass finds nothing better. [`solve`] runs one climb per priority rule
//! with a geometrically growing leaf budget, optionally in both stage
//! directions, sharing one incumbent throughout.

mod config;
mod tree;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use config::{parse_ratio, Direction, Directions, RuleChoice, SearchConfig};
pub use tree::{
    apply_decisions, dads_leaves, leaf_count, realize_leaf, Choice, DadsLeaves, DecisionSequence,
    Strategy,
};

use crate::bounds::{lb_root, PrefixBounds};
use crate::error::Result;
use crate::model::{mirror_schedule, Instance, Schedule, Time};
use crate::rules::{PriorityList, RuleId};
use crate::sgs::parallel_sgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StopReason {
    LbReached,
    Time,
    BudgetsExhausted,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::LbReached => "LB_REACHED",
            StopReason::Time => "TIME",
            StopReason::BudgetsExhausted => "BUDGETS_EXHAUSTED",
        })
    }
}

/// How one climb ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClimbEnd {
    /// A full pass found nothing better than its reference.
    Stalled,
    BudgetExhausted,
    Deadline,
    LbReached,
}

/// Best solution seen so far, shared by every pass of one solve.
#[derive(Debug, Clone)]
pub struct Incumbent {
    makespan: Time,
    best: Option<(Direction, PriorityList, Schedule)>,
    history: Vec<(u64, Time)>,
    leaves: u64,
    pruned: u64,
}

impl Default for Incumbent {
    fn default() -> Self {
        Self::new()
    }
}

impl Incumbent {
    pub fn new() -> Self {
        Incumbent {
            makespan: Time::MAX,
            best: None,
            history: Vec::new(),
            leaves: 0,
            pruned: 0,
        }
    }

    /// `Time::MAX` until the first leaf is evaluated.
    pub fn makespan(&self) -> Time {
        self.makespan
    }

    pub fn leaves(&self) -> u64 {
        self.leaves
    }

    pub fn pruned(&self) -> u64 {
        self.pruned
    }

    /// `(leaves evaluated so far, new best)` at every improvement.
    pub fn history(&self) -> &[(u64, Time)] {
        &self.history
    }

    pub fn best(&self) -> Option<&(Direction, PriorityList, Schedule)> {
        self.best.as_ref()
    }

    fn offer(&mut self, dir: Direction, order: &PriorityList, sched: &Schedule) {
        self.leaves += 1;
        if sched.makespan() < self.makespan {
            self.makespan = sched.makespan();
            self.best = Some((dir, order.clone(), sched.clone()));
            self.history.push((self.leaves, self.makespan));
        }
    }
}

/// Everything a pass needs besides the reference and the incumbent.
#[derive(Debug, Clone)]
pub struct PassContext<'a> {
    pub inst: &'a Instance,
    pub direction: Direction,
    /// Stop as soon as the incumbent reaches this value.
    pub target: Time,
    /// Valid lower bound on any leaf, fed to the node bound.
    pub node_floor: Time,
    pub depth_bound: usize,
    pub strategy: Strategy,
    pub deadline: Instant,
}

impl<'a> PassContext<'a> {
    pub fn new(inst: &'a Instance, cfg: &SearchConfig, deadline: Instant) -> Self {
        let lb = lb_root(inst).lb;
        PassContext {
            inst,
            direction: Direction::Forward,
            target: lb,
            node_floor: lb,
            depth_bound: cfg.depth_bound_for(inst.n()),
            strategy: cfg.strategy,
            deadline,
        }
    }
}

#[derive(Debug, Clone)]
pub enum PassOutcome {
    /// A leaf beat the reference; it becomes the next reference.
    Improved(PriorityList, Schedule),
    Ended(ClimbEnd),
}

/// Explores the discrepancy tree of `reference` until a leaf beats it.
///
/// `known` is the reference's own schedule when already evaluated; otherwise
/// the reference leaf is evaluated first and charged to the budget. Before a
/// leaf is scheduled, the node bound of the prefix it shares with the
/// reference is compared with the incumbent; pruned leaves cost no budget.
pub fn dads_pass(
    ctx: &PassContext<'_>,
    reference: &PriorityList,
    known: Option<&Schedule>,
    budget: &mut u64,
    incumbent: &mut Incumbent,
) -> PassOutcome {
    let inst = ctx.inst;
    let evaluated;
    let ref_sched = match known {
        Some(s) => s,
        None => match evaluate(ctx, reference, budget, incumbent) {
            Ok(s) => {
                evaluated = s;
                &evaluated
            }
            Err(end) => return PassOutcome::Ended(end),
        },
    };
    if incumbent.makespan <= ctx.target {
        return PassOutcome::Ended(ClimbEnd::LbReached);
    }

    // A discrepancy on the last job is impossible: n jobs give n - 1 choices.
    let depth = inst.n().saturating_sub(1);
    let bound = ctx.depth_bound.min(depth);
    let mut bounds = PrefixBounds::new(inst, reference, ref_sched, ctx.node_floor);

    for seq in dads_leaves(depth, bound, ctx.strategy).skip(1) {
        if *budget == 0 {
            return PassOutcome::Ended(ClimbEnd::BudgetExhausted);
        }
        if Instant::now() >= ctx.deadline {
            return PassOutcome::Ended(ClimbEnd::Deadline);
        }
        let shared = seq
            .first_deviation()
            .expect("only the first leaf follows the reference");
        if bounds.lb(shared) >= incumbent.makespan {
            incumbent.pruned += 1;
            continue;
        }
        let (order, sched) =
            realize_leaf(inst, reference, &seq).expect("runs stay above the last job");
        *budget -= 1;
        incumbent.offer(ctx.direction, &order, &sched);
        if incumbent.makespan <= ctx.target {
            return PassOutcome::Ended(ClimbEnd::LbReached);
        }
        if sched.makespan() < ref_sched.makespan() {
            return PassOutcome::Improved(order, sched);
        }
    }
    PassOutcome::Ended(ClimbEnd::Stalled)
}

/// Schedules one ordering, charging it to the budget.
fn evaluate(
    ctx: &PassContext<'_>,
    order: &PriorityList,
    budget: &mut u64,
    incumbent: &mut Incumbent,
) -> Result<Schedule, ClimbEnd> {
    if *budget == 0 {
        return Err(ClimbEnd::BudgetExhausted);
    }
    if Instant::now() >= ctx.deadline {
        return Err(ClimbEnd::Deadline);
    }
    *budget -= 1;
    let sched = parallel_sgs(ctx.inst, order);
    incumbent.offer(ctx.direction, order, &sched);
    Ok(sched)
}

/// Result of one climb from a starting ordering.
#[derive(Debug, Clone)]
pub struct Climb {
    /// Makespans of the successive references, strictly decreasing; empty
    /// when not even the start could be evaluated.
    pub references: Vec<Time>,
    pub end: ClimbEnd,
}

impl Climb {
    pub fn initial_makespan(&self) -> Option<Time> {
        self.references.first().copied()
    }
}

/// Repeats passes, moving the reference to every improving leaf.
pub fn cdads(
    ctx: &PassContext<'_>,
    start: PriorityList,
    budget: &mut u64,
    incumbent: &mut Incumbent,
) -> Climb {
    let mut known = match evaluate(ctx, &start, budget, incumbent) {
        Ok(s) => s,
        Err(end) => {
            return Climb {
                references: Vec::new(),
                end,
            }
        }
    };
    let mut reference = start;
    let mut references = vec![known.makespan()];
    loop {
        match dads_pass(ctx, &reference, Some(&known), budget, incumbent) {
            PassOutcome::Improved(order, sched) => {
                references.push(sched.makespan());
                reference = order;
                known = sched;
            }
            PassOutcome::Ended(end) => return Climb { references, end },
        }
    }
}

/// One climb of [`solve`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestartTrace {
    pub restart: usize,
    pub rule: RuleId,
    pub direction: Direction,
    pub budget: u64,
    pub leaves: u64,
    pub initial_makespan: Option<Time>,
    pub climbs: usize,
    /// Incumbent when the climb ended.
    pub best: Time,
    pub end: ClimbEnd,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    pub best_makespan: Time,
    /// In the instance's own stage order, whichever direction found it.
    pub best_schedule: Schedule,
    pub best_direction: Direction,
    /// Job ordering that produced the best schedule (for the reversed
    /// instance when found backward).
    pub best_order: Vec<usize>,
    pub lb: Time,
    pub leaves_evaluated: u64,
    pub nodes_pruned: u64,
    pub restarts_used: usize,
    pub trace: Vec<RestartTrace>,
    pub incumbent_history: Vec<(u64, Time)>,
    pub wall_seconds: f64,
    pub stop_reason: StopReason,
}

/// Full search with the restart policy.
pub fn solve(inst: &Instance, cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate(inst.n())?;
    let started = Instant::now();
    let deadline = started
        .checked_add(cfg.time_limit)
        .unwrap_or(started + Duration::from_secs(86_400 * 365));

    let reversed = inst.reversed();
    let lb_fwd = lb_root(inst).lb;
    let lb_rev = lb_root(&reversed).lb;
    let view = |dir: Direction| {
        let target_inst = match dir {
            Direction::Forward => inst,
            Direction::Backward => &reversed,
        };
        PassContext {
            inst: target_inst,
            direction: dir,
            target: lb_fwd,
            // Both bounds hold for the common optimum.
            node_floor: lb_fwd.max(lb_rev),
            depth_bound: cfg.depth_bound_for(inst.n()),
            strategy: cfg.strategy,
            deadline,
        }
    };

    let mut incumbent = Incumbent::new();
    let mut trace = Vec::new();
    let mut restarts_used = 0;
    let mut stop = StopReason::BudgetsExhausted;
    let budgets = cfg.restart_budgets(inst.n());

    'rules: for (k, (rule, &total)) in cfg.rule_sequence().into_iter().zip(&budgets).enumerate() {
        if k > 0 {
            restarts_used += 1;
        }
        let parts = match cfg.directions {
            Directions::Forward => vec![(Direction::Forward, total)],
            Directions::Backward => vec![(Direction::Backward, total)],
            Directions::Both => vec![
                (Direction::Forward, total.div_ceil(2)),
                (Direction::Backward, total / 2),
            ],
        };
        for (dir, part) in parts {
            if part == 0 {
                continue;
            }
            let ctx = view(dir);
            let mut budget = part;
            let before = incumbent.leaves();
            let climb = cdads(&ctx, rule.rank(ctx.inst), &mut budget, &mut incumbent);
            trace.push(RestartTrace {
                restart: k,
                rule,
                direction: dir,
                budget: part,
                leaves: incumbent.leaves() - before,
                initial_makespan: climb.initial_makespan(),
                climbs: climb.references.len().saturating_sub(1),
                best: incumbent.makespan(),
                end: climb.end,
            });
            match climb.end {
                ClimbEnd::LbReached => {
                    stop = StopReason::LbReached;
                    break 'rules;
                }
                ClimbEnd::Deadline => {
                    stop = StopReason::Time;
                    break 'rules;
                }
                ClimbEnd::Stalled | ClimbEnd::BudgetExhausted => {}
            }
        }
    }

    if incumbent.best().is_none() {
        // The deadline passed before any leaf; fall back to the first rule.
        let order = cfg.rule_sequence()[0].rank(inst);
        incumbent.offer(Direction::Forward, &order, &parallel_sgs(inst, &order));
    }
    let (dir, order, sched) = incumbent
        .best()
        .cloned()
        .expect("an ordering was evaluated");
    let best_schedule = match dir {
        Direction::Forward => sched,
        Direction::Backward => mirror_schedule(inst, &sched, sched.makespan())?,
    };
    Ok(SearchReport {
        best_makespan: incumbent.makespan(),
        best_schedule,
        best_direction: dir,
        best_order: order.into_inner(),
        lb: lb_fwd,
        leaves_evaluated: incumbent.leaves(),
        nodes_pruned: incumbent.pruned(),
        restarts_used,
        trace,
        incumbent_history: incumbent.history().to_vec(),
        wall_seconds: started.elapsed().as_secs_f64(),
        stop_reason: stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchgen::{generate, GenSpec};
    use crate::model::tests::t1;
    use crate::model::verify_schedule;

    fn far() -> Instant {
        Instant::now() + Duration::from_secs(3600)
    }

    fn forward_only() -> SearchConfig {
        SearchConfig {
            directions: Directions::Forward,
            time_limit: Duration::from_secs(3600),
            ..Default::default()
        }
    }

    #[test]
    fn t1_climbs_from_nine_to_seven() {
        let inst = t1();
        let ctx = PassContext::new(&inst, &forward_only(), far());
        let mut budget = 10;
        let mut inc = Incumbent::new();
        let climb = cdads(
            &ctx,
            PriorityList::new(vec![0, 1]).unwrap(),
            &mut budget,
            &mut inc,
        );
        assert_eq!(climb.references, vec![9, 7]);
        assert_eq!(climb.end, ClimbEnd::Stalled);
        // start, the improving leaf, then the one leaf around the new reference
        assert_eq!(inc.leaves(), 3);
        assert_eq!(budget, 7);
        assert_eq!(inc.makespan(), 7);
        assert_eq!(inc.history(), &[(1, 9), (2, 7)]);
    }

    #[test]
    fn budget_of_one_only_scores_the_start() {
        let inst = t1();
        let ctx = PassContext::new(&inst, &forward_only(), far());
        let mut budget = 1;
        let mut inc = Incumbent::new();
        let climb = cdads(
            &ctx,
            PriorityList::new(vec![0, 1]).unwrap(),
            &mut budget,
            &mut inc,
        );
        assert_eq!(climb.references, vec![9]);
        assert_eq!(climb.end, ClimbEnd::BudgetExhausted);
        assert_eq!(inc.makespan(), 9);
    }

    #[test]
    fn pruned_leaves_cost_nothing() {
        let inst = t1();
        let mut ctx = PassContext::new(&inst, &forward_only(), far());
        // A floor equal to the optimum makes every node bound meet the incumbent.
        ctx.node_floor = 7;
        let reference = PriorityList::new(vec![1, 0]).unwrap();
        let mut inc = Incumbent::new();
        let mut budget = 5;
        let out = dads_pass(&ctx, &reference, None, &mut budget, &mut inc);
        assert!(matches!(out, PassOutcome::Ended(ClimbEnd::Stalled)));
        assert_eq!(inc.makespan(), 7);
        // only the reference itself was charged
        assert_eq!(budget, 4);
        assert_eq!(inc.pruned(), 1);
    }

    #[test]
    fn solve_t1() {
        let inst = t1();
        let rep = solve(&inst, &SearchConfig::default()).unwrap();
        assert_eq!(rep.best_makespan, 7);
        assert_eq!(rep.lb, 6);
        assert_eq!(rep.best_schedule.makespan(), 7);
        assert!(verify_schedule(&inst, &rep.best_schedule)
            .unwrap()
            .is_empty());
        assert_eq!(rep.stop_reason, StopReason::BudgetsExhausted);
        assert_eq!(rep.restarts_used, 3);
    }

    #[test]
    fn reaching_the_bound_stops_before_any_restart() {
        let inst = Instance::new(vec![2], vec![vec![3], vec![3]], vec![vec![1], vec![1]]).unwrap();
        let rep = solve(&inst, &SearchConfig::default()).unwrap();
        assert_eq!(rep.best_makespan, 3);
        assert_eq!(rep.stop_reason, StopReason::LbReached);
        assert_eq!(rep.restarts_used, 0);
        assert_eq!(rep.trace.len(), 1);
    }

    #[test]
    fn zero_time_limit_still_returns_a_schedule() {
        let inst = t1();
        let cfg = SearchConfig {
            time_limit: Duration::ZERO,
            ..Default::default()
        };
        let rep = solve(&inst, &cfg).unwrap();
        assert_eq!(rep.stop_reason, StopReason::Time);
        assert!(verify_schedule(&inst, &rep.best_schedule)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn backward_results_are_mirrored_into_forward_time() {
        for inst in generate(&GenSpec {
            count: 3,
            free: true,
            ..GenSpec::new(8, 3, 1, 5)
        })
        .unwrap()
        {
            let cfg = SearchConfig {
                directions: Directions::Backward,
                ..forward_only()
            };
            let rep = solve(&inst, &cfg).unwrap();
            assert_eq!(rep.best_direction, Direction::Backward);
            assert!(verify_schedule(&inst, &rep.best_schedule)
                .unwrap()
                .is_empty());
            assert_eq!(rep.best_schedule.makespan(), rep.best_makespan);
        }
    }

    #[test]
    fn search_is_deterministic_and_monotone() {
        for inst in generate(&GenSpec::new(20, 5, 2, 9))
            .unwrap()
            .into_iter()
            .take(3)
        {
            let cfg = SearchConfig {
                time_limit: Duration::from_secs(3600),
                ..Default::default()
            };
            let a = solve(&inst, &cfg).unwrap();
            let b = solve(&inst, &cfg).unwrap();
            assert_eq!(a.best_makespan, b.best_makespan);
            assert_eq!(a.best_order, b.best_order);
            assert_eq!(a.leaves_evaluated, b.leaves_evaluated);
            assert!(a
                .incumbent_history
                .windows(2)
                .all(|w| w[1].1 < w[0].1 && w[1].0 > w[0].0));
            assert!(a.trace.windows(2).all(|w| w[1].best <= w[0].best));
            assert!(a.best_makespan >= a.lb);
            let spent: u64 = a.trace.iter().map(|t| t.leaves).sum();
            assert_eq!(spent, a.leaves_evaluated);
            assert!(a.trace.iter().all(|t| t.leaves <= t.budget));
        }
    }

    #[test]
    fn never_worse_than_the_starting_rules() {
        for inst in generate(&GenSpec::new(10, 5, 1, 4)).unwrap() {
            let rep = solve(&inst, &forward_only()).unwrap();
            for rule in crate::rules::rule_pool() {
                assert!(rep.best_makespan <= parallel_sgs(&inst, &rule.rank(&inst)).makespan());
            }
        }
    }
}
