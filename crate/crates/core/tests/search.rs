mod support;

use hfsmp::benchgen::{generate, GenSpec};
use hfsmp::bounds::lb_root;
use hfsmp::model::verify_schedule;
use hfsmp::rules::rule_pool;
use hfsmp::search::{solve, Direction, Directions, RuleChoice, SearchConfig};
use hfsmp::sgs::parallel_sgs;

#[test]
fn a_budget_of_one_reproduces_the_starting_rule() {
    let mut spec = GenSpec::new(20, 5, 1, 8);
    spec.count = 3;
    for inst in generate(&spec).unwrap() {
        for rule in rule_pool() {
            let cfg = SearchConfig {
                rules: RuleChoice::Single(rule),
                node_budget: Some(1),
                directions: Directions::Forward,
                ..Default::default()
            };
            let rep = solve(&inst, &cfg).unwrap();
            let single = parallel_sgs(&inst, &rule.rank(&inst));
            assert_eq!(rep.best_makespan, single.makespan(), "{rule}");
            assert_eq!(rep.best_schedule, single);
            assert_eq!(rep.leaves_evaluated, 1);
        }
    }
}

#[test]
fn results_are_feasible_and_bounded() {
    for kind in [1, 2] {
        let mut spec = GenSpec::new(10, 5, kind, 9);
        spec.count = 5;
        for inst in generate(&spec).unwrap() {
            let rep = solve(&inst, &SearchConfig::default()).unwrap();
            assert!(verify_schedule(&inst, &rep.best_schedule)
                .unwrap()
                .is_empty());
            assert_eq!(rep.best_schedule.makespan(), rep.best_makespan);
            assert_eq!(rep.lb, lb_root(&inst).lb);
            assert!(rep.best_makespan >= rep.lb);
        }
    }
}

#[test]
fn backward_only_search_returns_forward_schedules() {
    for inst in support::tiny_set(40, 21) {
        let cfg = SearchConfig {
            directions: Directions::Backward,
            ..Default::default()
        };
        let rep = solve(&inst, &cfg).unwrap();
        assert_eq!(rep.best_direction, Direction::Backward);
        assert!(verify_schedule(&inst, &rep.best_schedule)
            .unwrap()
            .is_empty());
        assert_eq!(rep.best_schedule.makespan(), rep.best_makespan);
    }
}
