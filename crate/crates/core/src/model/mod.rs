//! Planning formalism: fluents, states, action schemas and their groundings,
//! problems `M = <D, I, G>` and plans.

mod action;
mod fluent;
mod plan;
mod problem;
mod state;

pub use action::{
    ActionId, ActionSpec, FluentPattern, GroundAction, Guard, GuardSpec, Object, ObjectId, ObjectKind, Param, Term,
    Timer, TimerSpec,
};
pub use fluent::{Fluent, FluentId, FluentSet, MAX_FLUENTS};
pub use plan::{overtime_cost, plan_cost, raw_overtime, validate, validate_from, Plan, Violation, ViolationKind};
pub use problem::{Domain, DomainBuilder, PlanningProblem, Subgoal};
pub use state::State;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("action `{action}` is not applicable")]
    Inapplicable { action: String },
    #[error("action schema `{0}` has zero cost")]
    ZeroCost(String),
    #[error("variable `{var}` of `{action}` is not a declared parameter")]
    UndeclaredVariable { action: String, var: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("fluent `{fluent}` does not match declared arity {expected}")]
    ArityMismatch { fluent: String, expected: usize },
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown fluent `{0}`")]
    UnknownFluent(String),
    #[error("object `{0}` declared twice")]
    DuplicateObject(String),
    #[error("ground action `{0}` produced twice")]
    DuplicateAction(String),
    #[error("no cook duration for `{0}`")]
    MissingDuration(String),
    #[error("grounding exceeds {limit} actions")]
    GroundingExplosion { limit: usize },
    #[error("vocabulary has {size} fluents, limit is {limit}")]
    VocabularyTooLarge { size: usize, limit: usize },
    #[error("problem has no goals")]
    NoGoals,
    #[error("goal deadlines must be non-decreasing")]
    UnsortedDeadlines,
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::sync::Arc;

    use super::*;

    /// A two-room light-switch toy, independent of the kitchen.
    fn toy() -> PlanningProblem {
        let objects = vec![
            Object { name: "bot".into(), kind: ObjectKind::Agent },
            Object { name: "a".into(), kind: ObjectKind::Station },
            Object { name: "b".into(), kind: ObjectKind::Station },
        ];
        let predicates = BTreeMap::from([("at".to_string(), 2), ("lit".to_string(), 1)]);
        let walk = ActionSpec {
            name: "walk".into(),
            params: vec![Param::new("?from", ["a", "b"]), Param::new("?to", ["a", "b"])],
            cost: 2,
            pre: vec![FluentPattern::new("at", vec![Term::constant("bot"), Term::var("?from")])],
            add: vec![FluentPattern::new("at", vec![Term::constant("bot"), Term::var("?to")])],
            del: vec![FluentPattern::new("at", vec![Term::constant("bot"), Term::var("?from")])],
            guard: None,
            timer: None,
        };
        let switch = ActionSpec {
            name: "switch".into(),
            params: vec![Param::new("?room", ["a", "b"])],
            cost: 1,
            pre: vec![FluentPattern::new("at", vec![Term::constant("bot"), Term::var("?room")])],
            add: vec![FluentPattern::new("lit", vec![Term::var("?room")])],
            del: vec![],
            guard: None,
            timer: None,
        };
        let domain = DomainBuilder {
            objects,
            predicates,
            specs: vec![walk, switch],
            durations: BTreeMap::new(),
            extra_fluents: vec![],
            max_ground_actions: 100,
        }
        .build()
        .unwrap();
        let init = domain.fluent_set([&Fluent::new("at", ["bot", "a"])]).unwrap();
        let goal = domain.fluent_id(&Fluent::new("lit", ["b"])).unwrap();
        let goals = vec![Subgoal { meal_id: "b".into(), satisfying_fluent: goal, deadline: 3, ingredients: vec![] }];
        PlanningProblem::new(Arc::new(domain), State::new(init, 0), goals, 80).unwrap()
    }

    fn id(p: &PlanningProblem, label: &str) -> ActionId {
        p.domain.action_by_label(label).unwrap().id
    }

    #[test]
    fn degenerate_groundings_are_dropped_and_order_is_sorted() {
        let p = toy();
        let labels: Vec<_> = p.domain.actions().iter().map(|a| a.label.as_str()).collect();
        assert_eq!(labels, vec!["switch a", "switch b", "walk a b", "walk b a"]);
    }

    #[test]
    fn apply_rejects_inapplicable_action() {
        let p = toy();
        let err = p.init.apply(p.action(id(&p, "switch b"))).unwrap_err();
        assert!(matches!(err, ModelError::Inapplicable { .. }));
    }

    #[test]
    fn validate_reports_first_failure_and_missing_goal() {
        let p = toy();
        let good = Plan::new(&p, 0, vec![id(&p, "walk a b"), id(&p, "switch b")]);
        assert!(validate(&p, &good).is_ok());
        assert_eq!(plan_cost(&good), 3);
        assert_eq!(good.deliveries.get("b"), Some(&3));
        assert_eq!(overtime_cost(&good, &p.goals, p.time_limit), 0);

        let swapped = Plan::new(&p, 0, vec![id(&p, "switch b"), id(&p, "walk a b")]);
        let v = validate(&p, &swapped).unwrap_err();
        assert_eq!(v.step, Some(0));
        assert_eq!(v.kind, ViolationKind::MissingPrecondition(Fluent::new("at", ["bot", "b"])));

        let short = Plan::new(&p, 0, vec![id(&p, "walk a b")]);
        let v = validate(&p, &short).unwrap_err();
        assert_eq!(v.kind, ViolationKind::UnsatisfiedSubgoal("b".into()));
        // undelivered meals count at the time limit
        assert_eq!(overtime_cost(&short, &p.goals, 80), 77);
    }

    #[test]
    fn overtime_is_clamped_per_meal() {
        let p = toy();
        let goals = vec![
            Subgoal { meal_id: "m1".into(), satisfying_fluent: FluentId(0), deadline: 10, ingredients: vec![] },
            Subgoal { meal_id: "m2".into(), satisfying_fluent: FluentId(1), deadline: 25, ingredients: vec![] },
        ];
        let mut plan = Plan::empty(0);
        plan.deliveries.insert("m1".into(), 8);
        plan.deliveries.insert("m2".into(), 25);
        assert_eq!(overtime_cost(&plan, &goals, 80), 0);
        assert_eq!(raw_overtime(&plan, &goals, 80), -2);
        plan.deliveries.insert("m1".into(), 12);
        plan.deliveries.insert("m2".into(), 30);
        assert_eq!(overtime_cost(&plan, &goals, 80), 7);
        let _ = p;
    }

    #[test]
    fn empty_plan_costs_nothing() {
        assert_eq!(plan_cost(&Plan::empty(5)), 0);
    }
}
