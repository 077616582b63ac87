use std::collections::BTreeMap;
use std::fmt;

use super::action::ActionId;
use super::fluent::Fluent;
use super::problem::{PlanningProblem, Subgoal};
use super::state::State;

/// An action sequence with per-step cumulative cost and the absolute
/// elapsed cost at which each meal gets delivered.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Plan {
    /// Elapsed cost of the state the plan starts from.
    pub origin: u32,
    pub steps: Vec<ActionId>,
    pub cum_cost: Vec<u32>,
    pub deliveries: BTreeMap<String, u32>,
}

impl Plan {
    /// Builds the cost and delivery bookkeeping for `steps` executed from `origin`.
    /// Does not check applicability; see [`validate`].
    pub fn new(problem: &PlanningProblem, origin: u32, steps: Vec<ActionId>) -> Self {
        let mut cum_cost = Vec::with_capacity(steps.len());
        let mut deliveries = BTreeMap::new();
        let mut total = 0u32;
        for id in &steps {
            let action = problem.action(*id);
            total += action.cost;
            cum_cost.push(total);
            for goal in &problem.goals {
                if action.adds(goal.satisfying_fluent) {
                    deliveries.entry(goal.meal_id.clone()).or_insert(origin + total);
                }
            }
        }
        Plan { origin, steps, cum_cost, deliveries }
    }

    pub fn empty(origin: u32) -> Self {
        Plan { origin, steps: Vec::new(), cum_cost: Vec::new(), deliveries: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn labels<'a>(&'a self, problem: &'a PlanningProblem) -> impl Iterator<Item = &'a str> + 'a {
        self.steps.iter().map(move |id| problem.action(*id).label.as_str())
    }

    /// States visited when executing the plan from `root`, including `root`.
    /// Stops early at the first inapplicable step.
    pub fn trajectory(&self, problem: &PlanningProblem, root: &State) -> Vec<State> {
        let mut states = vec![root.clone()];
        for id in &self.steps {
            match states.last().unwrap().apply(problem.action(*id)) {
                Ok(next) => states.push(next),
                Err(_) => break,
            }
        }
        states
    }
}

/// `C(π, M)`: the summed action cost.
pub fn plan_cost(plan: &Plan) -> u32 {
    plan.cum_cost.last().copied().unwrap_or(0)
}

fn delivery_time(plan: &Plan, goal: &Subgoal, time_limit: u32) -> u32 {
    plan.deliveries.get(&goal.meal_id).copied().unwrap_or(time_limit)
}

/// Summed per-meal lateness, each meal clamped at zero. Meals the plan
/// never delivers count as delivered at `time_limit`.
pub fn overtime_cost(plan: &Plan, goals: &[Subgoal], time_limit: u32) -> u32 {
    goals
        .iter()
        .map(|g| delivery_time(plan, g, time_limit).saturating_sub(g.deadline))
        .sum()
}

/// The unclamped sum `Σ t_delivered − t_goal`, kept for logs.
pub fn raw_overtime(plan: &Plan, goals: &[Subgoal], time_limit: u32) -> i64 {
    goals
        .iter()
        .map(|g| delivery_time(plan, g, time_limit) as i64 - g.deadline as i64)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    MissingPrecondition(Fluent),
    GuardUnsatisfied,
    UnsatisfiedSubgoal(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Zero-based index of the failing step; `None` for a missing subgoal.
    pub step: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.step, &self.kind) {
            (Some(i), ViolationKind::MissingPrecondition(fl)) => {
                write!(f, "step {}: missing precondition ({fl})", i + 1)
            }
            (Some(i), ViolationKind::GuardUnsatisfied) => write!(f, "step {}: cooking not finished", i + 1),
            (_, ViolationKind::UnsatisfiedSubgoal(m)) => write!(f, "unsatisfied subgoal {m}"),
            (None, kind) => write!(f, "{kind:?}"),
        }
    }
}

/// Checks `δ(I, π) ⊨ G` from the problem's initial state.
pub fn validate(problem: &PlanningProblem, plan: &Plan) -> Result<State, Violation> {
    validate_from(problem, &problem.init, plan)
}

/// Replays `plan` from `root`, reporting the first failing step or missing subgoal.
/// Returns the final state on success.
pub fn validate_from(problem: &PlanningProblem, root: &State, plan: &Plan) -> Result<State, Violation> {
    let mut state = root.clone();
    for (i, id) in plan.steps.iter().enumerate() {
        let action = problem.action(*id);
        if let Some(missing) = action.pre.iter().find(|f| !state.holds(**f)) {
            return Err(Violation {
                step: Some(i),
                kind: ViolationKind::MissingPrecondition(problem.domain.fluent(*missing).clone()),
            });
        }
        if let Some(g) = &action.guard {
            if !state.guard_holds(g) {
                return Err(Violation { step: Some(i), kind: ViolationKind::GuardUnsatisfied });
            }
        }
        state = state.successor(action);
    }
    if let Some(goal) = problem.goals.iter().find(|g| !state.holds(g.satisfying_fluent)) {
        return Err(Violation { step: None, kind: ViolationKind::UnsatisfiedSubgoal(goal.meal_id.clone()) });
    }
    Ok(state)
}
