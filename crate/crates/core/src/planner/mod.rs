//! Cost-optimal forward search for kitchen plans, minimising total overtime
//! first and total action cost second.

mod brute;
mod heuristic;
mod search;

use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::time::Duration;

pub use brute::{brute_force_solve, BruteResult};
pub use heuristic::LandmarkHeuristic;

use crate::model::{Plan, PlanningProblem, State};

/// Order among open nodes with equal f-values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum TieBreak {
    /// Prefer nodes with more cost already spent.
    #[default]
    Deeper,
    Shallower,
}

#[derive(Debug, Clone)]
pub struct PlannerBudget {
    pub max_expansions: u64,
    pub max_wall_time: Option<Duration>,
    pub tie_break: TieBreak,
    /// Checked periodically; when set the search stops with [`SolveError::Cancelled`].
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Default for PlannerBudget {
    fn default() -> Self {
        PlannerBudget {
            max_expansions: 2_000_000,
            max_wall_time: Some(Duration::from_secs(30)),
            tie_break: TieBreak::default(),
            cancel: None,
        }
    }
}

impl PlannerBudget {
    pub fn with_cancel(mut self, flag: Arc<AtomicBool>) -> Self {
        self.cancel = Some(flag);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("no plan reaches every goal")]
    Unsolvable,
    #[error("search budget exhausted")]
    BudgetExhausted { best: Option<Plan> },
    #[error("search cancelled")]
    Cancelled,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub expanded: u64,
    pub generated: u64,
}

/// Finds a plan minimising (overtime, cost) from the problem's initial state.
pub fn solve(problem: &PlanningProblem, budget: &PlannerBudget) -> Result<Plan, SolveError> {
    search::astar(problem, budget).0
}

pub fn solve_with_stats(problem: &PlanningProblem, budget: &PlannerBudget) -> (Result<Plan, SolveError>, SolveStats) {
    search::astar(problem, budget)
}

/// Solves again from `current`. Meals already delivered there no longer count.
pub fn replan(problem: &PlanningProblem, current: &State, budget: &PlannerBudget) -> Result<Plan, SolveError> {
    solve(&problem.with_init(current.clone()), budget)
}

/// Overtime of `plan` counted only over the meals still pending at its root.
pub fn remaining_overtime(problem: &PlanningProblem, root: &State, plan: &Plan) -> u32 {
    problem
        .pending_goals(root)
        .map(|g| plan.deliveries.get(&g.meal_id).copied().unwrap_or(problem.time_limit).saturating_sub(g.deadline))
        .sum()
}
