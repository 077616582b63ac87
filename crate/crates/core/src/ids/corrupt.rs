use std::collections::BTreeMap;

use rand::Rng;

use crate::explain::{attribute_subgoals, AttributionRule};
use crate::model::{ActionId, Plan, PlanningProblem, State};
use crate::planner::{replan, PlannerBudget, SolveError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorruptError {
    #[error("no pending meal has a later deadline than the displaced step's meal")]
    NoFutureMeal,
    #[error("no later-meal step is applicable at this position")]
    NoCandidate,
    #[error("position {0} is past the end of the plan")]
    OutOfRange(usize),
    #[error("completing the corrupted plan failed: {0}")]
    Completion(SolveError),
}

/// Replacement actions for step `position` of `optimal`: later steps that
/// serve a meal due strictly after the displaced step's meal and can run in
/// the state reached at `position`. Grouped by meal, in deadline order.
pub fn corruption_candidates(
    problem: &PlanningProblem,
    optimal: &Plan,
    root: &State,
    position: usize,
) -> Result<Vec<(String, Vec<ActionId>)>, CorruptError> {
    if position >= optimal.len() {
        return Err(CorruptError::OutOfRange(position));
    }
    let attributions = attribute_subgoals(optimal, problem, root);
    let deadline = |meal: &str| problem.goal(meal).map_or(0, |g| g.deadline);
    let displaced = deadline(&attributions[position].meal_id);
    let at = optimal.trajectory(problem, root).swap_remove(position);
    if !problem.pending_goals(&at).any(|g| g.deadline > displaced) {
        return Err(CorruptError::NoFutureMeal);
    }
    let mut by_meal: BTreeMap<(u32, String), Vec<ActionId>> = BTreeMap::new();
    for (j, id) in optimal.steps.iter().enumerate().skip(position + 1) {
        let attr = &attributions[j];
        let movement = matches!(attr.rule, AttributionRule::MovementLookahead | AttributionRule::Trailing);
        if movement || deadline(&attr.meal_id) <= displaced || *id == optimal.steps[position] {
            continue;
        }
        if !at.is_applicable(problem.action(*id)) {
            continue;
        }
        let slot = by_meal.entry((deadline(&attr.meal_id), attr.meal_id.clone())).or_default();
        if !slot.contains(id) {
            slot.push(*id);
        }
    }
    if by_meal.is_empty() {
        return Err(CorruptError::NoCandidate);
    }
    Ok(by_meal.into_iter().map(|((_, meal), ids)| (meal, ids)).collect())
}

/// Builds the corrupted plan: the optimal prefix, `replacement` at
/// `position`, then an optimal completion from the resulting state.
pub fn splice(
    problem: &PlanningProblem,
    optimal: &Plan,
    root: &State,
    position: usize,
    replacement: ActionId,
    budget: &PlannerBudget,
) -> Result<Plan, CorruptError> {
    let at = optimal.trajectory(problem, root).swap_remove(position);
    let after = at.successor(problem.action(replacement));
    let completion = match replan(problem, &after, budget) {
        Ok(plan) => plan,
        Err(SolveError::BudgetExhausted { best: Some(plan) }) => plan,
        Err(e) => return Err(CorruptError::Completion(e)),
    };
    let mut steps = optimal.steps[..position].to_vec();
    steps.push(replacement);
    steps.extend(completion.steps);
    Ok(Plan::new(problem, root.elapsed, steps))
}

/// Corrupts `optimal` at `position`: picks a later meal uniformly, then one
/// of its candidate steps uniformly, and splices it in.
pub fn corrupt_at<R: Rng>(
    problem: &PlanningProblem,
    optimal: &Plan,
    root: &State,
    position: usize,
    rng: &mut R,
    budget: &PlannerBudget,
) -> Result<Plan, CorruptError> {
    let candidates = corruption_candidates(problem, optimal, root, position)?;
    let (_, actions) = &candidates[rng.random_range(0..candidates.len())];
    let replacement = actions[rng.random_range(0..actions.len())];
    splice(problem, optimal, root, position, replacement, budget)
}

/// Corrupts one position chosen uniformly among those that have candidates.
pub fn corrupt<R: Rng>(
    problem: &PlanningProblem,
    optimal: &Plan,
    root: &State,
    rng: &mut R,
    budget: &PlannerBudget,
) -> Result<Plan, CorruptError> {
    let positions: Vec<usize> =
        (0..optimal.len()).filter(|&k| corruption_candidates(problem, optimal, root, k).is_ok()).collect();
    if positions.is_empty() {
        let future = problem.pending_goals(root).count() >= 2;
        return Err(if future { CorruptError::NoCandidate } else { CorruptError::NoFutureMeal });
    }
    let position = positions[rng.random_range(0..positions.len())];
    corrupt_at(problem, optimal, root, position, rng, budget)
}
