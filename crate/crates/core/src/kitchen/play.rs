use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{GroundAction, ObjectKind, PlanningProblem, State};

use super::KitchenError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KitchenEvent {
    ActionTaken { action: String, at_cost: u32 },
    MealDelivered { meal: String, at_cost: u32 },
    Timeout { at_cost: u32 },
    GameComplete { at_cost: u32 },
}

/// Actions applicable in `state`, in canonical order.
pub fn legal_actions<'a>(state: &State, problem: &'a PlanningProblem) -> Vec<&'a GroundAction> {
    problem.domain.actions().iter().filter(|a| state.is_applicable(a)).collect()
}

/// Whether play has stopped: every meal delivered or the time limit reached.
pub fn is_over(state: &State, problem: &PlanningProblem) -> bool {
    state.elapsed >= problem.time_limit || problem.is_goal_state(state)
}

/// Applies a player action and reports what happened.
pub fn step(
    state: &State,
    action: &GroundAction,
    problem: &PlanningProblem,
) -> Result<(State, Vec<KitchenEvent>), KitchenError> {
    if is_over(state, problem) {
        return Err(KitchenError::GameOver);
    }
    let next = state.apply(action).map_err(|_| KitchenError::IllegalAction(action.label.clone()))?;
    let at_cost = next.elapsed;
    let mut events = vec![KitchenEvent::ActionTaken { action: action.label.clone(), at_cost }];
    for goal in &problem.goals {
        if action.adds(goal.satisfying_fluent) && !state.holds(goal.satisfying_fluent) {
            events.push(KitchenEvent::MealDelivered { meal: goal.meal_id.clone(), at_cost });
        }
    }
    if problem.is_goal_state(&next) {
        events.push(KitchenEvent::GameComplete { at_cost });
    } else if at_cost >= problem.time_limit {
        events.push(KitchenEvent::Timeout { at_cost });
    }
    Ok((next, events))
}

/// Checks the kitchen's structural invariants: one location per chef and
/// ingredient, one status per status dimension, and timers exactly on the
/// cooking ingredients.
pub fn check_state(state: &State, problem: &PlanningProblem) -> Result<(), String> {
    let domain = &problem.domain;
    let mut locations: BTreeMap<&str, usize> = BTreeMap::new();
    let mut chop: BTreeMap<&str, usize> = BTreeMap::new();
    let mut heat: BTreeMap<&str, usize> = BTreeMap::new();
    let mut cooking = Vec::new();
    for id in state.fluents.iter() {
        let f = domain.fluent(id);
        let subject = f.args[0].as_str();
        match f.predicate.as_str() {
            "at" | "in" => *locations.entry(subject).or_default() += 1,
            "raw" | "chopped" => *chop.entry(subject).or_default() += 1,
            "uncooked" | "cooking" | "cooked" => *heat.entry(subject).or_default() += 1,
            _ => {}
        }
        if f.predicate == "cooking" {
            cooking.push(domain.object_id(subject).expect("fluent objects exist"));
        }
    }
    for obj in domain.objects() {
        let name = obj.name.as_str();
        let count = |m: &BTreeMap<&str, usize>| m.get(name).copied().unwrap_or(0);
        match obj.kind {
            ObjectKind::Agent | ObjectKind::Ingredient if count(&locations) != 1 => {
                return Err(format!("`{name}` has {} locations", count(&locations)));
            }
            ObjectKind::Meal if count(&locations) > 1 => {
                return Err(format!("`{name}` has {} locations", count(&locations)));
            }
            _ => {}
        }
        if obj.kind == ObjectKind::Ingredient && (count(&chop) != 1 || count(&heat) != 1) {
            return Err(format!("`{name}` has an ambiguous status"));
        }
    }
    let timers: Vec<_> = state.timers().iter().map(|(o, _)| *o).collect();
    cooking.sort();
    if timers != cooking {
        return Err("cook timers do not match the cooking ingredients".into());
    }
    if state.timers().iter().any(|(_, t)| *t > state.elapsed) {
        return Err("cook timer starts in the future".into());
    }
    Ok(())
}
