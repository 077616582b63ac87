use serde::{Deserialize, Serialize};

use crate::model::{GroundAction, ObjectKind, Plan, PlanningProblem, State};

/// How a step's meal was determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributionRule {
    /// The step names the meal, or touches an ingredient only one meal uses.
    Direct,
    /// A shared ingredient, resolved by the meal whose later step consumes it.
    Consumption,
    /// A shared ingredient with no resolving consumer; earliest deadline wins.
    Ambiguous,
    /// A step without ingredients or meals, explained by the next step that has one.
    MovementLookahead,
    /// A movement with nothing after it; given the last pending meal.
    Trailing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgoalAttribution {
    pub step_index: usize,
    pub meal_id: String,
    pub rule: AttributionRule,
}

/// Meals that use `action`'s ingredients or name it directly. `None` for
/// actions without ingredient or meal arguments.
fn owners(problem: &PlanningProblem, action: &GroundAction) -> Option<Vec<String>> {
    let domain = &problem.domain;
    let mut meals = Vec::new();
    let mut touches = false;
    for arg in &action.args {
        let name = &domain.object(*arg).name;
        match domain.object_kind(*arg) {
            ObjectKind::Meal => return Some(vec![name.clone()]),
            ObjectKind::Ingredient => {
                touches = true;
                for g in &problem.goals {
                    if g.ingredients.contains(name) && !meals.contains(&g.meal_id) {
                        meals.push(g.meal_id.clone());
                    }
                }
            }
            _ => {}
        }
    }
    touches.then_some(meals)
}

fn mentions_any(problem: &PlanningProblem, action: &GroundAction, objects: &[crate::model::ObjectId]) -> bool {
    action.pre.iter().any(|f| {
        let fluent = problem.domain.fluent(*f);
        objects.iter().any(|o| fluent.mentions(&problem.domain.object(*o).name))
    })
}

/// Assigns every plan step to the meal it serves. `root` is the state the
/// plan starts from; it decides which meal is last pending.
pub fn attribute_subgoals(plan: &Plan, problem: &PlanningProblem, root: &State) -> Vec<SubgoalAttribution> {
    let actions: Vec<&GroundAction> = plan.steps.iter().map(|id| problem.action(*id)).collect();
    let mut out: Vec<Option<(String, AttributionRule)>> = vec![None; actions.len()];

    for (i, action) in actions.iter().enumerate() {
        let Some(candidates) = owners(problem, action) else { continue };
        let resolved = match candidates.len() {
            0 => None,
            1 => Some((candidates[0].clone(), AttributionRule::Direct)),
            _ => {
                let ingredients: Vec<_> = action
                    .args
                    .iter()
                    .copied()
                    .filter(|a| problem.domain.object_kind(*a) == ObjectKind::Ingredient)
                    .collect();
                let consumer = actions[i + 1..].iter().find_map(|later| {
                    let meal = later
                        .args
                        .iter()
                        .find(|a| problem.domain.object_kind(**a) == ObjectKind::Meal)
                        .map(|a| problem.domain.object(*a).name.clone())?;
                    (candidates.contains(&meal) && mentions_any(problem, later, &ingredients)).then_some(meal)
                });
                Some(match consumer {
                    Some(meal) => (meal, AttributionRule::Consumption),
                    // Goals are in deadline order, so the first owner has the earliest deadline.
                    None => (candidates[0].clone(), AttributionRule::Ambiguous),
                })
            }
        };
        out[i] = resolved;
    }

    let last_pending = problem
        .pending_goals(root)
        .last()
        .or(problem.goals.last())
        .map(|g| g.meal_id.clone())
        .unwrap_or_default();
    let mut next: Option<String> = None;
    let mut result = vec![None; actions.len()];
    for i in (0..actions.len()).rev() {
        result[i] = Some(match &out[i] {
            Some((meal, rule)) => {
                next = Some(meal.clone());
                SubgoalAttribution { step_index: i, meal_id: meal.clone(), rule: *rule }
            }
            None => match &next {
                Some(meal) => {
                    SubgoalAttribution { step_index: i, meal_id: meal.clone(), rule: AttributionRule::MovementLookahead }
                }
                None => {
                    SubgoalAttribution { step_index: i, meal_id: last_pending.clone(), rule: AttributionRule::Trailing }
                }
            },
        });
    }
    result.into_iter().map(|a| a.expect("every step visited")).collect()
}
