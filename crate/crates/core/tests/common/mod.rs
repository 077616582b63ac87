#![allow(dead_code)]

use std::collections::HashMap;

use ids_core::games;
use ids_core::kitchen::{load_config, Game, IngredientConfig, MealConfig};
use ids_core::model::{PlanningProblem, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random game with one or two meals and at most three ingredients.
pub fn micro_instance(seed: u64) -> Game {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = load_config(games::bundled_source("micro_salad").unwrap()).unwrap();
    cfg.game_id = format!("micro_{seed}");
    cfg.time_limit = 40;
    cfg.ingredients.clear();
    cfg.meals.clear();
    let n_meals = rng.random_range(1..=2);
    let n_ingredients = rng.random_range(n_meals..=3);
    for i in 0..n_ingredients {
        let cook = rng.random_bool(0.4).then(|| rng.random_range(2..=5));
        let needs_chop = cook.is_none() && rng.random_bool(0.6);
        cfg.ingredients.push(IngredientConfig {
            id: format!("item{i}"),
            name: format!("item {i}"),
            needs_chop,
            cook_duration: cook,
        });
    }
    let mut deadlines: Vec<u32> = (0..n_meals).map(|_| rng.random_range(4..=24)).collect();
    deadlines.sort();
    for (m, deadline) in deadlines.into_iter().enumerate() {
        // Meal 0 takes the first ingredient, meal 1 the rest (or vice versa for one meal).
        let ingredients: Vec<String> = (0..n_ingredients)
            .filter(|i| if n_meals == 1 { true } else if m == 0 { *i == 0 } else { *i > 0 })
            .map(|i| format!("item{i}"))
            .collect();
        cfg.meals.push(MealConfig { id: format!("meal{m}"), name: format!("meal {m}"), ingredients, deadline });
    }
    Game::new(cfg).unwrap()
}

/// Exact lexicographic optimum `(overtime, cost)` from `state`, over plans
/// finishing before `horizon`, by memoised recursion. Every action costs at
/// least one unit, so the state graph is acyclic.
pub fn memo_optimum(problem: &PlanningProblem, state: &State, horizon: u32) -> Option<(u32, u32)> {
    memo_optimum_with(problem, state, horizon, &mut HashMap::new())
}

/// [`memo_optimum`] reusing `memo` across calls with the same problem and horizon.
pub fn memo_optimum_with(
    problem: &PlanningProblem,
    state: &State,
    horizon: u32,
    memo: &mut HashMap<State, Option<(u32, u32)>>,
) -> Option<(u32, u32)> {
    fn go(p: &PlanningProblem, s: &State, horizon: u32, memo: &mut HashMap<State, Option<(u32, u32)>>) -> Option<(u32, u32)> {
        if p.is_goal_state(s) {
            return Some((0, 0));
        }
        if s.elapsed >= horizon.min(p.time_limit) {
            return None;
        }
        if let Some(v) = memo.get(s) {
            return *v;
        }
        let mut best: Option<(u32, u32)> = None;
        for a in p.domain.actions() {
            if !s.is_applicable(a) {
                continue;
            }
            let next = s.successor(a);
            let here: u32 = p
                .goals
                .iter()
                .filter(|g| next.holds(g.satisfying_fluent) && !s.holds(g.satisfying_fluent))
                .map(|g| next.elapsed.saturating_sub(g.deadline))
                .sum();
            if let Some((ot, c)) = go(p, &next, horizon, memo) {
                let cand = (ot + here, c + a.cost);
                if best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            }
        }
        memo.insert(s.clone(), best);
        best
    }
    go(problem, state, horizon, memo)
}
