use serde::{Deserialize, Serialize};

use crate::explain::action_text;
use crate::kitchen::{legal_actions, write_snapshot, Game, KitchenEvent};
use crate::model::State;

use super::Stage;

/// What a client sees. Recommendations carry their text only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub stage: Stage,
    /// Index of the current game among the five, 5 once done.
    pub game_index: usize,
    pub game: Option<GameView>,
    /// Sequence number the next submitted action must carry.
    pub next_seq: u64,
    pub recommendation: Option<RecommendationView>,
    /// A recommendation is being computed for the current state.
    pub thinking: bool,
    /// Events caused by the most recent action.
    pub events: Vec<KitchenEvent>,
    pub results: Vec<GameResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameView {
    pub game_id: String,
    pub title: String,
    pub elapsed: u32,
    pub time_limit: u32,
    pub snapshot: String,
    pub cooking: Vec<CookingView>,
    pub meals: Vec<MealView>,
    pub legal_actions: Vec<ActionView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CookingView {
    pub ingredient: String,
    pub started: u32,
    pub ready_at: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MealView {
    pub id: String,
    pub name: String,
    pub deadline: u32,
    pub ingredients: Vec<String>,
    pub delivered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionView {
    pub action: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationView {
    pub action: String,
    pub text: String,
}

/// Outcome of a finished game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameResult {
    pub game_id: String,
    pub stage: Stage,
    pub upc: u32,
    pub steps: u32,
}

pub(crate) fn game_view(game: &Game, state: &State) -> GameView {
    let problem = &game.problem;
    let cooking = state
        .timers()
        .iter()
        .map(|(object, started)| {
            let ingredient = problem.domain.object(*object).name.clone();
            let duration = game.config.ingredient(&ingredient).and_then(|i| i.cook_duration).unwrap_or(0);
            CookingView { ingredient, started: *started, ready_at: started + duration }
        })
        .collect();
    let meals = game
        .config
        .meals
        .iter()
        .map(|m| MealView {
            id: m.id.clone(),
            name: m.name.clone(),
            deadline: m.deadline,
            ingredients: m.ingredients.clone(),
            delivered: problem.goal(&m.id).is_some_and(|g| state.holds(g.satisfying_fluent)),
        })
        .collect();
    let legal_actions = legal_actions(state, problem)
        .into_iter()
        .map(|a| ActionView {
            action: a.label.clone(),
            text: action_text(problem, &game.lexicon, a).unwrap_or_else(|_| a.label.clone()),
        })
        .collect();
    GameView {
        game_id: game.id().to_string(),
        title: game.config.title.clone(),
        elapsed: state.elapsed,
        time_limit: problem.time_limit,
        snapshot: write_snapshot(problem, state),
        cooking,
        meals,
        legal_actions,
    }
}
