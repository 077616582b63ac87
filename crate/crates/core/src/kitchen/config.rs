use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::explain::Lexicon;

use super::KitchenError;

pub const CHEF: &str = "chef";
pub const GATHER: &str = "gatherStation";
pub const CUT: &str = "cutStation";
pub const COOK: &str = "cookStation";
pub const PLATE: &str = "plateStation";
pub const DELIVERY: &str = "deliveryStation";
pub const STATIONS: [&str; 5] = [GATHER, CUT, COOK, PLATE, DELIVERY];

pub const MOVE_CHEF: &str = "move-chef";
pub const MOVE_ITEM: &str = "move-item";
pub const CUT_ACTION: &str = "cut";
pub const START_COOK: &str = "start-cook";
pub const END_COOK: &str = "end-cook";
pub const PREPARE_MEAL: &str = "prepare-meal";
pub const DELIVER: &str = "deliver";
pub const ACTION_NAMES: [&str; 7] = [MOVE_CHEF, MOVE_ITEM, CUT_ACTION, START_COOK, END_COOK, PREPARE_MEAL, DELIVER];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngredientConfig {
    pub id: String,
    /// Display name used in explanations, e.g. `tomato`.
    pub name: String,
    #[serde(default)]
    pub needs_chop: bool,
    #[serde(default)]
    pub cook_duration: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MealConfig {
    pub id: String,
    pub name: String,
    pub ingredients: Vec<String>,
    pub deadline: u32,
}

/// A restaurant game: stations, ingredients, recipes, costs and deadlines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub game_id: String,
    pub title: String,
    pub version: u32,
    pub time_limit: u32,
    pub stations: Vec<String>,
    pub action_costs: BTreeMap<String, u32>,
    pub ingredients: Vec<IngredientConfig>,
    pub meals: Vec<MealConfig>,
    /// Ground actions applied to the base state before play starts.
    #[serde(default)]
    pub pre_performed: Vec<String>,
    #[serde(default = "default_max_ground_actions")]
    pub max_ground_actions: usize,
    pub lexicon: Lexicon,
}

fn default_max_ground_actions() -> usize {
    5000
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
    (line, col)
}

impl GameConfig {
    pub fn ingredient(&self, id: &str) -> Option<&IngredientConfig> {
        self.ingredients.iter().find(|i| i.id == id)
    }

    pub fn meal(&self, id: &str) -> Option<&MealConfig> {
        self.meals.iter().find(|m| m.id == id)
    }

    /// The lexicon with ingredient and meal display names merged in.
    pub fn full_lexicon(&self) -> Lexicon {
        let mut lex = self.lexicon.clone();
        lex.objects.insert(CHEF.to_string(), CHEF.to_string());
        for i in &self.ingredients {
            lex.objects.insert(i.id.clone(), i.name.clone());
        }
        for m in &self.meals {
            lex.objects.insert(m.id.clone(), m.name.clone());
        }
        lex
    }

    pub fn validate(&self) -> Result<(), KitchenError> {
        let invalid = |msg: String| Err(KitchenError::Invalid(msg));
        let got: BTreeSet<&str> = self.stations.iter().map(String::as_str).collect();
        let want: BTreeSet<&str> = STATIONS.into_iter().collect();
        if got != want || self.stations.len() != STATIONS.len() {
            return invalid(format!("stations must be exactly {STATIONS:?}, got {:?}", self.stations));
        }
        if self.time_limit == 0 {
            return invalid("time_limit must be positive".into());
        }
        for name in ACTION_NAMES {
            match self.action_costs.get(name) {
                None => return invalid(format!("action_costs is missing `{name}`")),
                Some(0) => return invalid(format!("action cost of `{name}` must be positive")),
                Some(_) => {}
            }
        }
        if let Some(extra) = self.action_costs.keys().find(|k| !ACTION_NAMES.contains(&k.as_str())) {
            return invalid(format!("unknown action `{extra}` in action_costs"));
        }
        if self.meals.is_empty() {
            return invalid("at least one meal is required".into());
        }
        let mut symbols: BTreeSet<&str> = STATIONS.into_iter().collect();
        symbols.insert(CHEF);
        for i in &self.ingredients {
            if !symbols.insert(&i.id) {
                return invalid(format!("symbol `{}` declared twice", i.id));
            }
            if i.cook_duration == Some(0) {
                return invalid(format!("cook_duration of `{}` must be positive", i.id));
            }
        }
        let mut used: BTreeMap<&str, &str> = BTreeMap::new();
        for m in &self.meals {
            if !symbols.insert(&m.id) {
                return invalid(format!("symbol `{}` declared twice", m.id));
            }
            if m.ingredients.is_empty() {
                return invalid(format!("meal `{}` has no ingredients", m.id));
            }
            if m.deadline > self.time_limit {
                return invalid(format!(
                    "deadline {} of meal `{}` exceeds time_limit {}",
                    m.deadline, m.id, self.time_limit
                ));
            }
            for ing in &m.ingredients {
                if self.ingredient(ing).is_none() {
                    return invalid(format!("meal `{}` uses unknown ingredient `{ing}`", m.id));
                }
                if let Some(other) = used.insert(ing, &m.id) {
                    return invalid(format!("ingredient `{ing}` is used by both `{other}` and `{}`", m.id));
                }
            }
        }
        for name in ACTION_NAMES {
            if !self.lexicon.actions.contains_key(name) {
                return invalid(format!("lexicon has no phrases for `{name}`"));
            }
        }
        for s in STATIONS {
            if !self.lexicon.stations.contains_key(s) {
                return invalid(format!("lexicon has no display name for `{s}`"));
            }
        }
        Ok(())
    }
}

/// Parses and validates a TOML game config. Unknown keys are rejected.
pub fn load_config(text: &str) -> Result<GameConfig, KitchenError> {
    let config: GameConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map(|s| line_col(text, s.start)).unwrap_or((0, 0));
        KitchenError::Parse { line, column, message: e.message().to_string() }
    })?;
    config.validate()?;
    Ok(config)
}
