use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Phrases for one action name.
///
/// Templates may use `{item}`, `{meal}`, `{from}` and `{to}`; `enables`
/// may also use `{purpose}`, which is filled with the producing action's
/// `purpose` connector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionPhrases {
    /// Imperative clause, e.g. `Chop the {item}`.
    pub text: String,
    /// Connector placed before the meal in subgoal explanations, e.g. `for the`.
    pub purpose: String,
    /// Clause used when this action is the consumer of a causal link, e.g. `to move the {item}`.
    pub enables: String,
}

/// Display text for stations and action names. Ingredient and meal
/// display names live with their definitions in the game config.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lexicon {
    pub stations: BTreeMap<String, String>,
    pub actions: BTreeMap<String, ActionPhrases>,
    /// Display names for ingredients and meals, filled in from the config.
    #[serde(skip)]
    pub objects: BTreeMap<String, String>,
}

impl Lexicon {
    pub fn display<'a>(&'a self, symbol: &'a str) -> Option<&'a str> {
        self.stations.get(symbol).or_else(|| self.objects.get(symbol)).map(String::as_str)
    }
}
