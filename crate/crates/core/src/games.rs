//! Game configs shipped with the crate.

use crate::kitchen::{Game, KitchenError};

/// Bundled study games, in the order they are played.
pub const BUNDLED: [(&str, &str); 5] = [
    ("burrito_tutorial", include_str!("../../../games/burrito_tutorial.toml")),
    ("practice", include_str!("../../../games/practice.toml")),
    ("italian_bistro", include_str!("../../../games/italian_bistro.toml")),
    ("asian_fusion", include_str!("../../../games/asian_fusion.toml")),
    ("assessment", include_str!("../../../games/assessment.toml")),
];

/// Small games used by tests and examples.
pub const FIXTURES: [(&str, &str); 5] = [
    ("micro_salad", include_str!("../../../fixtures/micro_salad.toml")),
    ("two_meal", include_str!("../../../fixtures/two_meal.toml")),
    ("bistro_mini", include_str!("../../../fixtures/bistro_mini.toml")),
    ("fusion_mini", include_str!("../../../fixtures/fusion_mini.toml")),
    ("unreachable", include_str!("../../../fixtures/unreachable.toml")),
];

pub fn bundled_source(id: &str) -> Option<&'static str> {
    BUNDLED.iter().chain(FIXTURES.iter()).find(|(name, _)| *name == id).map(|(_, text)| *text)
}

/// Loads a bundled game or fixture by id.
pub fn load(id: &str) -> Result<Game, KitchenError> {
    let text = bundled_source(id).ok_or_else(|| KitchenError::Invalid(format!("no bundled game `{id}`")))?;
    Game::from_toml(text)
}
