use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::explain::ExplanationMode;
use crate::ids::{IdsConfig, IdsMode};

/// Corruption probability in the suboptimal conditions.
pub const SUBOPTIMAL_CORRUPTION: f64 = 0.15;

/// The between-subjects condition: no support, or recommendations from an
/// optimal or a suboptimal system with one explanation style.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum StudyCondition {
    None,
    Optimal(ExplanationMode),
    Suboptimal(ExplanationMode),
}

impl StudyCondition {
    pub const ALL: [StudyCondition; 7] = [
        StudyCondition::None,
        StudyCondition::Optimal(ExplanationMode::ActionOnly),
        StudyCondition::Optimal(ExplanationMode::Clc),
        StudyCondition::Optimal(ExplanationMode::Subgoal),
        StudyCondition::Suboptimal(ExplanationMode::ActionOnly),
        StudyCondition::Suboptimal(ExplanationMode::Clc),
        StudyCondition::Suboptimal(ExplanationMode::Subgoal),
    ];

    pub fn mode(self) -> IdsMode {
        match self {
            StudyCondition::None => IdsMode::None,
            StudyCondition::Optimal(m) | StudyCondition::Suboptimal(m) => match m {
                ExplanationMode::ActionOnly => IdsMode::ActionOnly,
                ExplanationMode::Clc => IdsMode::Clc,
                ExplanationMode::Subgoal => IdsMode::Subgoal,
            },
        }
    }

    pub fn corruption_prob(self) -> f64 {
        match self {
            StudyCondition::Suboptimal(_) => SUBOPTIMAL_CORRUPTION,
            _ => 0.0,
        }
    }

    pub fn ids_config(self, seed: u64) -> IdsConfig {
        IdsConfig::new(self.mode(), self.corruption_prob(), seed).expect("condition probabilities are valid")
    }
}

impl fmt::Display for StudyCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StudyCondition::None => f.write_str("none"),
            StudyCondition::Optimal(m) => write!(f, "optimal_{m}"),
            StudyCondition::Suboptimal(m) => write!(f, "suboptimal_{m}"),
        }
    }
}

impl FromStr for StudyCondition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "none" {
            return Ok(StudyCondition::None);
        }
        let bad = || format!("unknown condition `{s}`");
        if let Some(m) = s.strip_prefix("optimal_") {
            return m.parse().map(StudyCondition::Optimal).map_err(|_| bad());
        }
        if let Some(m) = s.strip_prefix("suboptimal_") {
            return m.parse().map(StudyCondition::Suboptimal).map_err(|_| bad());
        }
        Err(bad())
    }
}

impl From<StudyCondition> for String {
    fn from(c: StudyCondition) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for StudyCondition {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}
