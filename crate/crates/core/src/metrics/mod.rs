//! Study metrics computed from play logs, simulated players, and batch
//! experiments over the condition grid.

mod condition;
mod experiment;
mod log;
mod sim;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use condition::{StudyCondition, SUBOPTIMAL_CORRUPTION};
pub use experiment::{run_experiment, write_outputs, ExperimentRow, Grid, RowKey, RowOutcome, SummaryRow};
pub use log::{read_records, record_line, GameHeader, LogError, LogRecord, SessionLog, Shown, StepEntry};
pub(crate) use log::end_record;
pub use sim::{run_game, PolicyKind, SimError, SimPolicy};

use crate::explain::ExplanationMode;
use crate::ids::Provenance;
use crate::kitchen::KitchenEvent;
use crate::model::PlanningProblem;

/// Total lateness over all meals; meals never delivered count as
/// delivered at the time limit.
pub fn upc(log: &SessionLog, problem: &PlanningProblem) -> u32 {
    let mut delivered: BTreeMap<&str, u32> = BTreeMap::new();
    for event in log.entries.iter().flat_map(|e| &e.events) {
        if let KitchenEvent::MealDelivered { meal, at_cost } = event {
            delivered.entry(meal.as_str()).or_insert(*at_cost);
        }
    }
    problem
        .goals
        .iter()
        .map(|g| delivered.get(g.meal_id.as_str()).copied().unwrap_or(problem.time_limit).saturating_sub(g.deadline))
        .sum()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub optimal_shown: u32,
    pub optimal_followed: u32,
    pub corrupted_shown: u32,
    pub corrupted_avoided: u32,
}

impl Counts {
    pub fn from_log(log: &SessionLog) -> Self {
        let mut c = Counts::default();
        for entry in &log.entries {
            let Some(shown) = &entry.recommendation else { continue };
            let followed = shown.action == entry.user_action;
            match shown.provenance {
                Provenance::Optimal => {
                    c.optimal_shown += 1;
                    c.optimal_followed += followed as u32;
                }
                Provenance::Corrupted => {
                    c.corrupted_shown += 1;
                    c.corrupted_avoided += !followed as u32;
                }
            }
        }
        c
    }

    /// Share of optimal recommendations followed; absent when none were shown.
    pub fn oac(&self) -> Option<f64> {
        percent(self.optimal_followed, self.optimal_shown)
    }

    /// Share of corrupted recommendations avoided; absent when none were shown.
    pub fn saa(&self) -> Option<f64> {
        percent(self.corrupted_avoided, self.corrupted_shown)
    }
}

fn percent(part: u32, whole: u32) -> Option<f64> {
    (whole > 0).then(|| 100.0 * part as f64 / whole as f64)
}

pub fn oac(log: &SessionLog) -> Option<f64> {
    Counts::from_log(log).oac()
}

pub fn saa(log: &SessionLog) -> Option<f64> {
    Counts::from_log(log).saa()
}

/// Vote share per mode. Modes without votes are absent.
pub fn pref_tally(votes: &[ExplanationMode]) -> BTreeMap<ExplanationMode, f64> {
    let mut counts: BTreeMap<ExplanationMode, u32> = BTreeMap::new();
    for mode in votes {
        *counts.entry(*mode).or_default() += 1;
    }
    counts.into_iter().map(|(m, n)| (m, 100.0 * n as f64 / votes.len() as f64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub game_id: String,
    pub upc: u32,
    pub oac_pct: Option<f64>,
    pub saa_pct: Option<f64>,
    pub counts: Counts,
    pub steps: u32,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub pref_pct: BTreeMap<ExplanationMode, f64>,
}

impl MetricsReport {
    pub fn new(log: &SessionLog, problem: &PlanningProblem) -> Self {
        let counts = Counts::from_log(log);
        MetricsReport {
            game_id: log.header.game_id.clone(),
            upc: upc(log, problem),
            oac_pct: counts.oac(),
            saa_pct: counts.saa(),
            counts,
            steps: log.entries.len() as u32,
            pref_pct: BTreeMap::new(),
        }
    }

    pub fn with_votes(mut self, votes: &[ExplanationMode]) -> Self {
        self.pref_pct = pref_tally(votes);
        self
    }
}
