use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::games;
use crate::kitchen::{Game, KitchenError};
use crate::planner::PlannerBudget;

use super::condition::StudyCondition;
use super::log::SessionLog;
use super::sim::{run_game, PolicyKind, SimPolicy};
use super::MetricsReport;

/// An experiment: every condition, policy, seed and replication plays
/// every game. Odd replications play the games in reverse order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    #[serde(default = "all_conditions")]
    pub conditions: Vec<StudyCondition>,
    /// Bundled game ids or paths to game configs.
    pub games: Vec<String>,
    pub policies: Vec<PolicyKind>,
    pub seeds: Vec<u64>,
    #[serde(default = "one")]
    pub replications: u32,
}

fn all_conditions() -> Vec<StudyCondition> {
    StudyCondition::ALL.to_vec()
}

fn one() -> u32 {
    1
}

impl Grid {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load_games(&self) -> Result<Vec<Game>, KitchenError> {
        self.games
            .iter()
            .map(|g| match games::bundled_source(g) {
                Some(_) => games::load(g),
                None => {
                    let text = fs::read_to_string(g).map_err(|e| KitchenError::Invalid(format!("{g}: {e}")))?;
                    Game::from_toml(&text)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RowKey {
    pub condition: StudyCondition,
    pub policy: String,
    pub seed: u64,
    pub replication: u32,
    /// Index of the game in the order it was played.
    pub position: u32,
    pub game_id: String,
}

impl RowKey {
    pub fn file_stem(&self) -> String {
        format!(
            "{}__{}__{}__s{}__r{}",
            self.condition,
            self.game_id,
            self.policy.replace(':', "-"),
            self.seed,
            self.replication
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowOutcome {
    Done { log: SessionLog, report: MetricsReport },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub key: RowKey,
    pub outcome: RowOutcome,
}

/// Runs every row of the grid in parallel. Rows come back sorted by key.
pub fn run_experiment(grid: &Grid, games: &[Game], budget: &PlannerBudget) -> Vec<ExperimentRow> {
    let mut jobs = Vec::new();
    for &condition in &grid.conditions {
        for &policy in &grid.policies {
            for &seed in &grid.seeds {
                for replication in 0..grid.replications {
                    let mut order: Vec<&Game> = games.iter().collect();
                    if replication % 2 == 1 {
                        order.reverse();
                    }
                    for (position, game) in order.into_iter().enumerate() {
                        jobs.push((condition, policy, seed, replication, position as u32, game));
                    }
                }
            }
        }
    }
    let mut rows: Vec<ExperimentRow> = jobs
        .into_par_iter()
        .map(|(condition, policy, seed, replication, position, game)| {
            let key = RowKey {
                condition,
                policy: policy.to_string(),
                seed,
                replication,
                position,
                game_id: game.id().to_string(),
            };
            let mut player = SimPolicy::new(policy, seed);
            let outcome = match run_game(game, condition.ids_config(seed), &mut player, budget) {
                Ok(log) => {
                    let report = MetricsReport::new(&log, &game.problem);
                    RowOutcome::Done { log, report }
                }
                Err(e) => RowOutcome::Failed(e.to_string()),
            };
            ExperimentRow { key, outcome }
        })
        .collect();
    rows.sort_by(|a, b| a.key.cmp(&b.key));
    rows
}

/// One line of `summary.csv`. Absent metrics are empty cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub condition: StudyCondition,
    pub game: String,
    pub policy: String,
    pub seed: u64,
    pub replication: u32,
    pub position: u32,
    pub status: String,
    pub upc: Option<u32>,
    pub oac_pct: Option<f64>,
    pub saa_pct: Option<f64>,
    pub optimal_shown: Option<u32>,
    pub optimal_followed: Option<u32>,
    pub corrupted_shown: Option<u32>,
    pub corrupted_avoided: Option<u32>,
    pub steps: Option<u32>,
}

impl SummaryRow {
    pub fn new(row: &ExperimentRow) -> Self {
        let k = &row.key;
        let mut out = SummaryRow {
            condition: k.condition,
            game: k.game_id.clone(),
            policy: k.policy.clone(),
            seed: k.seed,
            replication: k.replication,
            position: k.position,
            status: "ok".into(),
            upc: None,
            oac_pct: None,
            saa_pct: None,
            optimal_shown: None,
            optimal_followed: None,
            corrupted_shown: None,
            corrupted_avoided: None,
            steps: None,
        };
        match &row.outcome {
            RowOutcome::Done { report, .. } => {
                out.upc = Some(report.upc);
                out.oac_pct = report.oac_pct;
                out.saa_pct = report.saa_pct;
                out.optimal_shown = Some(report.counts.optimal_shown);
                out.optimal_followed = Some(report.counts.optimal_followed);
                out.corrupted_shown = Some(report.counts.corrupted_shown);
                out.corrupted_avoided = Some(report.counts.corrupted_avoided);
                out.steps = Some(report.steps);
            }
            RowOutcome::Failed(reason) => out.status = format!("failed: {reason}"),
        }
        out
    }
}

/// Writes `logs/<row>.jsonl` for every finished row and `summary.csv`.
pub fn write_outputs(rows: &[ExperimentRow], dir: &Path) -> io::Result<()> {
    let logs = dir.join("logs");
    fs::create_dir_all(&logs)?;
    let mut summary = csv::Writer::from_path(dir.join("summary.csv"))?;
    for row in rows {
        if let RowOutcome::Done { log, .. } = &row.outcome {
            fs::write(logs.join(format!("{}.jsonl", row.key.file_stem())), log.to_jsonl())?;
        }
        summary.serialize(SummaryRow::new(row))?;
    }
    summary.flush()
}
