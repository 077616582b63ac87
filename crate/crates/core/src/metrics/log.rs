use serde::{Deserialize, Serialize};

use crate::explain::ExplanationMode;
use crate::ids::{IdsMode, Provenance, Recommendation};
use crate::kitchen::{read_snapshot, step, write_snapshot, Game, KitchenEvent};
use crate::model::{PlanningProblem, State};

use super::condition::StudyCondition;

/// A recommendation as it was shown to the player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shown {
    pub seq: u64,
    pub action: String,
    pub mode: ExplanationMode,
    pub text: String,
    pub provenance: Provenance,
    pub plan_snapshot: String,
}

impl Shown {
    pub fn from_recommendation(rec: &Recommendation) -> Option<Self> {
        let explanation = rec.explanation.as_ref()?;
        Some(Shown {
            seq: rec.seq,
            action: rec.label.clone(),
            mode: explanation.mode,
            text: explanation.text.clone(),
            provenance: rec.provenance,
            plan_snapshot: rec.plan_snapshot.clone(),
        })
    }
}

/// One player move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEntry {
    pub seq: u64,
    /// Elapsed cost before the move.
    pub elapsed: u32,
    pub recommendation: Option<Shown>,
    pub user_action: String,
    pub events: Vec<KitchenEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameHeader {
    pub game_id: String,
    pub mode: IdsMode,
    pub corruption_prob: f64,
    pub seed: u64,
}

/// One line of a log file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Session { session_id: String, condition: StudyCondition, seed: u64, swap_order: bool },
    Game(GameHeader),
    Step(StepEntry),
    /// A recommendation computed after `step` moves of the session, or
    /// none when no suggestion was available.
    Recommend { step: u64, shown: Option<Shown> },
    /// Final state of the current game, as a snapshot.
    End { elapsed: u32, snapshot: String },
    Vote { clip: u32, mode: ExplanationMode },
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("step {seq}: {message}")]
    Replay { seq: u64, message: String },
    #[error("{0}")]
    Structure(String),
}

/// Parses line-delimited records, skipping blank lines.
pub fn read_records(text: &str) -> Result<Vec<LogRecord>, LogError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| serde_json::from_str(l).map_err(|source| LogError::Json { line: n + 1, source }))
        .collect()
}

pub fn record_line(record: &LogRecord) -> String {
    let mut line = serde_json::to_string(record).expect("log records serialize");
    line.push('\n');
    line
}

/// The log of one game.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub header: GameHeader,
    pub entries: Vec<StepEntry>,
    pub end: Option<(u32, String)>,
}

impl SessionLog {
    pub fn new(header: GameHeader) -> Self {
        SessionLog { header, entries: Vec::new(), end: None }
    }

    pub fn records(&self) -> Vec<LogRecord> {
        let mut out = vec![LogRecord::Game(self.header.clone())];
        out.extend(self.entries.iter().cloned().map(LogRecord::Step));
        if let Some((elapsed, snapshot)) = &self.end {
            out.push(LogRecord::End { elapsed: *elapsed, snapshot: snapshot.clone() });
        }
        out
    }

    pub fn to_jsonl(&self) -> String {
        self.records().iter().map(record_line).collect()
    }

    /// Splits a record stream into per-game logs. Session and vote records
    /// are skipped.
    pub fn from_records(records: &[LogRecord]) -> Result<Vec<SessionLog>, LogError> {
        let mut logs: Vec<SessionLog> = Vec::new();
        for record in records {
            match record {
                LogRecord::Game(header) => logs.push(SessionLog::new(header.clone())),
                LogRecord::Step(entry) => {
                    let log = logs.last_mut().ok_or_else(|| LogError::Structure("step before any game".into()))?;
                    if log.end.is_some() {
                        return Err(LogError::Structure(format!("step {} after the game ended", entry.seq)));
                    }
                    if log.entries.last().is_some_and(|e| e.seq >= entry.seq) {
                        return Err(LogError::Structure(format!("step {} out of order", entry.seq)));
                    }
                    log.entries.push(entry.clone());
                }
                LogRecord::End { elapsed, snapshot } => {
                    let log = logs.last_mut().ok_or_else(|| LogError::Structure("end before any game".into()))?;
                    log.end = Some((*elapsed, snapshot.clone()));
                }
                LogRecord::Session { .. } | LogRecord::Recommend { .. } | LogRecord::Vote { .. } => {}
            }
        }
        Ok(logs)
    }

    pub fn from_jsonl(text: &str) -> Result<Vec<SessionLog>, LogError> {
        SessionLog::from_records(&read_records(text)?)
    }

    /// Replays the moves from the game's initial state, checking that each
    /// move and each shown recommendation was legal and that the recorded
    /// events and final snapshot match. Returns the final state.
    pub fn replay(&self, game: &Game) -> Result<State, LogError> {
        replay_entries(&game.problem, &game.problem.init, &self.entries, self.end.as_ref())
    }
}

fn replay_entries(
    problem: &PlanningProblem,
    init: &State,
    entries: &[StepEntry],
    end: Option<&(u32, String)>,
) -> Result<State, LogError> {
    let mut state = init.clone();
    for entry in entries {
        let fail = |message: String| LogError::Replay { seq: entry.seq, message };
        if entry.elapsed != state.elapsed {
            return Err(fail(format!("recorded elapsed {} but replay is at {}", entry.elapsed, state.elapsed)));
        }
        if let Some(shown) = &entry.recommendation {
            let rec = problem.domain.action_by_label(&shown.action).ok_or_else(|| fail(format!("unknown action `{}`", shown.action)))?;
            if !state.is_applicable(rec) {
                return Err(fail(format!("recommended `{}` was not applicable", shown.action)));
            }
        }
        let action =
            problem.domain.action_by_label(&entry.user_action).ok_or_else(|| fail(format!("unknown action `{}`", entry.user_action)))?;
        let (next, events) = step(&state, action, problem).map_err(|e| fail(e.to_string()))?;
        if events != entry.events {
            return Err(fail("recorded events differ from replay".into()));
        }
        state = next;
    }
    if let Some((elapsed, snapshot)) = end {
        let recorded = read_snapshot(problem, snapshot).map_err(|e| LogError::Structure(e.to_string()))?;
        if *elapsed != state.elapsed || recorded != state {
            return Err(LogError::Structure("final snapshot differs from replay".into()));
        }
    }
    Ok(state)
}

pub(crate) fn end_record(problem: &PlanningProblem, state: &State) -> (u32, String) {
    (state.elapsed, write_snapshot(problem, state))
}
