//! Interactive study sessions: five games over three stages, with the
//! condition's recommendations, an append-only log, and recovery by replay.

mod clips;
mod view;

use std::collections::BTreeMap;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::explain::ExplanationMode;
use crate::games;
use crate::ids::{IdsConfig, IdsEngine, IdsError, IdsMode, Recommendation};
use crate::kitchen::{is_over, step, Game, KitchenError, KitchenEvent};
use crate::metrics::{
    end_record, pref_tally, GameHeader, LogRecord, MetricsReport, SessionLog, Shown, StepEntry, StudyCondition,
};
use crate::model::{ActionId, State};
use crate::planner::PlannerBudget;

pub use clips::{Clip, ClipOutput, CLIP_COUNT};
pub use view::{ActionView, CookingView, GameResult, GameView, MealView, RecommendationView, SessionView};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Familiarization,
    Ids,
    Assessment,
    Done,
}

impl Stage {
    fn of(index: usize) -> Stage {
        match index {
            0 | 1 => Stage::Familiarization,
            2 | 3 => Stage::Ids,
            4 => Stage::Assessment,
            _ => Stage::Done,
        }
    }
}

pub const GAME_COUNT: usize = 5;

/// The five study games, compiled once and shared by every session.
#[derive(Debug)]
pub struct StudyGames {
    pub tutorial: Arc<Game>,
    pub practice: Arc<Game>,
    /// The two games of the recommendation stage, in default order.
    pub themed: [Arc<Game>; 2],
    pub assessment: Arc<Game>,
    clips: std::sync::OnceLock<Vec<clips::ClipSource>>,
}

impl StudyGames {
    pub fn bundled() -> Result<Self, KitchenError> {
        let load = |id: &str| games::load(id).map(Arc::new);
        Ok(StudyGames::new(
            load("burrito_tutorial")?,
            load("practice")?,
            [load("italian_bistro")?, load("asian_fusion")?],
            load("assessment")?,
        ))
    }

    pub fn new(tutorial: Arc<Game>, practice: Arc<Game>, themed: [Arc<Game>; 2], assessment: Arc<Game>) -> Self {
        StudyGames { tutorial, practice, themed, assessment, clips: std::sync::OnceLock::new() }
    }

    /// Play order; `swap_order` plays the second themed game first.
    pub fn order(&self, swap_order: bool) -> [Arc<Game>; GAME_COUNT] {
        let (a, b) = if swap_order { (1, 0) } else { (0, 1) };
        [
            self.tutorial.clone(),
            self.practice.clone(),
            self.themed[a].clone(),
            self.themed[b].clone(),
            self.assessment.clone(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SessionError {
    #[error("action `{0}` is not legal now")]
    IllegalAction(String),
    #[error("sequence number {got} is stale; expected {expected}")]
    StaleSeq { got: u64, expected: u64 },
    #[error("the session is finished")]
    Finished,
    #[error("preference votes open once all games are played")]
    VotingClosed,
    #[error("clip {0} does not exist")]
    UnknownClip(u32),
    #[error("clip {0} already has a vote")]
    DuplicateVote(u32),
    #[error("log does not match a replay: {0}")]
    Corrupt(String),
    #[error("planner budget exhausted")]
    BudgetExhausted,
}

/// A recommendation computed away from the session, committed only if the
/// session has not moved on meanwhile.
#[derive(Debug)]
pub struct RecommendationJob {
    generation: u64,
    engine: IdsEngine,
    state: State,
    last_action: Option<ActionId>,
}

#[derive(Debug)]
pub struct RecommendationResult {
    generation: u64,
    engine: IdsEngine,
    outcome: Result<Option<Recommendation>, IdsError>,
}

impl RecommendationJob {
    pub fn run(mut self, cancel: Option<Arc<AtomicBool>>) -> RecommendationResult {
        self.engine.set_cancel(cancel);
        let outcome = self.engine.next_recommendation(&self.state, self.last_action);
        self.engine.set_cancel(None);
        RecommendationResult { generation: self.generation, engine: self.engine, outcome }
    }
}

/// Outcome of submitting an action.
#[derive(Debug, Clone, PartialEq)]
pub enum Submitted {
    Applied,
    /// The same action with the same sequence number was already applied.
    Repeat(Box<SessionView>),
}

#[derive(Debug)]
pub struct GameSession {
    id: String,
    condition: StudyCondition,
    seed: u64,
    swap_order: bool,
    order: [Arc<Game>; GAME_COUNT],
    study: Arc<StudyGames>,
    budget: PlannerBudget,
    index: usize,
    state: State,
    engine: IdsEngine,
    pending: Option<Recommendation>,
    thinking: bool,
    last_action: Option<ActionId>,
    last_events: Vec<KitchenEvent>,
    /// Moves applied so far in the whole session.
    moves: u64,
    records: Vec<LogRecord>,
    votes: BTreeMap<u32, ExplanationMode>,
    last_reply: Option<(u64, String, SessionView)>,
}

impl GameSession {
    /// A fresh session at the start of the tutorial. No recommendation is
    /// computed yet; see [`GameSession::recommend`].
    pub fn new(
        id: &str,
        condition: StudyCondition,
        seed: u64,
        swap_order: bool,
        study: Arc<StudyGames>,
        budget: PlannerBudget,
    ) -> Self {
        let order = study.order(swap_order);
        let first = order[0].clone();
        let mut session = GameSession {
            id: id.to_string(),
            condition,
            seed,
            swap_order,
            engine: IdsEngine::new(first.problem.clone(), first.lexicon.clone(), IdsConfig::new(IdsMode::None, 0.0, 0).unwrap(), budget.clone()),
            state: first.problem.init.clone(),
            order,
            study,
            budget,
            index: 0,
            pending: None,
            thinking: false,
            last_action: None,
            last_events: Vec::new(),
            moves: 0,
            records: vec![LogRecord::Session { session_id: id.to_string(), condition, seed, swap_order }],
            votes: BTreeMap::new(),
            last_reply: None,
        };
        session.start_game(0);
        session
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn condition(&self) -> StudyCondition {
        self.condition
    }

    pub fn swap_order(&self) -> bool {
        self.swap_order
    }

    pub fn stage(&self) -> Stage {
        Stage::of(self.index)
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn current_game(&self) -> Option<&Arc<Game>> {
        self.order.get(self.index)
    }

    pub fn engine(&self) -> &IdsEngine {
        &self.engine
    }

    /// The pending recommendation, provenance included. Server side only.
    pub fn pending(&self) -> Option<&Recommendation> {
        self.pending.as_ref()
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    /// Recommendation settings for game `index`: the tutorial and practice
    /// games use the condition's explanations without corruption, and the
    /// assessment has no support at all.
    pub fn ids_config(&self, index: usize) -> IdsConfig {
        let seed = self.seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        match Stage::of(index) {
            Stage::Familiarization => IdsConfig::new(self.condition.mode(), 0.0, seed).unwrap(),
            Stage::Ids => self.condition.ids_config(seed),
            Stage::Assessment | Stage::Done => IdsConfig::new(IdsMode::None, 0.0, seed).unwrap(),
        }
    }

    fn start_game(&mut self, index: usize) {
        self.index = index;
        self.pending = None;
        self.last_action = None;
        let Some(game) = self.order.get(index).cloned() else {
            self.thinking = false;
            return;
        };
        let config = self.ids_config(index);
        self.engine = IdsEngine::new(game.problem.clone(), game.lexicon.clone(), config, self.budget.clone());
        self.state = game.problem.init.clone();
        self.thinking = config.mode != IdsMode::None;
        self.records.push(LogRecord::Game(GameHeader {
            game_id: game.id().to_string(),
            mode: config.mode,
            corruption_prob: config.corruption_prob,
            seed: config.seed,
        }));
    }

    /// Applies a player action. Repeating the last submission with its
    /// sequence number changes nothing and returns the view sent then.
    pub fn apply(&mut self, seq: u64, action: &str) -> Result<Submitted, SessionError> {
        if let Some((last_seq, last_action, view)) = &self.last_reply {
            if *last_seq == seq && last_action == action {
                return Ok(Submitted::Repeat(Box::new(view.clone())));
            }
        }
        let game = self.current_game().cloned().ok_or(SessionError::Finished)?;
        if seq != self.moves {
            return Err(SessionError::StaleSeq { got: seq, expected: self.moves });
        }
        let problem = &game.problem;
        let ground = problem.domain.action_by_label(action).ok_or_else(|| SessionError::IllegalAction(action.into()))?;
        let (next, events) = step(&self.state, ground, problem).map_err(|_| SessionError::IllegalAction(action.into()))?;
        self.records.push(LogRecord::Step(StepEntry {
            seq,
            elapsed: self.state.elapsed,
            recommendation: self.pending.as_ref().and_then(Shown::from_recommendation),
            user_action: action.to_string(),
            events: events.clone(),
        }));
        self.moves += 1;
        self.state = next;
        self.last_action = Some(ground.id);
        self.last_events = events;
        self.pending = None;
        if is_over(&self.state, problem) {
            let (elapsed, snapshot) = end_record(problem, &self.state);
            self.records.push(LogRecord::End { elapsed, snapshot });
            self.start_game(self.index + 1);
        } else {
            self.thinking = self.engine.config().mode != IdsMode::None;
        }
        Ok(Submitted::Applied)
    }

    /// Whether a recommendation is still owed for the current state.
    pub fn needs_recommendation(&self) -> bool {
        self.thinking
    }

    pub fn recommendation_job(&self) -> Option<RecommendationJob> {
        self.thinking.then(|| RecommendationJob {
            generation: self.moves,
            engine: self.engine.clone(),
            state: self.state.clone(),
            last_action: self.last_action,
        })
    }

    /// Installs a finished job. Returns false, changing nothing, when the
    /// job is stale or was cancelled.
    pub fn commit(&mut self, result: RecommendationResult) -> Result<bool, SessionError> {
        if !self.thinking || result.generation != self.moves {
            return Ok(false);
        }
        let rec = match result.outcome {
            Ok(rec) => rec,
            Err(IdsError::Cancelled) => return Ok(false),
            Err(IdsError::BudgetExhausted) => return Err(SessionError::BudgetExhausted),
            // Nothing reaches every meal from here: no suggestion.
            Err(_) => None,
        };
        self.engine = result.engine;
        self.records.push(LogRecord::Recommend { step: self.moves, shown: rec.as_ref().and_then(Shown::from_recommendation) });
        self.pending = rec;
        self.thinking = false;
        Ok(true)
    }

    /// Computes the owed recommendation in place.
    pub fn recommend(&mut self) -> Result<(), SessionError> {
        if let Some(job) = self.recommendation_job() {
            self.commit(job.run(None))?;
        }
        Ok(())
    }

    /// Applies an action and computes the next recommendation.
    pub fn submit_action(&mut self, seq: u64, action: &str) -> Result<SessionView, SessionError> {
        if let Submitted::Repeat(view) = self.apply(seq, action)? {
            return Ok(*view);
        }
        self.recommend()?;
        let view = self.view();
        self.remember_reply(seq, action, view.clone());
        Ok(view)
    }

    /// Records the reply to submission `seq` so a retry gets it again.
    pub fn remember_reply(&mut self, seq: u64, action: &str, view: SessionView) {
        self.last_reply = Some((seq, action.to_string(), view));
    }

    pub fn vote_preference(&mut self, clip: u32, mode: ExplanationMode) -> Result<(), SessionError> {
        if self.stage() != Stage::Done {
            return Err(SessionError::VotingClosed);
        }
        if clip >= CLIP_COUNT {
            return Err(SessionError::UnknownClip(clip));
        }
        if self.votes.contains_key(&clip) {
            return Err(SessionError::DuplicateVote(clip));
        }
        self.votes.insert(clip, mode);
        self.records.push(LogRecord::Vote { clip, mode });
        Ok(())
    }

    pub fn votes(&self) -> &BTreeMap<u32, ExplanationMode> {
        &self.votes
    }

    /// Clip `clip` of the preference review.
    pub fn clip(&self, clip: u32) -> Result<Clip, SessionError> {
        clips::clip(&self.study, self.seed, clip).ok_or(SessionError::UnknownClip(clip))
    }

    /// The per-game logs recorded so far.
    pub fn game_logs(&self) -> Vec<SessionLog> {
        SessionLog::from_records(&self.records).expect("sessions write well-formed logs")
    }

    /// Metrics for every finished game, with preference shares attached.
    pub fn reports(&self) -> Vec<MetricsReport> {
        let votes: Vec<ExplanationMode> = self.votes.values().copied().collect();
        self.game_logs()
            .iter()
            .zip(&self.order)
            .filter(|(log, _)| log.end.is_some())
            .map(|(log, game)| MetricsReport::new(log, &game.problem).with_votes(&votes))
            .collect()
    }

    pub fn preference_shares(&self) -> BTreeMap<ExplanationMode, f64> {
        pref_tally(&self.votes.values().copied().collect::<Vec<_>>())
    }

    pub fn view(&self) -> SessionView {
        let results = self
            .game_logs()
            .iter()
            .zip(&self.order)
            .enumerate()
            .filter(|(_, (log, _))| log.end.is_some())
            .map(|(i, (log, game))| GameResult {
                game_id: log.header.game_id.clone(),
                stage: Stage::of(i),
                upc: crate::metrics::upc(log, &game.problem),
                steps: log.entries.len() as u32,
            })
            .collect();
        SessionView {
            session_id: self.id.clone(),
            stage: self.stage(),
            game_index: self.index,
            game: self.current_game().map(|g| view::game_view(g, &self.state)),
            next_seq: self.moves,
            recommendation: self.pending.as_ref().and_then(|r| {
                Some(RecommendationView { action: r.label.clone(), text: r.explanation.as_ref()?.text.clone() })
            }),
            thinking: self.thinking,
            events: self.last_events.clone(),
            results,
        }
    }

    /// Rebuilds a session from its log, recomputing every logged
    /// recommendation and checking it against the record.
    pub fn restore(records: &[LogRecord], study: Arc<StudyGames>, budget: PlannerBudget) -> Result<Self, SessionError> {
        let corrupt = |m: String| SessionError::Corrupt(m);
        let Some(LogRecord::Session { session_id, condition, seed, swap_order }) = records.first() else {
            return Err(corrupt("missing session header".into()));
        };
        let mut session = GameSession::new(session_id, *condition, *seed, *swap_order, study, budget);
        let mut expected = 0;
        for record in records {
            if expected < session.records.len() {
                // Records written by the session itself as a consequence of a move.
                if session.records[expected] != *record {
                    return Err(corrupt(format!("record {expected} differs")));
                }
                expected += 1;
                continue;
            }
            match record {
                LogRecord::Step(entry) => {
                    session.apply(entry.seq, &entry.user_action).map_err(|e| corrupt(e.to_string()))?;
                }
                LogRecord::Recommend { .. } => {
                    session.recommend()?;
                }
                LogRecord::Vote { clip, mode } => session.vote_preference(*clip, *mode).map_err(|e| corrupt(e.to_string()))?,
                other => return Err(corrupt(format!("unexpected record {other:?}"))),
            }
            if session.records.get(expected) != Some(record) {
                return Err(corrupt(format!("record {expected} differs from replay")));
            }
            expected += 1;
        }
        if expected != session.records.len() {
            return Err(corrupt("log ends early".into()));
        }
        let last_step = records.iter().rev().find_map(|r| match r {
            LogRecord::Step(e) => Some((e.seq, e.user_action.clone())),
            _ => None,
        });
        if let Some((seq, action)) = last_step {
            let view = session.view();
            session.remember_reply(seq, &action, view);
        }
        Ok(session)
    }
}
