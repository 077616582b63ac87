//! The decision-support loop: keep an optimal plan for the current state,
//! recommend its next step (or, with some probability, a corrupted one),
//! and replan whenever the player leaves the predicted trajectory.

mod corrupt;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use corrupt::{corrupt, corrupt_at, corruption_candidates, splice, CorruptError};

use crate::explain::{explain_step, ExplainError, ExplanationMode, ExplanationRendering, Lexicon};
use crate::model::{ActionId, Plan, PlanningProblem, State};
use crate::planner::{replan, PlannerBudget, SolveError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdsMode {
    None,
    ActionOnly,
    Clc,
    Subgoal,
}

impl IdsMode {
    pub fn explanation(self) -> Option<ExplanationMode> {
        match self {
            IdsMode::None => None,
            IdsMode::ActionOnly => Some(ExplanationMode::ActionOnly),
            IdsMode::Clc => Some(ExplanationMode::Clc),
            IdsMode::Subgoal => Some(ExplanationMode::Subgoal),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IdsMode::None => "none",
            IdsMode::ActionOnly => "action_only",
            IdsMode::Clc => "clc",
            IdsMode::Subgoal => "subgoal",
        }
    }
}

impl fmt::Display for IdsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdsMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(IdsMode::None),
            other => other.parse::<ExplanationMode>().map(|m| match m {
                ExplanationMode::ActionOnly => IdsMode::ActionOnly,
                ExplanationMode::Clc => IdsMode::Clc,
                ExplanationMode::Subgoal => IdsMode::Subgoal,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdsConfig {
    pub mode: IdsMode,
    pub corruption_prob: f64,
    pub seed: u64,
}

impl IdsConfig {
    pub fn new(mode: IdsMode, corruption_prob: f64, seed: u64) -> Result<Self, IdsError> {
        if !(0.0..=1.0).contains(&corruption_prob) {
            return Err(IdsError::BadProbability(corruption_prob));
        }
        Ok(IdsConfig { mode, corruption_prob, seed })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Optimal,
    Corrupted,
}

/// Random stream for recommendation number `seq` of a session seeded with `seed`.
pub fn recommendation_rng(seed: u64, seq: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(seq);
    rng
}

/// Corrupted with probability `corruption_prob`.
pub fn draw_provenance<R: Rng>(rng: &mut R, corruption_prob: f64) -> Provenance {
    if rng.random::<f64>() < corruption_prob {
        Provenance::Corrupted
    } else {
        Provenance::Optimal
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub seq: u64,
    pub action: ActionId,
    pub label: String,
    pub explanation: Option<ExplanationRendering>,
    pub provenance: Provenance,
    /// Identifies the plan pair and cursor the action came from.
    pub plan_snapshot: String,
}

/// The optimal plan from `root` and the cursor into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanPair {
    pub id: u64,
    pub root: State,
    pub optimal: Plan,
    /// States along the optimal plan, starting with `root`.
    pub trajectory: Vec<State>,
    /// The corrupted plan of the most recent corrupted recommendation.
    pub corrupted: Option<Plan>,
    pub cursor: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IdsError {
    #[error("no plan from the current state")]
    Unsolvable,
    #[error("planning cancelled")]
    Cancelled,
    #[error("planner budget exhausted without a plan")]
    BudgetExhausted,
    #[error("corruption probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error(transparent)]
    Explain(#[from] ExplainError),
}

/// Per-session recommendation engine.
#[derive(Debug, Clone)]
pub struct IdsEngine {
    problem: PlanningProblem,
    lexicon: Arc<Lexicon>,
    config: IdsConfig,
    budget: PlannerBudget,
    pair: Option<PlanPair>,
    last: Option<Recommendation>,
    seq: u64,
    replans: u64,
}

impl IdsEngine {
    pub fn new(problem: PlanningProblem, lexicon: Arc<Lexicon>, config: IdsConfig, budget: PlannerBudget) -> Self {
        IdsEngine { problem, lexicon, config, budget, pair: None, last: None, seq: 0, replans: 0 }
    }

    pub fn config(&self) -> &IdsConfig {
        &self.config
    }

    pub fn plan_pair(&self) -> Option<&PlanPair> {
        self.pair.as_ref()
    }

    pub fn last(&self) -> Option<&Recommendation> {
        self.last.as_ref()
    }

    pub fn replans(&self) -> u64 {
        self.replans
    }

    /// Installs a cancellation flag for subsequent planner calls.
    pub fn set_cancel(&mut self, flag: Option<Arc<AtomicBool>>) {
        self.budget.cancel = flag;
    }

    fn plan_from(&mut self, state: &State) -> Result<(), IdsError> {
        let plan = match replan(&self.problem, state, &self.budget) {
            Ok(plan) => plan,
            Err(SolveError::BudgetExhausted { best: Some(plan) }) => plan,
            Err(SolveError::BudgetExhausted { best: None }) => return Err(IdsError::BudgetExhausted),
            Err(SolveError::Unsolvable) => return Err(IdsError::Unsolvable),
            Err(SolveError::Cancelled) => return Err(IdsError::Cancelled),
        };
        self.replans += 1;
        let trajectory = plan.trajectory(&self.problem, state);
        self.pair = Some(PlanPair {
            id: self.replans,
            root: state.clone(),
            optimal: plan,
            trajectory,
            corrupted: None,
            cursor: 0,
        });
        Ok(())
    }

    /// The next recommendation for `state`, given what the player just did.
    /// `None` when the mode shows no recommendations or nothing is left to do.
    pub fn next_recommendation(
        &mut self,
        state: &State,
        last_user_action: Option<ActionId>,
    ) -> Result<Option<Recommendation>, IdsError> {
        let Some(mode) = self.config.mode.explanation() else {
            return Ok(None);
        };
        if state.elapsed >= self.problem.time_limit || self.problem.is_goal_state(state) {
            return Ok(None);
        }
        let conformed = match (&self.last, &self.pair, last_user_action) {
            (Some(last), Some(pair), Some(taken)) => {
                last.provenance == Provenance::Optimal
                    && last.action == taken
                    && pair.trajectory.get(pair.cursor + 1) == Some(state)
            }
            _ => false,
        };
        if conformed {
            self.pair.as_mut().expect("checked above").cursor += 1;
        } else if let Err(e) = self.plan_from(state) {
            self.pair = None;
            self.last = None;
            return Err(e);
        }

        let seq = self.seq;
        self.seq += 1;
        let mut rng = recommendation_rng(self.config.seed, seq);
        let pair = self.pair.as_mut().expect("plan installed");
        if pair.cursor >= pair.optimal.len() {
            return Ok(None);
        }
        let mut provenance = draw_provenance(&mut rng, self.config.corruption_prob);
        let mut source = &pair.optimal;
        if provenance == Provenance::Corrupted {
            match corrupt_at(&self.problem, &pair.optimal, &pair.root, pair.cursor, &mut rng, &self.budget) {
                Ok(plan) => {
                    pair.corrupted = Some(plan);
                    source = pair.corrupted.as_ref().expect("just set");
                }
                Err(CorruptError::Completion(SolveError::Cancelled)) => {
                    self.pair = None;
                    self.last = None;
                    return Err(IdsError::Cancelled);
                }
                // No later meal to borrow from: recommend the optimal step.
                Err(_) => provenance = Provenance::Optimal,
            }
        }
        let action = source.steps[pair.cursor];
        let explanation = explain_step(&self.problem, &self.lexicon, source, &pair.root, pair.cursor, mode)?;
        let rec = Recommendation {
            seq,
            action,
            label: self.problem.action(action).label.clone(),
            explanation: Some(explanation),
            provenance,
            plan_snapshot: format!("p{}c{}", pair.id, pair.cursor),
        };
        self.last = Some(rec.clone());
        Ok(Some(rec))
    }

    /// The optimal next action for `state`, ignoring corruption. Used by
    /// simulated players that reject a recommendation.
    pub fn optimal_action(&self, state: &State) -> Result<Option<ActionId>, IdsError> {
        if let Some(pair) = &self.pair {
            if pair.trajectory.get(pair.cursor) == Some(state) {
                return Ok(pair.optimal.steps.get(pair.cursor).copied());
            }
        }
        match replan(&self.problem, state, &self.budget) {
            Ok(plan) | Err(SolveError::BudgetExhausted { best: Some(plan) }) => Ok(plan.steps.first().copied()),
            Err(SolveError::Cancelled) => Err(IdsError::Cancelled),
            Err(SolveError::Unsolvable) => Err(IdsError::Unsolvable),
            Err(SolveError::BudgetExhausted { best: None }) => Err(IdsError::BudgetExhausted),
        }
    }
}
