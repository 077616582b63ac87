use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ids::{IdsConfig, IdsEngine, IdsError, Provenance, Recommendation};
use crate::kitchen::{is_over, legal_actions, step, Game, KitchenError};
use crate::model::{ActionId, PlanningProblem, State};
use crate::planner::{replan, PlannerBudget, SolveError};

use super::log::{end_record, GameHeader, SessionLog, Shown, StepEntry};

/// How a scripted player treats recommendations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum PolicyKind {
    /// Always takes the recommendation.
    Conformant,
    /// Spots a corrupted recommendation with the given probability and then
    /// takes the optimal action instead; otherwise conforms.
    Detector(f64),
    /// Ignores recommendations and follows its own optimal plan.
    SoloPlanner,
    RandomLegal,
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::Conformant => f.write_str("conformant"),
            PolicyKind::Detector(q) => write!(f, "detector:{q}"),
            PolicyKind::SoloPlanner => f.write_str("solo_planner"),
            PolicyKind::RandomLegal => f.write_str("random_legal"),
        }
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "conformant" => Ok(PolicyKind::Conformant),
            "solo_planner" => Ok(PolicyKind::SoloPlanner),
            "random_legal" => Ok(PolicyKind::RandomLegal),
            _ => {
                let q: f64 = s
                    .strip_prefix("detector:")
                    .and_then(|q| q.parse().ok())
                    .ok_or_else(|| format!("unknown policy `{s}`"))?;
                if !(0.0..=1.0).contains(&q) {
                    return Err(format!("detection probability {q} is outside [0, 1]"));
                }
                Ok(PolicyKind::Detector(q))
            }
        }
    }
}

impl From<PolicyKind> for String {
    fn from(k: PolicyKind) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for PolicyKind {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("planner budget exhausted without a plan")]
    BudgetExhausted,
    #[error(transparent)]
    Ids(#[from] IdsError),
    #[error(transparent)]
    Kitchen(#[from] KitchenError),
}

/// Caches an optimal plan and replans when play leaves its trajectory.
#[derive(Debug, Default)]
struct Follower {
    steps: Vec<ActionId>,
    trajectory: Vec<State>,
    cursor: usize,
}

impl Follower {
    fn next(&mut self, problem: &PlanningProblem, state: &State, budget: &PlannerBudget) -> Result<Option<ActionId>, SimError> {
        if let Some(i) = self.trajectory.iter().skip(self.cursor).position(|s| s == state) {
            self.cursor += i;
            if let Some(a) = self.steps.get(self.cursor) {
                return Ok(Some(*a));
            }
        }
        let plan = match replan(problem, state, budget) {
            Ok(plan) | Err(SolveError::BudgetExhausted { best: Some(plan) }) => plan,
            Err(SolveError::Unsolvable) => return Ok(None),
            Err(SolveError::Cancelled) => return Err(IdsError::Cancelled.into()),
            Err(SolveError::BudgetExhausted { best: None }) => return Err(SimError::BudgetExhausted),
        };
        self.trajectory = plan.trajectory(problem, state);
        self.steps = plan.steps;
        self.cursor = 0;
        Ok(self.steps.first().copied())
    }
}

/// A scripted player. Not a model of human behaviour: it exists to drive
/// the system end to end with known conformance.
#[derive(Debug)]
pub struct SimPolicy {
    pub kind: PolicyKind,
    rng: ChaCha8Rng,
    follower: Follower,
}

impl SimPolicy {
    pub fn new(kind: PolicyKind, seed: u64) -> Self {
        SimPolicy { kind, rng: ChaCha8Rng::seed_from_u64(seed), follower: Follower::default() }
    }

    /// The optimal action, or the first legal one when no plan reaches
    /// every meal any more.
    fn optimal(&mut self, problem: &PlanningProblem, state: &State, budget: &PlannerBudget) -> Result<ActionId, SimError> {
        match self.follower.next(problem, state, budget)? {
            Some(a) => Ok(a),
            None => Ok(legal_actions(state, problem).first().expect("the kitchen always allows a move").id),
        }
    }

    pub fn choose(
        &mut self,
        problem: &PlanningProblem,
        state: &State,
        rec: Option<&Recommendation>,
        budget: &PlannerBudget,
    ) -> Result<ActionId, SimError> {
        match (self.kind, rec) {
            (PolicyKind::RandomLegal, _) => {
                let legal = legal_actions(state, problem);
                Ok(legal[self.rng.random_range(0..legal.len())].id)
            }
            (PolicyKind::Conformant, Some(rec)) => Ok(rec.action),
            (PolicyKind::Detector(q), Some(rec)) => {
                if rec.provenance == Provenance::Corrupted && self.rng.random_bool(q) {
                    self.optimal(problem, state, budget)
                } else {
                    Ok(rec.action)
                }
            }
            // Without a recommendation every other player plans for itself.
            _ => self.optimal(problem, state, budget),
        }
    }
}

/// Plays one game to completion or timeout and returns its log.
pub fn run_game(game: &Game, config: IdsConfig, policy: &mut SimPolicy, budget: &PlannerBudget) -> Result<SessionLog, SimError> {
    let problem = &game.problem;
    let mut engine = IdsEngine::new(problem.clone(), game.lexicon.clone(), config, budget.clone());
    let mut log = SessionLog::new(GameHeader {
        game_id: game.id().to_string(),
        mode: config.mode,
        corruption_prob: config.corruption_prob,
        seed: config.seed,
    });
    let mut state = problem.init.clone();
    let mut last = None;
    while !is_over(&state, problem) {
        let rec = match engine.next_recommendation(&state, last) {
            Ok(rec) => rec,
            Err(IdsError::Unsolvable) => None,
            Err(IdsError::BudgetExhausted) => return Err(SimError::BudgetExhausted),
            Err(e) => return Err(e.into()),
        };
        let action = policy.choose(problem, &state, rec.as_ref(), budget)?;
        let (next, events) = step(&state, problem.action(action), problem)?;
        log.entries.push(StepEntry {
            seq: log.entries.len() as u64,
            elapsed: state.elapsed,
            recommendation: rec.as_ref().and_then(Shown::from_recommendation),
            user_action: problem.action(action).label.clone(),
            events,
        });
        state = next;
        last = Some(action);
    }
    log.end = Some(end_record(problem, &state));
    Ok(log)
}
