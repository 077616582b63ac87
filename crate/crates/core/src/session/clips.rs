use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::explain::{explain_step, ExplanationMode};
use crate::kitchen::Game;
use crate::model::Plan;
use crate::planner::{solve, PlannerBudget};

use super::StudyGames;

pub const CLIP_COUNT: u32 = 25;

/// One replayed moment of an optimal game with its three candidate outputs,
/// shuffled per session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clip {
    pub clip: u32,
    pub game_id: String,
    /// Actions played before the clip's moment.
    pub history: Vec<String>,
    pub action: String,
    pub outputs: Vec<ClipOutput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipOutput {
    pub mode: ExplanationMode,
    pub text: String,
}

#[derive(Debug)]
pub(crate) struct ClipSource {
    game: Arc<Game>,
    plan: Plan,
}

fn sources(study: &StudyGames) -> &[ClipSource] {
    study.clips.get_or_init(|| {
        study
            .themed
            .iter()
            .filter_map(|game| {
                let plan = solve(&game.problem, &PlannerBudget::default()).ok()?;
                (!plan.is_empty()).then(|| ClipSource { game: game.clone(), plan })
            })
            .collect()
    })
}

pub(crate) fn clip(study: &StudyGames, seed: u64, clip: u32) -> Option<Clip> {
    let sources = sources(study);
    if clip >= CLIP_COUNT || sources.is_empty() {
        return None;
    }
    let source = &sources[clip as usize % sources.len()];
    let per_source = CLIP_COUNT.div_ceil(sources.len() as u32) as usize;
    let step = (clip as usize / sources.len()) * source.plan.len() / per_source;
    let problem = &source.game.problem;
    let mut outputs: Vec<ClipOutput> = ExplanationMode::ALL
        .iter()
        .filter_map(|&mode| {
            let r = explain_step(problem, &source.game.lexicon, &source.plan, &problem.init, step, mode).ok()?;
            Some(ClipOutput { mode, text: r.text })
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(clip as u64);
    outputs.shuffle(&mut rng);
    Some(Clip {
        clip,
        game_id: source.game.id().to_string(),
        history: source.plan.labels(problem).take(step).map(str::to_string).collect(),
        action: problem.action(source.plan.steps[step]).label.clone(),
        outputs,
    })
}
