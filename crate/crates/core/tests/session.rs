use std::sync::atomic::AtomicBool;
use std::sync::{Arc, OnceLock};

use ids_core::explain::ExplanationMode;
use ids_core::ids::{IdsMode, Provenance};
use ids_core::metrics::{LogRecord, StudyCondition};
use ids_core::planner::{replan, PlannerBudget};
use ids_core::session::*;

fn study() -> Arc<StudyGames> {
    static STUDY: OnceLock<Arc<StudyGames>> = OnceLock::new();
    STUDY.get_or_init(|| Arc::new(StudyGames::bundled().unwrap())).clone()
}

fn session(condition: StudyCondition, seed: u64) -> GameSession {
    let mut s = GameSession::new("s1", condition, seed, false, study(), PlannerBudget::default());
    s.recommend().unwrap();
    s
}

/// The recommended action, or the planner's when there is none.
fn good_move(s: &GameSession) -> String {
    if let Some(rec) = s.pending() {
        return rec.label.clone();
    }
    let game = s.current_game().unwrap();
    let plan = replan(&game.problem, s.state(), &PlannerBudget::default()).unwrap();
    game.problem.action(plan.steps[0]).label.clone()
}

fn play_out(s: &mut GameSession) -> Vec<SessionView> {
    let mut views = Vec::new();
    while s.stage() != Stage::Done {
        let action = good_move(s);
        views.push(s.submit_action(s.view().next_seq, &action).unwrap());
    }
    views
}

fn optimal_subgoal() -> StudyCondition {
    StudyCondition::Optimal(ExplanationMode::Subgoal)
}

#[test]
fn a_fresh_session_opens_the_tutorial() {
    let s = GameSession::new("s1", optimal_subgoal(), 1, false, study(), PlannerBudget::default());
    let view = s.view();
    assert_eq!((view.stage, view.game_index, view.next_seq), (Stage::Familiarization, 0, 0));
    let game = view.game.unwrap();
    assert_eq!(game.game_id, "burrito_tutorial");
    assert_eq!(game.elapsed, 0);
    assert!(view.thinking && view.recommendation.is_none());
    assert!(!game.legal_actions.is_empty());
}

#[test]
fn stages_run_in_order_with_counterbalanced_themed_games() {
    for swap in [false, true] {
        let s = GameSession::new("s", optimal_subgoal(), 1, swap, study(), PlannerBudget::default());
        let order = study().order(swap);
        let ids: Vec<&str> = order.iter().map(|g| g.id()).collect();
        let themed = if swap { ["asian_fusion", "italian_bistro"] } else { ["italian_bistro", "asian_fusion"] };
        assert_eq!(ids, ["burrito_tutorial", "practice", themed[0], themed[1], "assessment"]);
        assert_eq!(s.ids_config(2).mode, IdsMode::Subgoal);
        assert_eq!(s.ids_config(2).corruption_prob, 0.0);
        assert_eq!(s.ids_config(4).mode, IdsMode::None);
    }
    let sub = GameSession::new("s", StudyCondition::Suboptimal(ExplanationMode::Clc), 1, false, study(), PlannerBudget::default());
    assert_eq!((sub.ids_config(1).corruption_prob, sub.ids_config(3).corruption_prob), (0.0, 0.15));
    assert_eq!(sub.ids_config(3).mode, IdsMode::Clc);
}

#[test]
fn a_full_session_reaches_the_summary() {
    let mut s = session(StudyCondition::Suboptimal(ExplanationMode::Subgoal), 4);
    let views = play_out(&mut s);
    let stages: Vec<Stage> = views.iter().map(|v| v.stage).collect();
    assert!(stages.windows(2).all(|w| w[0] <= w[1]));
    let done = views.last().unwrap();
    assert_eq!((done.stage, done.game_index), (Stage::Done, GAME_COUNT));
    assert!(done.game.is_none() && done.recommendation.is_none() && !done.thinking);
    let played: Vec<&str> = done.results.iter().map(|r| r.game_id.as_str()).collect();
    assert_eq!(played, ["burrito_tutorial", "practice", "italian_bistro", "asian_fusion", "assessment"]);
    assert_eq!(s.reports().len(), GAME_COUNT);
    assert_eq!(s.submit_action(done.next_seq, "anything"), Err(SessionError::Finished));
}

#[test]
fn the_assessment_never_recommends() {
    for condition in StudyCondition::ALL {
        let mut s = session(condition, 2);
        while s.stage() != Stage::Done {
            if s.stage() == Stage::Assessment || condition == StudyCondition::None {
                assert!(s.pending().is_none() && !s.needs_recommendation(), "{condition}");
            }
            let action = good_move(&s);
            s.submit_action(s.view().next_seq, &action).unwrap();
        }
    }
}

#[test]
fn conforming_keeps_the_plan_and_deviating_replans() {
    let mut s = session(optimal_subgoal(), 1);
    let first = s.pending().unwrap().clone();
    s.submit_action(0, &first.label).unwrap();
    assert_eq!(s.engine().replans(), 1);
    assert_eq!(s.engine().plan_pair().unwrap().cursor, 1);

    let rec = s.pending().unwrap().label.clone();
    let other = s.view().game.unwrap().legal_actions.into_iter().find(|a| a.action != rec).unwrap();
    s.submit_action(1, &other.action).unwrap();
    assert_eq!(s.engine().replans(), 2);
    assert_eq!(s.engine().plan_pair().unwrap().cursor, 0);
    assert_eq!(&s.engine().plan_pair().unwrap().root, s.state());
}

#[test]
fn bad_submissions_change_nothing() {
    let mut s = session(optimal_subgoal(), 1);
    let before = serde_json::to_string(&s.view()).unwrap();
    let records = s.records().len();
    let err = s.submit_action(0, "deliver chef deliveryStation burrito");
    assert!(matches!(err, Err(SessionError::IllegalAction(_))));
    assert!(matches!(s.submit_action(0, "no such action"), Err(SessionError::IllegalAction(_))));
    let rec = s.pending().unwrap().label.clone();
    assert_eq!(s.submit_action(5, &rec), Err(SessionError::StaleSeq { got: 5, expected: 0 }));
    assert_eq!(serde_json::to_string(&s.view()).unwrap(), before);
    assert_eq!(s.records().len(), records);
}

#[test]
fn repeating_a_submission_returns_the_same_view() {
    let mut s = session(optimal_subgoal(), 1);
    let rec = s.pending().unwrap().label.clone();
    let first = s.submit_action(0, &rec).unwrap();
    let records = s.records().len();
    let again = s.submit_action(0, &rec).unwrap();
    assert_eq!(first, again);
    assert_eq!(s.records().len(), records);
    assert_eq!(s.view().next_seq, 1);
}

fn keys(value: &serde_json::Value, out: &mut Vec<String>) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                out.push(k.clone());
                keys(v, out);
            }
        }
        serde_json::Value::Array(items) => items.iter().for_each(|v| keys(v, out)),
        _ => {}
    }
}

#[test]
fn views_never_reveal_provenance() {
    let mut s = session(StudyCondition::Suboptimal(ExplanationMode::Subgoal), 11);
    let mut shapes = std::collections::BTreeMap::new();
    while s.stage() == Stage::Familiarization || s.stage() == Stage::Ids {
        let view = s.view();
        let json = serde_json::to_value(&view).unwrap();
        let text = json.to_string();
        assert!(!text.contains("provenance") && !text.contains("orrupt") && !text.contains("ptimal"), "{text}");
        let mut k = Vec::new();
        keys(&json["recommendation"], &mut k);
        if let Some(rec) = s.pending() {
            shapes.insert(rec.provenance == Provenance::Corrupted, k);
        }
        let action = good_move(&s);
        s.submit_action(view.next_seq, &action).unwrap();
    }
    assert_eq!(shapes.len(), 2, "both kinds of recommendation were shown");
    assert_eq!(shapes[&true], shapes[&false]);
}

#[test]
fn preference_votes_after_the_games() {
    let mut s = session(StudyCondition::None, 1);
    assert_eq!(s.vote_preference(3, ExplanationMode::Subgoal), Err(SessionError::VotingClosed));
    play_out(&mut s);
    s.vote_preference(3, ExplanationMode::Subgoal).unwrap();
    assert_eq!(s.vote_preference(3, ExplanationMode::Clc), Err(SessionError::DuplicateVote(3)));
    assert_eq!(s.vote_preference(CLIP_COUNT, ExplanationMode::Clc), Err(SessionError::UnknownClip(CLIP_COUNT)));
    for clip in (0..CLIP_COUNT).filter(|c| *c != 3) {
        let mode = if clip < 15 { ExplanationMode::Subgoal } else { ExplanationMode::ActionOnly };
        s.vote_preference(clip, mode).unwrap();
    }
    let shares = s.preference_shares();
    assert_eq!(shares[&ExplanationMode::Subgoal], 60.0);
    assert_eq!(shares[&ExplanationMode::ActionOnly], 40.0);
    assert_eq!(s.reports()[0].pref_pct, shares);
}

#[test]
fn clips_show_three_shuffled_outputs() {
    let s = GameSession::new("s", StudyCondition::None, 8, false, study(), PlannerBudget::default());
    for clip in 0..CLIP_COUNT {
        let c = s.clip(clip).unwrap();
        let mut modes: Vec<ExplanationMode> = c.outputs.iter().map(|o| o.mode).collect();
        modes.sort();
        assert_eq!(modes, ExplanationMode::ALL);
        assert_eq!(c, s.clip(clip).unwrap());
    }
    assert_eq!(s.clip(CLIP_COUNT), Err(SessionError::UnknownClip(CLIP_COUNT)));
}

#[test]
fn restoring_from_the_log_rebuilds_the_view() {
    let mut s = session(StudyCondition::Suboptimal(ExplanationMode::Clc), 6);
    for k in 0..45 {
        let action = good_move(&s);
        s.submit_action(k, &action).unwrap();
        if k % 11 == 0 {
            let back = GameSession::restore(s.records(), study(), PlannerBudget::default()).unwrap();
            assert_eq!(serde_json::to_string(&back.view()).unwrap(), serde_json::to_string(&s.view()).unwrap());
            assert_eq!(back.records(), s.records());
        }
    }
    // A retry of the last move after a restart is still recognised.
    let last = s.records().iter().rev().find_map(|r| match r {
        LogRecord::Step(e) => Some((e.seq, e.user_action.clone())),
        _ => None,
    });
    let (seq, action) = last.unwrap();
    let mut back = GameSession::restore(s.records(), study(), PlannerBudget::default()).unwrap();
    assert_eq!(back.submit_action(seq, &action).unwrap(), s.view());

    let mut forged = s.records().to_vec();
    let i = forged.iter().position(|r| matches!(r, LogRecord::Recommend { shown: Some(_), .. })).unwrap();
    if let LogRecord::Recommend { shown: Some(shown), .. } = &mut forged[i] {
        shown.text.push('!');
    }
    assert!(matches!(GameSession::restore(&forged, study(), PlannerBudget::default()), Err(SessionError::Corrupt(_))));
}

#[test]
fn restoring_a_session_without_its_last_recommendation_owes_one() {
    let mut s = session(optimal_subgoal(), 1);
    let rec = s.pending().unwrap().label.clone();
    s.apply(0, &rec).unwrap();
    let back = GameSession::restore(s.records(), study(), PlannerBudget::default()).unwrap();
    assert!(back.needs_recommendation());
    assert_eq!(back.view(), s.view());
}

#[test]
fn stale_and_cancelled_jobs_are_dropped() {
    let mut s = GameSession::new("s", optimal_subgoal(), 1, false, study(), PlannerBudget::default());
    let job = s.recommendation_job().unwrap();
    let cancelled = job.run(Some(Arc::new(AtomicBool::new(true))));
    assert_eq!(s.commit(cancelled), Ok(false));
    assert!(s.needs_recommendation());

    let stale = s.recommendation_job().unwrap();
    let first = s.view().game.unwrap().legal_actions[0].action.clone();
    s.apply(0, &first).unwrap();
    assert_eq!(s.commit(stale.run(None)), Ok(false));
    assert!(s.pending().is_none());
    let fresh = s.recommendation_job().unwrap();
    assert_eq!(s.commit(fresh.run(None)), Ok(true));
    assert!(s.pending().is_some() && !s.needs_recommendation());
}
