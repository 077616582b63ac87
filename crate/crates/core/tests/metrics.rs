use ids_core::explain::ExplanationMode;
use ids_core::games;
use ids_core::ids::{IdsConfig, IdsMode, Provenance};
use ids_core::kitchen::{load_config, Game, KitchenEvent};
use ids_core::metrics::*;
use ids_core::model::overtime_cost;
use ids_core::planner::{solve, PlannerBudget};
use proptest::prelude::*;

fn header(game_id: &str) -> GameHeader {
    GameHeader { game_id: game_id.into(), mode: IdsMode::ActionOnly, corruption_prob: 0.15, seed: 0 }
}

fn entry(seq: u64, shown: Option<(&str, Provenance)>, taken: &str, events: Vec<KitchenEvent>) -> StepEntry {
    StepEntry {
        seq,
        elapsed: seq as u32,
        recommendation: shown.map(|(action, provenance)| Shown {
            seq,
            action: action.into(),
            mode: ExplanationMode::ActionOnly,
            text: String::new(),
            provenance,
            plan_snapshot: String::new(),
        }),
        user_action: taken.into(),
        events,
    }
}

fn delivered(meal: &str, at_cost: u32) -> KitchenEvent {
    KitchenEvent::MealDelivered { meal: meal.into(), at_cost }
}

/// The two-meal fixture with deadlines 10 and 25.
fn deadlines_10_25() -> Game {
    let mut cfg = load_config(games::bundled_source("two_meal").unwrap()).unwrap();
    cfg.meals[0].deadline = 10;
    cfg.meals[1].deadline = 25;
    Game::new(cfg).unwrap()
}

#[test]
fn lateness_sums_over_meals() {
    let game = deadlines_10_25();
    let mut log = SessionLog::new(header("two_meal"));
    log.entries.push(entry(0, None, "a", vec![delivered("soup", 12)]));
    log.entries.push(entry(1, None, "b", vec![delivered("salad", 30)]));
    assert_eq!(upc(&log, &game.problem), 7);

    let mut early = SessionLog::new(header("two_meal"));
    early.entries.push(entry(0, None, "a", vec![delivered("soup", 9), delivered("salad", 20)]));
    assert_eq!(upc(&early, &game.problem), 0);

    // The salad never arrives: it counts as served at the time limit.
    let mut partial = SessionLog::new(header("two_meal"));
    partial.entries.push(entry(0, None, "a", vec![delivered("soup", 10)]));
    assert_eq!(upc(&partial, &game.problem), game.problem.time_limit - 25);
}

#[test]
fn conformance_and_avoidance_from_counts() {
    let mut log = SessionLog::new(header("g"));
    let mut seq = 0;
    let mut push = |shown: &str, provenance, taken: &str| {
        log.entries.push(entry(seq, Some((shown, provenance)), taken, vec![]));
        seq += 1;
    };
    for i in 0..8 {
        push("x", Provenance::Optimal, if i < 6 { "x" } else { "y" });
    }
    for i in 0..4 {
        push("x", Provenance::Corrupted, if i < 3 { "y" } else { "x" });
    }
    let counts = Counts::from_log(&log);
    assert_eq!(
        counts,
        Counts { optimal_shown: 8, optimal_followed: 6, corrupted_shown: 4, corrupted_avoided: 3 }
    );
    assert_eq!(oac(&log), Some(75.0));
    assert_eq!(saa(&log), Some(75.0));
}

#[test]
fn rates_without_recommendations_are_absent() {
    let mut log = SessionLog::new(header("g"));
    log.entries.push(entry(0, None, "a", vec![]));
    assert_eq!((oac(&log), saa(&log)), (None, None));
    log.entries.push(entry(1, Some(("a", Provenance::Optimal)), "b", vec![]));
    assert_eq!((oac(&log), saa(&log)), (Some(0.0), None));
}

#[test]
fn preference_shares() {
    use ExplanationMode::*;
    assert_eq!(pref_tally(&[Subgoal, Subgoal]), [(Subgoal, 100.0)].into());
    let votes: Vec<ExplanationMode> =
        [vec![Subgoal; 10], vec![Clc; 6], vec![ActionOnly; 4]].concat();
    assert_eq!(pref_tally(&votes), [(ActionOnly, 20.0), (Clc, 30.0), (Subgoal, 50.0)].into());
    assert!(pref_tally(&[]).is_empty());
}

#[test]
fn conditions_and_policies_round_trip_through_text() {
    for c in StudyCondition::ALL {
        assert_eq!(c.to_string().parse::<StudyCondition>(), Ok(c));
    }
    assert_eq!(StudyCondition::Suboptimal(ExplanationMode::Subgoal).corruption_prob(), 0.15);
    assert_eq!(StudyCondition::Optimal(ExplanationMode::Clc).corruption_prob(), 0.0);
    for p in [PolicyKind::Conformant, PolicyKind::Detector(0.5), PolicyKind::SoloPlanner, PolicyKind::RandomLegal] {
        assert_eq!(p.to_string().parse::<PolicyKind>(), Ok(p));
    }
    assert!("detector:2".parse::<PolicyKind>().is_err());
}

fn play(game: &Game, condition: StudyCondition, policy: PolicyKind, seed: u64) -> SessionLog {
    let mut player = SimPolicy::new(policy, seed);
    run_game(game, condition.ids_config(seed), &mut player, &PlannerBudget::default()).unwrap()
}

fn optimal_overtime(game: &Game) -> u32 {
    let plan = solve(&game.problem, &PlannerBudget::default()).unwrap();
    overtime_cost(&plan, &game.problem.goals, game.problem.time_limit)
}

#[test]
fn conformant_play_with_optimal_support_is_optimal() {
    let game = games::load("asian_fusion").unwrap();
    let best = optimal_overtime(&game);
    for mode in ExplanationMode::ALL {
        let log = play(&game, StudyCondition::Optimal(mode), PolicyKind::Conformant, 1);
        assert_eq!(upc(&log, &game.problem), best);
        assert_eq!((oac(&log), saa(&log)), (Some(100.0), None));
        log.replay(&game).unwrap();
    }
}

#[test]
fn corruption_shown_to_a_conformant_player_costs_overtime() {
    let game = games::load("italian_bistro").unwrap();
    let best = optimal_overtime(&game);
    let mut corrupted_games = 0;
    for seed in 0..6 {
        let log = play(&game, StudyCondition::Suboptimal(ExplanationMode::Subgoal), PolicyKind::Conformant, seed);
        let counts = Counts::from_log(&log);
        let cost = upc(&log, &game.problem);
        if counts.corrupted_shown > 0 {
            corrupted_games += 1;
            assert!(cost > best, "seed {seed}: {cost}");
            assert_eq!(counts.saa(), Some(0.0));
        } else {
            assert_eq!(cost, best);
        }
    }
    assert!(corrupted_games > 0);
}

#[test]
fn a_perfect_detector_restores_optimal_play() {
    let game = games::load("asian_fusion").unwrap();
    let best = optimal_overtime(&game);
    for seed in 0..4 {
        let log = play(&game, StudyCondition::Suboptimal(ExplanationMode::Clc), PolicyKind::Detector(1.0), seed);
        assert_eq!(upc(&log, &game.problem), best);
        let counts = Counts::from_log(&log);
        if counts.corrupted_shown > 0 {
            assert_eq!(counts.saa(), Some(100.0));
        }
    }
}

#[test]
fn unsupported_players_plan_for_themselves() {
    let game = games::load("practice").unwrap();
    let log = play(&game, StudyCondition::None, PolicyKind::Conformant, 3);
    assert!(log.entries.iter().all(|e| e.recommendation.is_none()));
    assert_eq!(upc(&log, &game.problem), optimal_overtime(&game));
    let solo = play(&game, StudyCondition::Optimal(ExplanationMode::Clc), PolicyKind::SoloPlanner, 3);
    assert_eq!(upc(&solo, &game.problem), optimal_overtime(&game));
}

#[test]
fn logs_round_trip_and_replay() {
    let game = games::load("two_meal").unwrap();
    let log = play(&game, StudyCondition::Suboptimal(ExplanationMode::Subgoal), PolicyKind::RandomLegal, 5);
    let text = log.to_jsonl();
    let back = SessionLog::from_jsonl(&text).unwrap();
    assert_eq!(back, [log.clone()]);
    assert_eq!(back[0].to_jsonl(), text);
    let end = log.replay(&game).unwrap();
    assert!(ids_core::kitchen::is_over(&end, &game.problem));

    let mut forged = log.clone();
    forged.entries[0].events.clear();
    assert!(matches!(forged.replay(&game), Err(LogError::Replay { seq: 0, .. })));
    let mut illegal = log.clone();
    illegal.entries[0].user_action = "deliver chef deliveryStation soup".into();
    assert!(illegal.replay(&game).is_err());
    let mut reordered = log.records();
    reordered.swap(1, 2);
    assert!(SessionLog::from_records(&reordered).is_err());
}

fn small_grid() -> Grid {
    Grid::from_toml(
        r#"
        conditions = ["optimal_action_only", "optimal_clc", "optimal_subgoal", "suboptimal_subgoal"]
        games = ["two_meal", "fusion_mini"]
        policies = ["conformant", "detector:0.5"]
        seeds = [1, 2]
        replications = 2
        "#,
    )
    .unwrap()
}

#[test]
fn experiments_are_deterministic_and_counterbalanced() {
    let grid = small_grid();
    let games = grid.load_games().unwrap();
    let budget = PlannerBudget::default();
    let a = run_experiment(&grid, &games, &budget);
    let b = run_experiment(&grid, &games, &budget);
    assert_eq!(a.len(), 4 * 2 * 2 * 2 * 2);
    let text = |rows: &[ExperimentRow]| -> Vec<String> {
        rows.iter()
            .map(|r| match &r.outcome {
                RowOutcome::Done { log, .. } => log.to_jsonl(),
                RowOutcome::Failed(e) => panic!("{e}"),
            })
            .collect()
    };
    assert_eq!(text(&a), text(&b));

    for r in &a {
        let first = if r.key.replication % 2 == 0 { "two_meal" } else { "fusion_mini" };
        assert_eq!(r.key.position == 0, r.key.game_id == first, "{:?}", r.key);
    }
    // Explanations cannot change what a conformant player does.
    for game in ["two_meal", "fusion_mini"] {
        let upcs: Vec<u32> = a
            .iter()
            .filter(|r| r.key.game_id == game && r.key.policy == "conformant" && r.key.condition != StudyCondition::Suboptimal(ExplanationMode::Subgoal))
            .map(|r| match &r.outcome {
                RowOutcome::Done { report, .. } => report.upc,
                RowOutcome::Failed(e) => panic!("{e}"),
            })
            .collect();
        assert!(upcs.windows(2).all(|w| w[0] == w[1]), "{game}: {upcs:?}");
    }

    let dir = tempfile::tempdir().unwrap();
    write_outputs(&a, dir.path()).unwrap();
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(
        lines.next(),
        Some("condition,game,policy,seed,replication,position,status,upc,oac_pct,saa_pct,optimal_shown,optimal_followed,corrupted_shown,corrupted_avoided,steps")
    );
    assert_eq!(lines.count(), a.len());
    assert_eq!(std::fs::read_dir(dir.path().join("logs")).unwrap().count(), a.len());
}

#[test]
fn budget_exhaustion_is_a_flagged_row() {
    let grid = Grid::from_toml(
        r#"
        conditions = ["optimal_subgoal"]
        games = ["italian_bistro"]
        policies = ["conformant"]
        seeds = [0]
        "#,
    )
    .unwrap();
    let games = grid.load_games().unwrap();
    let budget = PlannerBudget { max_expansions: 5, ..PlannerBudget::default() };
    let rows = run_experiment(&grid, &games, &budget);
    assert!(matches!(&rows[0].outcome, RowOutcome::Failed(_)));
    assert!(SummaryRow::new(&rows[0]).status.starts_with("failed"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reports_agree_with_raw_counts(seed in 0u64..1000, p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
        let game = games::load("two_meal").unwrap();
        let config = IdsConfig::new(IdsMode::Subgoal, p, seed).unwrap();
        let mut player = SimPolicy::new(PolicyKind::Detector(q), seed);
        let log = run_game(&game, config, &mut player, &PlannerBudget::default()).unwrap();
        log.replay(&game).unwrap();
        let report = MetricsReport::new(&log, &game.problem);
        let shown: Vec<_> = log.entries.iter().filter_map(|e| e.recommendation.as_ref().map(|r| (r, &e.user_action))).collect();
        let optimal = shown.iter().filter(|(r, _)| r.provenance == Provenance::Optimal).count() as u32;
        let deviated = shown.iter().filter(|(r, a)| r.provenance == Provenance::Optimal && r.action != **a).count() as u32;
        let corrupted = shown.len() as u32 - optimal;
        let followed_bad = shown.iter().filter(|(r, a)| r.provenance == Provenance::Corrupted && r.action == **a).count() as u32;
        prop_assert_eq!(report.counts.optimal_shown, report.counts.optimal_followed + deviated);
        prop_assert_eq!(report.counts.optimal_shown, optimal);
        prop_assert_eq!(report.counts.corrupted_shown, report.counts.corrupted_avoided + followed_bad);
        prop_assert_eq!(report.counts.corrupted_shown, corrupted);
        prop_assert_eq!(report.oac_pct, report.counts.oac());
        for pct in [report.oac_pct, report.saa_pct].into_iter().flatten() {
            prop_assert!((0.0..=100.0).contains(&pct));
        }
        prop_assert_eq!(report.steps as usize, log.entries.len());
    }
}
