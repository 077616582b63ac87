use ids_core::games;
use ids_core::kitchen::*;
use ids_core::model::{plan_cost, validate, Fluent, State};
use ids_core::planner::{brute_force_solve, remaining_overtime, solve, BruteResult, PlannerBudget};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(id: &str) -> GameConfig {
    load_config(games::bundled_source(id).unwrap()).unwrap()
}

fn act<'a>(game: &'a Game, label: &str) -> &'a ids_core::model::GroundAction {
    game.problem.domain.action_by_label(label).unwrap_or_else(|| panic!("no action {label}"))
}

fn run(game: &Game, labels: &[&str]) -> State {
    labels.iter().fold(game.problem.init.clone(), |s, l| s.apply(act(game, l)).unwrap())
}

#[test]
fn bistro_config_lists_its_three_meals() {
    let cfg = config("italian_bistro");
    let meals: Vec<&str> = cfg.meals.iter().map(|m| m.id.as_str()).collect();
    assert_eq!(meals, ["salad", "pasta", "veggieBurger"]);
}

#[test]
fn six_stations_are_rejected() {
    let text = games::bundled_source("micro_salad").unwrap().replace(
        r#"stations = ["gatherStation","#,
        r#"stations = ["pantryStation", "gatherStation","#,
    );
    assert!(matches!(load_config(&text), Err(KitchenError::Invalid(m)) if m.contains("stations")));
}

#[test]
fn deadline_past_time_limit_is_rejected() {
    let text = games::bundled_source("micro_salad").unwrap().replace("deadline = 20", "deadline = 90");
    assert!(matches!(load_config(&text), Err(KitchenError::Invalid(m)) if m.contains("exceeds time_limit")));
}

#[test]
fn zero_meals_are_rejected() {
    let mut cfg = config("micro_salad");
    cfg.meals.clear();
    assert!(matches!(compile(&cfg), Err(KitchenError::Invalid(_))));
}

#[test]
fn unknown_keys_report_their_position() {
    let text = games::bundled_source("micro_salad").unwrap().replace("version = 1", "version = 1\nflavour = 3");
    match load_config(&text) {
        Err(KitchenError::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn missing_action_cost_is_named() {
    let text = games::bundled_source("micro_salad").unwrap().replace("deliver = 1\n", "");
    assert!(matches!(load_config(&text), Err(KitchenError::Invalid(m)) if m.contains("`deliver`")));
}

#[test]
fn grounding_guard_trips() {
    let mut cfg = config("italian_bistro");
    cfg.max_ground_actions = 50;
    assert!(matches!(compile(&cfg), Err(KitchenError::Model(_))));
}

#[test]
fn micro_fixture_is_solved_by_the_oracle() {
    let game = games::load("micro_salad").unwrap();
    let BruteResult::Optimal(plan) = brute_force_solve(&game.problem, 12) else { panic!("no plan") };
    let end = validate(&game.problem, &plan).unwrap();
    assert!(game.problem.is_goal_state(&end));
    assert_eq!(plan_cost(&plan), 8);
}

#[test]
fn every_bundled_game_solves_on_time() {
    for (id, _) in games::BUNDLED {
        let game = games::load(id).unwrap();
        let plan = solve(&game.problem, &PlannerBudget::default()).unwrap();
        assert!(plan.len() <= 35, "{id} plan has {} steps", plan.len());
        validate(&game.problem, &plan).unwrap();
        assert_eq!(remaining_overtime(&game.problem, &game.problem.init, &plan), 0, "{id}");
    }
}

#[test]
fn pre_performed_steps_are_free() {
    let game = games::load("italian_bistro").unwrap();
    assert_eq!(game.problem.init.elapsed, 0);
    let lettuce_chopped = game.problem.domain.fluent_id(&Fluent::parse("chopped lettuce1").unwrap()).unwrap();
    assert!(game.problem.init.holds(lettuce_chopped));
}

#[test]
fn terminal_state_only_allows_chef_moves() {
    let game = games::load("micro_salad").unwrap();
    let end = run(
        &game,
        &[
            "move-item chef gatherStation cutStation tomato1",
            "cut chef gatherStation cutStation tomato1",
            "move-item chef cutStation plateStation tomato1",
            "prepare-meal chef plateStation salad",
            "move-item chef plateStation deliveryStation salad",
            "deliver chef deliveryStation salad",
        ],
    );
    assert!(game.problem.is_goal_state(&end));
    let legal = legal_actions(&end, &game.problem);
    assert!(!legal.is_empty());
    assert!(legal.iter().all(|a| a.name == MOVE_CHEF));
}

#[test]
fn pickup_needs_the_chef_at_the_gather_station() {
    let game = games::load("micro_salad").unwrap();
    let pickup = "move-item chef gatherStation cutStation tomato1";
    let has = |s: &State| legal_actions(s, &game.problem).iter().any(|a| a.label == pickup);
    assert!(has(&game.problem.init));
    let away = run(&game, &["move-chef chef gatherStation cutStation"]);
    assert!(!has(&away));
}

#[test]
fn end_cook_waits_for_the_duration() {
    let game = games::load("fusion_mini").unwrap();
    let end = "end-cook chef cookStation broth1";
    let started = run(&game, &["move-item chef gatherStation cookStation broth1", "start-cook chef cookStation broth1"]);
    let has = |s: &State| legal_actions(s, &game.problem).iter().any(|a| a.label == end);
    assert!(!has(&started));
    let mut s = started;
    for _ in 0..4 {
        s = s.apply(act(&game, "move-chef chef cookStation cutStation")).unwrap();
        s = s.apply(act(&game, "move-chef chef cutStation cookStation")).unwrap();
    }
    assert!(has(&s));
}

#[test]
fn delivery_event_carries_the_time() {
    let mut cfg = config("two_meal");
    cfg.meals.iter_mut().find(|m| m.id == "salad").unwrap().deadline = 10;
    let game = Game::new(cfg).unwrap();
    let before = run(
        &game,
        &[
            "move-item chef gatherStation plateStation tomato1",
            "move-item chef plateStation cutStation tomato1",
            "cut chef gatherStation cutStation tomato1",
            "move-item chef cutStation plateStation tomato1",
            "prepare-meal chef plateStation salad",
            "move-item chef plateStation deliveryStation salad",
        ],
    );
    let (_, events) = step(&before, act(&game, "deliver chef deliveryStation salad"), &game.problem).unwrap();
    assert_eq!(
        events,
        [
            KitchenEvent::ActionTaken { action: "deliver chef deliveryStation salad".into(), at_cost: 9 },
            KitchenEvent::MealDelivered { meal: "salad".into(), at_cost: 9 },
        ]
    );
}

#[test]
fn crossing_the_limit_times_out() {
    let game = games::load("micro_salad").unwrap();
    let at_cut = run(&game, &["move-item chef gatherStation cutStation tomato1"]);
    let late = State::new(at_cut.fluents, 79);
    let (next, events) = step(&late, act(&game, "cut chef gatherStation cutStation tomato1"), &game.problem).unwrap();
    assert_eq!(next.elapsed, 81);
    assert_eq!(events.last(), Some(&KitchenEvent::Timeout { at_cost: 81 }));
    assert!(matches!(
        step(&next, act(&game, "move-item chef cutStation plateStation tomato1"), &game.problem),
        Err(KitchenError::GameOver)
    ));
}

#[test]
fn last_delivery_completes_the_game() {
    let game = games::load("micro_salad").unwrap();
    let s = run(
        &game,
        &[
            "move-item chef gatherStation cutStation tomato1",
            "cut chef gatherStation cutStation tomato1",
            "move-item chef cutStation plateStation tomato1",
            "prepare-meal chef plateStation salad",
            "move-item chef plateStation deliveryStation salad",
        ],
    );
    let (_, events) = step(&s, act(&game, "deliver chef deliveryStation salad"), &game.problem).unwrap();
    assert_eq!(events.last(), Some(&KitchenEvent::GameComplete { at_cost: 8 }));
}

#[test]
fn illegal_actions_are_refused() {
    let game = games::load("micro_salad").unwrap();
    let err = step(&game.problem.init, act(&game, "cut chef gatherStation cutStation tomato1"), &game.problem);
    assert!(matches!(err, Err(KitchenError::IllegalAction(_))));
}

#[test]
fn snapshots_survive_a_round_trip_mid_cook() {
    let game = games::load("fusion_mini").unwrap();
    let s = run(&game, &["move-item chef gatherStation cookStation broth1", "start-cook chef cookStation broth1"]);
    let text = write_snapshot(&game.problem, &s);
    assert!(text.starts_with("elapsed 2\ncook_start broth1 2\n"));
    assert_eq!(read_snapshot(&game.problem, &text).unwrap(), s);
}

#[test]
fn snapshots_with_two_chef_locations_are_rejected() {
    let game = games::load("micro_salad").unwrap();
    let text = write_snapshot(&game.problem, &game.problem.init) + "at chef cutStation\n";
    assert!(matches!(read_snapshot(&game.problem, &text), Err(KitchenError::Snapshot { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_walks_keep_the_kitchen_consistent(seed in any::<u64>(), game_ix in 0usize..5) {
        let game = games::load(games::BUNDLED[game_ix].0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = game.problem.init.clone();
        let mut taken = Vec::new();
        for _ in 0..200 {
            if is_over(&s, &game.problem) {
                break;
            }
            let legal = legal_actions(&s, &game.problem);
            let a = legal[rng.random_range(0..legal.len())];
            let (next, events) = step(&s, a, &game.problem).unwrap();
            let first_is_action = matches!(events[0], KitchenEvent::ActionTaken { .. });
            prop_assert!(first_is_action);
            check_state(&next, &game.problem).map_err(TestCaseError::fail)?;
            taken.push(a.id);
            s = next;
        }
        let replayed = taken.iter().fold(game.problem.init.clone(), |st, id| st.apply(game.problem.action(*id)).unwrap());
        prop_assert_eq!(replayed, s);
    }

    #[test]
    fn legal_actions_are_exactly_the_applicable_ones(seed in any::<u64>()) {
        let game = games::load("two_meal").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = game.problem.init.clone();
        for _ in 0..30 {
            let legal: Vec<_> = legal_actions(&s, &game.problem).iter().map(|a| a.id).collect();
            let applicable: Vec<_> =
                game.problem.domain.actions().iter().filter(|a| s.apply(a).is_ok()).map(|a| a.id).collect();
            prop_assert_eq!(&legal, &applicable);
            if legal.is_empty() || is_over(&s, &game.problem) {
                break;
            }
            s = s.successor(game.problem.action(legal[rng.random_range(0..legal.len())]));
        }
    }
}
