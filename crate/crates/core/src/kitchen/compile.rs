use std::collections::BTreeMap;
use std::sync::Arc;

use crate::explain::Lexicon;
use crate::model::{
    ActionSpec, DomainBuilder, Fluent, FluentPattern, GuardSpec, Object, ObjectKind, Param, PlanningProblem, State,
    Subgoal, Term, TimerSpec,
};

use super::config::*;
use super::KitchenError;

fn var(name: &str) -> Term {
    Term::var(name)
}

fn pat(predicate: &str, args: Vec<Term>) -> FluentPattern {
    FluentPattern::new(predicate, args)
}

fn chef() -> Param {
    Param::new("?chef", [CHEF])
}

fn schemas(config: &GameConfig) -> Vec<ActionSpec> {
    let cost = |name: &str| config.action_costs[name];
    let stations = || Param::new("?from", STATIONS);
    let items: Vec<&str> = config
        .ingredients
        .iter()
        .map(|i| i.id.as_str())
        .chain(config.meals.iter().map(|m| m.id.as_str()))
        .collect();
    let choppable: Vec<&str> = config.ingredients.iter().filter(|i| i.needs_chop).map(|i| i.id.as_str()).collect();
    let cookable: Vec<&str> =
        config.ingredients.iter().filter(|i| i.cook_duration.is_some()).map(|i| i.id.as_str()).collect();

    let at = |who: &str, place: &str| pat("at", vec![var(who), var(place)]);
    let status = |p: &str| pat(p, vec![var("?item")]);

    let mut specs = vec![
        ActionSpec {
            name: MOVE_CHEF.into(),
            params: vec![chef(), stations(), Param::new("?to", STATIONS)],
            cost: cost(MOVE_CHEF),
            pre: vec![at("?chef", "?from")],
            add: vec![at("?chef", "?to")],
            del: vec![at("?chef", "?from")],
            guard: None,
            timer: None,
        },
        ActionSpec {
            name: MOVE_ITEM.into(),
            params: vec![chef(), stations(), Param::new("?to", STATIONS), Param::new("?item", items.clone())],
            cost: cost(MOVE_ITEM),
            pre: vec![at("?chef", "?from"), at("?item", "?from")],
            add: vec![at("?chef", "?to"), at("?item", "?to")],
            del: vec![at("?chef", "?from"), at("?item", "?from")],
            guard: Some(GuardSpec::Idle("?item".into())),
            timer: None,
        },
        // `?pantry` names where the ingredient was gathered from; it carries no condition.
        ActionSpec {
            name: CUT_ACTION.into(),
            params: vec![
                chef(),
                Param::new("?pantry", [GATHER]),
                Param::new("?board", [CUT]),
                Param::new("?item", choppable),
            ],
            cost: cost(CUT_ACTION),
            pre: vec![at("?chef", "?board"), at("?item", "?board"), status("raw")],
            add: vec![status("chopped")],
            del: vec![status("raw")],
            guard: None,
            timer: None,
        },
        ActionSpec {
            name: START_COOK.into(),
            params: vec![chef(), Param::new("?stove", [COOK]), Param::new("?item", cookable.clone())],
            cost: cost(START_COOK),
            pre: vec![at("?chef", "?stove"), at("?item", "?stove"), status("uncooked")],
            add: vec![status("cooking")],
            del: vec![status("uncooked")],
            guard: None,
            timer: Some(TimerSpec::Start("?item".into())),
        },
        ActionSpec {
            name: END_COOK.into(),
            params: vec![chef(), Param::new("?stove", [COOK]), Param::new("?item", cookable)],
            cost: cost(END_COOK),
            pre: vec![at("?chef", "?stove"), at("?item", "?stove"), status("cooking")],
            add: vec![status("cooked")],
            del: vec![status("cooking")],
            guard: Some(GuardSpec::CookedFor("?item".into())),
            timer: Some(TimerSpec::Stop("?item".into())),
        },
        ActionSpec {
            name: DELIVER.into(),
            params: vec![
                chef(),
                Param::new("?desk", [DELIVERY]),
                Param::new("?meal", config.meals.iter().map(|m| m.id.as_str())),
            ],
            cost: cost(DELIVER),
            pre: vec![at("?chef", "?desk"), pat("at", vec![var("?meal"), var("?desk")]), pat("plated", vec![var("?meal")])],
            add: vec![pat("delivered", vec![var("?meal")])],
            del: vec![pat("at", vec![var("?meal"), var("?desk")]), pat("plated", vec![var("?meal")])],
            guard: None,
            timer: None,
        },
    ];

    // One prepare-meal schema per meal, since each recipe has its own preconditions.
    for meal in &config.meals {
        let mut pre = vec![at("?chef", "?plate")];
        let mut add = vec![pat("plated", vec![var("?meal")]), pat("at", vec![var("?meal"), var("?plate")])];
        let mut del = Vec::new();
        for ing in &meal.ingredients {
            let spec = config.ingredient(ing).expect("validated");
            let here = pat("at", vec![Term::constant(ing), var("?plate")]);
            pre.push(here.clone());
            if spec.needs_chop {
                pre.push(pat("chopped", vec![Term::constant(ing)]));
            }
            if spec.cook_duration.is_some() {
                pre.push(pat("cooked", vec![Term::constant(ing)]));
            }
            del.push(here);
            add.push(pat("in", vec![Term::constant(ing), var("?meal")]));
        }
        specs.push(ActionSpec {
            name: PREPARE_MEAL.into(),
            params: vec![chef(), Param::new("?plate", [PLATE]), Param::new("?meal", [meal.id.as_str()])],
            cost: cost(PREPARE_MEAL),
            pre,
            add,
            del,
            guard: None,
            timer: None,
        });
    }
    specs
}

fn base_fluents(config: &GameConfig) -> Vec<Fluent> {
    let mut fluents = vec![Fluent::new("at", [CHEF, GATHER])];
    for ing in &config.ingredients {
        fluents.push(Fluent::new("at", [ing.id.as_str(), GATHER]));
        fluents.push(Fluent::new("raw", [ing.id.as_str()]));
        fluents.push(Fluent::new("uncooked", [ing.id.as_str()]));
    }
    fluents
}

/// Grounds the seven action schemas over the config's objects and builds the
/// initial state by applying `pre_performed` to the base kitchen.
pub fn compile(config: &GameConfig) -> Result<PlanningProblem, KitchenError> {
    config.validate()?;
    let mut objects = vec![Object { name: CHEF.into(), kind: ObjectKind::Agent }];
    objects.extend(STATIONS.iter().map(|s| Object { name: (*s).into(), kind: ObjectKind::Station }));
    objects.extend(config.ingredients.iter().map(|i| Object { name: i.id.clone(), kind: ObjectKind::Ingredient }));
    objects.extend(config.meals.iter().map(|m| Object { name: m.id.clone(), kind: ObjectKind::Meal }));

    let predicates: BTreeMap<String, usize> = [
        ("at", 2),
        ("raw", 1),
        ("chopped", 1),
        ("uncooked", 1),
        ("cooking", 1),
        ("cooked", 1),
        ("in", 2),
        ("plated", 1),
        ("delivered", 1),
    ]
    .into_iter()
    .map(|(p, n)| (p.to_string(), n))
    .collect();

    let durations: BTreeMap<String, u32> =
        config.ingredients.iter().filter_map(|i| i.cook_duration.map(|d| (i.id.clone(), d))).collect();
    let mut extra = base_fluents(config);
    extra.extend(config.meals.iter().map(|m| Fluent::new("delivered", [m.id.as_str()])));

    let domain = Arc::new(
        DomainBuilder {
            objects,
            predicates,
            specs: schemas(config),
            durations,
            extra_fluents: extra,
            max_ground_actions: config.max_ground_actions,
        }
        .build()?,
    );

    let mut state = State::new(domain.fluent_set(&base_fluents(config))?, 0);
    for line in &config.pre_performed {
        let action = domain
            .action_by_label(line)
            .ok_or_else(|| KitchenError::Invalid(format!("pre_performed action `{line}` does not exist")))?;
        if action.timer.is_some() {
            return Err(KitchenError::Invalid(format!("pre_performed action `{line}` would start or stop a timer")));
        }
        state = state
            .apply(action)
            .map_err(|_| KitchenError::Invalid(format!("pre_performed action `{line}` is not applicable")))?;
    }
    // Set-up actions are free: play starts at time zero.
    let init = State::new(state.fluents, 0);

    let mut meals: Vec<&MealConfig> = config.meals.iter().collect();
    meals.sort_by_key(|m| m.deadline);
    let goals = meals
        .into_iter()
        .map(|m| Subgoal {
            meal_id: m.id.clone(),
            satisfying_fluent: domain.fluent_id(&Fluent::new("delivered", [m.id.as_str()])).expect("in vocabulary"),
            deadline: m.deadline,
            ingredients: m.ingredients.clone(),
        })
        .collect();
    Ok(PlanningProblem::new(domain, init, goals, config.time_limit)?)
}

/// A compiled game: its config, planning problem and explanation lexicon.
#[derive(Debug, Clone)]
pub struct Game {
    pub config: Arc<GameConfig>,
    pub problem: PlanningProblem,
    pub lexicon: Arc<Lexicon>,
}

impl Game {
    pub fn new(config: GameConfig) -> Result<Self, KitchenError> {
        let problem = compile(&config)?;
        let lexicon = Arc::new(config.full_lexicon());
        Ok(Game { config: Arc::new(config), problem, lexicon })
    }

    pub fn from_toml(text: &str) -> Result<Self, KitchenError> {
        Game::new(super::load_config(text)?)
    }

    pub fn id(&self) -> &str {
        &self.config.game_id
    }
}
