use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use super::action::{
    ActionId, ActionSpec, GroundAction, GroundGuardSpec, Guard, Object, ObjectId, ObjectKind, Timer,
};
use super::fluent::{Fluent, FluentId, FluentSet, MAX_FLUENTS};
use super::state::State;
use super::ModelError;

/// Fluent vocabulary, typed objects, action schemas and their groundings.
#[derive(Debug, Clone)]
pub struct Domain {
    objects: Vec<Object>,
    object_index: HashMap<String, ObjectId>,
    predicates: BTreeMap<String, usize>,
    fluents: Vec<Fluent>,
    fluent_index: HashMap<Fluent, FluentId>,
    specs: Vec<ActionSpec>,
    actions: Vec<GroundAction>,
    action_index: HashMap<String, ActionId>,
}

pub struct DomainBuilder {
    pub objects: Vec<Object>,
    pub predicates: BTreeMap<String, usize>,
    pub specs: Vec<ActionSpec>,
    /// Cook durations referenced by `GuardSpec::CookedFor`.
    pub durations: BTreeMap<String, u32>,
    /// Fluents that must be in the vocabulary even if no action mentions them.
    pub extra_fluents: Vec<Fluent>,
    pub max_ground_actions: usize,
}

impl DomainBuilder {
    pub fn build(self) -> Result<Domain, ModelError> {
        let mut object_index = HashMap::new();
        for (i, obj) in self.objects.iter().enumerate() {
            if object_index.insert(obj.name.clone(), ObjectId(i as u16)).is_some() {
                return Err(ModelError::DuplicateObject(obj.name.clone()));
            }
        }
        let check_fluent = |fl: &Fluent| -> Result<(), ModelError> {
            match self.predicates.get(&fl.predicate) {
                None => return Err(ModelError::UnknownPredicate(fl.predicate.clone())),
                Some(&arity) if arity != fl.args.len() => {
                    return Err(ModelError::ArityMismatch { fluent: fl.to_string(), expected: arity })
                }
                _ => {}
            }
            for a in &fl.args {
                if !object_index.contains_key(a) {
                    return Err(ModelError::UnknownObject(a.clone()));
                }
            }
            Ok(())
        };

        let mut instances = Vec::new();
        for (spec_idx, spec) in self.specs.iter().enumerate() {
            spec.check()?;
            for binding in spec.bindings() {
                let inst = spec.instantiate(&binding)?;
                // Bindings whose add and delete effects overlap are degenerate no-ops.
                if inst.add.iter().any(|f| inst.del.contains(f)) {
                    continue;
                }
                for fl in inst.pre.iter().chain(&inst.add).chain(&inst.del) {
                    check_fluent(fl)?;
                }
                instances.push((spec_idx, inst));
                if instances.len() > self.max_ground_actions {
                    return Err(ModelError::GroundingExplosion { limit: self.max_ground_actions });
                }
            }
        }

        let mut vocab: BTreeSet<Fluent> = BTreeSet::new();
        for (_, inst) in &instances {
            vocab.extend(inst.pre.iter().chain(&inst.add).chain(&inst.del).cloned());
        }
        for fl in &self.extra_fluents {
            check_fluent(fl)?;
            vocab.insert(fl.clone());
        }
        if vocab.len() > MAX_FLUENTS {
            return Err(ModelError::VocabularyTooLarge { size: vocab.len(), limit: MAX_FLUENTS });
        }
        let mut fluents: Vec<Fluent> = vocab.into_iter().collect();
        fluents.sort_by_key(|f| f.to_string());
        let fluent_index: HashMap<Fluent, FluentId> =
            fluents.iter().enumerate().map(|(i, f)| (f.clone(), FluentId(i as u16))).collect();
        let ids = |fs: &[Fluent]| -> Vec<FluentId> {
            let mut v: Vec<FluentId> = fs.iter().map(|f| fluent_index[f]).collect();
            v.sort();
            v.dedup();
            v
        };

        let mut actions = Vec::with_capacity(instances.len());
        for (spec_idx, inst) in instances {
            let spec = &self.specs[spec_idx];
            let obj = |name: &str| object_index.get(name).copied().ok_or_else(|| ModelError::UnknownObject(name.to_string()));
            let guard = match &inst.guard {
                Some(GroundGuardSpec::CookedFor(o)) => {
                    let duration = *self
                        .durations
                        .get(o)
                        .ok_or_else(|| ModelError::MissingDuration(o.clone()))?;
                    Some(Guard::CookedFor { object: obj(o)?, duration })
                }
                Some(GroundGuardSpec::Idle(o)) => Some(Guard::Idle { object: obj(o)? }),
                None => None,
            };
            let timer = match &inst.timer {
                Some((true, o)) => Some(Timer::Start(obj(o)?)),
                Some((false, o)) => Some(Timer::Stop(obj(o)?)),
                None => None,
            };
            let mut label = spec.name.clone();
            for a in &inst.args {
                label.push(' ');
                label.push_str(a);
            }
            actions.push(GroundAction {
                id: ActionId(0),
                spec: spec_idx,
                name: spec.name.clone(),
                args: inst.args.iter().map(|a| obj(a)).collect::<Result<_, _>>()?,
                label,
                cost: spec.cost,
                pre: ids(&inst.pre),
                add: ids(&inst.add),
                del: ids(&inst.del),
                guard,
                timer,
            });
        }
        actions.sort_by(|a, b| a.label.cmp(&b.label));
        let mut action_index = HashMap::new();
        for (i, a) in actions.iter_mut().enumerate() {
            a.id = ActionId(i as u32);
            if action_index.insert(a.label.clone(), a.id).is_some() {
                return Err(ModelError::DuplicateAction(a.label.clone()));
            }
        }

        Ok(Domain {
            objects: self.objects,
            object_index,
            predicates: self.predicates,
            fluents,
            fluent_index,
            specs: self.specs,
            actions,
            action_index,
        })
    }
}

impl Domain {
    pub fn objects(&self) -> &[Object] {
        &self.objects
    }

    pub fn object(&self, id: ObjectId) -> &Object {
        &self.objects[id.index()]
    }

    pub fn object_id(&self, name: &str) -> Option<ObjectId> {
        self.object_index.get(name).copied()
    }

    pub fn object_kind(&self, id: ObjectId) -> ObjectKind {
        self.objects[id.index()].kind
    }

    pub fn predicates(&self) -> &BTreeMap<String, usize> {
        &self.predicates
    }

    pub fn fluents(&self) -> &[Fluent] {
        &self.fluents
    }

    pub fn fluent(&self, id: FluentId) -> &Fluent {
        &self.fluents[id.index()]
    }

    pub fn fluent_id(&self, fluent: &Fluent) -> Option<FluentId> {
        self.fluent_index.get(fluent).copied()
    }

    pub fn specs(&self) -> &[ActionSpec] {
        &self.specs
    }

    /// Ground actions in canonical (label-sorted) order.
    pub fn actions(&self) -> &[GroundAction] {
        &self.actions
    }

    pub fn action(&self, id: ActionId) -> &GroundAction {
        &self.actions[id.index()]
    }

    pub fn action_by_label(&self, label: &str) -> Option<&GroundAction> {
        let normalized = label.split_whitespace().collect::<Vec<_>>().join(" ");
        self.action_index.get(&normalized).map(|id| &self.actions[id.index()])
    }

    pub fn fluent_set<'a, I>(&self, fluents: I) -> Result<FluentSet, ModelError>
    where
        I: IntoIterator<Item = &'a Fluent>,
    {
        fluents
            .into_iter()
            .map(|f| self.fluent_id(f).ok_or_else(|| ModelError::UnknownFluent(f.to_string())))
            .collect()
    }

    /// The true fluents of `state`, sorted by their text form.
    pub fn describe(&self, state: &State) -> Vec<&Fluent> {
        let mut v: Vec<&Fluent> = state.fluents.iter().map(|id| self.fluent(id)).collect();
        v.sort_by_key(|f| f.to_string());
        v
    }
}

/// One component of the goal: a meal's delivered fluent and its deadline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgoal {
    pub meal_id: String,
    pub satisfying_fluent: FluentId,
    pub deadline: u32,
    /// Ingredients this meal consumes.
    pub ingredients: Vec<String>,
}

/// `M = <D, I, G>` with the game's hard time limit.
#[derive(Debug, Clone)]
pub struct PlanningProblem {
    pub domain: Arc<Domain>,
    pub init: State,
    pub goals: Vec<Subgoal>,
    pub time_limit: u32,
}

impl PlanningProblem {
    pub fn new(domain: Arc<Domain>, init: State, goals: Vec<Subgoal>, time_limit: u32) -> Result<Self, ModelError> {
        if goals.is_empty() {
            return Err(ModelError::NoGoals);
        }
        if goals.windows(2).any(|w| w[0].deadline > w[1].deadline) {
            return Err(ModelError::UnsortedDeadlines);
        }
        for g in &goals {
            if g.satisfying_fluent.index() >= domain.fluents().len() {
                return Err(ModelError::UnknownFluent(format!("goal of {}", g.meal_id)));
            }
        }
        Ok(PlanningProblem { domain, init, goals, time_limit })
    }

    /// Same domain and goals, rooted at another state.
    pub fn with_init(&self, init: State) -> Self {
        PlanningProblem { init, ..self.clone() }
    }

    pub fn action(&self, id: ActionId) -> &GroundAction {
        self.domain.action(id)
    }

    pub fn goal(&self, meal: &str) -> Option<&Subgoal> {
        self.goals.iter().find(|g| g.meal_id == meal)
    }

    pub fn is_goal_state(&self, state: &State) -> bool {
        self.goals.iter().all(|g| state.holds(g.satisfying_fluent))
    }

    /// Goals not yet satisfied in `state`, in deadline order.
    pub fn pending_goals<'a>(&'a self, state: &'a State) -> impl Iterator<Item = &'a Subgoal> + 'a {
        self.goals.iter().filter(move |g| !state.holds(g.satisfying_fluent))
    }

    /// Ground actions applicable in `state`, in canonical order.
    pub fn applicable<'a>(&'a self, state: &'a State) -> impl Iterator<Item = &'a GroundAction> + 'a {
        self.domain.actions().iter().filter(move |a| state.is_applicable(a))
    }
}
