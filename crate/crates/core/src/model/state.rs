use smallvec::SmallVec;

use super::action::{GroundAction, Guard, ObjectId, Timer};
use super::fluent::{FluentId, FluentSet};
use super::ModelError;

/// A world state: the true fluents, the accumulated time cost, and the
/// elapsed cost at which each currently cooking ingredient started.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    pub fluents: FluentSet,
    pub elapsed: u32,
    cook_start: SmallVec<[(ObjectId, u32); 4]>,
}

impl State {
    pub fn new(fluents: FluentSet, elapsed: u32) -> Self {
        State { fluents, elapsed, cook_start: SmallVec::new() }
    }

    pub fn with_timers<I>(fluents: FluentSet, elapsed: u32, timers: I) -> Self
    where
        I: IntoIterator<Item = (ObjectId, u32)>,
    {
        let mut state = State::new(fluents, elapsed);
        for (obj, start) in timers {
            state.set_timer(obj, start);
        }
        state
    }

    pub fn holds(&self, f: FluentId) -> bool {
        self.fluents.contains(f)
    }

    pub fn cook_start(&self, object: ObjectId) -> Option<u32> {
        self.cook_start.iter().find(|(o, _)| *o == object).map(|(_, t)| *t)
    }

    /// Timers sorted by object.
    pub fn timers(&self) -> &[(ObjectId, u32)] {
        &self.cook_start
    }

    fn set_timer(&mut self, object: ObjectId, start: u32) {
        match self.cook_start.binary_search_by_key(&object, |(o, _)| *o) {
            Ok(i) => self.cook_start[i].1 = start,
            Err(i) => self.cook_start.insert(i, (object, start)),
        }
    }

    fn clear_timer(&mut self, object: ObjectId) {
        self.cook_start.retain(|(o, _)| *o != object);
    }

    pub fn guard_holds(&self, guard: &Guard) -> bool {
        match *guard {
            Guard::CookedFor { object, duration } => match self.cook_start(object) {
                Some(start) => self.elapsed.saturating_sub(start) >= duration,
                None => false,
            },
            Guard::Idle { object } => self.cook_start(object).is_none(),
        }
    }

    /// `s ⊨ pre(a)` plus the action's elapsed-cost guard.
    pub fn is_applicable(&self, action: &GroundAction) -> bool {
        self.fluents.contains_all(&action.pre) && action.guard.as_ref().is_none_or(|g| self.guard_holds(g))
    }

    /// The transition function. Fails when the action is not applicable.
    pub fn apply(&self, action: &GroundAction) -> Result<State, ModelError> {
        if !self.is_applicable(action) {
            return Err(ModelError::Inapplicable { action: action.label.clone() });
        }
        Ok(self.successor(action))
    }

    /// Transition without the applicability check; callers must have checked.
    pub fn successor(&self, action: &GroundAction) -> State {
        let mut next = self.clone();
        for f in &action.del {
            next.fluents.remove(*f);
        }
        for f in &action.add {
            next.fluents.insert(*f);
        }
        next.elapsed += action.cost;
        match action.timer {
            Some(Timer::Start(obj)) => next.set_timer(obj, next.elapsed),
            Some(Timer::Stop(obj)) => next.clear_timer(obj),
            None => {}
        }
        next
    }
}
