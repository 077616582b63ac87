use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::fluent::{Fluent, FluentId};
use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    Agent,
    Station,
    Ingredient,
    Meal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Object {
    pub name: String,
    pub kind: ObjectKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjectId(pub u16);

impl ObjectId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionId(pub u32);

impl ActionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Argument of a fluent pattern: a schema parameter or a fixed object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Self {
        Term::Const(name.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FluentPattern {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl FluentPattern {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        FluentPattern { predicate: predicate.to_string(), args }
    }

    fn ground(&self, binding: &BTreeMap<String, String>) -> Result<Fluent, ModelError> {
        let args = self
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Ok(c.clone()),
                Term::Var(v) => binding
                    .get(v)
                    .cloned()
                    .ok_or_else(|| ModelError::UnboundVariable(v.clone())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Fluent { predicate: self.predicate.clone(), args })
    }

    fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }
}

/// A schema parameter together with the objects it may be bound to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub domain: Vec<String>,
}

impl Param {
    pub fn new<I, S>(name: &str, domain: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Param { name: name.to_string(), domain: domain.into_iter().map(Into::into).collect() }
    }
}

/// Elapsed-cost conditions an action can carry besides its fluent preconditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuardSpec {
    /// The bound object has been cooking for at least its configured duration.
    CookedFor(String),
    /// The bound object is not currently cooking.
    Idle(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimerSpec {
    Start(String),
    Stop(String),
}

/// Lifted action schema: cost, preconditions, add and delete effects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSpec {
    pub name: String,
    pub params: Vec<Param>,
    pub cost: u32,
    pub pre: Vec<FluentPattern>,
    pub add: Vec<FluentPattern>,
    pub del: Vec<FluentPattern>,
    pub guard: Option<GuardSpec>,
    pub timer: Option<TimerSpec>,
}

impl ActionSpec {
    pub fn check(&self) -> Result<(), ModelError> {
        if self.cost == 0 {
            return Err(ModelError::ZeroCost(self.name.clone()));
        }
        let declared = |v: &str| self.params.iter().any(|p| p.name == v);
        let pattern_vars = self.pre.iter().chain(&self.add).chain(&self.del).flat_map(|p| p.vars());
        let extra_vars = self.guard.iter().map(|g| match g {
            GuardSpec::CookedFor(v) | GuardSpec::Idle(v) => v.as_str(),
        });
        let timer_vars = self.timer.iter().map(|t| match t {
            TimerSpec::Start(v) | TimerSpec::Stop(v) => v.as_str(),
        });
        for v in pattern_vars.chain(extra_vars).chain(timer_vars) {
            if !declared(v) {
                return Err(ModelError::UndeclaredVariable { action: self.name.clone(), var: v.to_string() });
            }
        }
        Ok(())
    }

    /// Every binding of the parameters, in lexicographic order of the parameter domains.
    pub(crate) fn bindings(&self) -> Vec<BTreeMap<String, String>> {
        let mut out = vec![BTreeMap::new()];
        for param in &self.params {
            let mut next = Vec::with_capacity(out.len() * param.domain.len());
            for partial in &out {
                for obj in &param.domain {
                    let mut b = partial.clone();
                    b.insert(param.name.clone(), obj.clone());
                    next.push(b);
                }
            }
            out = next;
        }
        out
    }

    pub(crate) fn instantiate(&self, binding: &BTreeMap<String, String>) -> Result<LiftedInstance, ModelError> {
        let ground_all = |ps: &[FluentPattern]| ps.iter().map(|p| p.ground(binding)).collect::<Result<Vec<_>, _>>();
        let lookup = |v: &String| binding.get(v).cloned().ok_or_else(|| ModelError::UnboundVariable(v.clone()));
        Ok(LiftedInstance {
            args: self.params.iter().map(|p| lookup(&p.name)).collect::<Result<_, _>>()?,
            pre: ground_all(&self.pre)?,
            add: ground_all(&self.add)?,
            del: ground_all(&self.del)?,
            guard: match &self.guard {
                Some(GuardSpec::CookedFor(v)) => Some(GroundGuardSpec::CookedFor(lookup(v)?)),
                Some(GuardSpec::Idle(v)) => Some(GroundGuardSpec::Idle(lookup(v)?)),
                None => None,
            },
            timer: match &self.timer {
                Some(TimerSpec::Start(v)) => Some((true, lookup(v)?)),
                Some(TimerSpec::Stop(v)) => Some((false, lookup(v)?)),
                None => None,
            },
        })
    }
}

pub(crate) enum GroundGuardSpec {
    CookedFor(String),
    Idle(String),
}

pub(crate) struct LiftedInstance {
    pub args: Vec<String>,
    pub pre: Vec<Fluent>,
    pub add: Vec<Fluent>,
    pub del: Vec<Fluent>,
    pub guard: Option<GroundGuardSpec>,
    /// `(starts, object)`
    pub timer: Option<(bool, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Guard {
    CookedFor { object: ObjectId, duration: u32 },
    Idle { object: ObjectId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Timer {
    Start(ObjectId),
    Stop(ObjectId),
}

/// A fully instantiated action. `label` is the canonical text form,
/// e.g. `cut chef gatherStation cutStation tomato1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    pub id: ActionId,
    pub spec: usize,
    pub name: String,
    pub args: Vec<ObjectId>,
    pub label: String,
    pub cost: u32,
    pub pre: Vec<FluentId>,
    pub add: Vec<FluentId>,
    pub del: Vec<FluentId>,
    pub guard: Option<Guard>,
    pub timer: Option<Timer>,
}

impl GroundAction {
    pub fn adds(&self, f: FluentId) -> bool {
        self.add.contains(&f)
    }

    pub fn deletes(&self, f: FluentId) -> bool {
        self.del.contains(&f)
    }

    pub fn requires(&self, f: FluentId) -> bool {
        self.pre.contains(&f)
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}
