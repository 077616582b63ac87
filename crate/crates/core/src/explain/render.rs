use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{GroundAction, Plan, PlanningProblem, State};

use super::attribution::{attribute_subgoals, SubgoalAttribution};
use super::lexicon::Lexicon;
use super::links::{extract_causal_links, CausalLink};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplanationMode {
    ActionOnly,
    Clc,
    Subgoal,
}

impl ExplanationMode {
    pub const ALL: [ExplanationMode; 3] = [ExplanationMode::ActionOnly, ExplanationMode::Clc, ExplanationMode::Subgoal];

    pub fn as_str(self) -> &'static str {
        match self {
            ExplanationMode::ActionOnly => "action_only",
            ExplanationMode::Clc => "clc",
            ExplanationMode::Subgoal => "subgoal",
        }
    }
}

impl fmt::Display for ExplanationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExplanationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "action" | "action_only" => Ok(ExplanationMode::ActionOnly),
            "clc" => Ok(ExplanationMode::Clc),
            "subgoal" => Ok(ExplanationMode::Subgoal),
            _ => Err(format!("unknown explanation mode `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    None,
    Subgoal(SubgoalAttribution),
    Links { links: Vec<CausalLink> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplanationRendering {
    pub mode: ExplanationMode,
    pub text: String,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExplainError {
    #[error("lexicon has no phrases for action `{0}`")]
    MissingAction(String),
    #[error("lexicon has no display name for `{0}`")]
    MissingSymbol(String),
    #[error("template placeholder `{{{0}}}` does not match any parameter of `{1}`")]
    UnknownPlaceholder(String, String),
    #[error("{0} explanations need a {1}")]
    MissingPayload(ExplanationMode, &'static str),
}

/// A template split at its last placeholder: the consumer clause
/// `to move the {item}` becomes prefix `to move the` and object `tomato`.
struct Clause {
    prefix: String,
    object: String,
}

fn fill(
    problem: &PlanningProblem,
    lexicon: &Lexicon,
    action: &GroundAction,
    template: &str,
    purpose: Option<&str>,
) -> Result<Clause, ExplainError> {
    let params = &problem.domain.specs()[action.spec].params;
    let mut prefix = String::new();
    let mut object: Option<String> = None;
    let mut rest = template;
    while let Some((open, close)) = rest.find('{').and_then(|o| rest[o..].find('}').map(|c| (o, o + c))) {
        let name = &rest[open + 1..close];
        let value = if name == "purpose" {
            purpose.unwrap_or_default().to_string()
        } else {
            let idx = params
                .iter()
                .position(|p| p.name.trim_start_matches('?') == name)
                .ok_or_else(|| ExplainError::UnknownPlaceholder(name.to_string(), action.name.clone()))?;
            let symbol = &problem.domain.object(action.args[idx]).name;
            lexicon.display(symbol).ok_or_else(|| ExplainError::MissingSymbol(symbol.clone()))?.to_string()
        };
        if let Some(previous) = object.take() {
            prefix.push_str(&previous);
        }
        prefix.push_str(&rest[..open]);
        object = Some(value);
        rest = &rest[close + 1..];
    }
    Ok(match object {
        Some(mut object) => {
            object.push_str(rest);
            Clause { prefix: prefix.trim().to_string(), object: object.trim().to_string() }
        }
        None => Clause { prefix: rest.trim().to_string(), object: String::new() },
    })
}

fn join(clause: &Clause) -> String {
    match (clause.prefix.is_empty(), clause.object.is_empty()) {
        (true, _) => clause.object.clone(),
        (_, true) => clause.prefix.clone(),
        _ => format!("{} {}", clause.prefix, clause.object),
    }
}

/// The imperative clause for `action`, e.g. `Chop the tomato`.
pub fn action_text(problem: &PlanningProblem, lexicon: &Lexicon, action: &GroundAction) -> Result<String, ExplainError> {
    let phrases = lexicon.actions.get(&action.name).ok_or_else(|| ExplainError::MissingAction(action.name.clone()))?;
    Ok(join(&fill(problem, lexicon, action, &phrases.text, None)?))
}

/// Renders one explanation. Subgoal mode needs `attribution`; CLC mode uses
/// `consumers`, the later steps the action enables (possibly none).
pub fn render(
    problem: &PlanningProblem,
    lexicon: &Lexicon,
    action: &GroundAction,
    mode: ExplanationMode,
    attribution: Option<&SubgoalAttribution>,
    consumers: &[&GroundAction],
) -> Result<String, ExplainError> {
    let phrases = lexicon.actions.get(&action.name).ok_or_else(|| ExplainError::MissingAction(action.name.clone()))?;
    let text = action_text(problem, lexicon, action)?;
    match mode {
        ExplanationMode::ActionOnly => Ok(format!("{text}.")),
        ExplanationMode::Subgoal => {
            let attr = attribution.ok_or(ExplainError::MissingPayload(mode, "subgoal attribution"))?;
            let meal = lexicon.display(&attr.meal_id).ok_or_else(|| ExplainError::MissingSymbol(attr.meal_id.clone()))?;
            Ok(format!("{text} {} {meal}.", phrases.purpose))
        }
        ExplanationMode::Clc => {
            // Group clause objects under their shared prefix, keeping first-seen order.
            let mut groups: Vec<(String, Vec<String>)> = Vec::new();
            for consumer in consumers {
                let enables = &lexicon
                    .actions
                    .get(&consumer.name)
                    .ok_or_else(|| ExplainError::MissingAction(consumer.name.clone()))?
                    .enables;
                let clause = fill(problem, lexicon, consumer, enables, Some(&phrases.purpose))?;
                match groups.iter_mut().find(|(p, _)| *p == clause.prefix) {
                    Some((_, objects)) => {
                        if !objects.contains(&clause.object) {
                            objects.push(clause.object);
                        }
                    }
                    None => groups.push((clause.prefix, vec![clause.object])),
                }
            }
            let clauses: Vec<String> = groups
                .into_iter()
                .map(|(prefix, objects)| join(&Clause { prefix, object: objects.join(" or ") }))
                .collect();
            if clauses.is_empty() {
                Ok(format!("{text}."))
            } else {
                Ok(format!("{text} {}.", clauses.join(" or ")))
            }
        }
    }
}

/// Explains step `step` of `plan` (rooted at `root`) in the given mode.
pub fn explain_step(
    problem: &PlanningProblem,
    lexicon: &Lexicon,
    plan: &Plan,
    root: &State,
    step: usize,
    mode: ExplanationMode,
) -> Result<ExplanationRendering, ExplainError> {
    let action = problem.action(plan.steps[step]);
    let (text, payload) = match mode {
        ExplanationMode::ActionOnly => (render(problem, lexicon, action, mode, None, &[])?, Payload::None),
        ExplanationMode::Subgoal => {
            let attr = attribute_subgoals(plan, problem, root).swap_remove(step);
            (render(problem, lexicon, action, mode, Some(&attr), &[])?, Payload::Subgoal(attr))
        }
        ExplanationMode::Clc => {
            let links = extract_causal_links(plan, problem, step);
            let mut consumers: Vec<usize> = links.iter().map(|l| l.consumer).collect();
            consumers.dedup();
            let actions: Vec<&GroundAction> = consumers.iter().map(|j| problem.action(plan.steps[*j])).collect();
            (render(problem, lexicon, action, mode, None, &actions)?, Payload::Links { links })
        }
    };
    Ok(ExplanationRendering { mode, text, payload })
}
