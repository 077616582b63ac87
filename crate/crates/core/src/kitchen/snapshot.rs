use std::fmt::Write as _;

use crate::model::{Fluent, FluentSet, PlanningProblem, State};

use super::KitchenError;

/// Canonical text form of a state: an `elapsed` header, one `cook_start`
/// line per running timer, then the true fluents sorted by text.
pub fn write_snapshot(problem: &PlanningProblem, state: &State) -> String {
    let domain = &problem.domain;
    let mut out = format!("elapsed {}\n", state.elapsed);
    let mut timers: Vec<(&str, u32)> =
        state.timers().iter().map(|(o, t)| (domain.object(*o).name.as_str(), *t)).collect();
    timers.sort();
    for (name, t) in timers {
        writeln!(out, "cook_start {name} {t}").unwrap();
    }
    for f in domain.describe(state) {
        writeln!(out, "{f}").unwrap();
    }
    out
}

pub fn read_snapshot(problem: &PlanningProblem, text: &str) -> Result<State, KitchenError> {
    let domain = &problem.domain;
    let err = |line: usize, message: String| KitchenError::Snapshot { line, message };
    let mut elapsed = None;
    let mut timers = Vec::new();
    let mut fluents = FluentSet::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let words: Vec<&str> = raw.split_whitespace().collect();
        match words.as_slice() {
            [] => continue,
            ["elapsed", v] => {
                elapsed = Some(v.parse::<u32>().map_err(|e| err(line, e.to_string()))?);
            }
            ["cook_start", obj, v] => {
                let id = domain.object_id(obj).ok_or_else(|| err(line, format!("unknown object `{obj}`")))?;
                timers.push((id, v.parse::<u32>().map_err(|e| err(line, e.to_string()))?));
            }
            _ => {
                let f = Fluent::parse(raw).ok_or_else(|| err(line, "empty fluent".into()))?;
                let id = domain.fluent_id(&f).ok_or_else(|| err(line, format!("unknown fluent `{f}`")))?;
                fluents.insert(id);
            }
        }
    }
    let elapsed = elapsed.ok_or_else(|| err(0, "missing `elapsed` line".into()))?;
    let state = State::with_timers(fluents, elapsed, timers);
    super::check_state(&state, problem).map_err(|m| err(0, m))?;
    Ok(state)
}
