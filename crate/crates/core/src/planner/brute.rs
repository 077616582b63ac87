use std::collections::HashMap;

use crate::model::{ActionId, FluentSet, Plan, PlanningProblem, State};

/// Outcome of exhaustive enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BruteResult {
    Optimal(Plan),
    NoPlan,
    /// Some partial plan at the depth bound could still beat `best`.
    BoundTooSmall { best: Option<Plan> },
}

struct Entry {
    state: State,
    overtime: u32,
    parent: usize,
    via: Option<ActionId>,
}

/// Facts reachable from `state` when deletes and cook waits are ignored.
fn relaxed_closure(problem: &PlanningProblem, state: &State) -> FluentSet {
    let mut reached = state.fluents;
    loop {
        let mut grew = false;
        for a in problem.domain.actions() {
            if a.pre.iter().all(|f| reached.contains(*f)) {
                for f in &a.add {
                    if !reached.contains(*f) {
                        reached.insert(*f);
                        grew = true;
                    }
                }
            }
        }
        if !grew {
            return reached;
        }
    }
}

fn hopeless(problem: &PlanningProblem, state: &State) -> bool {
    let reached = relaxed_closure(problem, state);
    problem.goals.iter().any(|g| !reached.contains(g.satisfying_fluent))
}

/// Overtime already locked in: accrued so far, plus the lateness of every
/// pending meal, which can only be delivered after at least one more step.
fn locked_overtime(problem: &PlanningProblem, state: &State, accrued: u32) -> u32 {
    accrued + problem.pending_goals(state).map(|g| (state.elapsed + 1).saturating_sub(g.deadline)).sum::<u32>()
}

/// Exact lexicographic (overtime, cost) optimum among plans of at most
/// `depth_bound` steps, by breadth-first enumeration with duplicate
/// detection and incumbent pruning. Meant for small test instances.
pub fn brute_force_solve(problem: &PlanningProblem, depth_bound: usize) -> BruteResult {
    if hopeless(problem, &problem.init) {
        return BruteResult::NoPlan;
    }
    let origin = problem.init.elapsed;
    let mut arena = vec![Entry { state: problem.init.clone(), overtime: 0, parent: 0, via: None }];
    let mut seen: HashMap<State, u32> = HashMap::from([(problem.init.clone(), 0)]);
    let mut layer = vec![0usize];
    let mut best: Option<(u32, u32, usize)> = None;
    let mut cut_off = Vec::new();

    let beaten = |best: &Option<(u32, u32, usize)>, ot: u32, elapsed: u32| {
        best.is_some_and(|(b_ot, b_el, _)| ot > b_ot || (ot == b_ot && elapsed >= b_el))
    };

    for depth in 0..=depth_bound {
        let mut next_layer = Vec::new();
        for &idx in &layer {
            let (ot, elapsed) = (arena[idx].overtime, arena[idx].state.elapsed);
            if seen.get(&arena[idx].state).is_some_and(|b| *b < ot) {
                continue;
            }
            if problem.is_goal_state(&arena[idx].state) {
                if !beaten(&best, ot, elapsed) {
                    best = Some((ot, elapsed, idx));
                }
                continue;
            }
            let locked = locked_overtime(problem, &arena[idx].state, ot);
            if beaten(&best, locked, elapsed) || elapsed >= problem.time_limit {
                continue;
            }
            if depth == depth_bound {
                cut_off.push(idx);
                continue;
            }
            let state = arena[idx].state.clone();
            for a in problem.domain.actions() {
                let Ok(next) = state.apply(a) else { continue };
                let mut ot2 = ot;
                for g in &problem.goals {
                    if next.holds(g.satisfying_fluent) && !state.holds(g.satisfying_fluent) {
                        ot2 += next.elapsed.saturating_sub(g.deadline);
                    }
                }
                if seen.get(&next).is_some_and(|b| *b <= ot2) {
                    continue;
                }
                seen.insert(next.clone(), ot2);
                arena.push(Entry { state: next, overtime: ot2, parent: idx, via: Some(a.id) });
                next_layer.push(arena.len() - 1);
            }
        }
        layer = next_layer;
        if layer.is_empty() {
            break;
        }
    }

    let plan = best.map(|(_, _, mut idx)| {
        let mut steps = Vec::new();
        while let Some(via) = arena[idx].via {
            steps.push(via);
            idx = arena[idx].parent;
        }
        steps.reverse();
        Plan::new(problem, origin, steps)
    });
    // Partial plans cut off at the bound only matter if they could still win.
    if cut_off.iter().any(|&i| {
        let locked = locked_overtime(problem, &arena[i].state, arena[i].overtime);
        !beaten(&best, locked, arena[i].state.elapsed)
    }) {
        return BruteResult::BoundTooSmall { best: plan };
    }
    match plan {
        Some(p) => BruteResult::Optimal(p),
        None => BruteResult::NoPlan,
    }
}
