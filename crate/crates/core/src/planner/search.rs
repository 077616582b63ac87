use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::sync::atomic::Ordering as AtomicOrdering;
use std::time::Instant;

use smallvec::SmallVec;

use crate::model::{ActionId, FluentSet, Guard, ObjectId, Plan, PlanningProblem, State};

use super::heuristic::LandmarkHeuristic;
use super::{PlannerBudget, SolveError, SolveStats, TieBreak};

/// Identity of a search state. Cook timers are stored as time cooked so
/// far, capped at the longest wait any action checks, so states that only
/// differ in how long ago a finished cook began are merged.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Key {
    fluents: FluentSet,
    elapsed: u32,
    cooked_for: SmallVec<[(ObjectId, u32); 4]>,
}

fn key(state: &State, caps: &HashMap<ObjectId, u32>) -> Key {
    Key {
        fluents: state.fluents,
        elapsed: state.elapsed,
        cooked_for: state
            .timers()
            .iter()
            .map(|(o, start)| (*o, (state.elapsed - start).min(caps.get(o).copied().unwrap_or(0))))
            .collect(),
    }
}

struct Node {
    state: State,
    overtime: u32,
    parent: Option<usize>,
    via: Option<ActionId>,
}

#[derive(PartialEq, Eq)]
struct QueueEntry {
    f: (u32, u32),
    g: u32,
    via: u32,
    counter: u64,
    node: usize,
    tie: TieBreak,
}

impl Ord for QueueEntry {
    // BinaryHeap is a max-heap, so "greater" means "pop first".
    fn cmp(&self, other: &Self) -> Ordering {
        let g = match self.tie {
            TieBreak::Deeper => self.g.cmp(&other.g),
            TieBreak::Shallower => other.g.cmp(&self.g),
        };
        other
            .f
            .cmp(&self.f)
            .then(g)
            .then(other.via.cmp(&self.via))
            .then(other.counter.cmp(&self.counter))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn delivery_overtime(problem: &PlanningProblem, before: &State, after: &State) -> u32 {
    problem
        .goals
        .iter()
        .filter(|g| after.holds(g.satisfying_fluent) && !before.holds(g.satisfying_fluent))
        .map(|g| after.elapsed.saturating_sub(g.deadline))
        .sum()
}

fn extract(problem: &PlanningProblem, nodes: &[Node], mut at: usize) -> Plan {
    let mut steps = Vec::new();
    while let Some(via) = nodes[at].via {
        steps.push(via);
        at = nodes[at].parent.expect("non-root node has a parent");
    }
    steps.reverse();
    Plan::new(problem, problem.init.elapsed, steps)
}

pub(super) fn astar(problem: &PlanningProblem, budget: &PlannerBudget) -> (Result<Plan, SolveError>, SolveStats) {
    let started = Instant::now();
    let mut stats = SolveStats::default();
    let mut heuristic = LandmarkHeuristic::new(problem);
    let caps: HashMap<ObjectId, u32> = {
        let mut caps = HashMap::new();
        for a in problem.domain.actions() {
            if let Some(Guard::CookedFor { object, duration }) = a.guard {
                let cap = caps.entry(object).or_insert(0);
                *cap = (*cap).max(duration);
            }
        }
        caps
    };

    let root = problem.init.clone();
    let Some(h) = heuristic.evaluate(problem, &root) else {
        return (Err(SolveError::Unsolvable), stats);
    };
    let mut nodes = vec![Node { state: root.clone(), overtime: 0, parent: None, via: None }];
    let mut best: HashMap<Key, u32> = HashMap::new();
    best.insert(key(&root, &caps), 0);
    let mut open = BinaryHeap::new();
    let mut counter = 0u64;
    open.push(QueueEntry { f: h, g: 0, via: 0, counter, node: 0, tie: budget.tie_break });
    let mut incumbent: Option<(u32, u32, usize)> = None;
    let mut exhausted = false;

    while let Some(entry) = open.pop() {
        let node = &nodes[entry.node];
        let state = node.state.clone();
        let overtime = node.overtime;
        if best.get(&key(&state, &caps)).is_some_and(|b| *b < overtime) {
            continue;
        }
        if problem.is_goal_state(&state) {
            return (Ok(extract(problem, &nodes, entry.node)), stats);
        }
        if state.elapsed >= problem.time_limit {
            continue;
        }
        stats.expanded += 1;
        if stats.expanded % 1024 == 1 {
            let cancelled = budget.cancel.as_ref().is_some_and(|c| c.load(AtomicOrdering::Relaxed));
            if cancelled {
                return (Err(SolveError::Cancelled), stats);
            }
            if budget.max_wall_time.is_some_and(|w| started.elapsed() >= w) {
                exhausted = true;
                break;
            }
        }
        if stats.expanded > budget.max_expansions {
            exhausted = true;
            break;
        }
        let parent = entry.node;
        for action in problem.domain.actions() {
            if !state.is_applicable(action) {
                continue;
            }
            let next = state.successor(action);
            let ot = overtime + delivery_overtime(problem, &state, &next);
            match best.entry(key(&next, &caps)) {
                Entry::Occupied(mut e) => {
                    if *e.get() <= ot {
                        continue;
                    }
                    e.insert(ot);
                }
                Entry::Vacant(e) => {
                    e.insert(ot);
                }
            }
            let Some((h_ot, h_c)) = heuristic.evaluate(problem, &next) else {
                continue;
            };
            stats.generated += 1;
            let g = next.elapsed - problem.init.elapsed;
            nodes.push(Node { state: next, overtime: ot, parent: Some(parent), via: Some(action.id) });
            let idx = nodes.len() - 1;
            if h_ot == 0 && h_c == 0 && problem.is_goal_state(&nodes[idx].state) {
                let better = incumbent.is_none_or(|(o, c, _)| (ot, g) < (o, c));
                if better {
                    incumbent = Some((ot, g, idx));
                }
            }
            counter += 1;
            open.push(QueueEntry {
                f: (ot + h_ot, g + h_c),
                g,
                via: action.id.0,
                counter,
                node: idx,
                tie: budget.tie_break,
            });
        }
    }
    if !exhausted {
        return (Err(SolveError::Unsolvable), stats);
    }
    let best = incumbent.map(|(_, _, idx)| extract(problem, &nodes, idx));
    (Err(SolveError::BudgetExhausted { best }), stats)
}
