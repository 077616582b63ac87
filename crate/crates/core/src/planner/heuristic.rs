use smallvec::SmallVec;

use crate::model::{ActionId, FluentId, FluentSet, Guard, ObjectId, ObjectKind, PlanningProblem, State, Timer};

/// Bitset over ground actions.
#[derive(Debug, Clone, Default)]
struct ActionMask(Vec<u64>);

impl ActionMask {
    fn with_len(n: usize) -> Self {
        ActionMask(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, id: ActionId) {
        self.0[id.index() / 64] |= 1 << (id.index() % 64);
    }

    fn disjoint(&self, other: &ActionMask) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == 0)
    }

    fn union(&mut self, other: &ActionMask) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn clear(&mut self) {
        self.0.iter_mut().for_each(|w| *w = 0);
    }
}

/// Per-fluent data used by the landmark bound.
#[derive(Debug, Clone)]
struct FactInfo {
    achievers: usize,
    mask: ActionMask,
    min_cost: u32,
    /// Preconditions shared by every achiever.
    common_pre: Vec<FluentId>,
    /// Set when every achiever waits on the same cook timer.
    timer: Option<(ObjectId, u32)>,
}

/// Admissible lower bounds on remaining overtime and remaining cost.
///
/// Every false fact that is a shared precondition of all achievers of a
/// pending goal (transitively) must be made true before that goal. Summing
/// minimum achiever costs over landmarks with pairwise disjoint achiever
/// sets bounds the work left, and a critical-path pass over the same facts,
/// including cook waits, bounds each goal's earliest completion time.
#[derive(Debug, Clone)]
pub struct LandmarkHeuristic {
    facts: Vec<FactInfo>,
    /// Actions that start each object's timer.
    starters: Vec<Vec<ActionId>>,
    n_actions: usize,
    /// Position of each fluent in the greedy landmark order: fewest
    /// achievers first, then costliest.
    rank: Vec<u32>,
    travel: Option<Travel>,
    scratch: Scratch,
}

const UNSEEN: u8 = 0;
const ACTIVE: u8 = 1;
const DONE: u8 = 2;
const INF: u32 = u32::MAX / 4;
const MAX_SEQUENCED: usize = 6;

#[derive(Debug, Clone, Copy)]
struct Job {
    earliest: u32,
    work: u32,
    deadline: u32,
}

/// Least total overtime over every delivery order, where the k-th delivery
/// waits for the exclusive work of all meals delivered up to it.
fn sequenced_overtime(elapsed: u32, jobs: &mut [Job]) -> u32 {
    fn go(elapsed: u32, done: u32, jobs: &mut [Job], k: usize, acc: u32, best: &mut u32) {
        if acc >= *best {
            return;
        }
        if k == jobs.len() {
            *best = acc;
            return;
        }
        for i in k..jobs.len() {
            jobs.swap(k, i);
            let job = jobs[k];
            let spent = done + job.work;
            let finish = elapsed + spent.max(job.earliest);
            go(elapsed, spent, jobs, k + 1, acc + finish.saturating_sub(job.deadline), best);
            jobs.swap(k, i);
        }
    }
    let mut best = u32::MAX;
    go(elapsed, 0, jobs, 0, 0, &mut best);
    best
}

#[derive(Debug, Clone, Default)]
struct Scratch {
    mark: Vec<u8>,
    time: Vec<u32>,
    /// Landmarks of each settled fact, itself included.
    landmarks: Vec<FluentSet>,
    dead: bool,
}

impl LandmarkHeuristic {
    pub fn new(problem: &PlanningProblem) -> Self {
        let domain = &problem.domain;
        let n_fluents = domain.fluents().len();
        let n_actions = domain.actions().len();
        let mut by_fact: Vec<Vec<ActionId>> = vec![Vec::new(); n_fluents];
        let mut starters = vec![Vec::new(); domain.objects().len()];
        for a in domain.actions() {
            for f in &a.add {
                by_fact[f.index()].push(a.id);
            }
            if let Some(Timer::Start(obj)) = a.timer {
                starters[obj.index()].push(a.id);
            }
        }
        let facts: Vec<FactInfo> = by_fact
            .into_iter()
            .map(|achievers| {
                let mut mask = ActionMask::with_len(n_actions);
                let mut common: Option<Vec<FluentId>> = None;
                let mut timer = None;
                let mut all_timed = !achievers.is_empty();
                for id in &achievers {
                    let a = domain.action(*id);
                    mask.set(*id);
                    common = Some(match common {
                        None => a.pre.clone(),
                        Some(c) => c.into_iter().filter(|f| a.requires(*f)).collect(),
                    });
                    match a.guard {
                        Some(Guard::CookedFor { object, duration }) if timer.is_none_or(|t| t == (object, duration)) => {
                            timer = Some((object, duration))
                        }
                        _ => all_timed = false,
                    }
                }
                FactInfo {
                    achievers: achievers.len(),
                    min_cost: achievers.iter().map(|id| domain.action(*id).cost).min().unwrap_or(INF),
                    mask,
                    common_pre: common.unwrap_or_default(),
                    timer: if all_timed { timer } else { None },
                }
            })
            .collect();
        let mut by_rank: Vec<usize> = (0..facts.len()).collect();
        by_rank.sort_by_key(|&f| (facts[f].achievers, std::cmp::Reverse(facts[f].min_cost), f));
        let mut rank = vec![0; facts.len()];
        for (r, f) in by_rank.into_iter().enumerate() {
            rank[f] = r as u32;
        }
        let scratch = Scratch {
            mark: vec![UNSEEN; facts.len()],
            time: vec![0; facts.len()],
            landmarks: vec![FluentSet::new(); facts.len()],
            dead: false,
        };
        LandmarkHeuristic { facts, starters, n_actions, rank, travel: Travel::new(problem), scratch }
    }

    /// `(overtime bound, cost bound)`, or `None` when no plan can reach the goals.
    pub fn evaluate(&mut self, problem: &PlanningProblem, state: &State) -> Option<(u32, u32)> {
        let mut sc = std::mem::take(&mut self.scratch);
        sc.mark.fill(UNSEEN);
        sc.dead = false;
        let mut per_goal: SmallVec<[(u32, FluentSet); 4]> = SmallVec::new();
        let mut all = FluentSet::new();
        for goal in problem.pending_goals(state) {
            let f = goal.satisfying_fluent;
            let t = self.earliest(problem, state, f, &mut sc);
            if sc.dead || t >= INF {
                self.scratch = sc;
                return None;
            }
            let landmarks = if state.holds(f) { FluentSet::new() } else { sc.landmarks[f.index()] };
            all.union_with(&landmarks);
            per_goal.push((t, landmarks));
        }
        self.scratch = sc;
        if per_goal.is_empty() {
            return Some((0, 0));
        }
        let mut order: Vec<FluentId> = all.iter().collect();
        order.sort_unstable_by_key(|f| self.rank[f.index()]);

        let mut used = ActionMask::with_len(self.n_actions);
        let mut h_ot = 0u32;
        let mut longest = 0u32;
        let mut jobs: SmallVec<[Job; 4]> = SmallVec::new();
        for (goal, (t, landmarks)) in problem.pending_goals(state).zip(&per_goal) {
            used.clear();
            let bound = self.disjoint_sum(&order, |f| landmarks.contains(f), &mut used).max(*t);
            longest = longest.max(bound);
            h_ot += (state.elapsed + bound).saturating_sub(goal.deadline);
            jobs.push(Job { earliest: bound, work: 0, deadline: goal.deadline });
        }
        if jobs.len() > 1 && jobs.len() <= MAX_SEQUENCED {
            // Work only one meal needs, drawn from pairwise disjoint achievers
            // so no action is counted for two meals.
            used.clear();
            for (i, (_, landmarks)) in per_goal.iter().enumerate() {
                let mut own = *landmarks;
                for (j, (_, other)) in per_goal.iter().enumerate() {
                    if j != i {
                        own.difference_with(other);
                    }
                }
                jobs[i].work = self.disjoint_sum(&order, |f| own.contains(f), &mut used);
            }
            h_ot = h_ot.max(sequenced_overtime(state.elapsed, &mut jobs));
        }
        used.clear();
        let h_cost = self.disjoint_sum(&order, |_| true, &mut used).max(longest).max(self.with_travel(state, &order));
        Some((h_ot, h_cost))
    }

    /// Greedy sum of minimum achiever costs over the selected landmarks of
    /// `order` whose achiever sets are disjoint from each other and `used`.
    fn disjoint_sum(&self, order: &[FluentId], select: impl Fn(FluentId) -> bool, used: &mut ActionMask) -> u32 {
        self.disjoint_pick(order, select, used, |_| {})
    }

    fn disjoint_pick(
        &self,
        order: &[FluentId],
        select: impl Fn(FluentId) -> bool,
        used: &mut ActionMask,
        mut pick: impl FnMut(FluentId),
    ) -> u32 {
        let mut sum = 0;
        for &f in order {
            if !select(f) {
                continue;
            }
            let info = &self.facts[f.index()];
            if info.mask.disjoint(used) {
                used.union(&info.mask);
                sum += info.min_cost;
                pick(f);
            }
        }
        sum
    }

    /// Landmark sum over non-agent facts plus the agent arrivals it still lacks.
    /// Each object that must leave a station needs the agent there first, and
    /// every arrival beyond the ones landmark achievers can provide is an
    /// extra action.
    fn with_travel(&self, state: &State, all: &[FluentId]) -> u32 {
        let Some(travel) = &self.travel else { return 0 };
        let mut arrivals = vec![0u32; travel.agent_at.len()];
        let mut used = ActionMask::with_len(self.n_actions);
        let sum = self.disjoint_pick(all, |f| !travel.agent_at.contains(&f), &mut used, |f| {
            let mask = travel.dests[f.index()];
            for (s, n) in arrivals.iter_mut().enumerate() {
                if mask & (1 << s) != 0 {
                    *n += 1;
                }
            }
        });
        let mut moving = vec![false; travel.owner.len()];
        for f in all.iter().filter(|f| !travel.agent_at.contains(f)) {
            if let Some((obj, _)) = travel.placed[f.index()] {
                moving[obj] = true;
            }
        }
        let mut departures = vec![0u32; travel.agent_at.len()];
        for (f, place) in travel.placed.iter().enumerate() {
            if let Some((obj, station)) = *place {
                if moving[obj] && travel.departs[f] && state.holds(FluentId(f as u16)) {
                    departures[station] += 1;
                }
            }
        }
        let extra: u32 = (0..departures.len())
            .map(|s| {
                let here = u32::from(state.holds(travel.agent_at[s]));
                departures[s].saturating_sub(here + arrivals[s]) * travel.arrival_cost[s]
            })
            .sum();
        sum + extra
    }

    /// Lower bound on the time from now until `f` can first hold.
    fn earliest(&self, problem: &PlanningProblem, state: &State, f: FluentId, sc: &mut Scratch) -> u32 {
        if state.holds(f) {
            return 0;
        }
        match sc.mark[f.index()] {
            DONE => return sc.time[f.index()],
            // Every achiever needs `f` first: unreachable.
            ACTIVE => {
                sc.dead = true;
                return INF;
            }
            _ => {}
        }
        let info = &self.facts[f.index()];
        if info.achievers == 0 {
            sc.dead = true;
            return INF;
        }
        sc.mark[f.index()] = ACTIVE;
        let mut ready = 0;
        let mut landmarks = FluentSet::new();
        landmarks.insert(f);
        for q in &info.common_pre {
            ready = ready.max(self.earliest(problem, state, *q, sc));
            if !state.holds(*q) {
                landmarks.union_with(&sc.landmarks[q.index()]);
            }
        }
        sc.landmarks[f.index()] = landmarks;
        if let Some((obj, duration)) = info.timer {
            let wait = match state.cook_start(obj) {
                Some(start) => duration.saturating_sub(state.elapsed - start),
                None => self.start_time(problem, state, obj, sc).saturating_add(duration),
            };
            ready = ready.max(wait);
        }
        let t = ready.saturating_add(info.min_cost).min(INF);
        sc.mark[f.index()] = DONE;
        sc.time[f.index()] = t;
        t
    }

    /// Earliest completion of any action that starts `obj`'s timer, using
    /// only the precondition times already settled in this evaluation.
    fn start_time(&self, problem: &PlanningProblem, state: &State, obj: ObjectId, sc: &mut Scratch) -> u32 {
        let starters = &self.starters[obj.index()];
        if starters.is_empty() {
            sc.dead = true;
            return INF;
        }
        starters
            .iter()
            .map(|id| {
                let a = problem.action(*id);
                let ready = a
                    .pre
                    .iter()
                    .filter(|q| !state.holds(**q) && sc.mark[q.index()] == DONE)
                    .map(|q| sc.time[q.index()])
                    .max()
                    .unwrap_or(0);
                ready.saturating_add(a.cost)
            })
            .min()
            .unwrap_or(INF)
            .min(INF)
    }
}

/// Where the single agent and the objects it carries are.
#[derive(Debug, Clone)]
struct Travel {
    /// Agent location fluent per station slot.
    agent_at: Vec<FluentId>,
    /// Stations (as a bitmask over slots) some achiever of each fluent moves the agent to.
    dests: Vec<u64>,
    /// For object location fluents: the object's index and the station slot.
    placed: Vec<Option<(usize, usize)>>,
    /// Whether every action removing this object location departs from
    /// that station carrying only this object.
    departs: Vec<bool>,
    owner: Vec<ObjectId>,
    arrival_cost: Vec<u32>,
}

impl Travel {
    fn new(problem: &PlanningProblem) -> Option<Self> {
        let domain = &problem.domain;
        let mut agents = domain.objects().iter().enumerate().filter(|(_, o)| o.kind == ObjectKind::Agent);
        let (agent, _) = agents.next()?;
        if agents.next().is_some() {
            return None;
        }
        let agent = ObjectId(agent as u16);
        let agent_name = &domain.object(agent).name;
        let stations: Vec<ObjectId> = (0..domain.objects().len() as u16)
            .map(ObjectId)
            .filter(|id| domain.object_kind(*id) == ObjectKind::Station)
            .collect();
        if stations.is_empty() || stations.len() > 64 {
            return None;
        }
        let slot = |name: &str| stations.iter().position(|s| domain.object(*s).name == name);
        let mut agent_at = vec![None; stations.len()];
        let mut placed = vec![None; domain.fluents().len()];
        let mut owner: Vec<ObjectId> = Vec::new();
        let mut predicate: Option<&str> = None;
        for (i, fl) in domain.fluents().iter().enumerate() {
            if fl.args.len() == 2 && fl.args[0] == *agent_name {
                if let Some(s) = slot(&fl.args[1]) {
                    agent_at[s] = Some(FluentId(i as u16));
                    predicate = Some(&fl.predicate);
                }
            }
        }
        let predicate = predicate?;
        let agent_at: Vec<FluentId> = agent_at.into_iter().collect::<Option<_>>()?;
        for (i, fl) in domain.fluents().iter().enumerate() {
            if fl.predicate != predicate || fl.args.len() != 2 || fl.args[0] == *agent_name {
                continue;
            }
            let (Some(s), Some(obj)) = (slot(&fl.args[1]), domain.object_id(&fl.args[0])) else { continue };
            let idx = owner.iter().position(|o| *o == obj).unwrap_or_else(|| {
                owner.push(obj);
                owner.len() - 1
            });
            placed[i] = Some((idx, s));
        }
        let dest = |a: &crate::model::GroundAction| agent_at.iter().position(|f| a.adds(*f));
        let mut dests = vec![0u64; domain.fluents().len()];
        let mut departs = vec![true; domain.fluents().len()];
        let mut arrival_cost = vec![INF; stations.len()];
        for a in domain.actions() {
            let to = dest(a);
            if let Some(t) = to {
                arrival_cost[t] = arrival_cost[t].min(a.cost);
                for f in &a.add {
                    dests[f.index()] |= 1 << t;
                }
            }
            let removed: Vec<FluentId> = a.del.iter().copied().filter(|f| placed[f.index()].is_some()).collect();
            for f in &removed {
                let (_, s) = placed[f.index()].expect("filtered");
                let ok = removed.len() == 1 && a.requires(agent_at[s]) && to.is_some_and(|t| t != s);
                if !ok {
                    departs[f.index()] = false;
                }
            }
        }
        if arrival_cost.contains(&INF) {
            return None;
        }
        Some(Travel { agent_at, dests, placed, departs, owner, arrival_cost })
    }
}
