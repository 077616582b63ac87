use serde::{Deserialize, Serialize};

use crate::model::{FluentId, Plan, PlanningProblem};

/// Step `producer` adds `fluent`, which step `consumer` needs, and nothing
/// in between deletes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CausalLink {
    pub producer: usize,
    pub consumer: usize,
    pub fluent: FluentId,
}

/// All causal links leaving `step`, ordered by consumer then fluent.
pub fn extract_causal_links(plan: &Plan, problem: &PlanningProblem, step: usize) -> Vec<CausalLink> {
    let Some(producer) = plan.steps.get(step).map(|id| problem.action(*id)) else {
        return Vec::new();
    };
    let mut links = Vec::new();
    for &fluent in &producer.add {
        for (j, id) in plan.steps.iter().enumerate().skip(step + 1) {
            let later = problem.action(*id);
            if later.requires(fluent) {
                links.push(CausalLink { producer: step, consumer: j, fluent });
            }
            if later.deletes(fluent) {
                break;
            }
        }
    }
    links.sort_by_key(|l| (l.consumer, l.fluent));
    links
}
