use std::collections::{BTreeMap, BTreeSet};

use super::{Violation, ViolationKind};
use crate::model::{reach, Grid};

fn v(kind: ViolationKind, subject: &str, message: String) -> Violation {
    Violation { kind, subject: subject.to_string(), message }
}

/// Every structural problem in the grid; empty means the grid can be
/// evaluated.
pub fn validate(grid: &Grid) -> Vec<Violation> {
    let mut out = Vec::new();

    // Elements on a common cycle share a component; level checks inside a
    // cycle would only restate it.
    let reach: BTreeMap<&str, BTreeSet<&str>> =
        grid.elements.keys().map(|id| (id.as_str(), reach(grid, id))).collect();
    let on_cycle = |a: &str, b: &str| a == b || reach[a].contains(b) && reach[b].contains(a);
    let mut reported = BTreeSet::new();
    for e in grid.elements.values() {
        let id = e.id();
        let cyclic = e.children().into_iter().any(|c| c == id || reach[c].contains(id));
        if cyclic && !reported.contains(id) {
            let members: Vec<&str> = grid.elements.keys().map(String::as_str).filter(|o| on_cycle(id, o)).collect();
            reported.extend(members.iter().map(|m| m.to_string()));
            out.push(v(ViolationKind::CycleDetected, members[0], format!("derivation cycle through {}", members.join(", "))));
        }
    }

    for e in grid.elements.values() {
        let id = e.id();
        if !grid.graphs.contains_key(id) {
            out.push(v(ViolationKind::MissingMeasurement, id, "goal has no GQM graph".into()));
        }
        if e.strategies.is_empty() && !e.terminal {
            out.push(v(ViolationKind::MissingStrategy, id, "goal has no strategy and is not marked terminal".into()));
        }
        for child in e.children() {
            if on_cycle(id, child) {
                continue;
            }
            let level = grid.elements[child].goal.level;
            if level != e.goal.level + 1 {
                out.push(v(
                    ViolationKind::LevelMismatch,
                    child,
                    format!("derived from level-{} goal `{id}` but declared at level {level}", e.goal.level),
                ));
            }
        }
    }

    let roots: Vec<&str> = grid.elements.values().filter(|e| e.goal.level == 1).map(|e| e.id()).collect();
    let mut reached: BTreeSet<&str> = roots.iter().copied().collect();
    for r in &roots {
        reached.extend(reach[r].iter().copied());
    }
    for e in grid.elements.values() {
        if !reached.contains(e.id()) {
            out.push(v(ViolationKind::OrphanGoal, e.id(), "not reachable from any level-1 goal".into()));
        }
    }

    for id in grid.context_factors.keys().chain(grid.assumptions.keys()) {
        if grid.attached_to(id).is_empty() {
            out.push(v(ViolationKind::UnattachedFactor, id, "not attached to any element".into()));
        }
    }

    for (id, g) in &grid.graphs {
        let declared: BTreeSet<&str> = g.metric_ids().into_iter().collect();
        for m in g.model.metric_ids() {
            if !declared.contains(m) {
                out.push(v(
                    ViolationKind::UnknownMetricRef,
                    id,
                    format!("model reads metric `{m}` that no question of the graph declares"),
                ));
            }
        }
        for goal in g.model.status_goals() {
            if !grid.elements.contains_key(goal) {
                out.push(v(ViolationKind::DanglingReference, id, format!("model reads status of unknown goal `{goal}`")));
            } else if !reach[id.as_str()].contains(goal) {
                out.push(v(
                    ViolationKind::UpwardStatusRef,
                    id,
                    format!("model reads status of `{goal}`, which is not derived from `{id}`"),
                ));
            }
        }
    }

    out.sort();
    out
}
