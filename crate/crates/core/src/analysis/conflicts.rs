use std::collections::BTreeSet;

use crate::model::{Grid, RelationKind, RelationRef};

/// Declared conflicts, plus goal pairs linked only through a template's
/// `relations` list (reported as `relates`).
pub fn detect_conflicts(grid: &Grid) -> Vec<(String, String, RelationKind)> {
    let mut out: Vec<(String, String, RelationKind)> = grid
        .relations
        .iter()
        .filter(|r| r.kind == RelationKind::Conflicts)
        .map(|r| (r.from.clone(), r.to.clone(), r.kind))
        .collect();

    let declared: BTreeSet<(&str, &str)> = grid
        .relations
        .iter()
        .flat_map(|r| [(r.from.as_str(), r.to.as_str()), (r.to.as_str(), r.from.as_str())])
        .collect();
    let mut reported = BTreeSet::new();
    for e in grid.elements.values() {
        for r in &e.goal.template.relations {
            let RelationRef::Goal(other) = r else { continue };
            let (a, b) = (e.id(), other.as_str());
            if a == b || declared.contains(&(a, b)) {
                continue;
            }
            let key = if a < b { (a, b) } else { (b, a) };
            if reported.insert(key) {
                out.push((a.to_string(), b.to_string(), RelationKind::Relates));
            }
        }
    }
    out
}
