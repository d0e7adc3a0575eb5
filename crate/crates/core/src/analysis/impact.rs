use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::model::{ancestors, descendants, Grid};

/// Elements that must be re-examined when a factor changes.
///
/// The three sets are disjoint: an element reached both ways counts as
/// downward.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpactSet {
    pub seed: String,
    pub directly_attached: Vec<String>,
    /// Ancestors of the attached elements, nearest first.
    pub upward: Vec<String>,
    /// Descendants of the attached elements, in topological order.
    pub downward: Vec<String>,
}

impl ImpactSet {
    pub fn all(&self) -> BTreeSet<String> {
        self.directly_attached.iter().chain(&self.upward).chain(&self.downward).cloned().collect()
    }
}

pub fn impact_of(grid: &Grid, entity: &str) -> Result<ImpactSet, AnalysisError> {
    if !grid.is_factor(entity) {
        return Err(AnalysisError::UnknownEntity(entity.to_string()));
    }
    let direct: Vec<String> = grid.attached_to(entity).into_iter().map(str::to_string).collect();
    let mut down = BTreeSet::new();
    let mut up = BTreeSet::new();
    for e in &direct {
        down.extend(descendants(grid, e).expect("attached element exists"));
        up.extend(ancestors(grid, e).expect("attached element exists"));
    }
    let direct_set: BTreeSet<&String> = direct.iter().collect();
    let order = grid.topological_order();
    let downward: Vec<String> = order
        .iter()
        .filter(|n| down.contains(**n) && !direct_set.contains(&n.to_string()))
        .map(|n| n.to_string())
        .collect();
    let upward: Vec<String> = order
        .iter()
        .rev()
        .filter(|n| up.contains(**n) && !down.contains(**n) && !direct_set.contains(&n.to_string()))
        .map(|n| n.to_string())
        .collect();
    Ok(ImpactSet { seed: entity.to_string(), directly_attached: direct, upward, downward })
}

/// Elements impacted by any factor currently marked invalid.
pub fn stale_elements(grid: &Grid) -> BTreeSet<String> {
    grid.context_factors
        .values()
        .filter(|c| !c.valid)
        .map(|c| c.id.as_str())
        .chain(grid.assumptions.values().filter(|a| !a.valid).map(|a| a.id.as_str()))
        .flat_map(|id| impact_of(grid, id).expect("factor exists").all())
        .collect()
}
