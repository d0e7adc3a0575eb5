//! Domain types of a goal/strategy grid and the derivation graph over them.
//!
//! A [`Grid`] is immutable once built. Elements are keyed by their goal id;
//! the derivation graph links a goal to every goal derived by one of its
//! strategies.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interp::InterpModel;

/// Identifier of a goal, and therefore of the element that owns it.
pub type GoalId = String;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown id `{id}` referenced from {from}")]
    DanglingReference { id: String, from: String },
    #[error("goal `{goal}` has an empty `{field}` field")]
    EmptyTemplateField { goal: String, field: &'static str },
    #[error("goal `{0}` has level 0; levels start at 1")]
    ZeroLevel(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
}

/// One entry of a goal template's `relations` list.
///
/// Free-text relations ("CMMI-related goals") are kept verbatim; goal
/// references must resolve to a goal of the grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationRef {
    Goal(GoalId),
    Text(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalTemplate {
    pub activity: String,
    pub focus: String,
    pub object: String,
    pub magnitude: String,
    pub timeframe: String,
    pub scope: String,
    pub constraints: Vec<String>,
    pub relations: Vec<RelationRef>,
}

impl GoalTemplate {
    pub fn new(activity: &str, focus: &str, object: &str) -> Self {
        Self {
            activity: activity.to_string(),
            focus: focus.to_string(),
            object: object.to_string(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Goal {
    pub id: GoalId,
    pub level: u32,
    pub template: GoalTemplate,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strategy {
    pub id: String,
    pub description: String,
    pub activities: Vec<String>,
    pub derives: Vec<GoalId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextFactor {
    pub id: String,
    pub statement: String,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assumption {
    pub id: String,
    pub statement: String,
    pub valid: bool,
}

/// A goal with its strategies and the context factors and assumptions
/// that explain the link between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub goal: Goal,
    pub strategies: Vec<Strategy>,
    pub context_ids: Vec<String>,
    pub assumption_ids: Vec<String>,
    /// Set when the element intentionally has no strategies.
    pub terminal: bool,
}

impl Element {
    pub fn new(goal: Goal) -> Self {
        Self {
            goal,
            strategies: Vec::new(),
            context_ids: Vec::new(),
            assumption_ids: Vec::new(),
            terminal: false,
        }
    }

    pub fn id(&self) -> &str {
        &self.goal.id
    }

    /// Derived goal ids in strategy declaration order, without repeats.
    pub fn children(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.strategies
            .iter()
            .flat_map(|s| s.derives.iter())
            .filter(|g| seen.insert(g.as_str()))
            .map(String::as_str)
            .collect()
    }
}

/// The measurement goal of a GQM graph, in the usual five-part form.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementGoal {
    pub object: String,
    pub purpose: String,
    pub focus: String,
    pub viewpoint: String,
    pub context: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub text: String,
    pub metrics: Vec<String>,
}

/// Measurement side of one element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GqmGraph {
    pub element: GoalId,
    pub mgoal: MeasurementGoal,
    pub questions: Vec<Question>,
    pub model: InterpModel,
}

impl GqmGraph {
    /// Metric ids declared by the graph's questions, in first-use order.
    pub fn metric_ids(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.questions
            .iter()
            .flat_map(|q| q.metrics.iter())
            .filter(|m| seen.insert(m.as_str()))
            .map(String::as_str)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Conflicts,
    Supports,
    Relates,
}

impl RelationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Conflicts => "conflicts",
            RelationKind::Supports => "supports",
            RelationKind::Relates => "relates",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "conflicts" => Some(RelationKind::Conflicts),
            "supports" => Some(RelationKind::Supports),
            "relates" => Some(RelationKind::Relates),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    pub from: GoalId,
    pub to: GoalId,
    pub kind: RelationKind,
}

/// A complete model: elements, their GQM graphs, and the factors attached
/// to them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub elements: BTreeMap<GoalId, Element>,
    pub graphs: BTreeMap<GoalId, GqmGraph>,
    pub context_factors: BTreeMap<String, ContextFactor>,
    pub assumptions: BTreeMap<String, Assumption>,
    pub relations: Vec<Relation>,
    #[serde(skip)]
    parents: BTreeMap<GoalId, Vec<GoalId>>,
}

/// Checks ids and references, then indexes the derivation graph.
///
/// Structural invariants (levels, acyclicity, attachment) are left to
/// [`crate::analysis::validate`].
pub fn build_grid(
    elements: Vec<Element>,
    graphs: Vec<GqmGraph>,
    context_factors: Vec<ContextFactor>,
    assumptions: Vec<Assumption>,
    relations: Vec<Relation>,
) -> Result<Grid, GridError> {
    let mut grid = Grid::default();
    // Strategy, context factor and assumption ids share one namespace with
    // goal ids so that impact queries and diagnostics are unambiguous.
    let mut ids: HashMap<String, &'static str> = HashMap::new();
    let mut claim = |id: &str, what: &'static str| -> Result<(), GridError> {
        if ids.insert(id.to_string(), what).is_some() {
            return Err(GridError::DuplicateId(id.to_string()));
        }
        Ok(())
    };

    for e in elements {
        claim(&e.goal.id, "goal")?;
        for s in &e.strategies {
            claim(&s.id, "strategy")?;
        }
        if e.goal.level == 0 {
            return Err(GridError::ZeroLevel(e.goal.id.clone()));
        }
        for (field, value) in [
            ("activity", &e.goal.template.activity),
            ("focus", &e.goal.template.focus),
            ("object", &e.goal.template.object),
        ] {
            if value.trim().is_empty() {
                return Err(GridError::EmptyTemplateField { goal: e.goal.id.clone(), field });
            }
        }
        grid.elements.insert(e.goal.id.clone(), e);
    }
    for c in context_factors {
        claim(&c.id, "context factor")?;
        grid.context_factors.insert(c.id.clone(), c);
    }
    for a in assumptions {
        claim(&a.id, "assumption")?;
        grid.assumptions.insert(a.id.clone(), a);
    }
    for g in graphs {
        if !grid.elements.contains_key(&g.element) {
            return Err(GridError::DanglingReference {
                id: g.element.clone(),
                from: "graph".into(),
            });
        }
        if grid.graphs.contains_key(&g.element) {
            return Err(GridError::DuplicateId(format!("graph for {}", g.element)));
        }
        let mut qids = BTreeSet::new();
        for q in &g.questions {
            if !qids.insert(q.id.as_str()) {
                return Err(GridError::DuplicateId(q.id.clone()));
            }
        }
        grid.graphs.insert(g.element.clone(), g);
    }

    let dangling = |id: &str, from: String| GridError::DanglingReference { id: id.to_string(), from };
    for e in grid.elements.values() {
        for s in &e.strategies {
            for d in &s.derives {
                if !grid.elements.contains_key(d) {
                    return Err(dangling(d, format!("strategy {}", s.id)));
                }
            }
        }
        for c in &e.context_ids {
            if !grid.context_factors.contains_key(c) {
                return Err(dangling(c, format!("element {}", e.id())));
            }
        }
        for a in &e.assumption_ids {
            if !grid.assumptions.contains_key(a) {
                return Err(dangling(a, format!("element {}", e.id())));
            }
        }
        for r in &e.goal.template.relations {
            if let RelationRef::Goal(g) = r {
                if !grid.elements.contains_key(g) {
                    return Err(dangling(g, format!("relations of {}", e.id())));
                }
            }
        }
    }
    for r in &relations {
        for end in [&r.from, &r.to] {
            if !grid.elements.contains_key(end) {
                return Err(dangling(end, "relation".into()));
            }
        }
    }
    grid.relations = relations;
    grid.reindex();
    Ok(grid)
}

impl Grid {
    fn reindex(&mut self) {
        let mut parents: BTreeMap<GoalId, Vec<GoalId>> = BTreeMap::new();
        for e in self.elements.values() {
            for c in e.children() {
                let entry = parents.entry(c.to_string()).or_default();
                if !entry.iter().any(|p| p == e.id()) {
                    entry.push(e.id().to_string());
                }
            }
        }
        self.parents = parents;
    }

    /// Rebuilds the derivation index after fields were edited in place.
    pub fn rebuilt(mut self) -> Self {
        self.reindex();
        self
    }

    pub fn element(&self, id: &str) -> Result<&Element, GridError> {
        self.elements
            .get(id)
            .ok_or_else(|| GridError::UnknownElement(id.to_string()))
    }

    pub fn children(&self, id: &str) -> Vec<&str> {
        self.elements.get(id).map(Element::children).unwrap_or_default()
    }

    /// Elements with a strategy deriving `id`, in id order.
    pub fn parents(&self, id: &str) -> Vec<&str> {
        self.parents
            .get(id)
            .map(|v| v.iter().map(String::as_str).collect())
            .unwrap_or_default()
    }

    /// Elements a factor (assumption or context factor) is attached to.
    pub fn attached_to(&self, factor_id: &str) -> Vec<&str> {
        self.elements
            .values()
            .filter(|e| {
                e.context_ids.iter().any(|c| c == factor_id)
                    || e.assumption_ids.iter().any(|a| a == factor_id)
            })
            .map(Element::id)
            .collect()
    }

    pub fn is_factor(&self, id: &str) -> bool {
        self.assumptions.contains_key(id) || self.context_factors.contains_key(id)
    }

    /// All elements, parents before children, ties broken by level then id.
    ///
    /// Elements on a derivation cycle are appended at the end in id order.
    pub fn topological_order(&self) -> Vec<&str> {
        let mut indegree: BTreeMap<&str, usize> =
            self.elements.keys().map(|k| (k.as_str(), 0)).collect();
        for e in self.elements.values() {
            for c in e.children() {
                *indegree.get_mut(c).expect("indexed child") += 1;
            }
        }
        let key = |id: &str| (self.elements[id].goal.level, id.to_string());
        let mut ready: BTreeSet<(u32, String)> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(id, _)| key(id))
            .collect();
        let mut out = Vec::with_capacity(self.elements.len());
        while let Some(next) = ready.pop_first() {
            let id = self.elements.get_key_value(&next.1).expect("known").0.as_str();
            out.push(id);
            for c in self.elements[id].children() {
                let d = indegree.get_mut(c).expect("indexed child");
                *d -= 1;
                if *d == 0 {
                    ready.insert(key(c));
                }
            }
        }
        if out.len() < self.elements.len() {
            let placed: BTreeSet<&str> = out.iter().copied().collect();
            out.extend(self.elements.keys().map(String::as_str).filter(|k| !placed.contains(k)));
        }
        out
    }

    fn closure<'a>(&'a self, start: &str, next: impl Fn(&'a str) -> Vec<&'a str>) -> BTreeSet<&'a str> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&str> = next(self.elements.get_key_value(start).map(|(k, _)| k.as_str()).unwrap_or(""));
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                stack.extend(next(n));
            }
        }
        seen.remove(start);
        seen
    }
}

/// Every element reachable from `id` through strategy derivations, in
/// topological order, excluding `id` itself.
pub fn descendants(grid: &Grid, id: &str) -> Result<Vec<String>, GridError> {
    grid.element(id)?;
    let reach = grid.closure(id, |n| grid.children(n));
    Ok(grid
        .topological_order()
        .into_iter()
        .filter(|n| reach.contains(n))
        .map(str::to_string)
        .collect())
}

/// Unordered form of [`descendants`] for callers that only test membership.
pub(crate) fn reach<'a>(grid: &'a Grid, id: &str) -> BTreeSet<&'a str> {
    grid.closure(id, |n| grid.children(n))
}

/// Every element from which `id` is reachable, nearest first (reverse
/// topological order), excluding `id` itself.
pub fn ancestors(grid: &Grid, id: &str) -> Result<Vec<String>, GridError> {
    grid.element(id)?;
    let reach = grid.closure(id, |n| grid.parents(n));
    Ok(grid
        .topological_order()
        .into_iter()
        .rev()
        .filter(|n| reach.contains(n))
        .map(str::to_string)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::InterpModel;

    fn elem(id: &str, level: u32, derives: &[&str]) -> Element {
        let mut e = Element::new(Goal {
            id: id.into(),
            level,
            template: GoalTemplate::new("Increase", "Net Income", "ABC Web Services"),
        });
        e.strategies.push(Strategy {
            id: format!("S-{id}"),
            description: "s".into(),
            activities: vec![],
            derives: derives.iter().map(|d| d.to_string()).collect(),
        });
        e
    }

    fn graph(id: &str) -> GqmGraph {
        GqmGraph {
            element: id.into(),
            mgoal: MeasurementGoal::default(),
            questions: vec![],
            model: InterpModel::always_satisfied(),
        }
    }

    fn abc_like() -> Grid {
        build_grid(
            vec![elem("Goal1", 1, &["Goal2"]), elem("Goal2", 2, &["Goal3"]), elem("Goal3", 3, &[])],
            vec![graph("Goal1"), graph("Goal2"), graph("Goal3")],
            vec![],
            vec![],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn minimal_grid() {
        let g = build_grid(vec![elem("G", 1, &[])], vec![graph("G")], vec![], vec![], vec![]).unwrap();
        assert_eq!(g.elements.len(), 1);
    }

    #[test]
    fn dangling_derivation() {
        let err = build_grid(vec![elem("G", 1, &["GoalX"])], vec![], vec![], vec![], vec![]).unwrap_err();
        assert!(matches!(err, GridError::DanglingReference { ref id, .. } if id == "GoalX"));
    }

    #[test]
    fn duplicate_ids_across_kinds() {
        let a = Assumption { id: "Goal1".into(), statement: "x".into(), valid: true };
        let err = build_grid(vec![elem("Goal1", 1, &[])], vec![], vec![], vec![a], vec![]).unwrap_err();
        assert_eq!(err, GridError::DuplicateId("Goal1".into()));
    }

    #[test]
    fn empty_activity_rejected() {
        let mut e = elem("G", 1, &[]);
        e.goal.template.activity = " ".into();
        assert!(matches!(
            build_grid(vec![e], vec![], vec![], vec![], vec![]),
            Err(GridError::EmptyTemplateField { field: "activity", .. })
        ));
    }

    #[test]
    fn closures_on_chain() {
        let g = abc_like();
        assert_eq!(descendants(&g, "Goal1").unwrap(), ["Goal2", "Goal3"]);
        assert!(descendants(&g, "Goal3").unwrap().is_empty());
        assert_eq!(ancestors(&g, "Goal3").unwrap(), ["Goal2", "Goal1"]);
        assert!(ancestors(&g, "Goal1").unwrap().is_empty());
        assert_eq!(descendants(&g, "nope"), Err(GridError::UnknownElement("nope".into())));
        assert_eq!(ancestors(&g, "nope"), Err(GridError::UnknownElement("nope".into())));
    }

    #[test]
    fn closures_terminate_on_cycles() {
        let g = build_grid(
            vec![elem("A", 1, &["B"]), elem("B", 2, &["A"])],
            vec![],
            vec![],
            vec![],
            vec![],
        )
        .unwrap();
        assert_eq!(descendants(&g, "A").unwrap(), ["B"]);
        assert_eq!(ancestors(&g, "A").unwrap(), ["B"]);
        assert_eq!(g.topological_order().len(), 2);
    }

    #[test]
    fn diamond_counts_child_once() {
        let mut top = elem("T", 1, &["L"]);
        top.strategies.push(Strategy { id: "S2".into(), derives: vec!["L".into()], ..Default::default() });
        let g = build_grid(vec![top, elem("L", 2, &[])], vec![], vec![], vec![], vec![]).unwrap();
        assert_eq!(g.children("T"), ["L"]);
        assert_eq!(g.parents("L"), ["T"]);
    }
}
