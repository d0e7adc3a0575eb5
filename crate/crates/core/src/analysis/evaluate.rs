use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::impact::stale_elements;
use super::{validate, AnalysisError};
use crate::interp::{run_model, Advisory, Cause, CauseKind, Outcome, Period, Status};
use crate::measurement::{bind, Binding, Dataset};
use crate::model::Grid;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub element: String,
    pub period: Period,
    pub outcome: Outcome,
    /// Set when an invalidated assumption or context factor impacts the
    /// element; the outcome itself is left as computed.
    pub stale: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Warning {
    pub element: String,
    pub period: Period,
    pub message: String,
}

/// Outcomes for every evaluated (element, period) pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub periods: Vec<Period>,
    /// Evaluation order, leaves first.
    pub order: Vec<String>,
    /// Sorted by element id, then period.
    pub entries: Vec<ReportEntry>,
    pub warnings: Vec<Warning>,
}

impl EvaluationReport {
    pub fn get(&self, element: &str, period: Period) -> Option<&ReportEntry> {
        self.entries
            .binary_search_by(|e| (e.element.as_str(), e.period).cmp(&(element, period)))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn outcome(&self, element: &str, period: Period) -> Option<&Outcome> {
        self.get(element, period).map(|e| &e.outcome)
    }

    /// True when every outcome is `Satisfied`.
    pub fn all_satisfied(&self) -> bool {
        self.entries.iter().all(|e| e.outcome.is_satisfied())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Evaluates every element for each period, sub-goals before the goals
/// derived from them. `periods` defaults to the range observed in the data.
pub fn evaluate_grid(
    grid: &Grid,
    dataset: &Dataset,
    periods: Option<RangeInclusive<Period>>,
) -> Result<EvaluationReport, AnalysisError> {
    let order: Vec<String> = grid.topological_order().into_iter().rev().map(str::to_string).collect();
    evaluate_grid_in_order(grid, dataset, periods, &order)
}

/// [`evaluate_grid`] with a caller-chosen leaves-first order. Any order in
/// which every element follows all of its sub-goals yields the same
/// report apart from the recorded `order`.
pub fn evaluate_grid_in_order(
    grid: &Grid,
    dataset: &Dataset,
    periods: Option<RangeInclusive<Period>>,
    order: &[String],
) -> Result<EvaluationReport, AnalysisError> {
    let violations = validate(grid);
    if !violations.is_empty() {
        return Err(AnalysisError::NotValidated(violations));
    }
    check_order(grid, order)?;
    let periods: Vec<Period> = match periods {
        Some(r) => r.filter(|p| *p >= 1).collect(),
        None => dataset.period_range().map(|(lo, hi)| (lo..=hi).collect()).unwrap_or_default(),
    };
    let mut state = State::new(grid, dataset, periods, order.to_vec());
    let all: BTreeSet<String> = order.iter().cloned().collect();
    state.run(&all);
    Ok(state.finish())
}

/// Re-evaluates only `affected` elements on top of `previous`, e.g. the
/// union of an [`super::ImpactSet`] after toggling a factor's validity.
pub fn reevaluate(
    grid: &Grid,
    dataset: &Dataset,
    previous: &EvaluationReport,
    affected: &BTreeSet<String>,
) -> Result<EvaluationReport, AnalysisError> {
    let violations = validate(grid);
    if !violations.is_empty() {
        return Err(AnalysisError::NotValidated(violations));
    }
    let mut state = State::new(grid, dataset, previous.periods.clone(), previous.order.clone());
    for e in &previous.entries {
        if !affected.contains(&e.element) {
            state.outcomes.insert((e.element.clone(), e.period), e.clone());
        }
    }
    state.warnings.extend(previous.warnings.iter().filter(|w| !affected.contains(&w.element)).cloned());
    state.run(affected);
    Ok(state.finish())
}

fn check_order(grid: &Grid, order: &[String]) -> Result<(), AnalysisError> {
    let mut done = BTreeSet::new();
    for id in order {
        let e = grid.element(id).map_err(|_| AnalysisError::UnknownElement(id.clone()))?;
        if e.children().iter().any(|c| !done.contains(*c)) {
            return Err(AnalysisError::InvalidOrder(id.clone()));
        }
        done.insert(id.as_str());
    }
    if done.len() != grid.elements.len() {
        let missing = grid.elements.keys().find(|k| !done.contains(k.as_str())).expect("some element missing");
        return Err(AnalysisError::InvalidOrder(missing.clone()));
    }
    Ok(())
}

struct State<'g> {
    grid: &'g Grid,
    binding: Binding,
    periods: Vec<Period>,
    order: Vec<String>,
    stale: BTreeSet<String>,
    outcomes: BTreeMap<(String, Period), ReportEntry>,
    warnings: Vec<Warning>,
}

impl<'g> State<'g> {
    fn new(grid: &'g Grid, dataset: &Dataset, periods: Vec<Period>, order: Vec<String>) -> Self {
        Self {
            grid,
            binding: bind(grid, dataset),
            periods,
            order,
            stale: stale_elements(grid),
            outcomes: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    fn run(&mut self, which: &BTreeSet<String>) {
        let order = self.order.clone();
        for id in order.iter().filter(|id| which.contains(*id)) {
            self.evaluate_element(id);
        }
    }

    fn evaluate_element(&mut self, id: &str) {
        let element = &self.grid.elements[id];
        let graph = &self.grid.graphs[id];
        let mut env = self.binding[id].clone();
        for goal in graph.model.status_goals() {
            for ((g, p), entry) in self.outcomes.range((goal.to_string(), 0)..=(goal.to_string(), Period::MAX)) {
                env.outcomes.insert((g.clone(), *p), entry.outcome.clone());
            }
        }
        let children = element.children();
        for &period in &self.periods {
            if period < graph.model.start {
                continue;
            }
            let run = run_model(&graph.model, &env, period);
            let mut outcome = run.outcome;
            self.warnings.extend(run.warnings.into_iter().map(|message| Warning {
                element: id.to_string(),
                period,
                message,
            }));
            // A satisfied goal over an unsatisfied sub-goal means the link
            // between them is doubtful; the status stays as computed.
            if outcome.status == Status::Satisfied {
                for child in &children {
                    let failed = self
                        .outcomes
                        .get(&(child.to_string(), period))
                        .is_some_and(|c| c.outcome.status == Status::NotSatisfied);
                    if failed {
                        outcome.advisories.push(Advisory {
                            cause: Cause::new(CauseKind::AssumptionSuspect, element.assumption_ids.clone()),
                            from: child.to_string(),
                        });
                    }
                }
            }
            self.outcomes.insert(
                (id.to_string(), period),
                ReportEntry { element: id.to_string(), period, outcome, stale: self.stale.contains(id) },
            );
        }
    }

    fn finish(mut self) -> EvaluationReport {
        self.warnings.sort();
        EvaluationReport {
            periods: self.periods,
            order: self.order,
            entries: self.outcomes.into_values().collect(),
            warnings: self.warnings,
        }
    }
}
