use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{AnalysisError, EvaluationReport};
use crate::interp::{CauseKind, Outcome, Period, Status};
use crate::model::Grid;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub element: String,
    /// The element this step was reached from; `None` for the start.
    pub via: Option<String>,
    pub outcome: Outcome,
    pub explanation: String,
}

fn explain(o: &Outcome) -> String {
    match o.status {
        Status::Unknown => {
            let missing: Vec<String> = o
                .causes
                .iter()
                .filter(|c| c.kind == CauseKind::DataMissing)
                .map(|c| match (c.ids.first(), c.period) {
                    (Some(id), Some(p)) => format!("{id} at period {p}"),
                    (Some(id), None) => id.clone(),
                    (None, _) => "an undefined value".to_string(),
                })
                .collect();
            format!("missing data: {}", missing.join(", "))
        }
        Status::NotSatisfied if !o.note.is_empty() => o.note.clone(),
        Status::NotSatisfied => {
            let kinds: Vec<String> = o.causes.iter().map(|c| format!("{:?}", c.kind)).collect();
            if kinds.is_empty() {
                "not satisfied".into()
            } else {
                format!("not satisfied: {}", kinds.join(", "))
            }
        }
        Status::Satisfied => {
            let from: Vec<&str> = o.advisories.iter().map(|a| a.from.as_str()).collect();
            format!("satisfied, but sub-goal {} is not; assumptions are suspect", from.join(", "))
        }
    }
}

/// Explains an element's outcome through its sub-goals: the start element
/// (when not cleanly satisfied) followed by every failing or unknown
/// descendant, depth-first in declaration order.
pub fn diagnose(
    report: &EvaluationReport,
    grid: &Grid,
    element: &str,
    period: Period,
) -> Result<Vec<TraceStep>, AnalysisError> {
    grid.element(element).map_err(|_| AnalysisError::UnknownElement(element.to_string()))?;
    let root = report
        .outcome(element, period)
        .ok_or_else(|| AnalysisError::PeriodNotEvaluated { element: element.to_string(), period })?;
    let mut trace = Vec::new();
    if !root.is_satisfied() || !root.advisories.is_empty() {
        trace.push(TraceStep {
            element: element.to_string(),
            via: None,
            outcome: root.clone(),
            explanation: explain(root),
        });
    }
    let mut seen = BTreeSet::from([element.to_string()]);
    walk(report, grid, element, period, &mut seen, &mut trace);
    Ok(trace)
}

fn walk(
    report: &EvaluationReport,
    grid: &Grid,
    from: &str,
    period: Period,
    seen: &mut BTreeSet<String>,
    trace: &mut Vec<TraceStep>,
) {
    for child in grid.children(from) {
        if !seen.insert(child.to_string()) {
            continue;
        }
        if let Some(o) = report.outcome(child, period) {
            if !o.is_satisfied() {
                trace.push(TraceStep {
                    element: child.to_string(),
                    via: Some(from.to_string()),
                    outcome: o.clone(),
                    explanation: explain(o),
                });
            }
        }
        walk(report, grid, child, period, seen, trace);
    }
}
