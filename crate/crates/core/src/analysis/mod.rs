//! Grid-level algorithms: validation, bottom-up evaluation with rollup,
//! diagnosis, impact analysis, conflict reporting and the experience base.

mod conflicts;
mod diagnose;
mod evaluate;
mod experience;
mod impact;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interp::Period;

pub use conflicts::detect_conflicts;
pub use diagnose::{diagnose, TraceStep};
pub use evaluate::{evaluate_grid, evaluate_grid_in_order, reevaluate, EvaluationReport, ReportEntry, Warning};
pub use experience::{instantiate_pattern, ExperienceBase, Instantiation, Pattern, PatternError, PATTERN_EXTENSION};
pub use impact::{impact_of, stale_elements, ImpactSet};
pub use validate::validate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    MissingMeasurement,
    CycleDetected,
    LevelMismatch,
    OrphanGoal,
    MissingStrategy,
    DanglingReference,
    UnattachedFactor,
    UnknownMetricRef,
    UpwardStatusRef,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.kind, self.subject, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("grid has {} violation(s); validate it first", .0.len())]
    NotValidated(Vec<Violation>),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unknown assumption or context factor `{0}`")]
    UnknownEntity(String),
    #[error("element `{element}` was not evaluated for period {period}")]
    PeriodNotEvaluated { element: String, period: Period },
    #[error("evaluation order is not leaves-first: `{0}` precedes one of its sub-goals")]
    InvalidOrder(String),
}
