//! GQM+Strategies grids: goals, strategies, the measurement that checks
//! them, and the analyses that connect the two.

pub mod analysis;
pub mod dsl;
pub mod export;
pub mod interp;
pub mod measurement;
pub mod model;

pub use analysis::{
    detect_conflicts, diagnose, evaluate_grid, impact_of, instantiate_pattern, reevaluate, validate,
    EvaluationReport, ExperienceBase, ImpactSet, Violation, ViolationKind,
};
pub use dsl::{parse_model, serialize_model, ParseError, SourceSpan};
pub use interp::{evaluate_expression, evaluate_interpretation_model, parse_expression, Cause, CauseKind, Outcome, Period, Status};
pub use measurement::{bind, Dataset};
pub use model::{build_grid, Assumption, ContextFactor, Element, GqmGraph, Grid, GridError};
