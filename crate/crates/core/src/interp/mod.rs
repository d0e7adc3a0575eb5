//! Interpretation models: conditional logic over metric series and
//! sub-goal outcomes.
//!
//! A model is a chain of `if ... then <outcome>` branches evaluated for a
//! period `x`. Metric lookups are written `M[x]`, `M[x-k]` or `M[n]`;
//! sub-goal results are read with `status("Goal", x)`. Missing data is a
//! value of its own and turns the whole evaluation into `Unknown`.

mod eval;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dsl::SourceSpan;

pub use eval::{ROUNDING, 
    evaluate_expression, evaluate_interpretation_model, evaluate_traced, run_model, Evaluation, MissingRef, ModelRun,
};
pub use parser::{is_metric_id, parse_expression, parse_model, type_check, Type, KEYWORDS};
pub(crate) use parser::model as parse_model_tokens;

/// Period index; observations are keyed by positive integers.
pub type Period = u32;

/// One metric's observations by period.
pub type Series = BTreeMap<Period, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeriodIndex {
    /// `x - k`, with `k = 0` for plain `x`.
    Current(u32),
    Fixed(Period),
}

impl PeriodIndex {
    pub fn resolve(self, x: Period) -> Option<Period> {
        match self {
            PeriodIndex::Current(k) => x.checked_sub(k).filter(|p| *p >= 1),
            PeriodIndex::Fixed(p) => Some(p).filter(|p| *p >= 1),
        }
    }
}

impl fmt::Display for PeriodIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeriodIndex::Current(0) => f.write_str("x"),
            PeriodIndex::Current(k) => write!(f, "x-{k}"),
            PeriodIndex::Fixed(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Eq => "==",
            BinOp::Ge => ">=",
            BinOp::Gt => ">",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Eq | BinOp::Ge | BinOp::Gt => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div => 6,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 4
    }
}

/// Goal attainment status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Status {
    Satisfied,
    NotSatisfied,
    Unknown,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Satisfied => "Satisfied",
            Status::NotSatisfied => "NotSatisfied",
            Status::Unknown => "Unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Satisfied" => Some(Status::Satisfied),
            "NotSatisfied" => Some(Status::NotSatisfied),
            "Unknown" => Some(Status::Unknown),
            _ => None,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExprKind {
    Num { value: f64 },
    Bool { value: bool },
    StatusLit { status: Status },
    Metric { id: String, index: PeriodIndex },
    GoalStatus { goal: String, index: PeriodIndex },
    Neg { expr: Box<Expr> },
    Not { expr: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
}

/// Expression node. Equality is structural: spans are not compared.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Expr {
    #[serde(flatten)]
    pub kind: ExprKind,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Self { kind, span: None }
    }

    pub fn num(value: f64) -> Self {
        Self::new(ExprKind::Num { value })
    }

    pub fn metric(id: &str, index: PeriodIndex) -> Self {
        Self::new(ExprKind::Metric { id: id.to_string(), index })
    }

    pub fn status(goal: &str, index: PeriodIndex) -> Self {
        Self::new(ExprKind::GoalStatus { goal: goal.to_string(), index })
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Self::new(ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) })
    }

    fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Binary { op, .. } => op.precedence(),
            ExprKind::Not { .. } => 3,
            ExprKind::Neg { .. } => 7,
            ExprKind::Num { value } if value.is_sign_negative() => 7,
            _ => 8,
        }
    }

    /// Visits every metric reference.
    pub fn metric_refs(&self) -> Vec<(&str, PeriodIndex)> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let ExprKind::Metric { id, index } = &e.kind {
                out.push((id.as_str(), *index));
            }
        });
        out
    }

    pub fn status_refs(&self) -> Vec<(&str, PeriodIndex)> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let ExprKind::GoalStatus { goal, index } = &e.kind {
                out.push((goal.as_str(), *index));
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Neg { expr } | ExprKind::Not { expr } => expr.walk(f),
            ExprKind::Binary { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            _ => {}
        }
    }
}

pub(crate) fn write_str_lit(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

/// Prints the expression with the minimum parentheses needed to parse
/// back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let paren = |f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool| {
            if wrap {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match &self.kind {
            ExprKind::Num { value } => write!(f, "{value}"),
            ExprKind::Bool { value } => write!(f, "{value}"),
            ExprKind::StatusLit { status } => write!(f, "{status}"),
            ExprKind::Metric { id, index } => write!(f, "{id}[{index}]"),
            ExprKind::GoalStatus { goal, index } => {
                f.write_str("status(")?;
                write_str_lit(f, goal)?;
                write!(f, ", {index})")
            }
            ExprKind::Neg { expr } => {
                // `-3` would read back as a literal, so keep `-(3)`.
                f.write_str("-")?;
                paren(f, expr, expr.precedence() < 8 || matches!(expr.kind, ExprKind::Num { .. }))
            }
            ExprKind::Not { expr } => {
                f.write_str("not ")?;
                paren(f, expr, expr.precedence() < 3)
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                // Comparisons do not chain, so both sides need parens at
                // equal precedence; other operators are left-associative.
                let lwrap = if op.is_comparison() { lhs.precedence() <= p } else { lhs.precedence() < p };
                paren(f, lhs, lwrap)?;
                write!(f, " {} ", op.symbol())?;
                paren(f, rhs, rhs.precedence() <= p)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CauseKind {
    AssumptionSuspect,
    StrategySuspect,
    DataMissing,
}

/// A diagnosed cause, optionally naming the entities it points at.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cause {
    pub kind: CauseKind,
    pub ids: Vec<String>,
    /// Period of the missing observation, for `DataMissing`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<Period>,
}

impl Cause {
    pub fn new(kind: CauseKind, ids: Vec<String>) -> Self {
        Self { kind, ids, period: None }
    }
}

/// A cause attached to an outcome without changing its status, naming the
/// sub-goal that prompted it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Advisory {
    pub cause: Cause,
    pub from: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub status: Status,
    pub causes: Vec<Cause>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub advisories: Vec<Advisory>,
    pub note: String,
}

impl Outcome {
    pub fn satisfied(note: impl Into<String>) -> Self {
        Self { status: Status::Satisfied, causes: vec![], advisories: vec![], note: note.into() }
    }

    pub fn not_satisfied(causes: Vec<Cause>, note: impl Into<String>) -> Self {
        Self { status: Status::NotSatisfied, causes, advisories: vec![], note: note.into() }
    }

    /// `Unknown` always carries at least one `DataMissing` cause.
    pub fn unknown(mut missing: Vec<Cause>, note: impl Into<String>) -> Self {
        if !missing.iter().any(|c| c.kind == CauseKind::DataMissing) {
            missing.push(Cause::new(CauseKind::DataMissing, vec![]));
        }
        Self { status: Status::Unknown, causes: missing, advisories: vec![], note: note.into() }
    }

    pub fn is_satisfied(&self) -> bool {
        self.status == Status::Satisfied
    }
}

/// Cause template in a branch; an empty id list is filled from the
/// evaluating element's own assumptions or strategies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CauseSpec {
    pub kind: CauseKind,
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeSpec {
    pub status: Status,
    pub causes: Vec<CauseSpec>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub condition: Expr,
    pub outcome: OutcomeSpec,
}

/// An if / else-if / else chain evaluated for each period from `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpModel {
    pub start: Period,
    /// Absolute tolerance for numeric comparisons.
    pub eps: f64,
    pub branches: Vec<Branch>,
    pub otherwise: Option<OutcomeSpec>,
}

impl InterpModel {
    pub fn always_satisfied() -> Self {
        Self {
            start: 1,
            eps: 0.0,
            branches: vec![Branch {
                condition: Expr::new(ExprKind::Bool { value: true }),
                outcome: OutcomeSpec { status: Status::Satisfied, causes: vec![], note: String::new() },
            }],
            otherwise: None,
        }
    }

    pub fn exprs(&self) -> impl Iterator<Item = &Expr> {
        self.branches.iter().map(|b| &b.condition)
    }

    pub fn metric_ids(&self) -> BTreeSet<&str> {
        self.exprs().flat_map(|e| e.metric_refs()).map(|(m, _)| m).collect()
    }

    pub fn status_goals(&self) -> BTreeSet<&str> {
        self.exprs().flat_map(|e| e.status_refs()).map(|(g, _)| g).collect()
    }
}

/// Ids substituted into cause templates that name no entity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SuspectDefaults {
    pub assumptions: Vec<String>,
    pub strategies: Vec<String>,
}

/// Evaluation environment for one element.
///
/// Metric series are shared (`Arc`) so that one observation stream bound
/// into several graphs is the same series everywhere.
#[derive(Debug, Clone, Default)]
pub struct Env {
    pub metrics: BTreeMap<String, Arc<Series>>,
    /// Metrics the model reads that had no series in the dataset.
    pub missing_metrics: BTreeSet<String>,
    pub outcomes: BTreeMap<(String, Period), Outcome>,
    pub period: Period,
    pub suspects: SuspectDefaults,
}

impl Env {
    pub fn with_period(mut self, period: Period) -> Self {
        self.period = period;
        self
    }

    pub fn metric(&self, id: &str, period: Period) -> Option<f64> {
        self.metrics.get(id).and_then(|s| s.get(&period)).copied()
    }

    pub fn set_series(&mut self, id: &str, series: Series) {
        self.metrics.insert(id.to_string(), Arc::new(series));
    }
}

/// Result of evaluating an expression: a number, a truth value, a goal
/// status, or missing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Num(f64),
    Bool(bool),
    Status(Status),
    Missing,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_parenthesizes_minimally() {
        let e = parse_expression("(a[x] + b[x]) * c[x] - (d[x] - e[x])").unwrap();
        assert_eq!(e.to_string(), "(a[x] + b[x]) * c[x] - (d[x] - e[x])");
        let e = parse_expression("not (a[x] > 1 and true) or -(a[1] * 2) >= -3").unwrap();
        assert_eq!(e.to_string(), "not (a[x] > 1 and true) or -(a[1] * 2) >= -3");
    }

    #[test]
    fn period_index_resolution() {
        assert_eq!(PeriodIndex::Current(1).resolve(2), Some(1));
        assert_eq!(PeriodIndex::Current(2).resolve(2), None);
        assert_eq!(PeriodIndex::Fixed(0).resolve(5), None);
    }

    #[test]
    fn unknown_always_has_data_missing() {
        let o = Outcome::unknown(vec![], "x");
        assert_eq!(o.causes[0].kind, CauseKind::DataMissing);
    }
}
