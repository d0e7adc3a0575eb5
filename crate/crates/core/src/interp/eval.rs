use super::{BinOp, Cause, CauseKind, Env, Expr, ExprKind, InterpModel, Outcome, OutcomeSpec, Period, Status, Value};

/// Why an expression evaluated to missing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum MissingRef {
    Metric { id: String, period: Option<Period> },
    Goal { id: String, period: Option<Period> },
    /// Arithmetic without a defined result (division by zero, NaN).
    Undefined { period: Period },
}

impl MissingRef {
    fn into_cause(self) -> Cause {
        match self {
            MissingRef::Metric { id, period } | MissingRef::Goal { id, period } => Cause {
                kind: CauseKind::DataMissing,
                ids: vec![id],
                period,
            },
            MissingRef::Undefined { period } => Cause { kind: CauseKind::DataMissing, ids: vec![], period: Some(period) },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: Value,
    /// Non-empty exactly when `value` is missing.
    pub missing: Vec<MissingRef>,
    pub warnings: Vec<String>,
}

/// Evaluates an expression in `env` at `env.period` with no tolerance
/// beyond [`ROUNDING`].
pub fn evaluate_expression(expr: &Expr, env: &Env) -> Value {
    evaluate_traced(expr, env, 0.0).value
}

/// Relative slack absorbing binary rounding, so that `110 >= 1.1 * 100`
/// holds. Far below any tolerance a model would state with `eps`.
pub const ROUNDING: f64 = 1e-12;

/// Like [`evaluate_expression`], keeping the reasons for missing results
/// and any warnings raised along the way.
pub fn evaluate_traced(expr: &Expr, env: &Env, eps: f64) -> Evaluation {
    let mut ev = Evaluator { env, eps, warnings: Vec::new() };
    let (value, mut missing) = ev.eval(expr);
    missing.sort();
    missing.dedup();
    Evaluation { value, missing, warnings: ev.warnings }
}

struct Evaluator<'a> {
    env: &'a Env,
    eps: f64,
    warnings: Vec<String>,
}

type Eval = (Value, Vec<MissingRef>);

impl Evaluator<'_> {
    fn undefined(&mut self, what: String) -> Eval {
        self.warnings.push(format!("period {}: {what}", self.env.period));
        (Value::Missing, vec![MissingRef::Undefined { period: self.env.period }])
    }

    fn eval(&mut self, e: &Expr) -> Eval {
        let x = self.env.period;
        match &e.kind {
            ExprKind::Num { value } => (Value::Num(*value), vec![]),
            ExprKind::Bool { value } => (Value::Bool(*value), vec![]),
            ExprKind::StatusLit { status } => (Value::Status(*status), vec![]),
            ExprKind::Metric { id, index } => {
                let period = index.resolve(x);
                match period.and_then(|p| self.env.metric(id, p)) {
                    Some(v) => (Value::Num(v), vec![]),
                    None => (Value::Missing, vec![MissingRef::Metric { id: id.clone(), period }]),
                }
            }
            ExprKind::GoalStatus { goal, index } => {
                let period = index.resolve(x);
                let status = period
                    .and_then(|p| self.env.outcomes.get(&(goal.clone(), p)))
                    .map(|o| o.status)
                    .filter(|s| *s != Status::Unknown);
                match status {
                    Some(s) => (Value::Status(s), vec![]),
                    None => (Value::Missing, vec![MissingRef::Goal { id: goal.clone(), period }]),
                }
            }
            ExprKind::Neg { expr } => match self.eval(expr) {
                (Value::Num(v), _) => (Value::Num(-v), vec![]),
                (Value::Missing, m) => (Value::Missing, m),
                _ => self.undefined(format!("type mismatch in `{e}`")),
            },
            ExprKind::Not { expr } => match self.eval(expr) {
                (Value::Bool(b), _) => (Value::Bool(!b), vec![]),
                (Value::Missing, m) => (Value::Missing, m),
                _ => self.undefined(format!("type mismatch in `{e}`")),
            },
            ExprKind::Binary { op, lhs, rhs } => {
                let l = self.eval(lhs);
                let r = self.eval(rhs);
                self.binary(*op, l, r, e)
            }
        }
    }

    fn binary(&mut self, op: BinOp, (l, lm): Eval, (r, rm): Eval, e: &Expr) -> Eval {
        // `false and missing` is false and `true or missing` is true; every
        // other operator lets a missing operand through.
        match (op, l, r) {
            (BinOp::And, Value::Bool(false), _) | (BinOp::And, _, Value::Bool(false)) => return (Value::Bool(false), vec![]),
            (BinOp::Or, Value::Bool(true), _) | (BinOp::Or, _, Value::Bool(true)) => return (Value::Bool(true), vec![]),
            _ => {}
        }
        if l == Value::Missing || r == Value::Missing {
            let mut m = lm;
            m.extend(rm);
            return (Value::Missing, m);
        }
        let tol = |a: f64, b: f64| self.eps.max(ROUNDING * a.abs().max(b.abs()));
        let v = match (op, l, r) {
            (BinOp::And, Value::Bool(a), Value::Bool(b)) => Value::Bool(a && b),
            (BinOp::Or, Value::Bool(a), Value::Bool(b)) => Value::Bool(a || b),
            (BinOp::Div, Value::Num(_), Value::Num(0.0)) => {
                return self.undefined(format!("division by zero in `{e}`"));
            }
            (BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div, Value::Num(a), Value::Num(b)) => {
                let v = match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    _ => a / b,
                };
                if v.is_nan() {
                    return self.undefined(format!("undefined arithmetic in `{e}`"));
                }
                Value::Num(v)
            }
            (BinOp::Lt, Value::Num(a), Value::Num(b)) => Value::Bool(a < b - tol(a, b)),
            (BinOp::Le, Value::Num(a), Value::Num(b)) => Value::Bool(a <= b + tol(a, b)),
            (BinOp::Ge, Value::Num(a), Value::Num(b)) => Value::Bool(a >= b - tol(a, b)),
            (BinOp::Gt, Value::Num(a), Value::Num(b)) => Value::Bool(a > b + tol(a, b)),
            (BinOp::Eq, Value::Num(a), Value::Num(b)) => Value::Bool((a - b).abs() <= tol(a, b)),
            (BinOp::Eq, Value::Status(a), Value::Status(b)) => Value::Bool(a == b),
            (BinOp::Eq, Value::Bool(a), Value::Bool(b)) => Value::Bool(a == b),
            _ => return self.undefined(format!("type mismatch in `{e}`")),
        };
        (v, vec![])
    }
}

/// Result of running a model for one period, with evaluation warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRun {
    pub outcome: Outcome,
    pub warnings: Vec<String>,
}

/// Walks the branch chain for `period` and returns the first matching
/// outcome. A condition that cannot be decided for lack of data makes the
/// result `Unknown`.
pub fn evaluate_interpretation_model(model: &InterpModel, env: &Env, period: Period) -> Outcome {
    run_model(model, env, period).outcome
}

pub fn run_model(model: &InterpModel, env: &Env, period: Period) -> ModelRun {
    let mut env_at = std::borrow::Cow::Borrowed(env);
    if env.period != period {
        env_at.to_mut().period = period;
    }
    let env = env_at.as_ref();
    let mut warnings = Vec::new();
    if period < model.start {
        return ModelRun {
            outcome: Outcome::unknown(vec![], format!("period {period} precedes the model start {}", model.start)),
            warnings,
        };
    }
    for branch in &model.branches {
        let ev = evaluate_traced(&branch.condition, env, model.eps);
        warnings.extend(ev.warnings);
        match ev.value {
            Value::Bool(true) => return ModelRun { outcome: instantiate(&branch.outcome, env), warnings },
            Value::Bool(false) => continue,
            Value::Missing => {
                let causes = ev.missing.into_iter().map(MissingRef::into_cause).collect();
                return ModelRun { outcome: Outcome::unknown(causes, "missing data"), warnings };
            }
            other => {
                warnings.push(format!("period {period}: condition `{}` is not boolean ({other:?})", branch.condition));
                return ModelRun { outcome: Outcome::unknown(vec![], "ill-typed condition"), warnings };
            }
        }
    }
    let outcome = match &model.otherwise {
        Some(spec) => instantiate(spec, env),
        None => Outcome::not_satisfied(vec![], "no branch matched"),
    };
    ModelRun { outcome, warnings }
}

fn instantiate(spec: &OutcomeSpec, env: &Env) -> Outcome {
    let causes = spec
        .causes
        .iter()
        .map(|c| {
            let ids = if !c.ids.is_empty() {
                c.ids.clone()
            } else if c.kind == CauseKind::AssumptionSuspect {
                env.suspects.assumptions.clone()
            } else {
                env.suspects.strategies.clone()
            };
            Cause { kind: c.kind, ids, period: None }
        })
        .collect();
    match spec.status {
        Status::Satisfied => Outcome::satisfied(spec.note.clone()),
        _ => Outcome::not_satisfied(causes, spec.note.clone()),
    }
}
