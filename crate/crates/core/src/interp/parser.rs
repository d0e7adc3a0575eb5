use std::fmt;

use crate::dsl::cursor::Cursor;
use crate::dsl::lexer::{tokenize, Tok};
use crate::dsl::ParseError;

use super::{BinOp, Branch, CauseKind, CauseSpec, Expr, ExprKind, InterpModel, OutcomeSpec, PeriodIndex, Status};

/// Words that cannot be used as metric ids.
pub const KEYWORDS: &[&str] = &[
    "true", "false", "and", "or", "not", "status", "if", "then", "else", "Satisfied", "NotSatisfied", "Unknown",
];

pub fn is_metric_id(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(crate::dsl::lexer::is_ident_start)
        && chars.all(crate::dsl::lexer::is_ident_char)
        && !KEYWORDS.contains(&s)
}

pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(text, "<expr>")?;
    let mut c = Cursor::new(&toks);
    let e = expr(&mut c)?;
    if !c.at_eof() {
        return Err(c.unexpected(&["operator", "end of input"]));
    }
    Ok(e)
}

/// Parses and type-checks a model body (the text between `model {` and `}`).
pub fn parse_model(text: &str) -> Result<InterpModel, ParseError> {
    let toks = tokenize(text, "<model>")?;
    let mut c = Cursor::new(&toks);
    let m = model(&mut c)?;
    if !c.at_eof() {
        return Err(c.unexpected(&["`else`", "end of input"]));
    }
    Ok(m)
}

pub(crate) fn model(c: &mut Cursor) -> Result<InterpModel, ParseError> {
    let mut start = 1;
    let mut eps = 0.0;
    if c.eat_kw("for") {
        c.expect_kw("x")?;
        c.expect_kw("in")?;
        let at = c.span();
        start = c.integer()?;
        if start == 0 {
            return Err(ParseError::new(at, "periods start at 1", &["integer >= 1"]));
        }
        c.expect(Tok::DotDot)?;
    }
    if c.eat_kw("eps") {
        let at = c.span();
        eps = c.number()?;
        if eps < 0.0 {
            return Err(ParseError::new(at, "tolerance must be non-negative", &[]));
        }
    }
    let mut branches = Vec::new();
    let mut otherwise = None;
    c.expect_kw("if")?;
    loop {
        let at = c.span();
        let condition = expr(c)?;
        if type_check(&condition).map_err(|m| ParseError::new(at.clone(), m, &[]))? != Type::Bool {
            return Err(ParseError::new(at, "condition must be a boolean expression", &["comparison"]));
        }
        c.expect_kw("then")?;
        branches.push(Branch { condition, outcome: outcome(c)? });
        if !c.eat_kw("else") {
            break;
        }
        if !c.eat_kw("if") {
            otherwise = Some(outcome(c)?);
            break;
        }
    }
    Ok(InterpModel { start, eps, branches, otherwise })
}

fn outcome(c: &mut Cursor) -> Result<OutcomeSpec, ParseError> {
    let at = c.span();
    let status = if c.eat_kw("satisfied") {
        Status::Satisfied
    } else if c.eat_kw("not_satisfied") {
        Status::NotSatisfied
    } else {
        return Err(c.unexpected(&["`satisfied`", "`not_satisfied`"]));
    };
    let mut causes = Vec::new();
    if c.eat(&Tok::LParen) {
        loop {
            let kind = if c.eat_kw("assumption") {
                CauseKind::AssumptionSuspect
            } else if c.eat_kw("strategy") {
                CauseKind::StrategySuspect
            } else {
                return Err(c.unexpected(&["`assumption`", "`strategy`"]));
            };
            let mut ids = Vec::new();
            if c.eat(&Tok::LParen) {
                loop {
                    ids.push(c.string()?);
                    if !c.eat(&Tok::Comma) {
                        break;
                    }
                }
                c.expect(Tok::RParen)?;
            }
            causes.push(CauseSpec { kind, ids });
            if !c.eat(&Tok::Comma) {
                break;
            }
        }
        c.expect(Tok::RParen)?;
    }
    if status == Status::Satisfied && !causes.is_empty() {
        return Err(ParseError::new(at, "a satisfied outcome cannot carry causes", &[]));
    }
    let note = match c.peek() {
        Tok::Str(_) => c.string()?,
        _ => String::new(),
    };
    Ok(OutcomeSpec { status, causes, note })
}

pub(crate) fn expr(c: &mut Cursor) -> Result<Expr, ParseError> {
    c.enter()?;
    let e = or(c);
    c.leave();
    e
}

fn binary_level(
    c: &mut Cursor,
    ops: &[(Tok, BinOp)],
    next: fn(&mut Cursor) -> Result<Expr, ParseError>,
) -> Result<Expr, ParseError> {
    let mut lhs = next(c)?;
    let base = c.depth;
    let result = 'outer: loop {
        for (tok, op) in ops {
            if c.peek() == tok {
                let span = c.next().span.clone();
                // Each fold deepens the left spine of the tree.
                if let Err(e) = c.enter() {
                    break 'outer Err(e);
                }
                let rhs = match next(c) {
                    Ok(rhs) => rhs,
                    Err(e) => break 'outer Err(e),
                };
                lhs = Expr { kind: ExprKind::Binary { op: *op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, span: Some(span) };
                continue 'outer;
            }
        }
        break Ok(lhs);
    };
    c.depth = base;
    result
}

fn keyword_level(
    c: &mut Cursor,
    kw: &str,
    op: BinOp,
    next: fn(&mut Cursor) -> Result<Expr, ParseError>,
) -> Result<Expr, ParseError> {
    let mut lhs = next(c)?;
    let base = c.depth;
    let result = loop {
        if !c.is_kw(kw) {
            break Ok(lhs);
        }
        let span = c.next().span.clone();
        if let Err(e) = c.enter() {
            break Err(e);
        }
        match next(c) {
            Ok(rhs) => {
                lhs = Expr { kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, span: Some(span) }
            }
            Err(e) => break Err(e),
        }
    };
    c.depth = base;
    result
}

fn or(c: &mut Cursor) -> Result<Expr, ParseError> {
    keyword_level(c, "or", BinOp::Or, and)
}

fn and(c: &mut Cursor) -> Result<Expr, ParseError> {
    keyword_level(c, "and", BinOp::And, not)
}

fn not(c: &mut Cursor) -> Result<Expr, ParseError> {
    if c.is_kw("not") {
        let span = c.next().span.clone();
        c.enter()?;
        let inner = not(c);
        c.leave();
        return Ok(Expr { kind: ExprKind::Not { expr: Box::new(inner?) }, span: Some(span) });
    }
    comparison(c)
}

fn comparison(c: &mut Cursor) -> Result<Expr, ParseError> {
    let lhs = additive(c)?;
    let op = match c.peek() {
        Tok::Lt => BinOp::Lt,
        Tok::Le => BinOp::Le,
        Tok::EqEq => BinOp::Eq,
        Tok::Ge => BinOp::Ge,
        Tok::Gt => BinOp::Gt,
        _ => return Ok(lhs),
    };
    let span = c.next().span.clone();
    let rhs = additive(c)?;
    if matches!(c.peek(), Tok::Lt | Tok::Le | Tok::EqEq | Tok::Ge | Tok::Gt) {
        return Err(c.error("comparisons cannot be chained", &["`and`", "`or`"]));
    }
    Ok(Expr { kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, span: Some(span) })
}

fn additive(c: &mut Cursor) -> Result<Expr, ParseError> {
    binary_level(c, &[(Tok::Plus, BinOp::Add), (Tok::Minus, BinOp::Sub)], multiplicative)
}

fn multiplicative(c: &mut Cursor) -> Result<Expr, ParseError> {
    binary_level(c, &[(Tok::Star, BinOp::Mul), (Tok::Slash, BinOp::Div)], unary)
}

fn unary(c: &mut Cursor) -> Result<Expr, ParseError> {
    if *c.peek() == Tok::Minus {
        let span = c.next().span.clone();
        // A minus directly on a literal is part of the literal.
        if let Tok::Num(_) = c.peek() {
            let value = -c.number()?;
            return Ok(Expr { kind: ExprKind::Num { value }, span: Some(span) });
        }
        c.enter()?;
        let inner = unary(c);
        c.leave();
        return Ok(Expr { kind: ExprKind::Neg { expr: Box::new(inner?) }, span: Some(span) });
    }
    primary(c)
}

fn primary(c: &mut Cursor) -> Result<Expr, ParseError> {
    let span = c.span();
    let kind = match c.peek().clone() {
        Tok::Num(_) => ExprKind::Num { value: c.number()? },
        Tok::LParen => {
            c.next();
            let mut e = expr(c)?;
            c.expect(Tok::RParen)?;
            e.span = Some(span);
            return Ok(e);
        }
        Tok::Ident(word) => {
            c.next();
            match word.as_str() {
                "true" => ExprKind::Bool { value: true },
                "false" => ExprKind::Bool { value: false },
                "status" => {
                    c.expect(Tok::LParen)?;
                    let goal = c.string()?;
                    c.expect(Tok::Comma)?;
                    let index = period_index(c)?;
                    c.expect(Tok::RParen)?;
                    ExprKind::GoalStatus { goal, index }
                }
                w => {
                    if let Some(status) = Status::parse(w) {
                        ExprKind::StatusLit { status }
                    } else if KEYWORDS.contains(&w) {
                        return Err(ParseError::new(span, format!("unexpected keyword `{w}`"), &["operand"]));
                    } else {
                        c.expect(Tok::LBracket)?;
                        let index = period_index(c)?;
                        c.expect(Tok::RBracket)?;
                        ExprKind::Metric { id: word, index }
                    }
                }
            }
        }
        _ => return Err(c.unexpected(&["number", "metric reference", "`status(`", "`(`"])),
    };
    Ok(Expr { kind, span: Some(span) })
}

fn period_index(c: &mut Cursor) -> Result<PeriodIndex, ParseError> {
    if c.eat_kw("x") {
        if c.eat(&Tok::Minus) {
            return Ok(PeriodIndex::Current(c.integer()?));
        }
        if *c.peek() == Tok::Plus {
            return Err(c.error("only lookbacks (`x-k`) are allowed", &["`-`", "`]`"]));
        }
        return Ok(PeriodIndex::Current(0));
    }
    match c.peek() {
        Tok::Num(_) => Ok(PeriodIndex::Fixed(c.integer()?)),
        _ => Err(c.unexpected(&["`x`", "`x-k`", "integer"])),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Type {
    Num,
    Bool,
    Status,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Type::Num => "number",
            Type::Bool => "boolean",
            Type::Status => "status",
        })
    }
}

/// Static type of an expression, or a message describing the first
/// operand mismatch.
pub fn type_check(e: &Expr) -> Result<Type, String> {
    let want = |e: &Expr, t: Type, what: &str| -> Result<(), String> {
        let got = type_check(e)?;
        if got != t {
            return Err(format!("{what} expects a {t} operand, found {got} `{e}`"));
        }
        Ok(())
    };
    Ok(match &e.kind {
        ExprKind::Num { .. } | ExprKind::Metric { .. } => Type::Num,
        ExprKind::Bool { .. } => Type::Bool,
        ExprKind::StatusLit { .. } | ExprKind::GoalStatus { .. } => Type::Status,
        ExprKind::Neg { expr } => {
            want(expr, Type::Num, "negation")?;
            Type::Num
        }
        ExprKind::Not { expr } => {
            want(expr, Type::Bool, "`not`")?;
            Type::Bool
        }
        ExprKind::Binary { op, lhs, rhs } => match op {
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                want(lhs, Type::Num, op.symbol())?;
                want(rhs, Type::Num, op.symbol())?;
                Type::Num
            }
            BinOp::Lt | BinOp::Le | BinOp::Ge | BinOp::Gt => {
                want(lhs, Type::Num, op.symbol())?;
                want(rhs, Type::Num, op.symbol())?;
                Type::Bool
            }
            BinOp::Eq => {
                let t = type_check(lhs)?;
                want(rhs, t, "`==`")?;
                Type::Bool
            }
            BinOp::And | BinOp::Or => {
                want(lhs, Type::Bool, op.symbol())?;
                want(rhs, Type::Bool, op.symbol())?;
                Type::Bool
            }
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profit_model_condition() {
        let e = parse_expression("P[x] >= 1.1 * P[x-1]").unwrap();
        let expected = Expr::binary(
            BinOp::Ge,
            Expr::metric("P", PeriodIndex::Current(0)),
            Expr::binary(BinOp::Mul, Expr::num(1.1), Expr::metric("P", PeriodIndex::Current(1))),
        );
        assert_eq!(e, expected);
        assert_eq!(type_check(&e), Ok(Type::Bool));
    }

    #[test]
    fn boolean_literal() {
        assert_eq!(parse_expression("true").unwrap().kind, ExprKind::Bool { value: true });
    }

    #[test]
    fn missing_right_operand() {
        let err = parse_expression("P[x] >=").unwrap_err();
        assert_eq!(err.span.column, 8);
        assert!(err.message.contains("end of input"), "{}", err.message);
    }

    #[test]
    fn precedence() {
        // or < and < not < comparison < additive < multiplicative
        let e = parse_expression("a[x] > 1 or not b[x] < 2 and c[x] + 1 * 2 == 3").unwrap();
        let ExprKind::Binary { op: BinOp::Or, rhs, .. } = &e.kind else { panic!("{e:?}") };
        let ExprKind::Binary { op: BinOp::And, lhs, rhs } = &rhs.kind else { panic!() };
        assert!(matches!(lhs.kind, ExprKind::Not { .. }));
        let ExprKind::Binary { op: BinOp::Eq, lhs, .. } = &rhs.kind else { panic!() };
        let ExprKind::Binary { op: BinOp::Add, rhs, .. } = &lhs.kind else { panic!() };
        assert!(matches!(rhs.kind, ExprKind::Binary { op: BinOp::Mul, .. }));
    }

    #[test]
    fn subtraction_is_left_associative() {
        let e = parse_expression("a[1] - b[1] - c[1]").unwrap();
        assert_eq!(e.to_string(), "a[1] - b[1] - c[1]");
        let ExprKind::Binary { lhs, .. } = &e.kind else { panic!() };
        assert!(matches!(lhs.kind, ExprKind::Binary { op: BinOp::Sub, .. }));
    }

    #[test]
    fn status_reference() {
        let e = parse_expression("status(\"Goal2\", x) == Satisfied").unwrap();
        assert_eq!(e.status_refs(), vec![("Goal2", PeriodIndex::Current(0))]);
        assert_eq!(type_check(&e), Ok(Type::Bool));
    }

    #[test]
    fn rejects_lookahead_and_chains() {
        assert!(parse_expression("P[x+1]").is_err());
        assert!(parse_expression("a[x] < b[x] < c[x]").is_err());
        assert!(parse_expression("and[x]").is_err());
    }

    #[test]
    fn type_errors() {
        let e = parse_expression("P[x] + true").unwrap();
        assert!(type_check(&e).is_err());
        let e = parse_expression("status(\"G\", x) == 1").unwrap();
        assert!(type_check(&e).is_err());
    }

    #[test]
    fn model_chain() {
        let m = parse_model(
            "for x in 2.. \
             if P[x] >= 1.1 * P[x-1] then satisfied \"the goal has been satisfied\" \
             else if status(\"Goal2\", x) == Satisfied then not_satisfied(assumption, strategy(\"S1\"))",
        )
        .unwrap();
        assert_eq!(m.start, 2);
        assert_eq!(m.branches.len(), 2);
        assert!(m.otherwise.is_none());
        assert_eq!(m.branches[1].outcome.causes[1].ids, ["S1"]);
    }

    #[test]
    fn model_rejects_numeric_condition_and_satisfied_causes() {
        assert!(parse_model("if P[x] then satisfied").is_err());
        assert!(parse_model("if true then satisfied(assumption)").is_err());
        assert!(parse_model("for x in 0.. if true then satisfied").is_err());
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let text = format!("{}1{}", "(".repeat(5000), ")".repeat(5000));
        assert!(parse_expression(&text).is_err());
        let text = format!("{}true", "not ".repeat(5000));
        assert!(parse_expression(&text).is_err());
        let text = format!("{}1", "-".repeat(5000));
        assert!(parse_expression(&text).is_err());
        let text = format!("1{}", " + 1".repeat(5000));
        assert!(parse_expression(&text).is_err());
        let text = format!("true{}", " or true".repeat(5000));
        assert!(parse_expression(&text).is_err());
    }
}
