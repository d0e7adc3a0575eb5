//! Reusable goal/strategy patterns stored as `.gqmsp` files.
//!
//! A pattern file starts with a header and ends with one `element` block
//! in the model syntax:
//!
//! ```text
//! pattern "increase-profit"
//! param "magnitude"
//! requires "Revenue is determined by customer usage"
//! assumes "Added functionality increases usage"
//! element "IncreaseProfit" level 1 { goal { ... magnitude: "{magnitude}"; } ... }
//! ```
//!
//! `{name}` slots anywhere in the element text or in `requires`/`assumes`
//! statements are replaced by bound values when the pattern is applied.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

use crate::dsl::lexer::{is_ident_char, is_ident_start, tokenize, Tok};
use crate::dsl::{parse_element, ParseError, SourceSpan};
use crate::dsl::cursor::Cursor;
use crate::model::{Assumption, ContextFactor, Element};

pub const PATTERN_EXTENSION: &str = "gqmsp";

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("unknown pattern `{0}`")]
    UnknownPattern(String),
    #[error("no binding for placeholder `{0}`")]
    UnboundPlaceholder(String),
    #[error("pattern `{pattern}` has no parameter `{name}`")]
    UnknownParameter { pattern: String, name: String },
    #[error("placeholder `{{{name}}}` is not declared by pattern `{pattern}`")]
    UndeclaredPlaceholder { pattern: String, name: String },
    #[error("duplicate pattern `{0}`")]
    DuplicatePattern(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub id: String,
    pub params: Vec<String>,
    /// Context statements the pattern presumes of the adopting organization.
    pub requires: Vec<String>,
    /// Assumptions inherent to the pattern.
    pub assumes: Vec<String>,
    /// Element text with `{placeholder}` slots.
    pub body: String,
    pub file: String,
}

/// `{name}` slots in `text`, in order of first appearance.
fn placeholders(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    substitute(text, |name| {
        if !out.iter().any(|n| n == name) {
            out.push(name.to_string());
        }
        None
    });
    out
}

/// Replaces `{name}` slots; `lookup` returning `None` leaves a slot as is.
fn substitute(text: &str, mut lookup: impl FnMut(&str) -> Option<String>) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let name_len = after.find(|c: char| !is_ident_char(c)).unwrap_or(after.len());
        let name = &after[..name_len];
        let closed = after[name_len..].starts_with('}');
        let escaped = out.ends_with('\\');
        if !escaped && closed && name.chars().next().is_some_and(is_ident_start) {
            match lookup(name) {
                Some(v) => out.push_str(&v),
                None => out.push_str(&rest[open..open + name_len + 2]),
            }
            rest = &after[name_len + 1..];
        } else {
            out.push('{');
            rest = after;
        }
    }
    out.push_str(rest);
    out
}

fn escape(value: &str) -> String {
    value.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n").replace('\t', "\\t")
}

impl Pattern {
    pub fn parse(text: &str, file: &str) -> Result<Self, PatternError> {
        // The header ends at the first line starting with `element`.
        let mut offset = 0;
        let mut body_start = None;
        for line in text.split_inclusive('\n') {
            if line.trim_start().starts_with("element") {
                body_start = Some(offset);
                break;
            }
            offset += line.len();
        }
        let Some(body_start) = body_start else {
            let lines = text.lines().count().max(1) as u32;
            return Err(ParseError::new(
                SourceSpan { file: file.to_string(), line: lines, column: 1 },
                "pattern has no `element` block",
                &["`element`"],
            )
            .into());
        };
        let (header, body) = text.split_at(body_start);

        let toks = tokenize(header, file)?;
        let mut c = Cursor::new(&toks);
        c.expect_kw("pattern")?;
        let id = c.string()?;
        let (mut params, mut requires, mut assumes) = (Vec::new(), Vec::new(), Vec::new());
        while !c.at_eof() {
            let at = c.span();
            if c.eat_kw("param") {
                let p = c.string()?;
                if params.contains(&p) {
                    return Err(ParseError::new(at, format!("duplicate parameter `{p}`"), &[]).into());
                }
                params.push(p);
            } else if c.eat_kw("requires") {
                requires.push(c.string()?);
            } else if c.eat_kw("assumes") {
                assumes.push(c.string()?);
            } else {
                return Err(c.unexpected(&["`param`", "`requires`", "`assumes`", "`element`"]).into());
            }
        }
        debug_assert!(matches!(c.peek(), Tok::Eof));

        let pattern = Pattern { id, params, requires, assumes, body: body.to_string(), file: file.to_string() };
        for text in std::iter::once(&pattern.body).chain(&pattern.requires).chain(&pattern.assumes) {
            if let Some(name) = placeholders(text).into_iter().find(|n| !pattern.params.contains(n)) {
                return Err(PatternError::UndeclaredPlaceholder { pattern: pattern.id.clone(), name });
            }
        }
        Ok(pattern)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExperienceBase {
    pub patterns: BTreeMap<String, Pattern>,
}

impl ExperienceBase {
    pub fn insert(&mut self, p: Pattern) -> Result<(), PatternError> {
        if self.patterns.contains_key(&p.id) {
            return Err(PatternError::DuplicatePattern(p.id));
        }
        self.patterns.insert(p.id.clone(), p);
        Ok(())
    }

    /// Loads every `.gqmsp` file in `dir` (not recursive).
    pub fn load_dir(dir: &Path) -> Result<Self, PatternError> {
        let io = |source| PatternError::Io { path: dir.display().to_string(), source };
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == PATTERN_EXTENSION))
            .collect();
        files.sort();
        let mut eb = Self::default();
        for path in files {
            let text = std::fs::read_to_string(&path)
                .map_err(|source| PatternError::Io { path: path.display().to_string(), source })?;
            eb.insert(Pattern::parse(&text, &path.display().to_string())?)?;
        }
        Ok(eb)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.patterns.keys().map(String::as_str)
    }
}

/// A concrete element produced from a pattern, with the factors it brings.
#[derive(Debug, Clone, PartialEq)]
pub struct Instantiation {
    pub element: Element,
    pub context_factors: Vec<ContextFactor>,
    pub assumptions: Vec<Assumption>,
}

pub fn instantiate_pattern(
    eb: &ExperienceBase,
    pattern_id: &str,
    bindings: &BTreeMap<String, String>,
) -> Result<Instantiation, PatternError> {
    let p = eb.patterns.get(pattern_id).ok_or_else(|| PatternError::UnknownPattern(pattern_id.to_string()))?;
    if let Some(name) = bindings.keys().find(|k| !p.params.contains(k)) {
        return Err(PatternError::UnknownParameter { pattern: p.id.clone(), name: name.clone() });
    }
    if let Some(name) = p.params.iter().find(|n| !bindings.contains_key(*n)) {
        return Err(PatternError::UnboundPlaceholder(name.clone()));
    }
    let body = substitute(&p.body, |name| bindings.get(name).map(|v| escape(v)));
    let (mut element, mut contexts, mut assumptions) = parse_element(&body, &p.file)?;

    let mut taken: BTreeSet<String> = contexts
        .iter()
        .map(|c| c.id.clone())
        .chain(assumptions.iter().map(|a| a.id.clone()))
        .chain(element.strategies.iter().map(|s| s.id.clone()))
        .collect();
    taken.insert(element.goal.id.clone());
    let mut fresh = |prefix: &str| {
        let mut n = 1;
        loop {
            let id = format!("{}-{prefix}{n}", element.goal.id);
            if taken.insert(id.clone()) {
                return id;
            }
            n += 1;
        }
    };
    let fill = |s: &String| substitute(s, |name| bindings.get(name).cloned());
    let mut new_contexts = Vec::new();
    for statement in &p.requires {
        new_contexts.push(ContextFactor { id: fresh("ctx"), statement: fill(statement), valid: true });
    }
    let mut new_assumptions = Vec::new();
    for statement in &p.assumes {
        new_assumptions.push(Assumption { id: fresh("asm"), statement: fill(statement), valid: true });
    }
    element.context_ids.extend(new_contexts.iter().map(|c| c.id.clone()));
    element.assumption_ids.extend(new_assumptions.iter().map(|a| a.id.clone()));
    contexts.extend(new_contexts);
    assumptions.extend(new_assumptions);
    Ok(Instantiation { element, context_factors: contexts, assumptions })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PROFIT: &str = r#"# business goal
pattern "increase-profit"
param "magnitude"
param "timeframe"
requires "Revenue is determined by customer accesses"
assumes "Improvement of {magnitude} is achievable"
element "IncreaseProfit" level 1 {
  goal {
    activity: "Increase";
    focus: "Net Income";
    object: "ABC Web Services";
    magnitude: "{magnitude}";
    timeframe: "{timeframe}";
  }
  strategy "DeliverFunctionality" "Deliver added functionality in frequent releases"
}
"#;

    fn eb(texts: &[&str]) -> ExperienceBase {
        let mut eb = ExperienceBase::default();
        for t in texts {
            eb.insert(Pattern::parse(t, "t.gqmsp").unwrap()).unwrap();
        }
        eb
    }

    fn bind(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn substitution_and_inheritance() {
        let eb = eb(&[PROFIT]);
        let inst = instantiate_pattern(
            &eb,
            "increase-profit",
            &bind(&[("magnitude", "10% per year"), ("timeframe", "Annually, beginning in 2 years")]),
        )
        .unwrap();
        let t = &inst.element.goal.template;
        assert_eq!(t.magnitude, "10% per year");
        assert_eq!(t.timeframe, "Annually, beginning in 2 years");
        assert_eq!(inst.context_factors.len(), 1);
        assert_eq!(inst.assumptions[0].statement, "Improvement of 10% per year is achievable");
        assert_eq!(inst.element.context_ids, ["IncreaseProfit-ctx1"]);
        assert_eq!(inst.element.assumption_ids, ["IncreaseProfit-asm1"]);
    }

    #[test]
    fn unbound_placeholder() {
        let eb = eb(&[PROFIT]);
        let err = instantiate_pattern(&eb, "increase-profit", &bind(&[("timeframe", "t")])).unwrap_err();
        assert!(matches!(err, PatternError::UnboundPlaceholder(ref n) if n == "magnitude"));
        assert!(matches!(
            instantiate_pattern(&eb, "nope", &BTreeMap::new()),
            Err(PatternError::UnknownPattern(_))
        ));
    }

    #[test]
    fn zero_placeholders_is_verbatim() {
        let text = "pattern \"plain\"\nelement \"E\" level 1 terminal { goal { activity: \"a\"; focus: \"f\"; object: \"o\"; } }\n";
        let inst = instantiate_pattern(&eb(&[text]), "plain", &BTreeMap::new()).unwrap();
        let (expected, _, _) = parse_element(&text[text.find("element").unwrap()..], "x").unwrap();
        assert_eq!(inst.element, expected);
    }

    #[test]
    fn values_are_escaped() {
        let eb = eb(&[PROFIT]);
        let inst = instantiate_pattern(&eb, "increase-profit", &bind(&[("magnitude", "a \"b\" {c}"), ("timeframe", "t")])).unwrap();
        assert_eq!(inst.element.goal.template.magnitude, "a \"b\" {c}");
    }

    #[test]
    fn undeclared_placeholder_rejected() {
        let text = PROFIT.replace("param \"timeframe\"\n", "");
        assert!(matches!(Pattern::parse(&text, "t"), Err(PatternError::UndeclaredPlaceholder { ref name, .. }) if name == "timeframe"));
    }

    #[test]
    fn braces_of_blocks_are_not_slots() {
        assert_eq!(placeholders("element \"E\" level 1 { goal {x} {y z} \\{w} {_v}"), ["x", "_v"]);
    }
}
