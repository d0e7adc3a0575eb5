use std::collections::{BTreeMap, BTreeSet};

use super::cursor::Cursor;
use super::lexer::{tokenize, Tok};
use super::{ParseError, SourceMap, SourceSpan};
use crate::interp::{is_metric_id, parse_model_tokens};
use crate::model::{
    build_grid, Assumption, ContextFactor, Element, Goal, GoalTemplate, GqmGraph, Grid, MeasurementGoal, Question,
    Relation, RelationKind, RelationRef, Strategy,
};

/// A parsed document together with the positions of its entities.
#[derive(Debug, Clone)]
pub struct ParsedModel {
    pub grid: Grid,
    pub source_map: SourceMap,
}

pub fn parse_model(text: &str) -> Result<Grid, ParseError> {
    parse_model_named(text, "<input>").map(|p| p.grid)
}

/// Parses raw bytes; invalid UTF-8 is reported as a parse error.
pub fn parse_model_bytes(bytes: &[u8], file: &str) -> Result<ParsedModel, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_model_named(text, file),
        Err(e) => {
            let prefix = &bytes[..e.valid_up_to()];
            let line = 1 + prefix.iter().filter(|b| **b == b'\n').count() as u32;
            let last_line = prefix.rsplit(|b| *b == b'\n').next().unwrap_or_default();
            let column = 1 + String::from_utf8_lossy(last_line).chars().count() as u32;
            Err(ParseError::new(
                SourceSpan { file: file.to_string(), line, column },
                "invalid UTF-8",
                &[],
            ))
        }
    }
}

pub fn parse_model_named(text: &str, file: &str) -> Result<ParsedModel, ParseError> {
    let toks = tokenize(text, file)?;
    let mut p = DocParser::new(Cursor::new(&toks));
    p.document()?;
    p.finish(file)
}

/// Parses a single `element` block, as stored in experience-base patterns.
/// Context factors and assumptions declared inside it are returned with it.
pub fn parse_element(
    text: &str,
    file: &str,
) -> Result<(Element, Vec<ContextFactor>, Vec<Assumption>), ParseError> {
    let toks = tokenize(text, file)?;
    let mut p = DocParser::new(Cursor::new(&toks));
    if !p.c.is_kw("element") {
        return Err(p.c.unexpected(&["`element`"]));
    }
    p.element()?;
    if !p.c.at_eof() {
        return Err(p.c.unexpected(&["end of input"]));
    }
    let element = p.elements.pop().expect("one element parsed");
    Ok((element, p.contexts, p.assumptions))
}

struct DocParser<'t> {
    c: Cursor<'t>,
    elements: Vec<Element>,
    graphs: Vec<GqmGraph>,
    contexts: Vec<ContextFactor>,
    assumptions: Vec<Assumption>,
    relations: Vec<Relation>,
    map: SourceMap,
    ids: BTreeMap<String, SourceSpan>,
    /// Goal or factor ids referenced before they may have been declared.
    refs: Vec<(String, &'static str, SourceSpan)>,
}

impl<'t> DocParser<'t> {
    fn new(c: Cursor<'t>) -> Self {
        Self {
            c,
            elements: vec![],
            graphs: vec![],
            contexts: vec![],
            assumptions: vec![],
            relations: vec![],
            map: SourceMap::default(),
            ids: BTreeMap::new(),
            refs: vec![],
        }
    }

    fn declare(&mut self, kind: &str, id: &str, span: SourceSpan) -> Result<(), ParseError> {
        if let Some(prev) = self.ids.get(id) {
            return Err(ParseError::new(span, format!("duplicate id `{id}` (first declared at {prev})"), &[]));
        }
        self.ids.insert(id.to_string(), span.clone());
        self.map.push(format!("{kind}:{id}"), span);
        Ok(())
    }

    fn document(&mut self) -> Result<(), ParseError> {
        while !self.c.at_eof() {
            if self.c.is_kw("element") {
                self.element()?;
            } else if self.c.is_kw("graph") {
                self.graph()?;
            } else if self.c.is_kw("relation") {
                self.relation()?;
            } else if self.c.is_kw("context") || self.c.is_kw("assumption") {
                let span = self.c.span();
                let is_context = self.c.is_kw("context");
                self.c.next();
                let id = self.c.string()?;
                if !matches!(self.c.peek(), Tok::Str(_)) {
                    return Err(self.c.error("a top-level declaration needs a statement", &["string"]));
                }
                self.factor(is_context, id, span)?;
            } else {
                return Err(self.c.unexpected(&["`element`", "`graph`", "`relation`", "`context`", "`assumption`"]));
            }
        }
        Ok(())
    }

    fn factor(&mut self, is_context: bool, id: String, span: SourceSpan) -> Result<(), ParseError> {
        let statement = self.c.string()?;
        let valid = !self.c.eat_kw("invalid");
        if is_context {
            self.declare("context", &id, span)?;
            self.contexts.push(ContextFactor { id, statement, valid });
        } else {
            self.declare("assumption", &id, span)?;
            self.assumptions.push(Assumption { id, statement, valid });
        }
        Ok(())
    }

    fn element(&mut self) -> Result<(), ParseError> {
        let span = self.c.expect_kw("element")?;
        let id = self.c.string()?;
        self.c.expect_kw("level")?;
        let level_at = self.c.span();
        let level = self.c.integer()?;
        if level == 0 {
            return Err(ParseError::new(level_at, "levels start at 1", &["integer >= 1"]));
        }
        let terminal = self.c.eat_kw("terminal");
        self.declare("element", &id, span.clone())?;
        self.c.expect(Tok::LBrace)?;

        let mut template = None;
        let mut e = Element::new(Goal { id: id.clone(), level, template: GoalTemplate::default() });
        e.terminal = terminal;
        loop {
            let at = self.c.span();
            if self.c.eat(&Tok::RBrace) {
                break;
            } else if self.c.eat_kw("goal") {
                if template.is_some() {
                    return Err(ParseError::new(at, "duplicate `goal` block", &[]));
                }
                template = Some(self.goal_template()?);
            } else if self.c.is_kw("context") || self.c.is_kw("assumption") {
                let is_context = self.c.is_kw("context");
                self.c.next();
                let fid = self.c.string()?;
                let list = if is_context { &mut e.context_ids } else { &mut e.assumption_ids };
                if list.contains(&fid) {
                    return Err(ParseError::new(at, format!("`{fid}` is already attached to `{id}`"), &[]));
                }
                list.push(fid.clone());
                if matches!(self.c.peek(), Tok::Str(_)) {
                    self.factor(is_context, fid, at)?;
                } else {
                    self.refs.push((fid, if is_context { "context factor" } else { "assumption" }, at));
                }
            } else if self.c.eat_kw("strategy") {
                let sid = self.c.string()?;
                let description = self.c.string()?;
                self.declare("strategy", &sid, at)?;
                let mut s = Strategy { id: sid, description, activities: vec![], derives: vec![] };
                if self.c.eat_kw("activities") {
                    s.activities = self.string_list()?;
                }
                if self.c.eat_kw("derives") {
                    loop {
                        let at = self.c.span();
                        let g = self.c.string()?;
                        self.refs.push((g.clone(), "goal", at));
                        s.derives.push(g);
                        if !self.c.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                e.strategies.push(s);
            } else {
                return Err(self.c.unexpected(&["`goal`", "`context`", "`assumption`", "`strategy`", "`}`"]));
            }
        }
        e.goal.template = template.ok_or_else(|| ParseError::new(span, format!("element `{id}` has no `goal` block"), &["`goal`"]))?;
        self.elements.push(e);
        Ok(())
    }

    fn goal_template(&mut self) -> Result<GoalTemplate, ParseError> {
        let open = self.c.expect(Tok::LBrace)?;
        let mut t = GoalTemplate::default();
        let mut seen = BTreeSet::new();
        self.fields(&mut seen, |p, key, at| {
            match key {
                "activity" => t.activity = p.c.string()?,
                "focus" => t.focus = p.c.string()?,
                "object" => t.object = p.c.string()?,
                "magnitude" => t.magnitude = p.c.string()?,
                "timeframe" => t.timeframe = p.c.string()?,
                "scope" => t.scope = p.c.string()?,
                "constraints" => t.constraints = p.string_list()?,
                "relations" => t.relations = p.relation_list()?,
                _ => {
                    return Err(ParseError::new(
                        at,
                        format!("unknown goal field `{key}`"),
                        &["activity", "focus", "object", "magnitude", "timeframe", "scope", "constraints", "relations"],
                    ))
                }
            }
            Ok(())
        })?;
        for (field, value) in [("activity", &t.activity), ("focus", &t.focus), ("object", &t.object)] {
            if value.trim().is_empty() {
                return Err(ParseError::new(open.clone(), format!("goal field `{field}` is required and non-empty"), &[field]));
            }
        }
        Ok(t)
    }

    /// `key: value;` pairs up to the closing brace; the last `;` is optional.
    fn fields(
        &mut self,
        seen: &mut BTreeSet<String>,
        mut value: impl FnMut(&mut Self, &str, SourceSpan) -> Result<(), ParseError>,
    ) -> Result<(), ParseError> {
        loop {
            if self.c.eat(&Tok::RBrace) {
                return Ok(());
            }
            let at = self.c.span();
            let key = self.c.ident()?;
            if !seen.insert(key.clone()) {
                return Err(ParseError::new(at, format!("duplicate field `{key}`"), &[]));
            }
            self.c.expect(Tok::Colon)?;
            value(self, &key, at)?;
            if !self.c.eat(&Tok::Semi) && *self.c.peek() != Tok::RBrace {
                return Err(self.c.unexpected(&["`;`", "`}`"]));
            }
        }
    }

    fn string_list(&mut self) -> Result<Vec<String>, ParseError> {
        self.c.expect(Tok::LBracket)?;
        let mut out = Vec::new();
        if self.c.eat(&Tok::RBracket) {
            return Ok(out);
        }
        loop {
            out.push(self.c.string()?);
            if !self.c.eat(&Tok::Comma) {
                break;
            }
        }
        self.c.expect(Tok::RBracket)?;
        Ok(out)
    }

    fn relation_list(&mut self) -> Result<Vec<RelationRef>, ParseError> {
        self.c.expect(Tok::LBracket)?;
        let mut out = Vec::new();
        if self.c.eat(&Tok::RBracket) {
            return Ok(out);
        }
        loop {
            let at = self.c.span();
            if self.c.eat_kw("goal") {
                let g = self.c.string()?;
                self.refs.push((g.clone(), "goal", at));
                out.push(RelationRef::Goal(g));
            } else {
                match self.c.peek() {
                    Tok::Str(_) => out.push(RelationRef::Text(self.c.string()?)),
                    _ => return Err(self.c.unexpected(&["string", "`goal \"<id>\"`"])),
                }
            }
            if !self.c.eat(&Tok::Comma) {
                break;
            }
        }
        self.c.expect(Tok::RBracket)?;
        Ok(out)
    }

    fn graph(&mut self) -> Result<(), ParseError> {
        let span = self.c.expect_kw("graph")?;
        self.c.expect_kw("for")?;
        let at = self.c.span();
        let element = self.c.string()?;
        self.refs.push((element.clone(), "goal", at));
        if self.map.get(&format!("graph:{element}")).is_some() {
            return Err(ParseError::new(span, format!("element `{element}` already has a graph"), &[]));
        }
        self.map.push(format!("graph:{element}"), span.clone());
        self.c.expect(Tok::LBrace)?;
        let mut mgoal = None;
        let mut model = None;
        let mut questions: Vec<Question> = Vec::new();
        loop {
            let at = self.c.span();
            if self.c.eat(&Tok::RBrace) {
                break;
            } else if self.c.eat_kw("mgoal") {
                if mgoal.is_some() || !questions.is_empty() || model.is_some() {
                    return Err(ParseError::new(at, "`mgoal` must appear once, first in the graph", &[]));
                }
                self.c.expect(Tok::LBrace)?;
                let mut g = MeasurementGoal::default();
                self.fields(&mut BTreeSet::new(), |p, key, at| {
                    let slot = match key {
                        "object" => &mut g.object,
                        "purpose" => &mut g.purpose,
                        "focus" => &mut g.focus,
                        "viewpoint" => &mut g.viewpoint,
                        "context" => &mut g.context,
                        _ => {
                            return Err(ParseError::new(
                                at,
                                format!("unknown measurement goal field `{key}`"),
                                &["object", "purpose", "focus", "viewpoint", "context"],
                            ))
                        }
                    };
                    *slot = p.c.string()?;
                    Ok(())
                })?;
                mgoal = Some(g);
            } else if self.c.eat_kw("question") {
                if model.is_some() {
                    return Err(ParseError::new(at, "questions must precede the model", &[]));
                }
                let id = self.c.string()?;
                let text = self.c.string()?;
                if questions.iter().any(|q| q.id == id) {
                    return Err(ParseError::new(at, format!("duplicate question `{id}`"), &[]));
                }
                self.map.push(format!("question:{element}/{id}"), at);
                self.c.expect_kw("metrics")?;
                self.c.expect(Tok::LBracket)?;
                let mut metrics = Vec::new();
                if !self.c.eat(&Tok::RBracket) {
                    loop {
                        let at = self.c.span();
                        let m = self.c.ident()?;
                        if !is_metric_id(&m) {
                            return Err(ParseError::new(at, format!("`{m}` is reserved"), &["metric id"]));
                        }
                        metrics.push(m);
                        if !self.c.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.c.expect(Tok::RBracket)?;
                }
                questions.push(Question { id, text, metrics });
            } else if self.c.eat_kw("model") {
                if model.is_some() {
                    return Err(ParseError::new(at, "duplicate `model` block", &[]));
                }
                self.c.expect(Tok::LBrace)?;
                model = Some(parse_model_tokens(&mut self.c)?);
                self.c.expect(Tok::RBrace)?;
            } else {
                return Err(self.c.unexpected(&["`mgoal`", "`question`", "`model`", "`}`"]));
            }
        }
        let model = model.ok_or_else(|| ParseError::new(span, format!("graph for `{element}` has no `model` block"), &["`model`"]))?;
        self.graphs.push(GqmGraph { element, mgoal: mgoal.unwrap_or_default(), questions, model });
        Ok(())
    }

    fn relation(&mut self) -> Result<(), ParseError> {
        let span = self.c.expect_kw("relation")?;
        let from = self.c.string()?;
        let at = self.c.span();
        let kind = self.c.ident()?;
        let kind = RelationKind::parse(&kind)
            .ok_or_else(|| ParseError::new(at, format!("unknown relation kind `{kind}`"), &["conflicts", "supports", "relates"]))?;
        let to = self.c.string()?;
        self.refs.push((from.clone(), "goal", span.clone()));
        self.refs.push((to.clone(), "goal", span.clone()));
        self.map.push(format!("relation:{}", self.relations.len()), span);
        self.relations.push(Relation { from, to, kind });
        Ok(())
    }

    fn finish(self, file: &str) -> Result<ParsedModel, ParseError> {
        let goals: BTreeSet<&str> = self.elements.iter().map(|e| e.goal.id.as_str()).collect();
        let contexts: BTreeSet<&str> = self.contexts.iter().map(|c| c.id.as_str()).collect();
        let assumptions: BTreeSet<&str> = self.assumptions.iter().map(|a| a.id.as_str()).collect();
        for (id, kind, span) in &self.refs {
            let known = match *kind {
                "goal" => goals.contains(id.as_str()),
                "context factor" => contexts.contains(id.as_str()),
                _ => assumptions.contains(id.as_str()),
            };
            if !known {
                return Err(ParseError::new(span.clone(), format!("unknown {kind} `{id}`"), &[]));
            }
        }
        let grid = build_grid(self.elements, self.graphs, self.contexts, self.assumptions, self.relations)
            .map_err(|e| ParseError::new(SourceSpan::start(file), e.to_string(), &[]))?;
        Ok(ParsedModel { grid, source_map: self.map })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
element "Goal1" level 1 terminal {
  goal {
    activity: "Increase";
    focus: "Net Income";
    object: "ABC Web Services";
    magnitude: "10% per year"
  }
}
graph for "Goal1" {
  model { if true then satisfied }
}
"#;

    #[test]
    fn minimal_document() {
        let g = parse_model(MINIMAL).unwrap();
        assert_eq!(g.elements.len(), 1);
        let t = &g.elements["Goal1"].goal.template;
        assert_eq!(
            (t.activity.as_str(), t.focus.as_str(), t.object.as_str(), t.magnitude.as_str()),
            ("Increase", "Net Income", "ABC Web Services", "10% per year")
        );
        assert!(g.elements["Goal1"].terminal);
    }

    #[test]
    fn misspelled_key_reports_position() {
        let text = MINIMAL.replace("    focus:", "    focuss:");
        let err = parse_model(&text).unwrap_err();
        assert_eq!((err.span.line, err.span.column), (5, 5));
        assert!(err.message.contains("focuss"));
        assert!(err.expected.iter().any(|e| e == "focus"));
    }

    #[test]
    fn dangling_derivation_is_located() {
        let text = MINIMAL.replace("terminal {", "{\n  strategy \"S1\" \"s\" derives \"GoalX\"");
        let err = parse_model(&text).unwrap_err();
        assert!(err.message.contains("GoalX"));
        assert_eq!(err.span.line, 3);
    }

    #[test]
    fn duplicate_ids() {
        let text = format!("{MINIMAL}\nelement \"Goal1\" level 1 {{ goal {{ activity: \"a\"; focus: \"b\"; object: \"c\"; }} }}");
        assert!(parse_model(&text).unwrap_err().message.contains("duplicate id"));
    }

    #[test]
    fn missing_required_field() {
        let text = MINIMAL.replace("    object: \"ABC Web Services\";\n", "");
        assert!(parse_model(&text).unwrap_err().message.contains("object"));
    }

    #[test]
    fn factors_inline_and_by_reference() {
        let text = r#"
element "A" level 1 {
  goal { activity: "a"; focus: "f"; object: "o"; }
  context "C1" "shared fact"
  assumption "X1" "guess" invalid
  strategy "S" "d" derives "B"
}
element "B" level 2 terminal {
  goal { activity: "a"; focus: "f"; object: "o"; }
  context "C1"
}
"#;
        let p = parse_model_named(text, "m.gqms").unwrap();
        assert_eq!(p.grid.elements["B"].context_ids, ["C1"]);
        assert!(!p.grid.assumptions["X1"].valid);
        assert!(p.grid.context_factors["C1"].valid);
        let spans: Vec<_> = p.source_map.entries.iter().map(|(_, s)| (s.line, s.column)).collect();
        assert!(spans.windows(2).all(|w| w[0] <= w[1]), "{spans:?}");
    }

    #[test]
    fn invalid_utf8() {
        let err = parse_model_bytes(b"element \"\xff\"", "x").unwrap_err();
        assert_eq!((err.span.line, err.span.column), (1, 10));
    }

    #[test]
    fn single_element_parse() {
        let (e, c, a) = parse_element(
            "element \"E\" level 1 terminal { goal { activity: \"a\"; focus: \"f\"; object: \"o\"; } assumption \"A\" \"s\" }",
            "p",
        )
        .unwrap();
        assert_eq!(e.assumption_ids, ["A"]);
        assert!(c.is_empty());
        assert_eq!(a.len(), 1);
    }
}
