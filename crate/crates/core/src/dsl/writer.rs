use std::collections::BTreeSet;
use std::fmt::Write;

use crate::interp::{write_str_lit, CauseKind, InterpModel, OutcomeSpec, Status};
use crate::model::{Element, GqmGraph, Grid, RelationRef};

pub const HEADER: &str = "# gqmgrid model\n";

fn lit(s: &str) -> String {
    let mut out = String::new();
    write_str_lit(&mut out, s).expect("writing to a String");
    out
}

fn list(items: impl IntoIterator<Item = String>) -> String {
    format!("[{}]", items.into_iter().collect::<Vec<_>>().join(", "))
}

/// Canonical text of a grid: elements by level then id, fixed field order,
/// two-space indentation. Context factors and assumptions are declared
/// where first attached; unattached ones are declared at the top.
pub fn serialize_model(grid: &Grid) -> String {
    let mut out = String::from(HEADER);
    let mut elements: Vec<&Element> = grid.elements.values().collect();
    elements.sort_by(|a, b| (a.goal.level, &a.goal.id).cmp(&(b.goal.level, &b.goal.id)));

    let attached: BTreeSet<&str> = elements
        .iter()
        .flat_map(|e| e.context_ids.iter().chain(&e.assumption_ids))
        .map(String::as_str)
        .collect();
    let mut top = String::new();
    for c in grid.context_factors.values().filter(|c| !attached.contains(c.id.as_str())) {
        writeln!(top, "context {} {}{}", lit(&c.id), lit(&c.statement), if c.valid { "" } else { " invalid" }).unwrap();
    }
    for a in grid.assumptions.values().filter(|a| !attached.contains(a.id.as_str())) {
        writeln!(top, "assumption {} {}{}", lit(&a.id), lit(&a.statement), if a.valid { "" } else { " invalid" }).unwrap();
    }
    if !top.is_empty() {
        out.push('\n');
        out.push_str(&top);
    }

    let mut declared = BTreeSet::new();
    for e in &elements {
        out.push('\n');
        write_element(&mut out, e, grid, &mut declared);
    }
    for e in &elements {
        if let Some(g) = grid.graphs.get(e.id()) {
            out.push('\n');
            write_graph(&mut out, g);
        }
    }
    if !grid.relations.is_empty() {
        out.push('\n');
        for r in &grid.relations {
            writeln!(out, "relation {} {} {}", lit(&r.from), r.kind.as_str(), lit(&r.to)).unwrap();
        }
    }
    out
}

/// One element block with its factors declared inline, as written by the
/// experience base.
pub fn serialize_element(
    element: &Element,
    contexts: &[crate::model::ContextFactor],
    assumptions: &[crate::model::Assumption],
) -> String {
    let mut grid = Grid::default();
    grid.context_factors = contexts.iter().map(|c| (c.id.clone(), c.clone())).collect();
    grid.assumptions = assumptions.iter().map(|a| (a.id.clone(), a.clone())).collect();
    let mut out = String::new();
    write_element(&mut out, element, &grid, &mut BTreeSet::new());
    out
}

fn write_element(out: &mut String, e: &Element, grid: &Grid, declared: &mut BTreeSet<String>) {
    let t = &e.goal.template;
    writeln!(
        out,
        "element {} level {}{} {{",
        lit(&e.goal.id),
        e.goal.level,
        if e.terminal { " terminal" } else { "" }
    )
    .unwrap();
    out.push_str("  goal {\n");
    for (key, value) in [
        ("activity", &t.activity),
        ("focus", &t.focus),
        ("object", &t.object),
        ("magnitude", &t.magnitude),
        ("timeframe", &t.timeframe),
        ("scope", &t.scope),
    ] {
        writeln!(out, "    {key}: {};", lit(value)).unwrap();
    }
    writeln!(out, "    constraints: {};", list(t.constraints.iter().map(|c| lit(c)))).unwrap();
    let relations = t.relations.iter().map(|r| match r {
        RelationRef::Goal(g) => format!("goal {}", lit(g)),
        RelationRef::Text(s) => lit(s),
    });
    writeln!(out, "    relations: {};", list(relations)).unwrap();
    out.push_str("  }\n");

    let factor = |out: &mut String, kw: &str, id: &str, stmt: Option<(&str, bool)>, declared: &mut BTreeSet<String>| {
        match stmt {
            Some((statement, valid)) if declared.insert(id.to_string()) => writeln!(
                out,
                "  {kw} {} {}{}",
                lit(id),
                lit(statement),
                if valid { "" } else { " invalid" }
            )
            .unwrap(),
            _ => writeln!(out, "  {kw} {}", lit(id)).unwrap(),
        }
    };
    for c in &e.context_ids {
        let stmt = grid.context_factors.get(c).map(|f| (f.statement.as_str(), f.valid));
        factor(out, "context", c, stmt, declared);
    }
    for a in &e.assumption_ids {
        let stmt = grid.assumptions.get(a).map(|f| (f.statement.as_str(), f.valid));
        factor(out, "assumption", a, stmt, declared);
    }
    for s in &e.strategies {
        write!(out, "  strategy {} {}", lit(&s.id), lit(&s.description)).unwrap();
        if !s.activities.is_empty() {
            write!(out, " activities {}", list(s.activities.iter().map(|a| lit(a)))).unwrap();
        }
        if !s.derives.is_empty() {
            let derives: Vec<String> = s.derives.iter().map(|d| lit(d)).collect();
            write!(out, " derives {}", derives.join(", ")).unwrap();
        }
        out.push('\n');
    }
    out.push_str("}\n");
}

fn write_graph(out: &mut String, g: &GqmGraph) {
    writeln!(out, "graph for {} {{", lit(&g.element)).unwrap();
    out.push_str("  mgoal {\n");
    for (key, value) in [
        ("object", &g.mgoal.object),
        ("purpose", &g.mgoal.purpose),
        ("focus", &g.mgoal.focus),
        ("viewpoint", &g.mgoal.viewpoint),
        ("context", &g.mgoal.context),
    ] {
        writeln!(out, "    {key}: {};", lit(value)).unwrap();
    }
    out.push_str("  }\n");
    for q in &g.questions {
        writeln!(out, "  question {} {} metrics {}", lit(&q.id), lit(&q.text), list(q.metrics.iter().cloned())).unwrap();
    }
    out.push_str("  model {\n");
    write_model(out, &g.model, "    ");
    out.push_str("  }\n}\n");
}

pub(crate) fn write_model(out: &mut String, m: &InterpModel, indent: &str) {
    writeln!(out, "{indent}for x in {}..", m.start).unwrap();
    if m.eps != 0.0 {
        writeln!(out, "{indent}eps {}", m.eps).unwrap();
    }
    for (i, b) in m.branches.iter().enumerate() {
        let kw = if i == 0 { "if" } else { "else if" };
        writeln!(out, "{indent}{kw} {} then {}", b.condition, outcome(&b.outcome)).unwrap();
    }
    if let Some(o) = &m.otherwise {
        writeln!(out, "{indent}else {}", outcome(o)).unwrap();
    }
}

fn outcome(o: &OutcomeSpec) -> String {
    let mut s = String::from(match o.status {
        Status::Satisfied => "satisfied",
        _ => "not_satisfied",
    });
    if !o.causes.is_empty() {
        let causes: Vec<String> = o
            .causes
            .iter()
            .map(|c| {
                let kw = match c.kind {
                    CauseKind::AssumptionSuspect => "assumption",
                    _ => "strategy",
                };
                if c.ids.is_empty() {
                    kw.to_string()
                } else {
                    format!("{kw}({})", c.ids.iter().map(|i| lit(i)).collect::<Vec<_>>().join(", "))
                }
            })
            .collect();
        write!(s, "({})", causes.join(", ")).unwrap();
    }
    if !o.note.is_empty() {
        write!(s, " {}", lit(&o.note)).unwrap();
    }
    s
}
