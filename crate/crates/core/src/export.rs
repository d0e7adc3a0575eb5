//! Graphviz and JSON renderings of a grid.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::model::Grid;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// DOT digraph with one node per element and per GQM graph. Solid edges
/// are derivations; dashed edges link an element to its measurement.
pub fn to_dot(grid: &Grid) -> String {
    let mut out = String::from("digraph gqmgrid {\n");
    let mut ids: Vec<&str> = grid.elements.keys().map(String::as_str).collect();
    ids.sort_by_key(|id| (grid.elements[*id].goal.level, *id));
    for id in &ids {
        let t = &grid.elements[*id].goal.template;
        let label = format!("{id}\n{} {}", t.activity, t.focus);
        writeln!(out, "  {} [shape=box, label={}];", quote(&format!("element:{id}")), quote(&label)).unwrap();
    }
    for id in &ids {
        if grid.graphs.contains_key(*id) {
            writeln!(out, "  {} [shape=ellipse, label={}];", quote(&format!("graph:{id}")), quote(&format!("GQM {id}")))
                .unwrap();
        }
    }
    for id in &ids {
        let mut seen = BTreeSet::new();
        for child in grid.elements[*id].children() {
            if seen.insert(child) {
                writeln!(out, "  {} -> {};", quote(&format!("element:{id}")), quote(&format!("element:{child}"))).unwrap();
            }
        }
        if grid.graphs.contains_key(*id) {
            writeln!(out, "  {} -> {} [style=dashed];", quote(&format!("element:{id}")), quote(&format!("graph:{id}")))
                .unwrap();
        }
    }
    out.push_str("}\n");
    out
}

pub fn to_json(grid: &Grid) -> String {
    serde_json::to_string_pretty(grid).expect("grid serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;

    #[test]
    fn empty_grid() {
        assert_eq!(to_dot(&Grid::default()), "digraph gqmgrid {\n}\n");
    }

    #[test]
    fn edges() {
        let g = parse_model(
            r#"element "A" level 1 { goal { activity: "Increase"; focus: "x"; object: "o"; } strategy "S" "s" derives "B" }
element "B" level 2 terminal { goal { activity: "a"; focus: "f"; object: "o"; } }
graph for "A" { mgoal { object: "o"; purpose: "p"; focus: "f"; viewpoint: "v"; context: "c"; } model { if true then satisfied } }
"#,
        )
        .unwrap();
        let dot = to_dot(&g);
        assert!(dot.contains("\"element:A\" -> \"element:B\";"));
        assert!(dot.contains("\"element:A\" -> \"graph:A\" [style=dashed];"));
        assert!(dot.contains("label=\"A\\nIncrease x\""));
        assert_eq!(dot.matches("->").count(), 2);
    }
}
