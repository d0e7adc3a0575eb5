//! Plain-text renderings of reports.

use std::fmt::Write;

use gqmgrid::analysis::{ImpactSet, TraceStep};
use gqmgrid::interp::{Cause, Status};
use gqmgrid::EvaluationReport;

fn cause(c: &Cause) -> String {
    let mut s = format!("{:?}", c.kind);
    if !c.ids.is_empty() {
        write!(s, "({})", c.ids.join(", ")).unwrap();
    }
    if let Some(p) = c.period {
        write!(s, "@{p}").unwrap();
    }
    s
}

/// One line per (element, period): id, period, status, then detail.
pub fn report(r: &EvaluationReport) -> String {
    let width = r.entries.iter().map(|e| e.element.len()).max().unwrap_or(7).max(7);
    let mut out = format!("{:width$}  period  {:13} note\n", "element", "status");
    for e in &r.entries {
        let o = &e.outcome;
        write!(out, "{:width$}  {:>6}  {:13} {}", e.element, e.period, o.status.as_str(), o.note).unwrap();
        if e.stale {
            out.push_str(" [stale]");
        }
        out.push('\n');
        if !o.causes.is_empty() {
            let causes: Vec<String> = o.causes.iter().map(cause).collect();
            writeln!(out, "{:width$}  {:>6}  causes: {}", "", "", causes.join(", ")).unwrap();
        }
        for a in &o.advisories {
            writeln!(out, "{:width$}  {:>6}  advisory: {} (sub-goal {})", "", "", cause(&a.cause), a.from).unwrap();
        }
    }
    for w in &r.warnings {
        writeln!(out, "warning: {} period {}: {}", w.element, w.period, w.message).unwrap();
    }
    let count = |s: Status| r.entries.iter().filter(|e| e.outcome.status == s).count();
    writeln!(
        out,
        "{} satisfied, {} not satisfied, {} unknown",
        count(Status::Satisfied),
        count(Status::NotSatisfied),
        count(Status::Unknown)
    )
    .unwrap();
    out
}

pub fn impact(i: &ImpactSet) -> String {
    let list = |v: &[String]| if v.is_empty() { "-".to_string() } else { v.join(", ") };
    format!(
        "seed: {}\ndirectly attached: {}\nupward: {}\ndownward: {}\n",
        i.seed,
        list(&i.directly_attached),
        list(&i.upward),
        list(&i.downward)
    )
}

pub fn trace(steps: &[TraceStep]) -> String {
    if steps.is_empty() {
        return "nothing to diagnose: the goal and its sub-goals are satisfied\n".into();
    }
    let mut out = String::new();
    for s in steps {
        match &s.via {
            Some(parent) => write!(out, "  {} (via {parent})", s.element).unwrap(),
            None => out.push_str(&s.element),
        }
        writeln!(out, ": {}: {}", s.outcome.status.as_str(), s.explanation).unwrap();
    }
    out
}
