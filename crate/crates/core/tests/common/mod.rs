//! Shared fixtures, random grid generation and brute-force oracles.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use gqmgrid::interp::{BinOp, Branch, CauseKind, CauseSpec, Expr, ExprKind, InterpModel, OutcomeSpec, PeriodIndex, Status};
use gqmgrid::measurement::{Dataset, Observation};
use gqmgrid::model::{
    build_grid, Assumption, ContextFactor, Element, Goal, GoalTemplate, GqmGraph, Grid, MeasurementGoal, Question,
    Relation, RelationKind, RelationRef, Strategy,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn golden(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(rel)
}

pub fn abc() -> Grid {
    let text = std::fs::read_to_string(fixture("abc.gqms")).unwrap();
    gqmgrid::parse_model(&text).unwrap()
}

pub fn scenario(name: &str) -> Dataset {
    gqmgrid::measurement::load_observations(&fixture(&format!("data/scenario-{name}.csv")), gqmgrid::measurement::DataFormat::Csv)
        .unwrap()
}

/// Compares `actual` with a golden file; `UPDATE_GOLDEN=1` rewrites it.
pub fn assert_golden(rel: &str, actual: &str) {
    let path = golden(rel);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub max_levels: u32,
    pub max_elements: usize,
    /// Strings with quotes, escapes, braces and non-ASCII text.
    pub odd_text: bool,
    /// Allow constructs that parse but do not validate (unattached
    /// factors, arbitrary status references, relations).
    pub unvalidated: bool,
}

impl GenConfig {
    pub const EVAL: GenConfig = GenConfig { max_levels: 6, max_elements: 40, odd_text: false, unvalidated: false };
    pub const FUZZ: GenConfig = GenConfig { max_levels: 4, max_elements: 12, odd_text: true, unvalidated: true };
}

const METRICS: &[&str] = &["m0", "m1", "m2", "m3", "m4", "m5", "P", "func_growth"];
const ODD: &[&str] = &["", "quote \" inside", "back\\slash", "{brace} and }", "tab\tand\nnewline", "Zielerreichung ≥ 5 %", "# not a comment", "x[x-1]"];

fn text(rng: &mut StdRng, cfg: &GenConfig, base: &str) -> String {
    if cfg.odd_text && rng.gen_bool(0.3) {
        format!("{base} {}", ODD.choose(rng).unwrap())
    } else {
        base.to_string()
    }
}

fn number(rng: &mut StdRng) -> f64 {
    match rng.gen_range(0..5) {
        0 => rng.gen_range(-5..50) as f64,
        1 => (rng.gen_range(-1000..1000) as f64) / 100.0,
        2 => 1.1,
        3 => rng.gen_range(0.0..2.0),
        _ => rng.gen_range(1..10) as f64,
    }
}

fn index(rng: &mut StdRng) -> PeriodIndex {
    match rng.gen_range(0..6) {
        0..=2 => PeriodIndex::Current(0),
        3 | 4 => PeriodIndex::Current(1),
        _ => PeriodIndex::Fixed(rng.gen_range(1..4)),
    }
}

pub fn num_expr(rng: &mut StdRng, depth: u32, metrics: &[String]) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.4);
    if leaf {
        return if metrics.is_empty() || rng.gen_bool(0.3) {
            Expr::num(number(rng))
        } else {
            Expr::metric(metrics.choose(rng).unwrap(), index(rng))
        };
    }
    match rng.gen_range(0..6) {
        0 => Expr::new(ExprKind::Neg { expr: Box::new(num_expr(rng, depth - 1, metrics)) }),
        n => {
            let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Mul][n - 1];
            Expr::binary(op, num_expr(rng, depth - 1, metrics), num_expr(rng, depth - 1, metrics))
        }
    }
}

pub fn bool_expr(rng: &mut StdRng, depth: u32, metrics: &[String], goals: &[String]) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return match rng.gen_range(0..8) {
            0 => Expr::new(ExprKind::Bool { value: rng.gen() }),
            1 | 2 if !goals.is_empty() => {
                let status = [Status::Satisfied, Status::NotSatisfied, Status::Unknown][rng.gen_range(0..3)];
                let lit = Expr::new(ExprKind::StatusLit { status });
                let s = Expr::status(goals.choose(rng).unwrap(), PeriodIndex::Current(0));
                if rng.gen_bool(0.8) {
                    Expr::binary(BinOp::Eq, s, lit)
                } else {
                    Expr::binary(BinOp::Eq, lit, s)
                }
            }
            _ => {
                let op = [BinOp::Lt, BinOp::Le, BinOp::Eq, BinOp::Ge, BinOp::Gt][rng.gen_range(0..5)];
                Expr::binary(op, num_expr(rng, 2, metrics), num_expr(rng, 2, metrics))
            }
        };
    }
    match rng.gen_range(0..6) {
        0 => Expr::new(ExprKind::Not { expr: Box::new(bool_expr(rng, depth - 1, metrics, goals)) }),
        1 => Expr::binary(BinOp::Eq, bool_expr(rng, depth - 1, metrics, goals), bool_expr(rng, depth - 1, metrics, goals)),
        2 | 3 => Expr::binary(BinOp::And, bool_expr(rng, depth - 1, metrics, goals), bool_expr(rng, depth - 1, metrics, goals)),
        _ => Expr::binary(BinOp::Or, bool_expr(rng, depth - 1, metrics, goals), bool_expr(rng, depth - 1, metrics, goals)),
    }
}

fn outcome(rng: &mut StdRng, cfg: &GenConfig, ids: &[String]) -> OutcomeSpec {
    let status = if rng.gen_bool(0.5) { Status::Satisfied } else { Status::NotSatisfied };
    let mut causes = Vec::new();
    if status == Status::NotSatisfied {
        for _ in 0..rng.gen_range(0..3) {
            let kind = if rng.gen() { CauseKind::AssumptionSuspect } else { CauseKind::StrategySuspect };
            let ids = if rng.gen_bool(0.3) && !ids.is_empty() {
                vec![ids.choose(rng).unwrap().clone()]
            } else {
                vec![]
            };
            causes.push(CauseSpec { kind, ids });
        }
    }
    let note = if rng.gen() { text(rng, cfg, "note") } else { String::new() };
    OutcomeSpec { status, causes, note }
}

fn model(rng: &mut StdRng, cfg: &GenConfig, metrics: &[String], goals: &[String], ids: &[String]) -> InterpModel {
    let branches = (0..rng.gen_range(1..4))
        .map(|_| Branch { condition: bool_expr(rng, 3, metrics, goals), outcome: outcome(rng, cfg, ids) })
        .collect();
    InterpModel {
        start: if rng.gen_bool(0.7) { 1 } else { 2 },
        eps: if rng.gen_bool(0.8) { 0.0 } else { 0.01 },
        branches,
        otherwise: if rng.gen() { Some(outcome(rng, cfg, ids)) } else { None },
    }
}

/// A random leveled DAG: every element below level 1 is derived from at
/// least one element exactly one level up, and every factor is attached to
/// at least one element.
pub fn random_grid(rng: &mut StdRng, cfg: GenConfig) -> Grid {
    let levels = rng.gen_range(1..=cfg.max_levels);
    let total = rng.gen_range(levels as usize..=cfg.max_elements.max(levels as usize));
    // Element counts per level, each at least one.
    let mut counts = vec![1usize; levels as usize];
    for _ in levels as usize..total {
        let l = rng.gen_range(0..levels as usize);
        counts[l] += 1;
    }
    let mut by_level: Vec<Vec<String>> = Vec::new();
    for (l, n) in counts.iter().enumerate() {
        by_level.push((0..*n).map(|i| format!("G{}_{i}", l + 1)).collect());
    }

    // Parent links, one level down.
    let mut derives: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for l in 1..by_level.len() {
        for child in &by_level[l] {
            let parents = &by_level[l - 1];
            let k = rng.gen_range(1..=parents.len().min(3));
            for p in parents.choose_multiple(rng, k) {
                derives.entry(p.clone()).or_default().push(child.clone());
            }
        }
    }
    let all: Vec<String> = by_level.iter().flatten().cloned().collect();

    let n_ctx = rng.gen_range(0..=all.len().min(8));
    let n_asm = rng.gen_range(1..=all.len().min(10));
    let contexts: Vec<ContextFactor> = (0..n_ctx)
        .map(|i| ContextFactor { id: format!("C{i}"), statement: text(rng, &cfg, &format!("context {i}")), valid: rng.gen_bool(0.8) })
        .collect();
    let assumptions: Vec<Assumption> = (0..n_asm)
        .map(|i| Assumption { id: format!("A{i}"), statement: text(rng, &cfg, &format!("assumption {i}")), valid: rng.gen_bool(0.8) })
        .collect();

    let mut ctx_of: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut asm_of: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, c) in contexts.iter().enumerate() {
        if cfg.unvalidated && i == 0 && rng.gen_bool(0.3) {
            continue;
        }
        let k = rng.gen_range(1..=3);
        for e in all.choose_multiple(rng, k) {
            ctx_of.entry(e.clone()).or_default().push(c.id.clone());
        }
    }
    for a in &assumptions {
        let k = rng.gen_range(1..=3);
        for e in all.choose_multiple(rng, k) {
            asm_of.entry(e.clone()).or_default().push(a.id.clone());
        }
    }

    let mut elements = Vec::new();
    let mut graphs = Vec::new();
    for (l, ids) in by_level.iter().enumerate() {
        for id in ids {
            let mut template = GoalTemplate::new(&text(rng, &cfg, "Increase"), &text(rng, &cfg, "focus"), "object");
            if rng.gen() {
                template.magnitude = text(rng, &cfg, "10% per year");
                template.timeframe = text(rng, &cfg, "annually");
            }
            if rng.gen_bool(0.3) {
                template.scope = text(rng, &cfg, "scope");
            }
            for i in 0..rng.gen_range(0..3) {
                template.constraints.push(text(rng, &cfg, &format!("constraint {i}")));
            }
            if rng.gen_bool(0.2) {
                template.relations.push(RelationRef::Text(text(rng, &cfg, "related goals")));
            }
            if cfg.unvalidated && rng.gen_bool(0.2) {
                template.relations.push(RelationRef::Goal(all.choose(rng).unwrap().clone()));
            }
            let kids = derives.get(id).cloned().unwrap_or_default();
            let mut strategies = Vec::new();
            if !kids.is_empty() {
                // Split children across one or two strategies.
                let split = if kids.len() > 1 && rng.gen() { rng.gen_range(1..kids.len()) } else { kids.len() };
                strategies.push(Strategy {
                    id: format!("{id}_S0"),
                    description: text(rng, &cfg, "strategy"),
                    activities: if rng.gen_bool(0.3) { vec![text(rng, &cfg, "train")] } else { vec![] },
                    derives: kids[..split].to_vec(),
                });
                if split < kids.len() {
                    strategies.push(Strategy {
                        id: format!("{id}_S1"),
                        description: text(rng, &cfg, "second strategy"),
                        activities: vec![],
                        derives: kids[split..].to_vec(),
                    });
                }
            } else if rng.gen_bool(0.3) {
                strategies.push(Strategy { id: format!("{id}_S0"), description: "leaf".into(), ..Default::default() });
            }
            let terminal = strategies.is_empty();
            let element = Element {
                goal: Goal { id: id.clone(), level: l as u32 + 1, template },
                strategies,
                context_ids: ctx_of.get(id).cloned().unwrap_or_default(),
                assumption_ids: asm_of.get(id).cloned().unwrap_or_default(),
                terminal,
            };

            let k = rng.gen_range(1..=3);
            let metrics: Vec<String> = METRICS.choose_multiple(rng, k).map(|m| m.to_string()).collect();
            let goals = if cfg.unvalidated { all.clone() } else { kids.clone() };
            let factor_ids: Vec<String> = element.assumption_ids.iter().chain(&element.context_ids).cloned().collect();
            let mut questions = vec![Question { id: "Q1".into(), text: text(rng, &cfg, "how much?"), metrics: metrics.clone() }];
            if rng.gen_bool(0.3) {
                questions.push(Question { id: "Q2".into(), text: "trend?".into(), metrics: metrics[..1].to_vec() });
            }
            let mgoal = if rng.gen() {
                MeasurementGoal {
                    object: text(rng, &cfg, "object"),
                    purpose: "evaluation".into(),
                    focus: "trend".into(),
                    viewpoint: "management".into(),
                    context: String::new(),
                }
            } else {
                MeasurementGoal::default()
            };
            graphs.push(GqmGraph {
                element: id.clone(),
                mgoal,
                questions,
                model: model(rng, &cfg, &metrics, &goals, &factor_ids),
            });
            elements.push(element);
        }
    }

    let mut relations = Vec::new();
    if cfg.unvalidated {
        for _ in 0..rng.gen_range(0..3) {
            let kind = [RelationKind::Conflicts, RelationKind::Supports, RelationKind::Relates][rng.gen_range(0..3)];
            relations.push(Relation { from: all.choose(rng).unwrap().clone(), to: all.choose(rng).unwrap().clone(), kind });
        }
    }
    elements.shuffle(rng);
    build_grid(elements, graphs, contexts, assumptions, relations).expect("generated grid builds")
}

/// Observations for every metric in the grid over `periods`, with some
/// left out.
pub fn random_dataset(rng: &mut StdRng, grid: &Grid, periods: u32) -> Dataset {
    let metrics: BTreeSet<&str> = grid.graphs.values().flat_map(|g| g.metric_ids()).collect();
    let mut obs = Vec::new();
    for m in metrics {
        for p in 1..=periods {
            if rng.gen_bool(0.9) {
                obs.push(Observation { metric: m.to_string(), period: p, value: number(rng) });
            }
        }
    }
    Dataset::from_observations(obs, "random").unwrap()
}

/// Derivation edges read straight from the strategies.
fn edges(grid: &Grid) -> Vec<(String, String)> {
    grid.elements
        .values()
        .flat_map(|e| e.strategies.iter().flat_map(move |s| s.derives.iter().map(move |d| (e.goal.id.clone(), d.clone()))))
        .collect()
}

/// Fixed-point reachability over an edge list, excluding the start unless
/// it lies on a cycle.
fn reach(edges: &[(String, String)], start: &str) -> BTreeSet<String> {
    let mut set: BTreeSet<String> = BTreeSet::new();
    loop {
        let before = set.len();
        for (a, b) in edges {
            if a == start || set.contains(a) {
                set.insert(b.clone());
            }
        }
        if set.len() == before {
            return set;
        }
    }
}

pub fn oracle_descendants(grid: &Grid, id: &str) -> BTreeSet<String> {
    reach(&edges(grid), id)
}

pub fn oracle_ancestors(grid: &Grid, id: &str) -> BTreeSet<String> {
    let rev: Vec<(String, String)> = edges(grid).into_iter().map(|(a, b)| (b, a)).collect();
    reach(&rev, id)
}

/// (directly attached, upward, downward) for a factor, as sets.
pub fn oracle_impact(grid: &Grid, factor: &str) -> (BTreeSet<String>, BTreeSet<String>, BTreeSet<String>) {
    let direct: BTreeSet<String> = grid
        .elements
        .values()
        .filter(|e| e.context_ids.iter().chain(&e.assumption_ids).any(|f| f == factor))
        .map(|e| e.goal.id.clone())
        .collect();
    let mut down = BTreeSet::new();
    let mut up = BTreeSet::new();
    for d in &direct {
        down.extend(oracle_descendants(grid, d));
        up.extend(oracle_ancestors(grid, d));
    }
    let down: BTreeSet<String> = down.difference(&direct).cloned().collect();
    let up: BTreeSet<String> = up.difference(&direct).filter(|e| !down.contains(*e)).cloned().collect();
    (direct, up, down)
}

pub fn factor_ids(grid: &Grid) -> Vec<String> {
    grid.context_factors.keys().chain(grid.assumptions.keys()).cloned().collect()
}
