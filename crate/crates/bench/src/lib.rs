//! Inputs for the benchmarks: the ABC model and synthetic layered grids.

use std::fmt::Write;

use gqmgrid::measurement::{Dataset, Observation};

pub const ABC: &str = include_str!("../../../fixtures/abc.gqms");
pub const ABC_DATA: &str = include_str!("../../../fixtures/data/scenario-a.csv");

/// A grid with `levels` levels of `width` elements each; every element
/// derives the two elements below it at the same and next position.
pub fn layered_model(levels: u32, width: u32) -> String {
    let mut out = String::new();
    for l in 1..=levels {
        for i in 0..width {
            let id = format!("G{l}_{i}");
            write!(out, "element \"{id}\" level {l}").unwrap();
            if l == levels {
                out.push_str(" terminal");
            }
            writeln!(out, " {{\n  goal {{ activity: \"Increase\"; focus: \"f{i}\"; object: \"o\"; }}").unwrap();
            writeln!(out, "  assumption \"A{l}_{i}\" \"assumption of {id}\"").unwrap();
            if l < levels {
                let (a, b) = (i, (i + 1) % width);
                writeln!(out, "  strategy \"S{l}_{i}\" \"s\" derives \"G{}_{a}\", \"G{}_{b}\"", l + 1, l + 1).unwrap();
            }
            out.push_str("}\n");
        }
    }
    for l in 1..=levels {
        for i in 0..width {
            let id = format!("G{l}_{i}");
            let metric = format!("m{}", i % 4);
            write!(out, "graph for \"{id}\" {{\n  question \"Q\" \"q\" metrics [{metric}]\n  model {{ for x in 2..\n    if {metric}[x] >= 1.05 * {metric}[x-1]").unwrap();
            if l < levels {
                write!(out, " and status(\"G{}_{i}\", x) == Satisfied", l + 1).unwrap();
            }
            out.push_str(" then satisfied else not_satisfied(assumption) }\n}\n");
        }
    }
    out
}

/// Growing series for metrics m0..m3 over `periods` periods.
pub fn layered_data(periods: u32) -> Dataset {
    let obs = (0..4).flat_map(|m| {
        (1..=periods).map(move |p| Observation {
            metric: format!("m{m}"),
            period: p,
            value: 100.0 * (1.0 + 0.04 * m as f64).powi(p as i32),
        })
    });
    Dataset::from_observations(obs, "synthetic").expect("unique observations")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_grid_is_valid() {
        let g = gqmgrid::parse_model(&layered_model(4, 5)).unwrap();
        assert_eq!(g.elements.len(), 20);
        assert_eq!(gqmgrid::validate(&g), []);
        let r = gqmgrid::evaluate_grid(&g, &layered_data(6), None).unwrap();
        assert_eq!(r.entries.len(), 20 * 5);
    }
}
