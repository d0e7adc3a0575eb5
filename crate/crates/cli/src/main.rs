//! `gqmgrid`: validate, evaluate and inspect GQM+Strategies grids.
//!
//! Exit codes: 0 success, 1 violations or unsatisfied outcomes, 2 usage or
//! I/O errors.

mod render;

use std::collections::BTreeMap;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gqmgrid::dsl::{parse_model_bytes, serialize_element};
use gqmgrid::interp::Period;
use gqmgrid::measurement::{load_observations, DataFormat};
use gqmgrid::{detect_conflicts, diagnose, evaluate_grid, impact_of, instantiate_pattern, validate, ExperienceBase, Grid};

#[derive(Parser)]
#[command(name = "gqmgrid", version, about = "Goal/strategy grids with GQM measurement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model for structural problems.
    Validate { model: PathBuf },
    /// Evaluate every goal against observed data.
    Eval {
        model: PathBuf,
        /// Observations (.csv or .json).
        data: PathBuf,
        /// Inclusive period range such as `2..4` or `2..`; defaults to the
        /// range present in the data.
        #[arg(long, value_parser = parse_periods)]
        periods: Option<(Period, Option<Period>)>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// List the elements affected by an assumption or context factor.
    Impact {
        model: PathBuf,
        #[command(flatten)]
        seed: ImpactSeed,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Explain an outcome through the sub-goals below it.
    Diagnose {
        model: PathBuf,
        data: PathBuf,
        #[arg(long)]
        element: String,
        #[arg(long)]
        period: Period,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Report declared conflicts and undeclared goal relations.
    Conflicts { model: PathBuf },
    /// Write the grid as Graphviz DOT or JSON (`-` for stdout).
    Export {
        model: PathBuf,
        #[command(flatten)]
        target: ExportTarget,
    },
    /// Work with the experience base of reusable patterns.
    Eb {
        /// Pattern directory; defaults to $GQMGRID_EB_DIR.
        #[arg(long, env = "GQMGRID_EB_DIR")]
        dir: Option<PathBuf>,
        #[command(subcommand)]
        action: EbAction,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ImpactSeed {
    #[arg(long)]
    assumption: Option<String>,
    #[arg(long)]
    context: Option<String>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ExportTarget {
    #[arg(long, value_name = "FILE")]
    dot: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum EbAction {
    /// List the patterns and their parameters.
    List,
    /// Instantiate a pattern as a model element.
    Apply {
        pattern: String,
        /// Placeholder value as `name=value`; repeatable.
        #[arg(long = "bind", value_parser = parse_binding)]
        bindings: Vec<(String, String)>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn parse_periods(s: &str) -> Result<(Period, Option<Period>), String> {
    let (a, b) = s.split_once("..").ok_or("expected `a..b` or `a..`")?;
    let a: Period = a.trim().parse().map_err(|_| format!("bad start period `{a}`"))?;
    let b: Option<Period> = match b.trim() {
        "" => None,
        b => Some(b.parse().map_err(|_| format!("bad end period `{b}`"))?),
    };
    if a == 0 || b.is_some_and(|b| b < a) {
        return Err(format!("empty or invalid period range `{s}`"));
    }
    Ok((a, b))
}

fn parse_binding(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or("expected `name=value`")?;
    Ok((k.trim().to_string(), v.to_string()))
}

fn load_model(path: &Path) -> Result<Grid> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(parse_model_bytes(&bytes, &path.display().to_string())?.grid)
}

fn write_output(path: &Path, text: &str) -> Result<()> {
    if path == Path::new("-") {
        print!("{text}");
        return Ok(());
    }
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Validate { model } => {
            let grid = load_model(&model)?;
            let violations = validate(&grid);
            writeln!(out, "{} violations", violations.len())?;
            for v in &violations {
                writeln!(out, "  {v}")?;
            }
            Ok(exit(violations.is_empty()))
        }
        Command::Eval { model, data, periods, format } => {
            let grid = load_model(&model)?;
            let dataset = load_observations(&data, DataFormat::from_path(&data))?;
            let range = resolve_periods(periods, &dataset);
            let report = match evaluate_grid(&grid, &dataset, range) {
                Ok(r) => r,
                Err(gqmgrid::analysis::AnalysisError::NotValidated(violations)) => {
                    for v in &violations {
                        eprintln!("{v}");
                    }
                    eprintln!("{} violations; not evaluated", violations.len());
                    return Ok(ExitCode::from(1));
                }
                Err(e) => return Err(e.into()),
            };
            match format {
                Format::Text => write!(out, "{}", render::report(&report))?,
                Format::Json => writeln!(out, "{}", report.to_json())?,
            }
            Ok(exit(report.all_satisfied()))
        }
        Command::Impact { model, seed, format } => {
            let grid = load_model(&model)?;
            let (id, want_assumption) = match (seed.assumption, seed.context) {
                (Some(a), _) => (a, true),
                (_, Some(c)) => (c, false),
                _ => unreachable!("clap requires one seed"),
            };
            let kind_ok = if want_assumption {
                grid.assumptions.contains_key(&id)
            } else {
                grid.context_factors.contains_key(&id)
            };
            if !kind_ok {
                let kind = if want_assumption { "assumption" } else { "context factor" };
                bail!("unknown {kind} `{id}`");
            }
            let impact = impact_of(&grid, &id)?;
            match format {
                Format::Text => write!(out, "{}", render::impact(&impact))?,
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&impact)?)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Diagnose { model, data, element, period, format } => {
            let grid = load_model(&model)?;
            let dataset = load_observations(&data, DataFormat::from_path(&data))?;
            let report = evaluate_grid(&grid, &dataset, None)?;
            let trace = diagnose(&report, &grid, &element, period)?;
            match format {
                Format::Text => write!(out, "{}", render::trace(&trace))?,
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&trace)?)?,
            }
            Ok(exit(trace.is_empty()))
        }
        Command::Conflicts { model } => {
            let grid = load_model(&model)?;
            for (a, b, kind) in detect_conflicts(&grid) {
                writeln!(out, "{a} {} {b}", kind.as_str())?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Export { model, target } => {
            let grid = load_model(&model)?;
            if let Some(path) = target.dot {
                write_output(&path, &gqmgrid::export::to_dot(&grid))?;
            }
            if let Some(path) = target.json {
                write_output(&path, &(gqmgrid::export::to_json(&grid) + "\n"))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Eb { dir, action } => {
            let dir = dir.ok_or_else(|| anyhow!("no experience base: pass --dir or set GQMGRID_EB_DIR"))?;
            let eb = ExperienceBase::load_dir(&dir)?;
            match action {
                EbAction::List => {
                    for p in eb.patterns.values() {
                        writeln!(out, "{}\t{}", p.id, p.params.join(","))?;
                    }
                }
                EbAction::Apply { pattern, bindings, out: target } => {
                    let bindings: BTreeMap<String, String> = bindings.into_iter().collect();
                    let inst = instantiate_pattern(&eb, &pattern, &bindings)?;
                    let text = serialize_element(&inst.element, &inst.context_factors, &inst.assumptions);
                    match target {
                        Some(path) => write_output(&path, &text)?,
                        None => write!(out, "{text}")?,
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn resolve_periods(
    periods: Option<(Period, Option<Period>)>,
    dataset: &gqmgrid::Dataset,
) -> Option<RangeInclusive<Period>> {
    let (a, b) = periods?;
    let end = b.or_else(|| dataset.period_range().map(|(_, hi)| hi)).unwrap_or(a);
    Some(a..=end.max(a))
}

fn exit(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
