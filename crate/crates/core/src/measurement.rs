//! Metric observations and their binding to a grid's graphs.
//!
//! CSV files carry a `metric,period,value` header; JSON files are an array
//! of `{"metric", "period", "value"}` objects.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interp::{Env, Period, Series, SuspectDefaults};
use crate::model::Grid;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{file}:{line}: {message}")]
    Format { file: String, line: u64, message: String },
    #[error("duplicate observation for metric `{metric}` at period {period}")]
    DuplicateObservation { metric: String, period: Period },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Json,
}

impl DataFormat {
    /// Guesses the format from a file extension; anything but `.json` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => DataFormat::Json,
            _ => DataFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub metric: String,
    pub period: Period,
    pub value: f64,
}

/// Observations indexed by metric, then period.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    series: BTreeMap<String, Arc<Series>>,
    pub provenance: String,
}

impl Dataset {
    pub fn from_observations(
        observations: impl IntoIterator<Item = Observation>,
        provenance: &str,
    ) -> Result<Self, DataError> {
        let mut series: BTreeMap<String, Series> = BTreeMap::new();
        for o in observations {
            let s = series.entry(o.metric.clone()).or_default();
            if s.insert(o.period, o.value).is_some() {
                return Err(DataError::DuplicateObservation { metric: o.metric, period: o.period });
            }
        }
        Ok(Self {
            series: series.into_iter().map(|(k, v)| (k, Arc::new(v))).collect(),
            provenance: provenance.to_string(),
        })
    }

    pub fn series(&self, metric: &str) -> Option<&Arc<Series>> {
        self.series.get(metric)
    }

    pub fn metrics(&self) -> impl Iterator<Item = &str> {
        self.series.keys().map(String::as_str)
    }

    pub fn get(&self, metric: &str, period: Period) -> Option<f64> {
        self.series.get(metric).and_then(|s| s.get(&period)).copied()
    }

    pub fn len(&self) -> usize {
        self.series.values().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All observations, ordered by metric then period.
    pub fn observations(&self) -> Vec<Observation> {
        self.series
            .iter()
            .flat_map(|(m, s)| s.iter().map(move |(p, v)| Observation { metric: m.clone(), period: *p, value: *v }))
            .collect()
    }

    /// Smallest and largest period with any observation.
    pub fn period_range(&self) -> Option<(Period, Period)> {
        let lo = self.series.values().filter_map(|s| s.keys().next()).min()?;
        let hi = self.series.values().filter_map(|s| s.keys().next_back()).max()?;
        Some((*lo, *hi))
    }

    /// A copy with one observation removed.
    pub fn without(&self, metric: &str, period: Period) -> Self {
        let mut out = self.clone();
        if let Some(s) = out.series.get_mut(metric) {
            Arc::make_mut(s).remove(&period);
        }
        out
    }

    /// A copy with every observation of `metric` multiplied by `factor`.
    pub fn scaled(&self, metric: &str, factor: f64) -> Self {
        let mut out = self.clone();
        if let Some(s) = out.series.get_mut(metric) {
            for v in Arc::make_mut(s).values_mut() {
                *v *= factor;
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.observations()).expect("observations serialize")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["metric", "period", "value"]).expect("in-memory write");
        for o in self.observations() {
            w.write_record([o.metric, o.period.to_string(), o.value.to_string()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

fn check(o: &Observation, file: &str, line: u64) -> Result<(), DataError> {
    let fail = |message: String| Err(DataError::Format { file: file.to_string(), line, message });
    if o.metric.is_empty() {
        return fail("empty metric id".into());
    }
    if o.period == 0 {
        return fail("periods start at 1".into());
    }
    if !o.value.is_finite() {
        return fail(format!("value {} is not finite", o.value));
    }
    Ok(())
}

pub fn parse_csv(text: &str, file: &str) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut observations = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 1;
        let fail = |message: String| DataError::Format { file: file.to_string(), line, message };
        let record = record.map_err(|e| fail(e.to_string()))?;
        if record.len() != 3 {
            return Err(fail(format!("expected 3 fields, found {}", record.len())));
        }
        if i == 0 && &record[0] == "metric" && &record[1] == "period" && &record[2] == "value" {
            continue;
        }
        let period = record[1].parse::<Period>().map_err(|_| fail(format!("invalid period `{}`", &record[1])))?;
        let value = record[2].parse::<f64>().map_err(|_| fail(format!("invalid value `{}`", &record[2])))?;
        let o = Observation { metric: record[0].to_string(), period, value };
        check(&o, file, line)?;
        observations.push(o);
    }
    Dataset::from_observations(observations, file)
}

pub fn parse_json(text: &str, file: &str) -> Result<Dataset, DataError> {
    let observations: Vec<Observation> = serde_json::from_str(text).map_err(|e| DataError::Format {
        file: file.to_string(),
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    for o in &observations {
        check(o, file, 0)?;
    }
    Dataset::from_observations(observations, file)
}

pub fn load_observations(path: &Path, format: DataFormat) -> Result<Dataset, DataError> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io { path: file.clone(), source })?;
    match format {
        DataFormat::Csv => parse_csv(&text, &file),
        DataFormat::Json => parse_json(&text, &file),
    }
}

/// Per-element environments before any period or sub-goal outcome is set.
pub type Binding = BTreeMap<String, Env>;

/// Binds every metric read by an element's interpretation model to the
/// dataset's series for it; metrics without a series are recorded as
/// missing. The same metric id binds to the same shared series in every
/// environment.
pub fn bind(grid: &Grid, dataset: &Dataset) -> Binding {
    grid.elements
        .values()
        .map(|e| {
            let mut env = Env {
                suspects: SuspectDefaults {
                    assumptions: e.assumption_ids.clone(),
                    strategies: e.strategies.iter().map(|s| s.id.clone()).collect(),
                },
                ..Env::default()
            };
            if let Some(g) = grid.graphs.get(e.id()) {
                let wanted: BTreeSet<&str> = g.metric_ids().into_iter().chain(g.model.metric_ids()).collect();
                for m in wanted {
                    match dataset.series(m) {
                        Some(s) => {
                            env.metrics.insert(m.to_string(), Arc::clone(s));
                        }
                        None => {
                            env.missing_metrics.insert(m.to_string());
                        }
                    }
                }
            }
            (e.id().to_string(), env)
        })
        .collect()
}
