//! Parameter sweeps over the lower cardinality bound.

use std::io::Write;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::model::{Bounds, Instance, Params};
use crate::solver::{solve, Method, SolverOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub lower: RangeInclusive<usize>,
    /// `C^u = C^l + upper_offset`.
    pub upper_offset: usize,
    pub methods: Vec<Method>,
    pub alpha: f64,
    pub beta: f64,
    pub options: SolverOptions,
}

impl SweepConfig {
    pub fn new(lower: RangeInclusive<usize>, methods: Vec<Method>) -> Self {
        SweepConfig {
            lower,
            upper_offset: 1,
            methods,
            alpha: 1.0,
            beta: 1.0,
            options: SolverOptions::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("sweep needs at least one method".into()));
        }
        if self.lower.is_empty() {
            return Err(Error::Config(format!(
                "empty lower-bound range {}..={}",
                self.lower.start(),
                self.lower.end()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Infeasible,
    /// A guard refused the run (oracle state budget).
    Refused,
    Error,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Infeasible => "infeasible",
            RowStatus::Refused => "refused",
            RowStatus::Error => "error",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: Method,
    pub lower: usize,
    pub upper: usize,
    pub status: RowStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Solves every (method, C^l) pair. Rows come back method-major, in the order
/// of `config.methods` and then ascending C^l, regardless of scheduling.
pub fn run_sweep(instance: &Instance, config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let jobs: Vec<(Method, usize)> = config
        .methods
        .iter()
        .flat_map(|&m| config.lower.clone().map(move |l| (m, l)))
        .collect();
    let rows = jobs
        .into_par_iter()
        .map(|(method, lower)| run_one(instance, config, method, lower))
        .collect();
    Ok(SweepResult { rows })
}

fn run_one(instance: &Instance, config: &SweepConfig, method: Method, lower: usize) -> SweepRow {
    let upper = lower + config.upper_offset;
    let outcome = Bounds::new(lower, upper)
        .and_then(|bounds| {
            instance.with_params(Params {
                bounds,
                alpha: config.alpha,
                beta: config.beta,
            })
        })
        .and_then(|inst| solve(&inst, method, &config.options));
    let (status, metrics, message) = match outcome {
        Ok(sol) => (RowStatus::Ok, Some(sol.metrics), None),
        Err(e @ Error::Infeasible { .. }) => (RowStatus::Infeasible, None, Some(e.to_string())),
        Err(e @ Error::Guard(_)) => (RowStatus::Refused, None, Some(e.to_string())),
        Err(e) => (RowStatus::Error, None, Some(e.to_string())),
    };
    SweepRow {
        method,
        lower,
        upper,
        status,
        metrics,
        message,
    }
}

impl SweepResult {
    /// Long-format CSV: the metrics columns plus `status` and the
    /// `;`-separated group sizes. Metric cells are empty on non-ok rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = MetricsReport::CSV_HEADER.to_vec();
        header.extend(["status", "cardinalities"]);
        out.write_record(&header)?;
        for row in &self.rows {
            let mut record = match &row.metrics {
                Some(m) => m.csv_record(row.method.as_str(), row.lower, row.upper),
                None => {
                    let mut r = vec![
                        row.method.to_string(),
                        row.lower.to_string(),
                        row.upper.to_string(),
                    ];
                    r.resize(MetricsReport::CSV_HEADER.len(), String::new());
                    r
                }
            };
            record.push(row.status.as_str().to_string());
            record.push(
                row.metrics
                    .as_ref()
                    .map(|m| {
                        m.cardinalities
                            .iter()
                            .map(ToString::to_string)
                            .collect::<Vec<_>>()
                            .join(";")
                    })
                    .unwrap_or_default(),
            );
            out.write_record(&record)?;
        }
        out.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut writer: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut writer, self)?;
        writeln!(writer).map_err(|e| Error::io("<json>", e))?;
        Ok(())
    }
}
