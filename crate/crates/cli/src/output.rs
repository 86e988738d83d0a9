//! CSV files. Each starts with `# config_hash=<sha256> seed=<u64>` followed
//! by a header row.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use budgex_core::analysis::{summarize, SlopeFit};
use budgex_core::stats::PairTraceRow;

use crate::audit::AuditReport;
use crate::config::{Config, DeviationUnit};
use crate::error::CliError;
use crate::experiment::{EventRow, ReplicationResult};

/// Aggregate of one batch of replications.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub size: u64,
    pub replications: usize,
    pub median: f64,
    pub mean: f64,
    pub q90: f64,
    /// Share of replications whose excess risk reached the configured
    /// deviation level.
    pub deviation_freq: Option<f64>,
}

impl SummaryRow {
    pub fn new(config: &Config, size: u64, results: &[ReplicationResult]) -> Self {
        let excess: Vec<f64> = results.iter().map(|r| r.excess).collect();
        let s = summarize(&excess);
        let deviation_freq = config.evaluation.deviation.map(|level| {
            let hits = results
                .iter()
                .filter(|r| {
                    let threshold = match config.evaluation.deviation_unit {
                        DeviationUnit::Absolute => level,
                        DeviationUnit::Epsilon => level * r.epsilon.unwrap_or(f64::NAN),
                    };
                    r.excess >= threshold
                })
                .count();
            hits as f64 / results.len().max(1) as f64
        });
        Self {
            size,
            replications: results.len(),
            median: s.median,
            mean: s.mean,
            q90: s.q90,
            deviation_freq,
        }
    }
}

pub struct CsvFile {
    writer: csv::Writer<File>,
}

impl CsvFile {
    pub fn create(dir: &Path, name: &str, config: &Config, header: &[&str]) -> Result<Self, CliError> {
        let mut file = File::create(dir.join(name))?;
        writeln!(file, "# config_hash={} seed={}", config.hash(), config.seed)?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(header)?;
        Ok(Self { writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.writer.flush()?;
        Ok(())
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

const RESULT_COLUMNS: [&str; 6] = ["replication", "size", "excess_risk", "survivors", "branch", "queries_used"];

fn result_fields(r: &ReplicationResult) -> [String; 6] {
    [
        r.replication.to_string(),
        r.size.to_string(),
        r.excess.to_string(),
        r.survivors.to_string(),
        r.branch.as_str().to_string(),
        r.queries_used.to_string(),
    ]
}

pub fn write_results(dir: &Path, config: &Config, results: &[ReplicationResult]) -> Result<(), CliError> {
    let mut f = CsvFile::create(dir, "results.csv", config, &RESULT_COLUMNS)?;
    for r in results {
        f.row(result_fields(r))?;
    }
    f.finish()
}

/// Sweep results: the swept value followed by the usual result columns.
pub fn write_sweep_results(
    dir: &Path,
    config: &Config,
    batches: &[(f64, Vec<ReplicationResult>)],
) -> Result<(), CliError> {
    let mut header = vec!["value"];
    header.extend(RESULT_COLUMNS);
    let mut f = CsvFile::create(dir, "results.csv", config, &header)?;
    for (value, results) in batches {
        for r in results {
            let mut fields = vec![value.to_string()];
            fields.extend(result_fields(r));
            f.row(fields)?;
        }
    }
    f.finish()
}

const SUMMARY_COLUMNS: [&str; 6] = ["size", "replications", "median_excess", "mean_excess", "q90_excess", "deviation_freq"];

fn summary_fields(s: &SummaryRow) -> [String; 6] {
    [
        s.size.to_string(),
        s.replications.to_string(),
        s.median.to_string(),
        s.mean.to_string(),
        s.q90.to_string(),
        opt(s.deviation_freq),
    ]
}

pub fn write_summary(dir: &Path, config: &Config, s: &SummaryRow) -> Result<(), CliError> {
    let mut f = CsvFile::create(dir, "summary.csv", config, &SUMMARY_COLUMNS)?;
    f.row(summary_fields(s))?;
    f.finish()
}

pub fn write_rates(dir: &Path, config: &Config, points: &[(f64, SummaryRow)]) -> Result<(), CliError> {
    let mut header = vec!["value"];
    header.extend(SUMMARY_COLUMNS);
    let mut f = CsvFile::create(dir, "rates.csv", config, &header)?;
    for (value, s) in points {
        let mut fields = vec![value.to_string()];
        fields.extend(summary_fields(s));
        f.row(fields)?;
    }
    f.finish()
}

pub fn write_fit(dir: &Path, config: &Config, variable: &str, fit: &SlopeFit) -> Result<(), CliError> {
    let mut f = CsvFile::create(
        dir,
        "fit.csv",
        config,
        &["variable", "slope", "intercept", "points_used", "points_dropped"],
    )?;
    let dropped: Vec<String> = fit.dropped.iter().map(f64::to_string).collect();
    f.row([
        variable.to_string(),
        fit.slope.to_string(),
        fit.intercept.to_string(),
        fit.used.to_string(),
        dropped.join(";"),
    ])?;
    f.finish()
}

pub fn write_audit(dir: &Path, config: &Config, report: &AuditReport) -> Result<(), CliError> {
    let mut f = CsvFile::create(
        dir,
        "audit.csv",
        config,
        &["check", "kind", "runs", "violations", "frequency", "std_error", "limit", "status"],
    )?;
    for r in &report.rows {
        f.row([
            r.check.to_string(),
            r.kind.as_str().to_string(),
            r.runs.to_string(),
            r.violations.to_string(),
            r.frequency.to_string(),
            r.std_error.to_string(),
            r.limit.to_string(),
            r.status().to_string(),
        ])?;
    }
    f.finish()
}

pub fn write_trace(dir: &Path, config: &Config, events: &[EventRow], pairs: &[PairTraceRow]) -> Result<(), CliError> {
    let mut f = CsvFile::create(
        dir,
        "trace_events.csv",
        config,
        &["t", "event", "i", "j", "survivors", "queries_used"],
    )?;
    for e in events {
        f.row([
            e.t.to_string(),
            e.event.to_string(),
            e.i.to_string(),
            opt(e.j),
            e.survivors.to_string(),
            e.queries_used.to_string(),
        ])?;
    }
    f.finish()?;
    let mut f = CsvFile::create(
        dir,
        "trace_pairs.csv",
        config,
        &["t", "i", "j", "count", "mean_loss_i", "mean_loss_j", "dist", "statistic"],
    )?;
    for p in pairs {
        f.row([
            p.t.to_string(),
            p.i.to_string(),
            p.j.to_string(),
            p.count.to_string(),
            opt(p.mean_loss_i),
            opt(p.mean_loss_j),
            p.dist.to_string(),
            p.statistic.to_string(),
        ])?;
    }
    f.finish()
}
