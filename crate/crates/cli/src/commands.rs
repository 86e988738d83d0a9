//! The four subcommands. Each writes its CSV files into `Options::out` and
//! returns what it wrote.

use std::path::PathBuf;

use budgex_core::analysis::{loglog_slope, InstanceComplexity, SlopeFit};
use budgex_core::Instance;

use crate::audit::{AuditReport, Auditor};
use crate::config::{Config, SweepVariable};
use crate::error::CliError;
use crate::experiment::{replicate, run_replication, Ignore, ReplicationResult, TraceRecorder};
use crate::instances::{build_instances, AnyInstance, Setting};
use crate::output::{self, CsvFile, SummaryRow};

#[derive(Clone, Debug)]
pub struct Options {
    pub out: PathBuf,
    /// Worker threads; the rayon default when `None`.
    pub threads: Option<usize>,
}

impl Options {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self {
            out: out.into(),
            threads: None,
        }
    }

    fn prepare(&self) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.out)?;
        Ok(())
    }

    fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
        match self.threads {
            None => Ok(f()),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| CliError::Config(format!("threads: {e}")))?;
                Ok(pool.install(f))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub results: Vec<ReplicationResult>,
    pub summary: SummaryRow,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub variable: SweepVariable,
    pub points: Vec<(f64, SummaryRow)>,
    /// `None` when fewer than three medians are positive.
    pub fit: Option<SlopeFit>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpertRow {
    pub instance_id: String,
    pub expert: usize,
    pub risk: f64,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexityRow {
    pub instance_id: String,
    pub eps: f64,
    pub complexity: InstanceComplexity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisReport {
    pub experts: Vec<ExpertRow>,
    pub complexity: Vec<ComplexityRow>,
}

fn simulate(config: &Config, setting: &Setting) -> Result<Vec<ReplicationResult>, CliError> {
    let instances = build_instances(config, setting)?;
    replicate(config.replications, |r| {
        let instance = &instances[(r % instances.len() as u64) as usize];
        run_replication(instance, setting, &config.evaluation, config.seed, r, &mut Ignore).map(|(res, _)| res)
    })
}

fn write_trace(config: &Config, setting: &Setting, opts: &Options) -> Result<(), CliError> {
    let instances = build_instances(config, setting)?;
    let mut recorder = TraceRecorder::new(setting.delta, *instances[0].loss());
    run_replication(&instances[0], setting, &config.evaluation, config.seed, 0, &mut recorder)?;
    recorder.finish();
    output::write_trace(&opts.out, config, &recorder.events, &recorder.pairs)
}

/// Runs every replication once and writes `results.csv` and `summary.csv`.
pub fn run(config: &Config, opts: &Options) -> Result<RunReport, CliError> {
    opts.prepare()?;
    let setting = Setting::from_config(config);
    let results = opts.install(|| simulate(config, &setting))??;
    let summary = SummaryRow::new(config, setting.size(), &results);
    output::write_results(&opts.out, config, &results)?;
    output::write_summary(&opts.out, config, &summary)?;
    if config.output.trace {
        write_trace(config, &setting, opts)?;
    }
    Ok(RunReport { results, summary })
}

fn apply(setting: &Setting, variable: SweepVariable, value: f64) -> Setting {
    let mut s = setting.clone();
    match variable {
        SweepVariable::Horizon => s.horizon = Some(value as u64),
        SweepVariable::Budget => s.budget = Some(value as u64),
        SweepVariable::M => s.m = Some(value as usize),
        SweepVariable::Epsilon => s.epsilon = Some(value),
    }
    s
}

/// Runs the configuration at every swept value and fits the log-log slope
/// of the median excess risk against the value.
pub fn sweep(config: &Config, opts: &Options) -> Result<SweepReport, CliError> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep: missing [sweep] section".into()))?;
    opts.prepare()?;
    let base = Setting::from_config(config);
    let mut batches = Vec::with_capacity(sweep.values.len());
    let mut points = Vec::with_capacity(sweep.values.len());
    for &value in &sweep.values {
        let setting = apply(&base, sweep.variable, value);
        let results = opts.install(|| simulate(config, &setting))??;
        log::info!("{} = {value}: {} replications", sweep.variable.as_str(), results.len());
        points.push((value, SummaryRow::new(config, setting.size(), &results)));
        batches.push((value, results));
    }
    output::write_sweep_results(&opts.out, config, &batches)?;
    output::write_rates(&opts.out, config, &points)?;
    let series: Vec<(f64, f64)> = points.iter().map(|(v, s)| (*v, s.median)).collect();
    let fit = match loglog_slope(&series) {
        Ok(fit) => {
            for v in &fit.dropped {
                log::warn!("dropped nonpositive median at {} = {v}", sweep.variable.as_str());
            }
            output::write_fit(&opts.out, config, sweep.variable.as_str(), &fit)?;
            Some(fit)
        }
        Err(e) => {
            log::warn!("no slope fitted: {e}");
            None
        }
    };
    if config.output.trace {
        write_trace(config, &apply(&base, sweep.variable, sweep.values[0]), opts)?;
    }
    Ok(SweepReport {
        variable: sweep.variable,
        points,
        fit,
    })
}

/// Replays every replication under the invariant checks and writes
/// `audit.csv`. The caller decides what a failed check means.
pub fn audit(config: &Config, opts: &Options) -> Result<AuditReport, CliError> {
    opts.prepare()?;
    let setting = Setting::from_config(config);
    let instances = build_instances(config, &setting)?;
    let event_a = config.audit.event_a;
    let flags = opts.install(|| {
        replicate(config.replications, |r| {
            let instance = &instances[(r % instances.len() as u64) as usize];
            let mut auditor = Auditor::new(instance, &setting, event_a)?;
            let (res, outcome) = run_replication(instance, &setting, &config.evaluation, config.seed, r, &mut auditor)?;
            auditor.finish(
                &setting,
                res.survivors,
                res.queries_used,
                outcome.prediction.len(),
                res.suppressed,
            );
            Ok(auditor.flags)
        })
    })??;
    let report = AuditReport::from_flags(&flags, &setting, event_a);
    output::write_audit(&opts.out, config, &report)?;
    Ok(report)
}

/// Complexity quantities of the configured instance: one row per expert
/// and one per `eps`.
pub fn analyze(config: &Config, opts: &Options) -> Result<AnalysisReport, CliError> {
    opts.prepare()?;
    let setting = Setting::from_config(config);
    let instances = build_instances(config, &setting)?;
    let base_id = config.instance.id();
    let mut report = AnalysisReport {
        experts: Vec::new(),
        complexity: Vec::new(),
    };
    for (n, instance) in instances.iter().enumerate() {
        let id = if instances.len() > 1 {
            format!("{base_id}-{}", if n == 0 { "minus" } else { "plus" })
        } else {
            base_id.clone()
        };
        analyze_one(config, &id, instance, &setting, &mut report)?;
    }
    let mut f = CsvFile::create(
        &opts.out,
        "analysis_experts.csv",
        config,
        &["instance_id", "expert", "risk", "lambda"],
    )?;
    for r in &report.experts {
        f.row([r.instance_id.clone(), r.expert.to_string(), r.risk.to_string(), r.lambda.to_string()])?;
    }
    f.finish()?;
    let mut f = CsvFile::create(
        &opts.out,
        "analysis_complexity.csv",
        config,
        &[
            "instance_id",
            "eps",
            "c_eps_budgeted",
            "c_eps_two_point",
            "threshold_budgeted",
            "threshold_two_point",
        ],
    )?;
    for r in &report.complexity {
        let c = &r.complexity;
        f.row([
            r.instance_id.clone(),
            r.eps.to_string(),
            c.c_eps_budgeted.to_string(),
            c.c_eps_two_point.to_string(),
            c.required_budget.to_string(),
            c.required_rounds.to_string(),
        ])?;
    }
    f.finish()?;
    Ok(report)
}

fn analyze_one(
    config: &Config,
    id: &str,
    instance: &AnyInstance,
    setting: &Setting,
    report: &mut AnalysisReport,
) -> Result<(), CliError> {
    let moments = instance
        .moments()
        .ok_or_else(|| CliError::Config("analyze needs an instance with closed-form moments".into()))?;
    for &eps in &config.analysis.eps {
        let c = InstanceComplexity::new(moments, instance.loss(), eps, setting.delta);
        if report.experts.iter().all(|r| r.instance_id != id) {
            for (i, &lambda) in c.lambda.iter().enumerate() {
                report.experts.push(ExpertRow {
                    instance_id: id.to_string(),
                    expert: i,
                    risk: moments.risk(i),
                    lambda,
                });
            }
        }
        report.complexity.push(ComplexityRow {
            instance_id: id.to_string(),
            eps,
            complexity: c,
        });
    }
    Ok(())
}
