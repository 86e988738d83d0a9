use std::path::PathBuf;
use std::process::ExitCode;

use budgex_cli::config::SweepVariable;
use budgex_cli::{CliError, Config, Options};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "budgex", version, about = "Budgeted elimination learners: experiments, audits and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured learner and score every replication.
    Run(Common),
    /// Repeat `run` over a list of values and fit the log-log slope.
    Sweep(SweepArgs),
    /// Check invariants over all replications; exits with 2 on failure.
    Audit(Common),
    /// Write complexity tables for the configured instance.
    Analyze(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; defaults to `output.dir` or `out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variable {
    Horizon,
    Budget,
    M,
    Epsilon,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    variable: Option<Variable>,
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
}

fn load(common: &Common) -> Result<(Config, Options), CliError> {
    let mut config = Config::from_path(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let out = common
        .out
        .clone()
        .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    if common.threads == Some(0) {
        return Err(CliError::Config("threads: must be at least 1".into()));
    }
    Ok((
        config,
        Options {
            out,
            threads: common.threads,
        },
    ))
}

fn revalidate(config: &Config) -> Result<(), CliError> {
    config
        .validate()
        .map_err(|(key, msg)| CliError::Config(format!("{key}: {msg}")))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(common) => {
            let (config, opts) = load(&common)?;
            let report = budgex_cli::run(&config, &opts)?;
            let s = &report.summary;
            println!("median {} mean {} q90 {}", s.median, s.mean, s.q90);
        }
        Command::Sweep(args) => {
            let (mut config, opts) = load(&args.common)?;
            if args.variable.is_some() || args.values.is_some() {
                let mut sweep = config.sweep.clone().unwrap_or(budgex_cli::config::SweepConfig {
                    variable: SweepVariable::Horizon,
                    values: Vec::new(),
                });
                if let Some(v) = args.variable {
                    sweep.variable = match v {
                        Variable::Horizon => SweepVariable::Horizon,
                        Variable::Budget => SweepVariable::Budget,
                        Variable::M => SweepVariable::M,
                        Variable::Epsilon => SweepVariable::Epsilon,
                    };
                }
                if let Some(values) = args.values {
                    sweep.values = values;
                }
                config.sweep = Some(sweep);
                revalidate(&config)?;
            }
            let report = budgex_cli::sweep(&config, &opts)?;
            match report.fit {
                Some(fit) => println!("slope {} over {} points", fit.slope, fit.used),
                None => println!("no slope: fewer than 3 positive medians"),
            }
        }
        Command::Audit(common) => {
            let (config, opts) = load(&common)?;
            let report = budgex_cli::audit(&config, &opts)?;
            for r in &report.rows {
                println!("{:<22} {:<5} {} / {} (limit {})", r.check, r.status(), r.violations, r.runs, r.limit);
            }
            if !report.passed() {
                let failed: Vec<&str> = report.rows.iter().filter(|r| !r.passed()).map(|r| r.check).collect();
                return Err(CliError::Invariant(failed.join(", ")));
            }
        }
        Command::Analyze(common) => {
            let (config, opts) = load(&common)?;
            let report = budgex_cli::analyze(&config, &opts)?;
            println!("{} expert rows, {} complexity rows", report.experts.len(), report.complexity.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("budgex: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
