use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lwa_harness::commands;
use lwa_harness::config::ExperimentConfig;
use lwa_harness::CliError;

#[derive(Parser)]
#[command(
    name = "lwa",
    about = "Subset-weighted MCMC experiment harness",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config (JSON); LWA_* environment variables override keys.
    #[arg(long)]
    config: PathBuf,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the budget with a cost-unit cap.
    #[arg(long, conflicts_with = "budget_iters")]
    budget_cost: Option<u64>,
    /// Override the budget with an iteration cap.
    #[arg(long)]
    budget_iters: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig, CliError> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(cost) = self.budget_cost {
            config.budget = lwa_harness::config::BudgetConfig {
                iterations: None,
                cost_units: Some(cost),
            };
        }
        if let Some(iters) = self.budget_iters {
            config.budget = lwa_harness::config::BudgetConfig {
                iterations: Some(iters),
                cost_units: None,
            };
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the configured dataset and write it with metadata.
    Generate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory for dataset.bin + dataset.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the configured sampler; one trace CSV per replication.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Directory holding dataset.bin + dataset.json.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Concurrent replication workers (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the configured sweep axis across replications.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Compute analysis reports from traces and grid oracles.
    Analyze {
        /// Analysis spec (JSON).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the enumeration-based oracle suite on the toy instance.
    OracleCheck {
        #[arg(long)]
        out: PathBuf,
        /// Chain length for the stationarity checks.
        #[arg(long, default_value_t = 1_000_000)]
        steps: u64,
        /// Inner theta steps after a refresh (the kernel equilibrates in L).
        #[arg(long, default_value_t = 5)]
        inner_steps: u64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { config, out } => {
            let config = config.load()?;
            let meta = commands::cmd_generate(&config, &out)?;
            println!(
                "wrote {} observations (dim {}, sha256 {}) to {}",
                meta.n,
                meta.dim,
                &meta.sha256[..12],
                out.display()
            );
        }
        Command::Run { config, data, out, workers } => {
            let config = config.load()?;
            let summary = commands::cmd_run(&config, &data, &out, workers)?;
            for rep in &summary.replications {
                println!(
                    "replication {}: {} iterations, cost {}, acceptance {:.3}, refresh {:.3}",
                    rep.replication,
                    rep.iterations,
                    rep.cost_units,
                    rep.acceptance_rate,
                    rep.refresh_rate
                );
            }
        }
        Command::Sweep { config, data, out, workers } => {
            let config = config.load()?;
            let report = commands::cmd_sweep(&config, &data, &out, workers)?;
            for agg in &report.aggregates {
                println!(
                    "{} = {}: refresh {:.4}, rmse {:.4}",
                    report.axis, agg.setting, agg.mean_refresh_rate, agg.rmse_total
                );
            }
        }
        Command::Analyze { spec, out } => {
            let written = commands::cmd_analyze(&spec, &out)?;
            for path in written {
                println!("wrote {}", path.display());
            }
        }
        Command::OracleCheck { out, steps, inner_steps } => {
            let report = commands::cmd_oracle_check(&out, steps, inner_steps)?;
            for check in &report.checks {
                println!(
                    "{}: measured {:.3e} vs tolerance {:.0e} -> {}",
                    check.name,
                    check.measured,
                    check.tolerance,
                    if check.pass { "pass" } else { "FAIL" }
                );
            }
            if !report.pass {
                return Err(CliError::CheckFailed(
                    "oracle suite failed; see oracle_report.json".into(),
                ));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
