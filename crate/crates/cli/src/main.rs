use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use idnc_cli::{emit_outputs, emit_run, parse_config, run_sweep, Document, OutputOptions, Written};
use idnc_core::simulator::{run_trials, ExperimentSummary, ScenarioConfig};
use idnc_core::verify::{run_all, Scale};
use idnc_core::PolicyId;

#[derive(Parser)]
#[command(name = "idnc", version, about = "Network-coded D2D packet recovery simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write per-trial records.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a parameter sweep and write a table, a sidecar and a chart.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Put wall time in the CSV `seconds` column.
        #[arg(long)]
        record_timing: bool,
    },
    /// Run the self-check suites and print one line per check.
    Verify {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Use the larger acceptance sizes.
        #[arg(long)]
        full: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Output directory, created if missing.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Override the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the policy (a sweep then runs only this policy).
    #[arg(long)]
    policy: Option<PolicyId>,
    /// Charge a unit of delay for erased receptions too.
    #[arg(long)]
    strict_definition1: bool,
}

impl Common {
    fn apply(&self, config: &mut ScenarioConfig) {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(policy) = self.policy {
            config.policy = policy;
        }
        if self.strict_definition1 {
            config.strict_definition1 = true;
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into())
}

fn report(written: &Written) {
    println!("wrote {}", written.csv.display());
    println!("wrote {}", written.json.display());
    if let Some(chart) = &written.chart {
        println!("wrote {}", chart.display());
    }
}

fn run(path: &Path, common: &Common) -> Result<()> {
    let Document::Scenario(mut config) = parse_config(path)? else {
        bail!("{} is a sweep document; use `idnc sweep`", path.display());
    };
    common.apply(&mut config);
    let trials = run_trials(&config)?;
    let summary = ExperimentSummary::from_trials(config.devices, &trials);
    println!(
        "{}: mean delay {:.4} (std {:.4}) over {} trials, {} completed",
        config.policy, summary.mean_delay.mean, summary.mean_delay.std, summary.trials, summary.completed
    );
    report(&emit_run(&config, &trials, &common.out, &stem(path))?);
    Ok(())
}

fn sweep(path: &Path, common: &Common, record_timing: bool) -> Result<()> {
    let Document::Sweep(mut spec) = parse_config(path)? else {
        bail!("{} is a scenario document; use `idnc run`", path.display());
    };
    common.apply(&mut spec.base);
    if let Some(policy) = common.policy {
        spec.policies = vec![policy];
    }
    let options = OutputOptions { record_timing };
    let stem = stem(path);
    match run_sweep(&spec) {
        Ok(table) => {
            for row in &table.rows {
                println!(
                    "{} = {:<6} {:<17} {:.4}",
                    spec.variable, row.value, row.policy.name(), row.summary.mean_delay.mean
                );
            }
            report(&emit_outputs(&table, &common.out, &stem, options)?);
            Ok(())
        }
        Err(partial) => {
            if !partial.table.rows.is_empty() {
                let written = emit_outputs(&partial.table, &common.out, &format!("{stem}.partial"), options)?;
                report(&written);
            }
            Err(partial.into())
        }
    }
}

fn verify(seed: u64, full: bool) -> bool {
    let checks = run_all(seed, if full { Scale::Full } else { Scale::Quick });
    for check in &checks {
        println!("{check}");
    }
    checks.iter().all(|c| c.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { config, common } => run(config, common).with_context(|| format!("run {}", config.display())),
        Command::Sweep {
            config,
            common,
            record_timing,
        } => sweep(config, common, *record_timing).with_context(|| format!("sweep {}", config.display())),
        Command::Verify { seed, full } => {
            return if verify(*seed, *full) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
