//! `nnls-lab`: runs solves and verification experiments from TOML configs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use nnls_core::experiments::{ExperimentReport, EXPERIMENTS};
use rayon::prelude::*;

use nnls_cli::config::{ConfigError, LoadedConfig, RunConfig};
use nnls_cli::{output, run};

const EXIT_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(name = "nnls-lab", version, about = "Pseudospectral laboratory for nonlocal NLS equations")]
struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output directory, replacing `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for `sweep`.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// `dotted.key=value`, applied on top of the config file. Repeatable.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured equation and write the trajectory diagnostics.
    Solve,
    /// Run one named experiment.
    Experiment { name: String },
    /// Run the configured experiment once per value in the `[sweep]` table.
    Sweep,
    /// List the available experiments and their CSV columns.
    List,
}

fn list() {
    for e in &EXPERIMENTS {
        println!("{:<26} {:<34} {}", e.name, e.claim_id, e.description);
        if !e.csv_columns.is_empty() {
            println!("{:<26} csv: {}", "", e.csv_columns);
        }
    }
}

fn output_dir(cli: &Cli, cfg: &RunConfig) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.directory))
}

fn summary(report: &ExperimentReport) -> String {
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.name.as_str())
        .collect();
    let verdict = if report.passed { "PASS" } else { "FAIL" };
    let mut line = format!("{}: {verdict} ({:.2}s)", report.experiment, report.runtime_seconds);
    if !failed.is_empty() {
        line.push_str(&format!(", failed checks: {}", failed.join(", ")));
    }
    for note in &report.notes {
        line.push_str(&format!("\n  note: {note}"));
    }
    line
}

/// Runs one configuration and writes its outputs; the report is written on
/// every path that got past validation.
fn execute(name: &str, cfg: &RunConfig, dir: &Path, solve: bool) -> Result<ExperimentReport> {
    let result = if solve { run::run_solve(cfg) } else { run::run_experiment(cfg) };
    let report = result.unwrap_or_else(|e| run::error_report(name, &e));
    output::write_outputs(dir, &report, &cfg.output.formats)?;
    Ok(report)
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

fn sweep(cli: &Cli, loaded: &LoadedConfig) -> Result<ExitCode> {
    let members = match loaded.sweep_members() {
        Ok(m) => m,
        Err(e) => return Ok(invalid(&e)),
    };
    let parameter = loaded.config.sweep.as_ref().map_or("", |s| s.parameter.as_str()).to_string();
    let root = output_dir(cli, &loaded.config);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.max(1)).build()?;
    let results: Vec<(String, Result<ExperimentReport>)> = pool.install(|| {
        members
            .par_iter()
            .map(|(label, member)| {
                let cfg = &member.config;
                let dir = root.join(format!("{}={}", sanitize(&parameter), sanitize(label)));
                (label.clone(), execute(&cfg.experiment.name, cfg, &dir, false))
            })
            .collect()
    });

    std::fs::create_dir_all(&root)?;
    let mut w = csv::Writer::from_path(root.join("sweep.csv"))?;
    w.write_record([parameter.as_str(), "passed", "runtime_seconds", "failed_checks"])?;
    let mut all_passed = true;
    for (label, result) in results {
        let report = result?;
        println!("[{parameter}={label}] {}", summary(&report));
        all_passed &= report.passed;
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
        w.write_record([
            label,
            report.passed.to_string(),
            output::format_f64(report.runtime_seconds),
            failed.join(" "),
        ])?;
    }
    w.flush()?;
    Ok(if all_passed { ExitCode::SUCCESS } else { ExitCode::from(EXIT_FAILED) })
}

fn invalid(e: &ConfigError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_INVALID)
}

fn real_main(cli: Cli) -> Result<ExitCode> {
    if let Command::List = cli.command {
        list();
        return Ok(ExitCode::SUCCESS);
    }
    let mut overrides = cli.overrides.clone();
    if let Command::Experiment { name } = &cli.command {
        overrides.push(format!("experiment.name=\"{name}\""));
    }
    let loaded = match LoadedConfig::load(cli.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => return Ok(invalid(&e)),
    };
    let cfg = &loaded.config;
    match &cli.command {
        Command::Sweep => sweep(&cli, &loaded),
        Command::Solve | Command::Experiment { .. } => {
            let solve = matches!(cli.command, Command::Solve);
            let name = if solve { "solve" } else { cfg.experiment.name.as_str() };
            let dir = output_dir(&cli, cfg);
            let report = execute(name, cfg, &dir, solve)?;
            println!("{}", summary(&report));
            println!("outputs in {}", dir.display());
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(EXIT_FAILED) })
        }
        Command::List => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}
