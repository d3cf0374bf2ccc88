//! `rdmv`: runs vanishing-dissipation experiments and checks the resulting measures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rdmv_core::experiments::{parse_config, read_report, run_experiment, ExperimentConfig, ExperimentReport, Mode};
use rdmv_core::{Error, Result};

#[derive(Parser)]
#[command(name = "rdmv", version, about = "Vanishing-dissipation experiments for the complete Euler system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the first sweep value only.
    Run(RunArgs),
    /// Run every sweep value.
    Sweep(RunArgs),
    /// Check a report, or run the sweep and check it; exits 1 when a clause fails.
    Verify {
        #[arg(long, conflicts_with_all = ["config", "out"], required_unless_present = "config")]
        report: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep against the exact solution of contact data.
    WeakStrong(RunArgs),
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

fn out_dir(args_out: Option<PathBuf>, config: &ExperimentConfig) -> PathBuf {
    args_out.or_else(|| config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

fn print_report(report: &ExperimentReport) {
    let v = &report.verification;
    for (clause, pass) in v.clause_flags() {
        println!("{clause:<14} {}", if pass { "pass" } else { "FAIL" });
    }
    if let Some(s) = &report.dissipation_scaling {
        for ((label, slope), pass) in s.labels.iter().zip(&s.slopes).zip(&s.pass) {
            let slope = slope.map_or("-".to_string(), |x| format!("{x:.3}"));
            println!("scaling {label:<20} slope {slope:>7} {}", if *pass { "pass" } else { "FAIL" });
        }
    }
    if let Some(note) = &report.dissipation_scaling_note {
        println!("scaling skipped: {note}");
    }
    if let Some(ws) = &report.weak_strong {
        for (eps, e) in ws.epsilons.iter().zip(&ws.max_relative_energy) {
            println!("eps {eps:e}: max relative energy {e:e}");
        }
    }
    println!("overall        {}", if report.pass { "pass" } else { "FAIL" });
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Run(a) => {
            let config = load(&a.config)?;
            let report = run_experiment(&config, Mode::Single, &out_dir(a.out, &config))?;
            print_report(&report);
            Ok(true)
        }
        Command::Sweep(a) => {
            let config = load(&a.config)?;
            let report = run_experiment(&config, Mode::Sweep, &out_dir(a.out, &config))?;
            print_report(&report);
            Ok(true)
        }
        Command::WeakStrong(a) => {
            let mut config = load(&a.config)?;
            if config.ic.strong_solution(config.grid.length).is_none() {
                return Err(Error::config("ic", "weak-strong studies need contact initial data"));
            }
            config.weak_strong.enabled = true;
            let report = run_experiment(&config, Mode::Sweep, &out_dir(a.out, &config))?;
            print_report(&report);
            Ok(true)
        }
        Command::Verify { report: Some(path), .. } => {
            let report = read_report(&path)?;
            print_report(&report);
            Ok(report.pass)
        }
        Command::Verify { config, out, .. } => {
            let config = load(&config.expect("clap requires --config without --report"))?;
            let report = run_experiment(&config, Mode::Sweep, &out_dir(out, &config))?;
            print_report(&report);
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
