//! `netlq`: scenario-driven front end for the netlq toolkit.
//!
//! Every data-producing subcommand writes CSV files, `manifest.json` and
//! `provenance.json` into `--out`. Exit status 2 flags a schema violation,
//! 3 a numerical failure; either way stderr carries one `error code=...`
//! line.

mod commands;
mod config;
mod failure;
mod output;
mod selftest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use netlq::exec::Executor;

use config::{Override, Resolved};
use failure::Failure;
use output::{col, Artifacts};

#[derive(Parser)]
#[command(name = "netlq", version, about = "Networked LQ control: gains, figure data, envelope design and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "netlq-out")]
    out: PathBuf,
    /// Overrides `experiment.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `experiment.paths`.
    #[arg(long)]
    paths: Option<usize>,
    /// Field override `key=value`; the value is parsed as JSON, else taken as a string.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Gain schedule k*, beta, lambda, alpha.
    Gains(Common),
    /// Distortion and cost against u0 for a known initial state.
    FigDualEffect(Common),
    /// Estimate-increment moment and filtering error against the first control.
    FigExample3(Common),
    /// Two-step distortion against the time-1 threshold for several u0.
    FigSymmetry(Common),
    /// As fig-symmetry, minimized over the feasible thresholds only.
    FigConstrainedEncoder(Common),
    /// Expected terminal control cost under a finite control set.
    FigConstrainedControl(Common),
    /// Expected terminal control cost under an interval control set.
    FigIntervalControl(Common),
    /// Symmetric and optimized event-trigger envelopes.
    EtEnvelope(Common),
    /// Monte Carlo cost of the scenario, or a sweep over one field.
    Simulate(Common),
    /// Runs the invariant suite.
    Selftest {
        /// Also write the results here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lists every resolved field with its source.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

type Body = fn(&Resolved, &mut Artifacts) -> Result<(), Failure>;

fn overrides(set: &[String], seed: Option<u64>, paths: Option<usize>) -> Result<Vec<Override>, Failure> {
    let mut all = set.iter().map(|s| Override::parse(s)).collect::<Result<Vec<_>, _>>()?;
    if let Some(s) = seed {
        all.push(Override::parse(&format!("experiment.seed={s}"))?);
    }
    if let Some(n) = paths {
        all.push(Override::parse(&format!("experiment.paths={n}"))?);
    }
    Ok(all)
}

fn run_data(name: &str, c: &Common, body: &dyn Fn(&Resolved, &mut Artifacts) -> Result<(), Failure>) -> Result<(), Failure> {
    let resolved = config::resolve(&c.scenario, &overrides(&c.set, c.seed, c.paths)?)?;
    let mut out = Artifacts::create(&c.out)?;
    body(&resolved, &mut out)?;
    out.finish(name, Some(&resolved))?;
    println!("{name}: wrote {} (config {})", c.out.display(), &resolved.hash[..12]);
    Ok(())
}

fn validate(scenario: &Path, set: &[String]) -> Result<(), Failure> {
    let resolved = config::resolve(scenario, &overrides(set, None, None)?)?;
    println!("field\tvalue\tsource");
    for f in &resolved.fields {
        println!("{}\t{}\t{}", f.path, f.value, f.source);
    }
    println!("# config_hash {}", resolved.hash);
    Ok(())
}

fn selftest(out: Option<&Path>) -> Result<(), Failure> {
    let checks = selftest::run();
    for c in &checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(dir) = out {
        let mut a = Artifacts::create(dir)?;
        a.csv(
            "selftest.csv",
            "invariant checks",
            &[col("check", "label"), col("pass", "bool"), col("detail", "text")],
            checks.iter().map(|c| vec![c.name.to_string(), c.pass.to_string(), c.detail.clone()]),
        )?;
        a.finish("selftest", None)?;
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::numerical("selftest_failed", format!("failed checks: {}", failed.join(", "))))
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    let table: Option<(&str, &Common, Body)> = match &cmd {
        Command::Gains(c) => Some(("gains", c, commands::gains)),
        Command::FigDualEffect(c) => Some(("fig-dual-effect", c, commands::fig_dual_effect)),
        Command::FigExample3(c) => Some(("fig-example3", c, commands::fig_example3)),
        Command::FigSymmetry(c) => Some(("fig-symmetry", c, commands::fig_symmetry)),
        Command::FigConstrainedEncoder(c) => Some(("fig-constrained-encoder", c, commands::fig_constrained_encoder)),
        Command::FigConstrainedControl(c) => Some(("fig-constrained-control", c, commands::fig_constrained_control)),
        Command::FigIntervalControl(c) => Some(("fig-interval-control", c, commands::fig_interval_control)),
        Command::EtEnvelope(c) => Some(("et-envelope", c, commands::et_envelope)),
        _ => None,
    };
    if let Some((name, c, body)) = table {
        return run_data(name, c, &body);
    }
    match cmd {
        Command::Simulate(c) => {
            let exec = Executor::from_env();
            run_data("simulate", &c, &|r, out| commands::simulate_cmd(r, out, &exec))
        }
        Command::Selftest { out } => selftest(out.as_deref()),
        Command::Validate { scenario, set } => validate(&scenario, &set),
        _ => unreachable!("data subcommands handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
