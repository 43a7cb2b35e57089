use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use imexrelax::harness::{config::ExperimentConfig, studies};
use imexrelax::tableau::{check_order_conditions, classify, validate, Registry};

#[derive(Parser)]
#[command(name = "imexrelax", version, about = "IMEX Runge-Kutta experiments for relaxation systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by an INI file.
    Run {
        config: PathBuf,
        /// Print the CSV to stdout even when the config names an output file.
        #[arg(long)]
        stdout: bool,
    },
    /// Inspect tableaux.
    Tableau {
        #[command(subcommand)]
        command: TableauCommand,
    },
    /// List the model names accepted in `[model] name`.
    ListModels,
}

#[derive(Subcommand)]
enum TableauCommand {
    /// Validate, classify and check the order conditions of one scheme.
    Check { registry: PathBuf, name: String },
}

const MODELS: [(&str, &str); 5] = [
    ("r13", "linearized R13 moment system; periodic or with slip/flux walls"),
    ("diffusive2x2", "2x2 diffusive relaxation; linear heat equation in the limit"),
    ("klf", "Kawashima-LeFloch system; porous medium equation in the limit"),
    ("broadwell", "Broadwell discrete-velocity model; Euler limit"),
    ("vdp", "van der Pol oscillator in relaxation form"),
];

fn run(config: &Path, stdout: bool) -> Result<ExitCode> {
    let cfg = match ExperimentConfig::from_path(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", config.display());
            return Ok(ExitCode::from(1));
        }
    };
    let report = match studies::run(&cfg) {
        Ok(r) => r,
        Err(e @ (imexrelax::Error::Config(_) | imexrelax::Error::UnknownScheme(_) | imexrelax::Error::EmptySlot(_))) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(1));
        }
        Err(e) => return Err(e).context("experiment failed"),
    };
    match (&cfg.output, stdout) {
        (Some(path), false) => eprintln!("wrote {}", path.display()),
        _ => print!("{}", report.to_csv()?),
    }
    for run in report.runs.iter().filter(|r| r.abort.is_some()) {
        eprintln!("aborted: eps={:e} N={}: {}", run.eps, run.n, run.abort.as_deref().unwrap_or(""));
    }
    Ok(if report.aborted() { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn tableau_check(registry: &Path, name: &str) -> Result<ExitCode> {
    let text = std::fs::read_to_string(registry).with_context(|| format!("reading {}", registry.display()))?;
    let tab = match Registry::parse(&text).and_then(|r| r.get(name)) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    println!("scheme: {} ({} stages)", tab.name, tab.stages());
    let v = validate(&tab)?;
    if v.is_valid() {
        println!("structure: ok");
    } else {
        for x in &v.violations {
            println!("structure: {x}");
        }
        return Ok(ExitCode::from(1));
    }
    match classify(&tab) {
        Ok(c) => println!("class: {:?} ({})", c.kind, c.diagnostic),
        Err(e) => println!("class: {e}"),
    }
    let p = check_order_conditions(&tab, 3);
    println!("order: {}", p.satisfied_order);
    println!("stiffly accurate: {}", p.stiffly_accurate);
    println!("globally stiffly accurate: {}", p.globally_stiffly_accurate);
    if p.nonstandard_coupling {
        println!("abscissae differ between the two halves");
    }
    // Only the first unmet order; everything above it fails as a matter of course.
    for c in p.failed_conditions.iter().filter(|c| c.order == p.satisfied_order + 1) {
        println!("failed {} (order {}): residual {:e}", c.id, c.order, c.residual);
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run { config, stdout } => run(&config, stdout),
        Command::Tableau { command: TableauCommand::Check { registry, name } } => tableau_check(&registry, &name),
        Command::ListModels => {
            for (name, about) in MODELS {
                println!("{name:<14}{about}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
