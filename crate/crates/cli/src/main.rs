//! `aadp`: approximate LP policies for MDP documents and the option-pricing
//! experiments. Every run writes its CSVs and a `manifest.json` into the
//! output directory.

mod commands;
mod config;
mod failure;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use config::{keys_for, Params};
use failure::{Failure, Kind};

const AFTER_HELP: &str = "\
Exit status: 0 success, 1 internal error, 2 usage or configuration error,
3 I/O error, 4 LP did not solve or gave a degenerate measure (artifacts and
manifest are written first), 5 oracle disagreement.
Errors are reported as one stderr line: error kind=<kind> exit=<code> message=\"...\".
`aadp keys <command>` lists the configuration keys and their defaults.";

#[derive(Parser)]
#[command(name = "aadp", version, about = "Approximate LP policies for constrained MDPs and option pricing", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// TOML file with a flat table of configuration keys.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override one key, `key=value` with a TOML value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Base seed (same as `--set seed=N`).
    #[arg(long)]
    seed: Option<u64>,
    /// Directory the CSVs and manifest are written to.
    #[arg(short, long, default_value = "aadp-out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an MDP JSON document and write policy.csv.
    Solve(RunArgs),
    /// American call: agreement-rate table (table1.csv) and simulated prices (table2.csv).
    PriceAmerican(RunArgs),
    /// Multi-asset Bermudan max-call with a knock-out barrier (table3.csv).
    PriceBermudan(RunArgs),
    /// Both sides of the approximation bound on random instances (bounds.csv).
    Diagnose(RunArgs),
    /// Exact LP against policy enumeration on bundled and random small MDPs (oracle.csv).
    Oracle(RunArgs),
    /// Rerun the command and parameters recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(short, long, default_value = "aadp-out")]
        out: PathBuf,
    },
    /// List the configuration keys of a command with their defaults.
    Keys { command: String },
}

const COMMANDS: [&str; 5] = ["solve", "price-american", "price-bermudan", "diagnose", "oracle"];

fn run(cli: Cli) -> anyhow::Result<()> {
    let (name, args) = match cli.command {
        Command::Solve(a) => ("solve", a),
        Command::PriceAmerican(a) => ("price-american", a),
        Command::PriceBermudan(a) => ("price-bermudan", a),
        Command::Diagnose(a) => ("diagnose", a),
        Command::Oracle(a) => ("oracle", a),
        Command::Replay { manifest, out } => {
            let recorded = manifest::read_manifest(&manifest)?;
            if !COMMANDS.contains(&recorded.command.as_str()) {
                return Err(Failure::usage(format!("manifest names unknown command `{}`", recorded.command)).into());
            }
            let params = Params::from_manifest(&recorded.command, &recorded.parameters)?;
            commands::execute(&recorded.command, params, &out).context("replaying manifest")?;
            return Ok(());
        }
        Command::Keys { command } => {
            if !COMMANDS.contains(&command.as_str()) {
                return Err(Failure::usage(format!("unknown command `{command}`; commands: {}", COMMANDS.join(", "))).into());
            }
            for spec in keys_for(&command) {
                let default = spec.default.map_or("(required)".to_string(), |d| d().to_string());
                println!("{:<14} {:<28} {}", spec.name, default, spec.help);
            }
            return Ok(());
        }
    };
    let params = Params::resolve(name, args.config.as_deref(), &args.overrides, args.seed)?;
    commands::execute(name, params, &args.out)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or_default();
            let f = Failure::usage(first.trim_start_matches("error: "));
            eprintln!("{}", f.line());
            return ExitCode::from(Kind::Usage.exit_code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let f = match e.downcast_ref::<Failure>() {
                Some(f) => Failure::new(f.kind, format!("{e:#}")),
                None => Failure::new(Kind::Internal, format!("{e:#}")),
            };
            eprintln!("{}", f.line());
            ExitCode::from(f.kind.exit_code())
        }
    }
}
