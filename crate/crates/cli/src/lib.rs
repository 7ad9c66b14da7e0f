//! Command-line harness: configuration, run directories and the six subcommands.
//!
//! Exit codes are 0 on success, 2 for configuration errors, 3 when the
//! solution blew up (partial outputs are kept), 4 when a check failed and 1
//! for anything else.

pub mod commands;
pub mod config;
pub mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub use commands::{CliError, Outcome};
pub use config::{Command, RunConfig};
pub use manifest::{Prepared, RunDir, RunManifest, RunStatus};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CommandArg {
    Simulate,
    Theorem1,
    Theorem2,
    Ode,
    Oracle,
    Sweep,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Simulate => Command::Simulate,
            CommandArg::Theorem1 => Command::Theorem1,
            CommandArg::Theorem2 => Command::Theorem2,
            CommandArg::Ode => Command::Ode,
            CommandArg::Oracle => Command::Oracle,
            CommandArg::Sweep => Command::Sweep,
        }
    }
}

/// Spectral Euler laboratory.
#[derive(Debug, Parser)]
#[command(name = "egl", version)]
struct Cli {
    #[arg(value_enum)]
    command: CommandArg,
    /// key = value configuration file (optional for `oracle`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parent directory for run directories; overrides run.output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides run.seed.
    #[arg(long)]
    seed: Option<u64>,
}

/// A finished command and where its outputs live.
#[derive(Debug)]
pub struct Finished {
    pub dir: PathBuf,
    pub status: RunStatus,
    pub report: String,
    /// True when an identical earlier run was found and nothing was recomputed.
    pub reused: bool,
}

impl Finished {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

/// Validates `cfg`, opens its run directory and executes `command`.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Finished, CliError> {
    cfg.validate(command)?;
    let dir = match RunDir::open(&cfg.output_dir, command, cfg)? {
        Prepared::Existing { path, manifest } => {
            let report = std::fs::read_to_string(path.join("report.txt")).unwrap_or_default();
            return Ok(Finished {
                dir: path,
                status: manifest.status,
                report,
                reused: true,
            });
        }
        Prepared::Fresh(d) => d,
    };
    let outcome = match command {
        Command::Simulate => commands::simulate::cmd_simulate(cfg, &dir),
        Command::Theorem1 => commands::theorem1::cmd_theorem1(cfg, &dir),
        Command::Theorem2 => commands::theorem2::cmd_theorem2(cfg, &dir),
        Command::Ode => commands::ode::cmd_ode(cfg, &dir),
        Command::Oracle => commands::oracle::cmd_oracle(cfg, &dir),
        Command::Sweep => commands::sweep::cmd_sweep(cfg, &dir),
    }?;
    dir.finish(outcome.status)?;
    Ok(Finished {
        dir: dir.path.clone(),
        status: outcome.status,
        report: outcome.report,
        reused: false,
    })
}

fn load_config(cli: &Cli, command: Command) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::parse(&text)?
        }
        None if command == Command::Oracle => RunConfig::default(),
        None => return Err(CliError::Config(format!("{} needs --config <path>", command.name()))),
    };
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let command = Command::from(cli.command);
    let result = load_config(&cli, command).and_then(|cfg| execute(command, &cfg));
    match result {
        Ok(f) => {
            if f.reused {
                println!("identical run already present: {}", f.dir.display());
            }
            print!("{}", f.report);
            println!("status={}", f.status.label());
            println!("run_dir={}", f.dir.display());
            f.exit_code()
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
