//! Configuration-driven runner for the `rieszlab` pipeline.
//!
//! Exit codes: `0` success, `2` config error, `3` computation error,
//! `4` verification findings (artifacts are still written).

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use clap::{Parser, Subcommand};
use config::Purpose;
use error::CliError;
use output::OutputDir;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "rieszlab", version, about = "Spectral localization and Riesz-basis experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Override a config value, e.g. `--set truncation.levels=80`.
    #[arg(long = "set", value_name = "PATH=VALUE", global = true)]
    pub set: Vec<String>,
    /// Output directory (overrides `output.dir` and `$RIESZLAB_OUT`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Exponents, admissibility and the sigma_N table.
    CheckConditions,
    /// Enclosure (box and disks) from the configured weights.
    Localize,
    /// Assemble, localize, compute projections and verify.
    Simulate,
    /// Witness L^p norms and slope fits.
    ProjectNorms,
    /// Merge earlier outputs into summary.json.
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckConditions => "check-conditions",
            Command::Localize => "localize",
            Command::Simulate => "simulate",
            Command::ProjectNorms => "project-norms",
            Command::Report => "report",
        }
    }

    fn purpose(self) -> Purpose {
        match self {
            Command::CheckConditions => Purpose::Conditions,
            Command::Localize => Purpose::Localize,
            Command::Simulate => Purpose::Simulate,
            Command::ProjectNorms => Purpose::Norms,
            Command::Report => Purpose::Report,
        }
    }
}

/// What a finished run produced.
#[derive(Debug)]
pub struct RunResult {
    pub exit_code: i32,
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    pub message: String,
}

/// Run one subcommand; never panics on bad input, always returns an exit code.
pub fn run(cli: &Cli) -> RunResult {
    let sub = cli.command.name();
    let loaded = if cli.command == Command::Report && cli.config.is_none() && cli.set.is_empty() {
        Ok(None)
    } else {
        config::load(cli.config.as_deref(), &cli.set)
            .and_then(|c| c.validate(cli.command.purpose()).map(|_| Some(c)))
    };
    let cfg_dir = loaded.as_ref().ok().and_then(|c| c.as_ref()).and_then(|c| c.output.dir.clone());
    let out_dir = output::resolve_dir(cli.out.as_deref(), cfg_dir.as_deref());

    let fail = |e: CliError, dir: Option<&OutputDir>| {
        let record = e.record(sub);
        if let Some(d) = dir {
            let _ = d.write_error(&record);
        }
        RunResult {
            exit_code: record.exit_code,
            out_dir: out_dir.clone(),
            files: Vec::new(),
            message: serde_json::to_string(&record).unwrap_or_else(|_| e.to_string()),
        }
    };

    let cfg = match loaded {
        Ok(c) => c,
        Err(e) => {
            let guard = OutputDir::acquire(&out_dir).ok();
            return fail(e, guard.as_ref());
        }
    };
    let guard = match OutputDir::acquire(&out_dir) {
        Ok(g) => g,
        Err(e) => return fail(e, None),
    };
    let outcome = match (cli.command, cfg.as_ref()) {
        (Command::Report, c) => commands::report(c, guard.path()),
        (Command::CheckConditions, Some(c)) => commands::check_conditions(c),
        (Command::Localize, Some(c)) => commands::localize(c),
        (Command::Simulate, Some(c)) => commands::simulate(c),
        (Command::ProjectNorms, Some(c)) => commands::project_norms(c),
        (_, None) => Err(CliError::Config {
            path: "<config>".into(),
            reason: "a configuration is required".into(),
        }),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => return fail(e, Some(&guard)),
    };
    if let Err(e) = guard.commit(&outcome.artifacts) {
        return fail(e, Some(&guard));
    }
    RunResult {
        exit_code: if outcome.findings { 4 } else { 0 },
        out_dir: out_dir.clone(),
        files: outcome.artifacts.names().into_iter().map(String::from).collect(),
        message: outcome.summary,
    }
}

/// Parse `args` (program name first) and run.
pub fn run_args<I, T>(args: I) -> RunResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => RunResult {
            exit_code: if e.use_stderr() { 2 } else { 0 },
            out_dir: PathBuf::new(),
            files: Vec::new(),
            message: e.to_string(),
        },
    }
}
