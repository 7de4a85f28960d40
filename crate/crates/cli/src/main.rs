mod commands;
mod config;
mod table;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use prewell_core::checks::Suite;
use prewell_core::Error;

use config::Overrides;
use table::suffixed;

#[derive(Debug)]
pub enum CliError {
    /// Bad config, flags or physical parameters.
    Config(String),
    /// Numerical or I/O failure during a run.
    Run(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } | Error::Profile(_) | Error::NonPositiveEnergy(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Run(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "prewell", version, about = "Transmission and bound-state sweeps for layered 1D potentials")]
struct Cli {
    /// JSON config file; keys override the built-in defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output path; stdout when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads for grid evaluation (default: available cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Conversion factor from eV to nm⁻².
    #[arg(long = "units.ev-to-inv-nm2", global = true, value_name = "X")]
    ev_to_inv_nm2: Option<f64>,

    /// Override a config key, e.g. `--set a_nm.count=50`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Transmission of a segment profile over an energy grid.
    Transmit,
    /// Bound levels of a segment profile.
    Bound,
    /// Transmission of the squeezed well or barrier over thickness.
    Squeeze,
    /// Transmission of a prewell combined with a B-layer.
    Bilayer,
    /// Data behind one of the standard figures.
    Figure { name: FigureName },
    /// Run a self-check suite.
    Check { suite: SuiteName },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FigureName {
    Fig1,
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteName {
    Summary1,
    Summary2,
    Summary3,
    Oracle,
}

impl From<SuiteName> for Suite {
    fn from(s: SuiteName) -> Self {
        match s {
            SuiteName::Summary1 => Suite::Summary1,
            SuiteName::Summary2 => Suite::Summary2,
            SuiteName::Summary3 => Suite::Summary3,
            SuiteName::Oracle => Suite::Oracle,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// `Ok(false)` when a check suite reports failures.
fn run(cli: &Cli) -> Result<bool, CliError> {
    let overrides = Overrides::load(cli.config.as_deref(), &cli.sets, cli.ev_to_inv_nm2)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Run(e.to_string()))?;

    if let Command::Check { suite } = cli.command {
        let lines = pool.install(|| commands::check(&overrides, suite.into()))?;
        let mut text = String::new();
        for l in &lines {
            text.push_str(&l.to_string());
            text.push('\n');
        }
        let failed = lines.iter().filter(|l| !l.passed).count();
        text.push_str(&format!("{} passed, {failed} failed\n", lines.len() - failed));
        emit(cli.out.as_deref(), None, &text)?;
        return Ok(failed == 0);
    }

    let output = pool.install(|| match cli.command {
        Command::Transmit => commands::transmit(&overrides),
        Command::Bound => commands::bound(&overrides),
        Command::Squeeze => commands::squeeze(&overrides),
        Command::Bilayer => commands::bilayer(&overrides),
        Command::Figure { name } => match name {
            FigureName::Fig1 => commands::fig1(&overrides),
            FigureName::Fig3 => commands::fig3(&overrides),
            FigureName::Fig4 => commands::fig4(&overrides),
            FigureName::Fig5 => commands::fig5(&overrides),
        },
        Command::Check { .. } => unreachable!(),
    })?;
    for t in &output.tables {
        emit(cli.out.as_deref(), t.suffix.as_deref(), &t.render(&output.config))?;
    }
    for n in &output.notes {
        eprintln!("note: {n}");
    }
    Ok(true)
}

fn emit(out: Option<&std::path::Path>, suffix: Option<&str>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let path = suffixed(path, suffix);
            std::fs::write(&path, text).map_err(|e| CliError::Run(format!("{}: {e}", path.display())))
        }
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Run(format!("stdout: {e}"))),
    }
}
