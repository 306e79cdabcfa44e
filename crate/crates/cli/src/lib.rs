//! Command-line front end for the HPA-axis delay model.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod plot;
pub mod table;

use commands::{KernelKind, Session, SweepParam};
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "hpa",
    version,
    about = "Equilibria, stability, Hopf delays and simulation of the HPA-axis delay model"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Named preset; overrides the preset in the config file.
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,
    /// Output directory.
    #[arg(
        long,
        global = true,
        env = "HPA_OUT_DIR",
        default_value = ".",
        value_name = "DIR"
    )]
    pub out: PathBuf,
    /// Tolerance override, repeatable.
    #[arg(long = "tolerance", global = true, value_name = "KEY=VALUE")]
    pub tolerances: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// All steady states.
    Equilibria,
    /// Stability of each steady state without delays.
    Stability,
    /// Critical delays at which each steady state loses stability.
    Hopf {
        /// Kernel family; defaults to the configured kernels, else dirac.
        #[arg(long, value_enum)]
        kernel: Option<KernelKind>,
        /// Total Gamma order; defaults to the configured kernels, else 4.
        #[arg(long)]
        order: Option<u32>,
        /// Highest Dirac branch index.
        #[arg(long, default_value_t = 3)]
        pmax: usize,
    },
    /// Integrate the delayed system.
    Simulate {
        /// Write SVG plots of each channel and the x1-x3 phase plane.
        #[arg(long)]
        plot: bool,
    },
    /// Simulate both extreme branches across a parameter grid.
    Sweep {
        /// Defaults to tau for Dirac kernels and theta for Gamma kernels.
        #[arg(long, value_enum)]
        param: Option<SweepParam>,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 31)]
        steps: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Equilibria => "equilibria",
            Command::Stability => "stability",
            Command::Hopf { .. } => "hopf",
            Command::Simulate { .. } => "simulate",
            Command::Sweep { .. } => "sweep",
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => config::load(path)?,
        None => config::ConfigFile::default(),
    };
    let resolved = config::resolve(&file, cli.preset.as_deref(), &cli.tolerances)?;
    let config_source = match (
        &cli.config,
        cli.preset.as_deref().or(file.preset.as_deref()),
    ) {
        (Some(path), _) => path.display().to_string(),
        (None, Some(preset)) => format!("preset {preset}"),
        (None, None) => "defaults".into(),
    };
    commands::ensure_dir(&cli.out)?;
    let session = Session {
        resolved,
        config_source,
        command_line: cli.command.name().into(),
        out: cli.out.clone(),
    };
    match cli.command {
        Command::Equilibria => commands::equilibria(&session),
        Command::Stability => commands::stability(&session),
        Command::Hopf {
            kernel,
            order,
            pmax,
        } => commands::hopf(&session, kernel, order, pmax),
        Command::Simulate { plot } => commands::simulate(&session, plot),
        Command::Sweep {
            param,
            from,
            to,
            steps,
        } => commands::sweep(&session, param, from, to, steps),
    }
}

/// Parses `args` (including the program name) and runs the command; returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("hpa: {e}");
            e.exit_code()
        }
    }
}
