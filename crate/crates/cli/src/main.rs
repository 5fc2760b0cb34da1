//! `optomech`: photon-blockade sweeps, cat-state runs and identity checks
//! written as CSV.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use optomech::Branch;

use commands::CatMode;
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "optomech", version, about = "Generalized optomechanics: photon blockade and mechanical cat states")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON file with flat configuration keys.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output CSV; companion tables go to `<stem>_<suffix>.csv`. Default: stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads (0: one per core).
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    jobs: usize,

    /// Include master-equation / Fock-basis results.
    #[arg(long, global = true, conflicts_with = "analytic")]
    numeric: bool,

    /// Closed forms only.
    #[arg(long, global = true)]
    analytic: bool,

    /// Conditioned cavity outcome for phase-space output.
    #[arg(long, global = true, value_name = "plus|minus", default_value = "plus")]
    branch: Branch,

    /// Override one configuration key (JSON value), applied after --config.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Predicted and detected optimal detunings (numeric unless --analytic).
    Table1,
    /// Photon statistics along one swept variable.
    BlockadeSweep,
    /// Photon statistics on a (g0, g_ck) grid plus the resonance locus.
    BlockadeMap,
    /// Cat probabilities over time, closed or with dissipation.
    Cat {
        #[arg(long, value_enum, default_value = "closed")]
        mode: CatMode,
    },
    /// Wigner function of the conditioned mechanical state.
    Wigner,
    /// Quadrature distribution of the conditioned mechanical state.
    Quadrature,
    /// Propagator, unitarity, Franck-Condon and Wigner-marginal identities.
    Verify {
        /// Flip the sign of the cubic phase (sensitivity control; must fail).
        #[arg(long)]
        flip_nu: bool,
    },
}

/// Failure classes, mapped to the exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Numerical(anyhow::Error),
    Verification,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Verification => 3,
        }
    }
}

fn preset(cmd: &Command) -> RunConfig {
    match cmd {
        Command::Table1 | Command::BlockadeSweep | Command::BlockadeMap => RunConfig::blockade(),
        Command::Verify { .. } => RunConfig::verify(),
        Command::Cat { .. } | Command::Wigner | Command::Quadrature => RunConfig::cat(),
    }
}

fn command_name(cmd: &Command) -> String {
    match cmd {
        Command::Table1 => "table1".into(),
        Command::BlockadeSweep => "blockade-sweep".into(),
        Command::BlockadeMap => "blockade-map".into(),
        Command::Cat { mode } => format!("cat --mode {}", if *mode == CatMode::Open { "open" } else { "closed" }),
        Command::Wigner => "wigner".into(),
        Command::Quadrature => "quadrature".into(),
        Command::Verify { flip_nu } => if *flip_nu { "verify --flip-nu" } else { "verify" }.into(),
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = preset(&cli.command).resolve(cli.config.as_deref(), &cli.set).map_err(Failure::Usage)?;
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global().map_err(|e| Failure::Usage(e.into()))?;
    }

    let mut comments = vec![format!("optomech {}", command_name(&cli.command))];
    let mut mode = |numeric: bool| comments.push(format!("results = {}", if numeric { "analytic+numeric" } else { "analytic" }));
    let mut verified = true;
    let out = match &cli.command {
        Command::Table1 => {
            mode(!cli.analytic);
            commands::table1(&cfg, !cli.analytic)?
        }
        Command::BlockadeSweep => {
            mode(cli.numeric);
            commands::blockade_sweep(&cfg, cli.numeric)?
        }
        Command::BlockadeMap => {
            mode(cli.numeric);
            commands::blockade_map(&cfg, cli.numeric)?
        }
        Command::Cat { mode } => commands::cat(&cfg, *mode)?,
        Command::Wigner => {
            comments.push(format!("branch = {}", cli.branch));
            comments.push(format!("state = {}", if cli.numeric { "open-system numeric" } else { "analytic" }));
            commands::wigner(&cfg, cli.branch, cli.numeric)?
        }
        Command::Quadrature => {
            comments.push(format!("branch = {}", cli.branch));
            comments.push(format!("state = {}", if cli.numeric { "open-system numeric" } else { "analytic" }));
            commands::quadrature(&cfg, cli.branch, cli.numeric)?
        }
        Command::Verify { flip_nu } => {
            let (out, ok) = commands::verify(&cfg, *flip_nu)?;
            verified = ok;
            out
        }
    };
    comments.extend(cfg.echo());
    out.emit(&comments, cli.out.as_deref()).map_err(Failure::Usage)?;
    if verified {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(e) => eprintln!("error: {e:#}"),
                Failure::Numerical(e) => eprintln!("numerical failure: {e:#}"),
                Failure::Verification => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
