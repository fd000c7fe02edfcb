//! `cmc-sir`: analytic and simulated SIR epidemics on clustered random
//! graphs. Every experiment is described by one JSON config file.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "cmc-sir", version, about = "SIR epidemics on configuration-model graphs with triangles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Branching-process analysis: R0, outbreak probability, final size.
    Analyze(Common),
    /// Monte Carlo epidemics on freshly generated graphs.
    Simulate(Common),
    /// Heterogeneity sweep over symmetric Beta transmission laws.
    Sweep(Common),
    /// Build one graph and report its clustering.
    GraphStats {
        #[command(flatten)]
        common: Common,
        /// Also write the graph as an edge list.
        #[arg(long)]
        edge_list: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output file (a directory for `simulate`); stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    replicates: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, Failure> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(r) = self.replicates {
            cfg.replicates = r;
        }
        Ok(cfg)
    }
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Core(cmc_sir::Error),
    Io(anyhow::Error),
}

impl From<cmc_sir::Error> for Failure {
    fn from(e: cmc_sir::Error) -> Self {
        Self::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        use cmc_sir::Error;
        match self {
            Self::Config(_) => 2,
            Self::Core(Error::Convergence { .. }) => 3,
            Self::Core(Error::InsufficientData(_)) => 4,
            Self::Core(_) => 2,
            Self::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(msg) => write!(f, "config error: {msg}"),
            Self::Core(e) => write!(f, "{e}"),
            Self::Io(e) => write!(f, "{e:#}"),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze(c) => commands::analyze_cmd(&c.load()?, c.output.as_deref()),
        Command::Simulate(c) => commands::simulate_cmd(&c.load()?, c.output.as_deref()),
        Command::Sweep(c) => commands::sweep_cmd(&c.load()?, c.output.as_deref()),
        Command::GraphStats { common, edge_list } => {
            commands::graph_stats_cmd(&common.load()?, common.output.as_deref(), edge_list.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cmc-sir: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
