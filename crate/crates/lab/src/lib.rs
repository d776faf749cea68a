//! Command-line front end for `loewner-core`: file formats, reports and a batch runner.

pub mod batch;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{Context, Outcome};
use crate::config::{Overrides, RunConfig, CONFIG_ENV};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "loewner-lab", version, about = "Loewner transforms and Loewner energies of planar curves")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Default, Args)]
pub struct GlobalArgs {
    /// JSON run configuration (falls back to $LOEWNER_LAB_CONFIG).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Convergence tolerance for the minimizers.
    #[arg(long, global = true, value_name = "F")]
    pub tolerance: Option<f64>,
    /// Slit maps per unit of capacity when tracing.
    #[arg(long, global = true, value_name = "N")]
    pub steps: Option<usize>,
    /// Decreasing list of ε values for loop and arc energies.
    #[arg(long, global = true, value_name = "CSVLIST", value_delimiter = ',')]
    pub eps_schedule: Option<Vec<f64>>,
    /// Sample index used as the root of a loop or arc.
    #[arg(long, global = true, value_name = "INDEX")]
    pub root: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for randomized probe points.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace the curve of a driving function (JSON or CSV with columns t,W).
    Trace { driving: PathBuf },
    /// Driving function of a chord-in-H or tangential-to-R+ curve.
    Drive { curve: PathBuf },
    /// Chordal energy of a driving function or of a chord.
    Energy { input: PathBuf },
    /// Loop energy of a closed curve rooted at --root.
    LoopEnergy { curve: PathBuf },
    /// Arc energy of an open curve rooted at --root.
    ArcEnergy { curve: PathBuf },
    /// Minimal-energy chord or loop through prescribed points.
    Minimize { problem: PathBuf },
    /// Hölder regularity of the driving function of a tangentially attached curve.
    Regularity {
        curve: PathBuf,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Write one of the analytic test curves.
    Catalog {
        name: String,
        /// Curve parameter as key=value; values accept forms like pi/8.
        #[arg(short = 'p', long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(short = 'n', long, default_value_t = 512)]
        samples: usize,
    },
    /// Run the jobs of a JSON manifest concurrently, each in its own output directory.
    Batch { manifest: PathBuf },
}

impl GlobalArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            config: self.config.clone(),
            tolerance: self.tolerance,
            steps: self.steps,
            eps_schedule: self.eps_schedule.clone(),
            seed: self.seed,
            out: self.out.clone(),
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let env_path = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
    let (config, schedule_source) = RunConfig::resolve(&cli.global.overrides(), env_path)?;
    let ctx = Context { config, schedule_source };
    let root = cli.global.root.unwrap_or(0);
    match &cli.command {
        Command::Trace { driving } => commands::trace(&ctx, driving),
        Command::Drive { curve } => commands::drive(&ctx, curve),
        Command::Energy { input } => commands::energy(&ctx, input),
        Command::LoopEnergy { curve } => commands::loop_energy_cmd(&ctx, curve, root),
        Command::ArcEnergy { curve } => commands::arc_energy_cmd(&ctx, curve, root),
        Command::Minimize { problem } => commands::minimize(&ctx, problem),
        Command::Regularity { curve, beta } => commands::regularity(&ctx, curve, *beta),
        Command::Catalog { name, params, samples } => commands::catalog_cmd(&ctx, name, params, *samples),
        Command::Batch { manifest } => batch::run_batch(&ctx, manifest),
    }
}
