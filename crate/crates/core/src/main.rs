use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nash_seek::harness::{
    cmd_analyze, cmd_compare, cmd_equilibrium, cmd_plot, cmd_run, exit_code, ExperimentConfig,
    Overrides,
};
use nash_seek::{Error, Result};

#[derive(Parser)]
#[command(
    name = "nash-seek",
    version,
    about = "Sinusoidal extremum-seeking experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment file (TOML, or JSON with a .json extension).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Learning rate (the constant rate, or lambda0 for a vanishing schedule).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        cfg.apply(&Overrides {
            seed: self.seed,
            out: self.out.clone(),
            lambda: self.lambda,
            horizon: self.horizon,
        })?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the learner and write the trajectory with a summary.
    Run(Common),
    /// Compare the learner against its limiting ODE on a window.
    Compare(Common),
    /// Solve for the equilibrium of the wireless game.
    Equilibrium(Common),
    /// Bounds and diagnostics for a saved trajectory.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        trajectory: PathBuf,
    },
    /// Render power and payoff plots from a trajectory file.
    Plot {
        #[arg(long, value_name = "PATH")]
        trajectory: PathBuf,
        /// Config used to draw the reference equilibrium.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Print the two-pair power-control reference config.
    Template {
        #[arg(long)]
        json: bool,
    },
}

fn execute(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Run(c) => Ok(cmd_run(&c.load()?)?.summary()),
        Command::Compare(c) => Ok(cmd_compare(&c.load()?)?.summary()),
        Command::Equilibrium(c) => Ok(cmd_equilibrium(&c.load()?)?.summary()),
        Command::Analyze { common, trajectory } => {
            Ok(cmd_analyze(&common.load()?, &trajectory)?.summary())
        }
        Command::Plot {
            trajectory,
            config,
            out,
        } => {
            let reference = match config {
                Some(p) => ExperimentConfig::load(&p)?.game.equilibrium().ok(),
                None => None,
            };
            let files = cmd_plot(&trajectory, &out, reference.as_deref())?;
            Ok(files
                .iter()
                .map(|f| format!("wrote {}\n", f.display()))
                .collect())
        }
        Command::Template { json } => {
            let cfg = ExperimentConfig::wireless_reference();
            if json {
                serde_json::to_string_pretty(&cfg)
                    .map(|s| s + "\n")
                    .map_err(|e| Error::Malformed(e.to_string()))
            } else {
                cfg.to_toml()
            }
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
