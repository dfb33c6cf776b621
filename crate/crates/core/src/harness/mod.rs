//! Experiment configuration, orchestration and file output behind the CLI.

mod commands;
mod config;
mod plot;
mod trajectory_csv;

pub use commands::{
    cmd_analyze, cmd_compare, cmd_equilibrium, cmd_plot, cmd_run, window_start, AnalysisReport,
    BaselineSummary, BoundsReport, CompareReport, EquilibriumReport, MartingaleSummary, RunReport,
    SweepPoint, SweepReport,
};
pub use config::{
    AnalysisSection, BaselineSection, BoundsSection, CompareSection, ExperimentConfig, Game,
    GameConfig, InitialPoint, OutputSection, Overrides, SeekerSection, SweepSection,
};
pub use plot::plot_trajectory;
pub use trajectory_csv::{header as trajectory_header, read_trajectory, write_trajectory};

use crate::error::{Error, ErrorClass};

/// Process exit code for a failed command.
pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Input => 2,
        ErrorClass::Numerical => 3,
        ErrorClass::Infeasible => 4,
    }
}
