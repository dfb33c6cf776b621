//! Domain types shared by the learner, the limiting ODE and the analysis
//! tools.

mod assumptions;
mod model;
mod perturbation;
mod quadratic;
mod schedule;

pub use assumptions::{
    fd_step, validate_assumptions, AssumptionReport, NodeAssumptionCheck,
    DETERMINISTIC_GRADIENT_TOLERANCE, GRADIENT_SIGMA_MULTIPLIER,
};
pub(crate) use model::check_len;
pub use model::{
    rng_from_seed, ActionProfile, Expectation, GameModel, GradientOracle, SampleSet, SimRng,
};
pub use perturbation::{
    frequency_violations, perturbation_signal, validate_frequencies, NodeDither,
    PerturbationParams, FREQUENCY_TOLERANCE,
};
pub use quadratic::QuadraticGame;
pub use schedule::{Clock, ScheduleAdmissibility, StepSchedule, Tick};
