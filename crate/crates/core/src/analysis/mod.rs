//! Error bounds, constant estimation and diagnostics for learner runs.

mod bounds;
mod decomposition;
mod envelope;
mod lipschitz;
mod nash;

pub use bounds::{
    c_t, convergence_precision, convergence_time, infinite_tail_sum_squares, nash_gap_bound,
    tracking_bound, BoundConstants, ConvergenceTime, NashGapBound, NoiseTail, StabilityTerm,
    TrackingBound,
};
pub use decomposition::{
    decompose, martingale_diagnostics, MartingaleReport, RobbinsMonroDecomposition,
};
pub use envelope::{fit_stability_envelope, gap_series, EnvelopeFit};
pub use lipschitz::{lipschitz_estimate, LipschitzEstimate};
pub use nash::{epsilon_close_check, epsilon_nash_check, probe_grid, NashCheck};
