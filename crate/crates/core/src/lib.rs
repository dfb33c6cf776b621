//! Distributed Nash-equilibrium seeking with sinusoidal extremum seeking.
//!
//! Each node adds a sinusoidal dither to an intermediary action, observes
//! only a realization of its own state-dependent payoff, and moves the
//! intermediary value along the dither-weighted payoff. The crate provides
//! the discrete learner ([`seeker`]), its limiting non-autonomous ODE and gap
//! metrics ([`ode`]), error-bound calculators and diagnostics
//! ([`analysis`]), an interference-channel power-control game
//! ([`wireless`]) and the experiment harness behind the `nash-seek` CLI
//! ([`harness`]).

pub mod analysis;
pub mod error;
pub mod game;
pub mod harness;
pub mod linalg;
pub mod ode;
pub mod seeker;
pub mod stats;
pub mod wireless;

pub use error::{Error, ErrorClass, Result};
