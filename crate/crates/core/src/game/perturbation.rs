//! Sinusoidal dither applied on top of each node's intermediary action.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, FrequencyViolation, FrequencyViolations, Result};

/// Relative tolerance used when comparing dither frequencies.
pub const FREQUENCY_TOLERANCE: f64 = 1e-9;

/// Dither settings for a single node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeDither {
    /// Amplitude `b_j`, in action units.
    pub amplitude: f64,
    /// Angular frequency `Omega_j`, per unit of cumulative clock.
    pub frequency: f64,
    /// Phase `phi_j` in `[0, 2pi]`.
    pub phase: f64,
    /// Growth rate `z_j` scaling the update.
    pub growth: f64,
}

impl NodeDither {
    #[inline]
    pub fn sine(&self, khat: f64) -> f64 {
        (self.frequency * khat + self.phase).sin()
    }

    #[inline]
    pub fn signal(&self, khat: f64) -> f64 {
        self.amplitude * self.sine(khat)
    }
}

/// Validated per-node dither parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationParams {
    nodes: Vec<NodeDither>,
}

impl PerturbationParams {
    pub fn new(nodes: Vec<NodeDither>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::invalid(
                "perturbation",
                "at least one node is required",
            ));
        }
        for (j, n) in nodes.iter().enumerate() {
            if !(n.amplitude.is_finite() && n.amplitude > 0.0) {
                return Err(Error::invalid(
                    format!("amplitude[{j}]"),
                    format!("must be finite and > 0, got {}", n.amplitude),
                ));
            }
            if !(n.growth.is_finite() && n.growth >= 0.0) {
                return Err(Error::invalid(
                    format!("growth[{j}]"),
                    format!("must be finite and >= 0, got {}", n.growth),
                ));
            }
            if !(0.0..=TAU).contains(&n.phase) {
                return Err(Error::invalid(
                    format!("phase[{j}]"),
                    format!("must lie in [0, 2pi], got {}", n.phase),
                ));
            }
        }
        let omegas: Vec<f64> = nodes.iter().map(|n| n.frequency).collect();
        validate_frequencies(&omegas)?;
        Ok(Self { nodes })
    }

    /// Builds parameters from parallel per-node arrays.
    pub fn from_arrays(
        amplitude: &[f64],
        frequency: &[f64],
        phase: &[f64],
        growth: &[f64],
    ) -> Result<Self> {
        let n = amplitude.len();
        for (what, len) in [
            ("frequency", frequency.len()),
            ("phase", phase.len()),
            ("growth", growth.len()),
        ] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    got: len,
                });
            }
        }
        let nodes = (0..n)
            .map(|j| NodeDither {
                amplitude: amplitude[j],
                frequency: frequency[j],
                phase: phase[j],
                growth: growth[j],
            })
            .collect();
        Self::new(nodes)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeDither] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> &NodeDither {
        &self.nodes[j]
    }

    /// `b_j sin(Omega_j khat + phi_j)`.
    #[inline]
    pub fn signal(&self, j: usize, khat: f64) -> f64 {
        self.nodes[j].signal(khat)
    }

    pub fn max_amplitude(&self) -> f64 {
        self.nodes.iter().map(|n| n.amplitude).fold(0.0, f64::max)
    }

    /// Longest dither period in clock units, `2pi / min Omega`.
    pub fn longest_period(&self) -> f64 {
        let min = self
            .nodes
            .iter()
            .map(|n| n.frequency)
            .fold(f64::INFINITY, f64::min);
        TAU / min
    }

    /// Returns a copy with every growth rate set to zero.
    pub fn frozen(&self) -> Self {
        let nodes = self
            .nodes
            .iter()
            .map(|n| NodeDither { growth: 0.0, ..*n })
            .collect();
        Self { nodes }
    }
}

/// Free-standing form of the dither signal.
pub fn perturbation_signal(j: usize, khat: f64, params: &PerturbationParams) -> f64 {
    params.signal(j, khat)
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= FREQUENCY_TOLERANCE * x.abs().max(y.abs())
}

/// Checks that dither frequencies are positive, pairwise distinct, and that
/// no sum of two of them (a frequency with itself included) hits a third.
pub fn validate_frequencies(omegas: &[f64]) -> Result<()> {
    for (j, &w) in omegas.iter().enumerate() {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::invalid(
                format!("frequency[{j}]"),
                format!("must be finite and > 0, got {w}"),
            ));
        }
    }
    let report = frequency_violations(omegas);
    if report.0.is_empty() {
        Ok(())
    } else {
        Err(Error::Frequencies(report))
    }
}

/// Lists every violated relation. Sum triples are reported with `i <= j`.
pub fn frequency_violations(omegas: &[f64]) -> FrequencyViolations {
    let n = omegas.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if close(omegas[i], omegas[j]) {
                out.push(FrequencyViolation::Equal(i, j));
            }
        }
    }
    for i in 0..n {
        for j in i..n {
            let sum = omegas[i] + omegas[j];
            for (k, &w) in omegas.iter().enumerate() {
                if close(sum, w) {
                    out.push(FrequencyViolation::Sum(i, j, k));
                }
            }
        }
    }
    FrequencyViolations(out)
}
