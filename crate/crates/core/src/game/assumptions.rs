//! Static checks of the learning-rate, local-maximizer and diagonal-dominance
//! conditions at a candidate equilibrium.

use serde::Serialize;

use crate::error::{Error, Result};

use super::model::{check_len, Expectation, GameModel};
use super::schedule::{ScheduleAdmissibility, StepSchedule};

/// Gradient tolerance used for deterministic models.
pub const DETERMINISTIC_GRADIENT_TOLERANCE: f64 = 1e-6;
/// Multiplier applied to the Monte-Carlo standard error for stochastic models.
pub const GRADIENT_SIGMA_MULTIPLIER: f64 = 3.0;

/// Central-difference step `1e-3 * max(1, |a|)`.
pub fn fd_step(a: f64) -> f64 {
    1e-3 * a.abs().max(1.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeAssumptionCheck {
    /// Estimate of `d E r_j / d a_j` at the candidate.
    pub gradient: Expectation,
    pub gradient_tolerance: f64,
    pub stationary: bool,
    /// Estimate of `d^2 E r_j / d a_j^2`.
    pub curvature: f64,
    pub concave: bool,
    /// `|H_jj| - sum_{i != j} |H_ji|`.
    pub dominance_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub schedule: ScheduleAdmissibility,
    pub candidate: Vec<f64>,
    /// `None` when no domain box was supplied.
    pub inside_domain: Option<bool>,
    /// Row `j` holds the second derivatives of `E r_j`.
    pub hessian: Vec<Vec<f64>>,
    pub nodes: Vec<NodeAssumptionCheck>,
    /// Stationary and strictly concave in own action, for every node.
    pub local_maximizer: bool,
    pub diagonally_dominant: bool,
}

fn finite(v: f64, what: impl FnOnce() -> String) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteValue(what()))
    }
}

fn shifted(a: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut out = a.to_vec();
    for &(i, d) in moves {
        out[i] += d;
    }
    out
}

/// Evaluates the schedule and local-equilibrium conditions at `candidate`.
///
/// Derivatives of the expected payoff are central finite differences taken
/// through [`GameModel::expectation`], so Monte-Carlo models difference
/// common random numbers.
pub fn validate_assumptions<M: GameModel>(
    model: &M,
    schedule: &StepSchedule,
    candidate: &[f64],
    domain: Option<&[(f64, f64)]>,
) -> Result<AssumptionReport> {
    let n = model.node_count();
    check_len("candidate", n, candidate.len())?;
    let inside_domain = match domain {
        Some(b) => {
            check_len("domain box", n, b.len())?;
            Some(
                candidate
                    .iter()
                    .zip(b)
                    .all(|(&a, &(lo, hi))| lo <= a && a <= hi),
            )
        }
        None => None,
    };

    let steps: Vec<f64> = candidate.iter().map(|&a| fd_step(a)).collect();
    let mut hessian = vec![vec![0.0; n]; n];
    let mut nodes = Vec::with_capacity(n);

    for j in 0..n {
        let h = steps[j];
        let plus = shifted(candidate, &[(j, h)]);
        let minus = shifted(candidate, &[(j, -h)]);
        let gradient = model.expectation(|s| {
            Ok((model.payoff(s, &plus, j)? - model.payoff(s, &minus, j)?) / (2.0 * h))
        })?;
        finite(gradient.mean, || format!("gradient estimate for node {j}"))?;

        let curvature = model
            .expectation(|s| {
                let c = model.payoff(s, candidate, j)?;
                Ok((model.payoff(s, &plus, j)? - 2.0 * c + model.payoff(s, &minus, j)?) / (h * h))
            })?
            .mean;
        hessian[j][j] = finite(curvature, || format!("curvature estimate for node {j}"))?;

        for i in (0..n).filter(|&i| i != j) {
            let hi = steps[i];
            let pp = shifted(candidate, &[(j, h), (i, hi)]);
            let pm = shifted(candidate, &[(j, h), (i, -hi)]);
            let mp = shifted(candidate, &[(j, -h), (i, hi)]);
            let mm = shifted(candidate, &[(j, -h), (i, -hi)]);
            let mixed = model
                .expectation(|s| {
                    Ok((model.payoff(s, &pp, j)?
                        - model.payoff(s, &pm, j)?
                        - model.payoff(s, &mp, j)?
                        + model.payoff(s, &mm, j)?)
                        / (4.0 * h * hi))
                })?
                .mean;
            hessian[j][i] = finite(mixed, || format!("mixed derivative ({j}, {i})"))?;
        }

        let gradient_tolerance = if model.is_deterministic() {
            DETERMINISTIC_GRADIENT_TOLERANCE
        } else {
            (GRADIENT_SIGMA_MULTIPLIER * gradient.std_error).max(DETERMINISTIC_GRADIENT_TOLERANCE)
        };
        let off: f64 = (0..n)
            .filter(|&i| i != j)
            .map(|i| hessian[j][i].abs())
            .sum();
        nodes.push(NodeAssumptionCheck {
            stationary: gradient.mean.abs() <= gradient_tolerance,
            gradient,
            gradient_tolerance,
            concave: curvature < 0.0,
            curvature,
            dominance_margin: curvature.abs() - off,
        });
    }

    Ok(AssumptionReport {
        schedule: schedule.admissibility(),
        candidate: candidate.to_vec(),
        inside_domain,
        local_maximizer: nodes.iter().all(|c| c.stationary && c.concave),
        diagonally_dominant: nodes.iter().all(|c| c.dominance_margin > 0.0),
        hessian,
        nodes,
    })
}
