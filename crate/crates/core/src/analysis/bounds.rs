use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::StepSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConstants {
    /// Lipschitz constant `L` of the expected payoff.
    pub lipschitz: f64,
    /// Almost-sure bound `C0` on the action norm.
    pub action_bound: f64,
    /// Window length `T`.
    pub window: f64,
    /// `||r(0)||`, norm of the expected payoff vector at the zero action.
    pub payoff_at_origin: f64,
}

impl BoundConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lipschitz", self.lipschitz),
            ("action_bound", self.action_bound),
            ("window", self.window),
            ("payoff_at_origin", self.payoff_at_origin),
        ] {
            nonnegative(name, v)?;
        }
        Ok(())
    }

    /// `C_T = ||r(0)|| + L (C0 + ||r(0)|| T) e^{LT}`.
    pub fn c_t(&self) -> f64 {
        c_t(
            self.payoff_at_origin,
            self.lipschitz,
            self.action_bound,
            self.window,
        )
    }

    /// `e^{LT}`.
    pub fn growth(&self) -> f64 {
        (self.lipschitz * self.window).exp()
    }
}

pub fn c_t(payoff_at_origin: f64, lipschitz: f64, action_bound: f64, window: f64) -> f64 {
    payoff_at_origin
        + lipschitz * (action_bound + payoff_at_origin * window) * (lipschitz * window).exp()
}

fn nonnegative(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and >= 0, got {v}"),
        ))
    }
}

/// Step-size and noise ingredients of a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseTail {
    /// Sum of squared rates over the tail.
    pub sum_squares: f64,
    /// Rate at the window's right edge.
    pub edge_rate: f64,
    /// Supremum of the noise-increment norms over the window.
    pub sup_delta: f64,
}

impl NoiseTail {
    /// Rates `lambda_start ..= lambda_end` of a schedule.
    pub fn window(
        schedule: &StepSchedule,
        start: usize,
        end: usize,
        sup_delta: f64,
    ) -> Result<Self> {
        if end < start {
            return Err(Error::invalid(
                "window",
                format!("end {end} precedes start {start}"),
            ));
        }
        Ok(Self {
            sum_squares: schedule.sum_squares(start, end + 1),
            edge_rate: schedule.rate(end),
            sup_delta,
        })
    }

    /// From an explicit, finite slice of rates and increment norms.
    pub fn from_rates(rates: &[f64], delta_norms: &[f64]) -> Result<Self> {
        let edge_rate = *rates
            .last()
            .ok_or_else(|| Error::invalid("rates", "at least one rate is required"))?;
        Ok(Self {
            sum_squares: rates.iter().map(|r| r * r).sum(),
            edge_rate,
            sup_delta: delta_norms.iter().copied().fold(0.0, f64::max),
        })
    }

    fn validate(&self) -> Result<()> {
        if self.sum_squares.is_infinite() {
            return Err(Error::DivergentTail);
        }
        nonnegative("sum_squares", self.sum_squares)?;
        nonnegative("edge_rate", self.edge_rate)?;
        nonnegative("sup_delta", self.sup_delta)?;
        Ok(())
    }
}

/// `sum_{k >= start} lambda_k^2` over the infinite tail.
pub fn infinite_tail_sum_squares(schedule: &StepSchedule, start: usize) -> Result<f64> {
    match *schedule {
        StepSchedule::Constant { .. } => Err(Error::DivergentTail),
        StepSchedule::Vanishing { lambda0 } => {
            // sum_{m > start} 1/m^2 by direct summation up to a cutoff and
            // an Euler-Maclaurin remainder beyond it
            let cutoff = start + 100_000;
            let head: f64 = (start + 1..=cutoff)
                .rev()
                .map(|m| 1.0 / (m as f64).powi(2))
                .sum();
            let n = cutoff as f64;
            let rest = 1.0 / n - 1.0 / (2.0 * n * n) + 1.0 / (6.0 * n * n * n);
            Ok(lambda0 * lambda0 * (head + rest))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackingBound {
    pub c_t: f64,
    /// `K = C_T L sum lambda^2 + sup ||delta||`.
    pub k: f64,
    pub growth: f64,
    pub edge_term: f64,
    /// `K e^{LT} + C_T lambda_edge`.
    pub bound: f64,
}

pub fn tracking_bound(constants: &BoundConstants, tail: &NoiseTail) -> Result<TrackingBound> {
    constants.validate()?;
    tail.validate()?;
    let c_t = constants.c_t();
    let k = c_t * constants.lipschitz * tail.sum_squares + tail.sup_delta;
    let growth = constants.growth();
    let edge_term = c_t * tail.edge_rate;
    let bound = k * growth + edge_term;
    if !bound.is_finite() {
        return Err(Error::NonFiniteValue("tracking bound".into()));
    }
    Ok(TrackingBound {
        c_t,
        k,
        growth,
        edge_term,
        bound,
    })
}

/// Ingredients of the exponential-stability term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityTerm {
    /// `Mbar`.
    pub amplitude: f64,
    /// `mbar`.
    pub decay: f64,
    pub delta0: f64,
    pub eps: f64,
    /// `max_j b_j`.
    pub max_amplitude: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NashGapBound {
    pub y1: f64,
    /// The `eps + max b^3` part of `y1`, with unit constant.
    pub y1_residual: f64,
    pub y2: f64,
    pub total: f64,
}

/// `y1 = Mbar e^{-mbar t} Delta0 + (eps + max b^3)` and
/// `y2 = C_T (lambda_edge + L sum lambda^2) + sup ||delta||`.
pub fn nash_gap_bound(
    stability: &StabilityTerm,
    constants: &BoundConstants,
    tail: &NoiseTail,
) -> Result<NashGapBound> {
    if !(stability.decay.is_finite() && stability.decay > 0.0) {
        return Err(Error::invalid(
            "decay",
            format!("must be > 0, got {}", stability.decay),
        ));
    }
    for (name, v) in [
        ("amplitude", stability.amplitude),
        ("delta0", stability.delta0),
        ("eps", stability.eps),
        ("max_amplitude", stability.max_amplitude),
        ("t", stability.t),
    ] {
        nonnegative(name, v)?;
    }
    constants.validate()?;
    tail.validate()?;
    let y1_residual = stability.eps + stability.max_amplitude.powi(3);
    let y1 = stability.amplitude * (-stability.decay * stability.t).exp() * stability.delta0
        + y1_residual;
    let y2 = constants.c_t() * (tail.edge_rate + constants.lipschitz * tail.sum_squares)
        + tail.sup_delta;
    Ok(NashGapBound {
        y1,
        y1_residual,
        y2,
        total: y1 + y2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceTime {
    pub time: f64,
    /// `Delta0 Mbar <= eps`: the start is already within precision.
    pub already_within: bool,
}

/// `T = ln(Delta0 Mbar / eps) / mbar`, or zero when `Delta0 Mbar <= eps`.
pub fn convergence_time(
    delta0: f64,
    amplitude: f64,
    decay: f64,
    eps: f64,
) -> Result<ConvergenceTime> {
    for (name, v) in [
        ("delta0", delta0),
        ("amplitude", amplitude),
        ("decay", decay),
        ("eps", eps),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid(
                name,
                format!("must be finite and > 0, got {v}"),
            ));
        }
    }
    let ratio = delta0 * amplitude / eps;
    if ratio <= 1.0 {
        return Ok(ConvergenceTime {
            time: 0.0,
            already_within: true,
        });
    }
    Ok(ConvergenceTime {
        time: ratio.ln() / decay,
        already_within: false,
    })
}

/// Closeness reached after the convergence time: `2 eps + max b^3`.
pub fn convergence_precision(eps: f64, max_amplitude: f64) -> f64 {
    2.0 * eps + max_amplitude.powi(3)
}
