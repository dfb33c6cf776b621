use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Learning-rate rule `lambda_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepSchedule {
    /// `lambda_k = lambda0 / (k + 1)`.
    Vanishing { lambda0: f64 },
    /// `lambda_k = lambda`.
    Constant { lambda: f64 },
}

impl StepSchedule {
    pub fn vanishing(lambda0: f64) -> Result<Self> {
        let s = StepSchedule::Vanishing { lambda0 };
        s.validate()?;
        Ok(s)
    }

    pub fn constant(lambda: f64) -> Result<Self> {
        let s = StepSchedule::Constant { lambda };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let (field, v) = match *self {
            StepSchedule::Vanishing { lambda0 } => ("schedule.lambda0", lambda0),
            StepSchedule::Constant { lambda } => ("schedule.lambda", lambda),
        };
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid(
                field,
                format!("must be finite and > 0, got {v}"),
            ))
        }
    }

    #[inline]
    pub fn rate(&self, k: usize) -> f64 {
        match *self {
            StepSchedule::Vanishing { lambda0 } => lambda0 / (k as f64 + 1.0),
            StepSchedule::Constant { lambda } => lambda,
        }
    }

    /// Scale factor of the rule (the fixed rate for a constant schedule).
    pub fn scale(&self) -> f64 {
        match *self {
            StepSchedule::Vanishing { lambda0 } => lambda0,
            StepSchedule::Constant { lambda } => lambda,
        }
    }

    /// Cumulative clock `khat(k) = sum_{k'=1..k} lambda_{k'}`, with `khat(0) = 0`.
    ///
    /// Summed term by term so that it agrees bit-for-bit with [`Clock`].
    pub fn khat(&self, k: usize) -> f64 {
        self.clock().nth(k).map(|t| t.khat).unwrap_or(0.0)
    }

    pub fn clock(&self) -> Clock {
        Clock {
            schedule: *self,
            k: 0,
            khat: 0.0,
        }
    }

    /// Sum of `lambda_k^2` for `k` in `[from, to)`.
    pub fn sum_squares(&self, from: usize, to: usize) -> f64 {
        (from..to).map(|k| self.rate(k).powi(2)).sum()
    }

    /// Upper bound on the full sum of squared rates, or `None` when it
    /// diverges (constant schedules).
    pub fn sum_squares_bound(&self) -> Option<f64> {
        match *self {
            // sum 1/(k+1)^2 = pi^2 / 6
            StepSchedule::Vanishing { lambda0 } => Some(lambda0 * lambda0 * PI * PI / 6.0),
            StepSchedule::Constant { .. } => None,
        }
    }

    pub fn admissibility(&self) -> ScheduleAdmissibility {
        match self {
            StepSchedule::Vanishing { .. } => ScheduleAdmissibility {
                positive: true,
                divergent_sum: true,
                square_summable: true,
                vanishing_regime: true,
                constant_regime: false,
            },
            StepSchedule::Constant { .. } => ScheduleAdmissibility {
                positive: true,
                divergent_sum: true,
                square_summable: false,
                vanishing_regime: false,
                constant_regime: true,
            },
        }
    }
}

/// Which learning-rate assumptions a schedule satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScheduleAdmissibility {
    pub positive: bool,
    pub divergent_sum: bool,
    pub square_summable: bool,
    /// Positive, non-summable and square-summable rates.
    pub vanishing_regime: bool,
    /// A fixed positive rate.
    pub constant_regime: bool,
}

/// One tick of the cumulative clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tick {
    pub k: usize,
    /// `lambda_k`, the rate applied in the update out of iteration `k`.
    pub lambda: f64,
    pub khat: f64,
}

/// Iterator over `(k, lambda_k, khat_k)`.
#[derive(Debug, Clone)]
pub struct Clock {
    schedule: StepSchedule,
    k: usize,
    khat: f64,
}

impl Iterator for Clock {
    type Item = Tick;

    fn next(&mut self) -> Option<Tick> {
        let tick = Tick {
            k: self.k,
            lambda: self.schedule.rate(self.k),
            khat: self.khat,
        };
        self.k += 1;
        self.khat += self.schedule.rate(self.k);
        Some(tick)
    }
}
