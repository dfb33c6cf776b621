use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::ode::ContinuousPath;
use crate::stats::{self, linear_regression};

const SMOOTHING: usize = 5;
const MIN_FIT_POINTS: usize = 3;

/// Exponential envelope `Delta_t ~ Mbar e^{-mbar t} Delta0 + floor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeFit {
    /// `Mbar`.
    pub amplitude: f64,
    /// `mbar`.
    pub decay: f64,
    /// Mean gap over the final 10% of the samples.
    pub floor: f64,
    pub delta0: f64,
    /// Number of leading samples used by the fit.
    pub fit_points: usize,
    pub r_squared: f64,
}

/// `||path(t) - a_star||` at each time.
pub fn gap_series<P: ContinuousPath + ?Sized>(
    path: &P,
    a_star: &[f64],
    times: &[f64],
) -> Result<Vec<f64>> {
    times
        .iter()
        .map(|&t| path.eval(t).map(|v| linalg::distance(&v, a_star)))
        .collect()
}

fn moving_average(v: &[f64], width: usize) -> Vec<f64> {
    v.windows(width)
        .map(|w| w.iter().sum::<f64>() / width as f64)
        .collect()
}

/// Fits the decaying part of a gap series.
///
/// The floor is the mean of the last 10% of the gaps. The fit uses the
/// longest prefix on which a 5-point moving average is strictly decreasing
/// and the excess over the floor still exceeds the floor, and regresses
/// `ln(Delta_t - floor)` on `t - t_0`.
pub fn fit_stability_envelope(times: &[f64], gaps: &[f64]) -> Result<EnvelopeFit> {
    if times.len() != gaps.len() {
        return Err(Error::DimensionMismatch {
            what: "gaps",
            expected: times.len(),
            got: gaps.len(),
        });
    }
    if gaps.len() < SMOOTHING + MIN_FIT_POINTS {
        return Err(Error::FitRejected(format!(
            "need at least {} samples, got {}",
            SMOOTHING + MIN_FIT_POINTS,
            gaps.len()
        )));
    }
    if gaps.iter().chain(times).any(|v| !v.is_finite()) {
        return Err(Error::FitRejected("non-finite sample".into()));
    }
    let tail = (gaps.len() / 10).max(1);
    let floor = stats::mean(&gaps[gaps.len() - tail..]);
    let delta0 = gaps[0];
    let floor_min = 1e-12 * delta0.abs().max(f64::MIN_POSITIVE);

    let smooth = moving_average(gaps, SMOOTHING);
    let mut decreasing = 1 + smooth.windows(2).take_while(|w| w[1] < w[0]).count();
    // a moving-average index covers samples up to index + SMOOTHING - 1
    decreasing += SMOOTHING - 1;
    let prefix = gaps
        .iter()
        .take(decreasing)
        .take_while(|&&g| g - floor > floor.max(floor_min))
        .count();
    if prefix < MIN_FIT_POINTS {
        return Err(Error::FitRejected(format!(
            "no decaying segment (only {prefix} leading samples above the floor)"
        )));
    }
    let t0 = times[0];
    let x: Vec<f64> = times[..prefix].iter().map(|t| t - t0).collect();
    let y: Vec<f64> = gaps[..prefix]
        .iter()
        .map(|g| (g - floor).max(floor_min).ln())
        .collect();
    let fit = linear_regression(&x, &y)
        .ok_or_else(|| Error::FitRejected("degenerate time samples".into()))?;
    if fit.slope >= 0.0 {
        return Err(Error::FitRejected(format!(
            "gap is not decaying (slope {})",
            fit.slope
        )));
    }
    Ok(EnvelopeFit {
        amplitude: fit.intercept.exp() / delta0,
        decay: -fit.slope,
        floor,
        delta0,
        fit_points: prefix,
        r_squared: fit.r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn synthetic(amp: f64, rate: f64, floor: f64, end: f64, count: usize) -> (Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (0..count)
            .map(|i| end * i as f64 / (count - 1) as f64)
            .collect();
        let g = t.iter().map(|t| amp * (-rate * t).exp() + floor).collect();
        (t, g)
    }

    #[test]
    fn recovers_synthetic_envelope() {
        let (t, g) = synthetic(5.0, 0.3, 0.1, 50.0, 501);
        let f = fit_stability_envelope(&t, &g).unwrap();
        assert!((f.decay - 0.3).abs() < 0.02, "{f:?}");
        assert!((f.floor - 0.1).abs() < 1e-3);
        assert!((f.amplitude * f.delta0 - 5.0).abs() < 0.1);
    }

    #[test]
    fn constant_gap_is_rejected() {
        let t: Vec<f64> = (0..100).map(f64::from).collect();
        let g = vec![2.0; 100];
        assert!(matches!(
            fit_stability_envelope(&t, &g),
            Err(Error::FitRejected(_))
        ));
    }

    #[test]
    fn growing_gap_is_rejected() {
        let t: Vec<f64> = (0..100).map(f64::from).collect();
        let g: Vec<f64> = t.iter().map(|t| 1.0 + 0.1 * t).collect();
        assert!(fit_stability_envelope(&t, &g).is_err());
    }

    proptest! {
        #[test]
        fn recovers_parameters_within_ten_percent(
            amp in 0.5f64..20.0, rate in 0.05f64..2.0, floor_frac in 0.0f64..0.1,
        ) {
            let delta0 = amp / (1.0 - floor_frac);
            let floor = floor_frac * delta0;
            let end = 25.0 / rate;
            let (t, g) = synthetic(amp, rate, floor, end, 1001);
            let f = fit_stability_envelope(&t, &g).unwrap();
            prop_assert!((f.decay - rate).abs() <= 0.1 * rate, "{:?}", f);
            let true_amplitude = amp / g[0];
            prop_assert!((f.amplitude - true_amplitude).abs() <= 0.1 * true_amplitude, "{:?}", f);
        }
    }
}
