use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{check_len, Expectation, GameModel, PerturbationParams};
use crate::linalg;
use crate::seeker::Trajectory;

/// Split of each realized update direction into its conditional mean and a
/// martingale difference:
///
/// `z b sin(Omega khat_k + phi) r_{k+1} = f(k, a_k) + M_{k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobbinsMonroDecomposition {
    /// `f_j(k, a_k) = z_j b_j sin(Omega_j khat_k + phi_j) E_S r_j(S, a_k)`.
    pub drift: Vec<Vec<f64>>,
    /// `M_{j,k+1} = z_j b_j sin(Omega_j khat_k + phi_j) (r_{j,k+1} - E_S r_j(S, a_k))`.
    pub noise: Vec<Vec<f64>>,
    /// `xi_k = sum_{m < k} lambda_m M_{m+1}`, with `xi_0 = 0`.
    pub xi: Vec<Vec<f64>>,
}

impl RobbinsMonroDecomposition {
    pub fn len(&self) -> usize {
        self.drift.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drift.is_empty()
    }

    /// `delta_{t, t+k} = xi_{t+k} - xi_t`.
    pub fn delta(&self, t: usize, k: usize) -> Result<Vec<f64>> {
        let end = t + k;
        if end >= self.xi.len() {
            return Err(Error::invalid(
                "delta",
                format!(
                    "index {end} beyond {} cumulative-noise values",
                    self.xi.len()
                ),
            ));
        }
        Ok(self.xi[end]
            .iter()
            .zip(&self.xi[t])
            .map(|(a, b)| a - b)
            .collect())
    }

    /// `sup_{0 <= k <= len} ||delta_{t, t+k}||`, truncated at the end of the
    /// record.
    pub fn sup_delta(&self, t: usize, len: usize) -> f64 {
        let end = (t + len).min(self.xi.len().saturating_sub(1));
        (t..=end)
            .map(|m| linalg::distance(&self.xi[m], &self.xi[t]))
            .fold(0.0, f64::max)
    }
}

fn expected_along<M: GameModel + Sync>(model: &M, traj: &Trajectory) -> Result<Vec<Vec<f64>>> {
    traj.records
        .par_iter()
        .map(|r| model.expected_payoffs(&r.a))
        .collect()
}

pub fn decompose<M: GameModel + Sync>(
    traj: &Trajectory,
    model: &M,
    p: &PerturbationParams,
) -> Result<RobbinsMonroDecomposition> {
    if traj.is_empty() {
        return Err(Error::invalid("trajectory", "must not be empty"));
    }
    let n = traj.node_count();
    check_len("perturbation", n, p.len())?;
    check_len("model nodes", n, model.node_count())?;
    let expected = expected_along(model, traj)?;
    let mut drift = Vec::with_capacity(traj.len());
    let mut noise = Vec::with_capacity(traj.len());
    for (rec, mean) in traj.records.iter().zip(&expected) {
        let weight: Vec<f64> = (0..n)
            .map(|j| {
                let d = p.node(j);
                d.growth * d.amplitude * d.sine(rec.khat)
            })
            .collect();
        drift.push(
            weight
                .iter()
                .zip(mean)
                .map(|(w, m)| w * m)
                .collect::<Vec<_>>(),
        );
        noise.push(
            (0..n)
                .map(|j| weight[j] * (rec.payoff[j] - mean[j]))
                .collect::<Vec<_>>(),
        );
    }
    let mut xi = Vec::with_capacity(traj.len());
    let mut acc = vec![0.0; n];
    xi.push(acc.clone());
    for (rec, m) in traj.records.iter().zip(&noise).take(traj.horizon()) {
        for (a, v) in acc.iter_mut().zip(m) {
            *a += rec.lambda * v;
        }
        xi.push(acc.clone());
    }
    Ok(RobbinsMonroDecomposition { drift, noise, xi })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingaleReport {
    /// Sample mean of `M_{j,k+1}` with its standard error, per node.
    pub mean: Vec<Expectation>,
    /// `|mean| <= 3 SE` for every node.
    pub mean_zero: bool,
    /// `||M_{k+1}||^2 / (1 + ||a_k||^2)` per iteration.
    pub ratio: Vec<f64>,
    /// `max` of `ratio`.
    pub c_hat: f64,
}

/// Reconstructs the noise sequence along a trajectory and summarizes its
/// mean and conditional second moment.
pub fn martingale_diagnostics<M: GameModel + Sync>(
    traj: &Trajectory,
    model: &M,
    p: &PerturbationParams,
) -> Result<MartingaleReport> {
    let d = decompose(traj, model, p)?;
    let n = traj.node_count();
    let mean: Vec<Expectation> = (0..n)
        .map(|j| Expectation::from_values(d.noise.iter().map(|m| m[j])))
        .collect();
    let ratio: Vec<f64> = d
        .noise
        .iter()
        .zip(&traj.records)
        .map(|(m, r)| {
            let a = linalg::norm(&r.a);
            linalg::norm(m).powi(2) / (1.0 + a * a)
        })
        .collect();
    Ok(MartingaleReport {
        mean_zero: mean.iter().all(|e| e.mean.abs() <= 3.0 * e.std_error),
        c_hat: ratio.iter().copied().fold(0.0, f64::max),
        mean,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{NodeDither, QuadraticGame, StepSchedule};
    use crate::seeker::{run, SeekerConfig};

    fn cfg(noise_seed: u64, horizon: usize) -> SeekerConfig {
        SeekerConfig {
            perturbation: PerturbationParams::new(vec![NodeDither {
                amplitude: 0.2,
                frequency: 1.0,
                phase: 0.0,
                growth: 1.0,
            }])
            .unwrap(),
            schedule: StepSchedule::constant(0.05).unwrap(),
            horizon,
            initial: vec![0.0],
            seed: noise_seed,
            clamp_nonnegative: false,
        }
    }

    #[test]
    fn reconstruction_is_exact() {
        let g = QuadraticGame::single_peak(1.0, 0.5).unwrap();
        let c = cfg(3, 500);
        let t = run(&g, &c).unwrap();
        let d = decompose(&t, &g, &c.perturbation).unwrap();
        let node = c.perturbation.node(0);
        for (k, rec) in t.records.iter().enumerate() {
            let realized = node.growth * node.amplitude * node.sine(rec.khat) * rec.payoff[0];
            assert!(
                (d.drift[k][0] + d.noise[k][0] - realized).abs() <= 1e-12 * realized.abs().max(1.0)
            );
        }
        assert_eq!(d.xi.len(), t.len());
        assert_eq!(d.xi[0], vec![0.0]);
        let delta = d.delta(10, 5).unwrap()[0];
        let direct: f64 = (10..15).map(|m| t.records[m].lambda * d.noise[m][0]).sum();
        assert!((delta - direct).abs() < 1e-12);
        assert!(d.delta(490, 20).is_err());
    }

    #[test]
    fn deterministic_model_has_no_noise() {
        let g = QuadraticGame::single_peak(1.0, 0.0).unwrap();
        let c = cfg(3, 200);
        let t = run(&g, &c).unwrap();
        let r = martingale_diagnostics(&t, &g, &c.perturbation).unwrap();
        assert_eq!(r.c_hat, 0.0);
        assert!(r.mean_zero);
        assert_eq!(r.mean[0].mean, 0.0);
    }

    #[test]
    fn noisy_model_passes_mean_zero() {
        let g = QuadraticGame::single_peak(1.0, 1.0).unwrap();
        let c = cfg(11, 20_000);
        let t = run(&g, &c).unwrap();
        let r = martingale_diagnostics(&t, &g, &c.perturbation).unwrap();
        assert!(r.mean_zero, "{:?}", r.mean);
        assert!(r.c_hat.is_finite() && r.c_hat > 0.0);
    }
}
