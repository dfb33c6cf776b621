//! The discrete-time learner.
//!
//! At iteration `k` every node plays `a_{j,k} = hat_a_{j,k} + b_j sin(Omega_j khat_k + phi_j)`,
//! the environment draws one state shared by all nodes, each node observes
//! its own realized payoff `r_{j,k+1}`, and then
//!
//! `hat_a_{j,k+1} = hat_a_{j,k} + lambda_k z_j b_j sin(Omega_j khat_k + phi_j) r_{j,k+1}`.
//!
//! The same clock value `khat_k` is used in the action and in the update so
//! that the dither multiplying the payoff is the one embedded in the action.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{
    check_len, rng_from_seed, ActionProfile, GameModel, GradientOracle, PerturbationParams,
    StepSchedule,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SeekerConfig {
    pub perturbation: PerturbationParams,
    pub schedule: StepSchedule,
    /// Number of updates; the trajectory holds `horizon + 1` records.
    pub horizon: usize,
    pub initial: Vec<f64>,
    pub seed: u64,
    pub clamp_nonnegative: bool,
}

impl SeekerConfig {
    pub fn validate(&self) -> Result<()> {
        check_len("initial", self.perturbation.len(), self.initial.len())?;
        if let Some(j) = self.initial.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("initial[{j}]"), "must be finite"));
        }
        self.schedule.validate()
    }
}

/// One iteration of the learner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub k: usize,
    pub khat: f64,
    pub hat_a: Vec<f64>,
    pub a: Vec<f64>,
    /// Realized payoffs observed after playing `a` (`r_{j,k+1}`).
    pub payoff: Vec<f64>,
    /// Rate `lambda_k` applied to move from this record to the next.
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub records: Vec<Record>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.records.first().map_or(0, |r| r.hat_a.len())
    }

    pub fn horizon(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    /// Mean of `hat_a` over records `start..`.
    pub fn mean_hat_a_from(&self, start: usize) -> Vec<f64> {
        let n = self.node_count();
        let tail = &self.records[start.min(self.records.len())..];
        let mut acc = vec![0.0; n];
        for r in tail {
            for (s, v) in acc.iter_mut().zip(&r.hat_a) {
                *s += v;
            }
        }
        let count = tail.len().max(1) as f64;
        acc.into_iter().map(|s| s / count).collect()
    }

    /// Start index of the averaging window for a nominal width of `width`
    /// records, shrunk so that the window spans a whole number of dither
    /// periods of length `period` (in clock units) when it covers at least
    /// one.
    pub fn window_start(&self, width: usize, period: Option<f64>) -> usize {
        let last = self.records.len().saturating_sub(1);
        let width = width.clamp(1, self.records.len().max(1));
        let nominal = last + 1 - width;
        let Some(period) = period.filter(|p| p.is_finite() && *p > 0.0) else {
            return nominal;
        };
        let end = self.records[last].khat;
        let span = end - self.records[nominal].khat;
        let whole = (span / period).floor();
        if whole < 1.0 {
            return nominal;
        }
        let target = end - whole * period;
        // first record at or after the aligned start
        let offset = self.records[nominal..].partition_point(|r| r.khat < target);
        nominal + offset
    }
}

/// One synchronous update of every node's intermediary value.
///
/// `iteration` only labels diagnostics.
pub fn step(
    iteration: usize,
    hat_a: &[f64],
    khat: f64,
    lambda: f64,
    payoffs: &[f64],
    params: &PerturbationParams,
) -> Result<Vec<f64>> {
    check_len("payoffs", hat_a.len(), payoffs.len())?;
    hat_a
        .iter()
        .zip(payoffs)
        .enumerate()
        .map(|(j, (&h, &r))| {
            if !r.is_finite() {
                return Err(Error::NonFinite {
                    quantity: "payoff",
                    node: j,
                    iteration,
                });
            }
            let node = params.node(j);
            let next = h + lambda * node.growth * node.amplitude * node.sine(khat) * r;
            if next.is_finite() {
                Ok(next)
            } else {
                Err(Error::NonFinite {
                    quantity: "intermediary action",
                    node: j,
                    iteration,
                })
            }
        })
        .collect()
}

/// Runs the learner for `cfg.horizon` updates.
pub fn run<M: GameModel>(model: &M, cfg: &SeekerConfig) -> Result<Trajectory> {
    cfg.validate()?;
    check_len("perturbation", model.node_count(), cfg.perturbation.len())?;
    let mut rng = rng_from_seed(cfg.seed);
    let mut hat_a = cfg.initial.clone();
    let mut records = Vec::with_capacity(cfg.horizon + 1);

    for tick in cfg.schedule.clock().take(cfg.horizon + 1) {
        let profile =
            ActionProfile::perturbed(&hat_a, tick.khat, &cfg.perturbation, cfg.clamp_nonnegative);
        let state = model.sample_state(&mut rng);
        let payoff = model.payoffs(&state, &profile.a)?;
        if let Some(j) = payoff.iter().position(|r| !r.is_finite()) {
            return Err(Error::NonFinite {
                quantity: "payoff",
                node: j,
                iteration: tick.k,
            });
        }
        let next = if tick.k < cfg.horizon {
            Some(step(
                tick.k,
                &hat_a,
                tick.khat,
                tick.lambda,
                &payoff,
                &cfg.perturbation,
            )?)
        } else {
            None
        };
        records.push(Record {
            k: tick.k,
            khat: tick.khat,
            hat_a: profile.hat_a,
            a: profile.a,
            payoff,
            lambda: tick.lambda,
        });
        if let Some(next) = next {
            hat_a = next;
        }
    }
    Ok(Trajectory { records })
}

/// Projected stochastic gradient ascent with oracle access to each node's own
/// payoff derivative: `a_{j,k+1} = proj_[0, a_max_j](a_{j,k} + lambda_k d r_j(S_k, a_k) / d a_j)`.
///
/// Records carry `hat_a == a` since no dither is involved.
pub fn baseline_gradient_ascent<M: GradientOracle>(
    model: &M,
    schedule: &StepSchedule,
    upper: &[f64],
    initial: &[f64],
    horizon: usize,
    seed: u64,
) -> Result<Trajectory> {
    let n = model.node_count();
    check_len("upper bounds", n, upper.len())?;
    check_len("initial", n, initial.len())?;
    schedule.validate()?;
    if let Some(j) = upper.iter().position(|u| !(u.is_finite() && *u >= 0.0)) {
        return Err(Error::invalid(
            format!("upper[{j}]"),
            "must be finite and >= 0",
        ));
    }
    let project = |j: usize, v: f64| v.clamp(0.0, upper[j]);
    let mut rng = rng_from_seed(seed);
    let mut a: Vec<f64> = initial
        .iter()
        .enumerate()
        .map(|(j, &v)| project(j, v))
        .collect();
    let mut records = Vec::with_capacity(horizon + 1);
    for tick in schedule.clock().take(horizon + 1) {
        let state = model.sample_state(&mut rng);
        let payoff = model.payoffs(&state, &a)?;
        let next = if tick.k < horizon {
            let mut next = Vec::with_capacity(n);
            for j in 0..n {
                let g = model.own_gradient(&state, &a, j)?;
                if !g.is_finite() {
                    return Err(Error::NonFinite {
                        quantity: "gradient",
                        node: j,
                        iteration: tick.k,
                    });
                }
                next.push(project(j, a[j] + tick.lambda * g));
            }
            Some(next)
        } else {
            None
        };
        records.push(Record {
            k: tick.k,
            khat: tick.khat,
            hat_a: a.clone(),
            a: a.clone(),
            payoff,
            lambda: tick.lambda,
        });
        if let Some(next) = next {
            a = next;
        }
    }
    Ok(Trajectory { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::QuadraticGame;

    fn dither(b: f64, w: f64, phi: f64, z: f64) -> PerturbationParams {
        PerturbationParams::from_arrays(&[b], &[w], &[phi], &[z]).unwrap()
    }

    #[test]
    fn step_examples() {
        let p = dither(0.9, 0.9, 0.0, 0.9);
        let next = step(0, &[1.0], 1.0, 1.0, &[2.0], &p).unwrap();
        // 1 + 0.81 sin(0.9) * 2, reference from a 30-digit evaluation
        assert!((next[0] - 2.268_989_593_596_523).abs() < 1e-14);

        let frozen = dither(0.9, 0.9, 0.0, 0.0);
        assert_eq!(
            step(0, &[1.0], 1.0, 1.0, &[2.0], &frozen).unwrap(),
            vec![1.0]
        );
        assert_eq!(step(0, &[1.0], 1.0, 0.0, &[2.0], &p).unwrap(), vec![1.0]);
    }

    #[test]
    fn step_rejects_non_finite_payoff() {
        let p = dither(0.9, 0.9, 0.0, 0.9);
        match step(17, &[1.0], 1.0, 1.0, &[f64::NAN], &p) {
            Err(Error::NonFinite {
                node, iteration, ..
            }) => {
                assert_eq!((node, iteration), (0, 17));
            }
            other => panic!("{other:?}"),
        }
    }

    fn quadratic_cfg(horizon: usize) -> SeekerConfig {
        SeekerConfig {
            perturbation: dither(0.1, 1.0, 0.0, 1.0),
            schedule: StepSchedule::constant(0.05).unwrap(),
            horizon,
            initial: vec![0.0],
            seed: 1,
            clamp_nonnegative: false,
        }
    }

    #[test]
    fn horizon_zero_has_initial_record() {
        let g = QuadraticGame::single_peak(2.0, 0.0).unwrap();
        let t = run(&g, &quadratic_cfg(0)).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.records[0].hat_a, vec![0.0]);
        assert_eq!(t.records[0].khat, 0.0);
    }

    #[test]
    fn converges_on_single_peak() {
        let g = QuadraticGame::single_peak(2.0, 0.0).unwrap();
        let t = run(&g, &quadratic_cfg(20_000)).unwrap();
        assert_eq!(t.len(), 20_001);
        let mean = t.mean_hat_a_from(t.len() - 2000);
        assert!((mean[0] - 2.0).abs() < 0.05, "{mean:?}");
    }

    #[test]
    fn update_identity_and_decomposition() {
        let g = QuadraticGame::single_peak(2.0, 0.5).unwrap();
        let cfg = quadratic_cfg(500);
        let t = run(&g, &cfg).unwrap();
        for w in t.records.windows(2) {
            let (r, next) = (&w[0], &w[1]);
            assert_eq!(r.a[0], r.hat_a[0] + cfg.perturbation.signal(0, r.khat));
            let lhs = (next.hat_a[0] - r.hat_a[0]) / r.lambda;
            let rhs = 1.0 * 0.1 * (r.khat).sin() * r.payoff[0];
            assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn clamp_keeps_actions_nonnegative() {
        let g = QuadraticGame::single_peak(0.0, 0.0).unwrap();
        let mut cfg = quadratic_cfg(200);
        cfg.perturbation = dither(1.0, 1.0, 0.0, 1.0);
        cfg.clamp_nonnegative = true;
        let t = run(&g, &cfg).unwrap();
        assert!(t.records.iter().all(|r| r.a[0] >= 0.0));
    }

    #[test]
    fn rejects_mismatched_initial() {
        let g = QuadraticGame::single_peak(2.0, 0.0).unwrap();
        let mut cfg = quadratic_cfg(5);
        cfg.initial = vec![0.0, 1.0];
        assert!(run(&g, &cfg).is_err());
    }

    #[test]
    fn baseline_contracts_to_peak() {
        let g = QuadraticGame::single_peak(2.0, 0.0).unwrap();
        let s = StepSchedule::constant(0.1).unwrap();
        let t = baseline_gradient_ascent(&g, &s, &[10.0], &[0.0], 200, 0).unwrap();
        let first = t
            .records
            .iter()
            .position(|r| (r.a[0] - 2.0).abs() < 1e-6)
            .expect("converges");
        assert!(first <= 200);
    }

    #[test]
    fn baseline_zero_gradient_is_constant() {
        // flat payoff: zero curvature and slope
        let g = QuadraticGame::new(vec![vec![0.0]], vec![0.0], vec![1.0], 0.0).unwrap();
        let s = StepSchedule::constant(0.1).unwrap();
        let t = baseline_gradient_ascent(&g, &s, &[10.0], &[3.0], 50, 0).unwrap();
        assert!(t.records.iter().all(|r| r.a[0] == 3.0));
    }

    #[test]
    fn baseline_stays_in_box() {
        let g = QuadraticGame::single_peak(20.0, 0.0).unwrap();
        let s = StepSchedule::constant(0.3).unwrap();
        let t = baseline_gradient_ascent(&g, &s, &[5.0], &[8.0], 100, 0).unwrap();
        assert!(t.records.iter().all(|r| (0.0..=5.0).contains(&r.a[0])));
        assert_eq!(t.last().unwrap().a[0], 5.0);
    }

    #[test]
    fn window_alignment_spans_whole_periods() {
        let g = QuadraticGame::single_peak(2.0, 0.0).unwrap();
        let t = run(&g, &quadratic_cfg(10_000)).unwrap();
        let period = std::f64::consts::TAU;
        let start = t.window_start(1000, Some(period));
        let span = t.last().unwrap().khat - t.records[start].khat;
        let periods = span / period;
        assert!(start >= t.len() - 1000);
        assert!((periods - periods.round()).abs() * period <= 0.05 + 1e-9);
    }
}
