use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

use super::perturbation::PerturbationParams;

/// RNG used for every simulation stream. ChaCha keeps seeded output
/// identical across platforms.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Sample mean with its standard error. Analytic expectations carry a zero
/// standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expectation {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl Expectation {
    pub fn exact(mean: f64) -> Self {
        Self {
            mean,
            std_error: 0.0,
            samples: 0,
        }
    }

    pub fn from_values<I: IntoIterator<Item = f64>>(values: I) -> Self {
        // Welford
        let mut n = 0usize;
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for x in values {
            n += 1;
            let d = x - mean;
            mean += d / n as f64;
            m2 += d * (x - mean);
        }
        let std_error = if n > 1 {
            (m2 / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std_error,
            samples: n,
        }
    }
}

/// A stochastic game with a random state shared by all nodes.
///
/// `payoff` must be deterministic given `(state, actions)`. Expectations are
/// taken over the state law; implementations decide whether they are exact or
/// Monte-Carlo estimates over a fixed, seeded sample set.
pub trait GameModel {
    type State;

    fn node_count(&self) -> usize;

    fn sample_state<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Self::State;

    fn payoff(&self, state: &Self::State, actions: &[f64], node: usize) -> Result<f64>;

    /// Expectation over the state law of an arbitrary state functional.
    fn expectation<F>(&self, f: F) -> Result<Expectation>
    where
        F: FnMut(&Self::State) -> Result<f64>;

    /// `true` when the state law is a point mass.
    fn is_deterministic(&self) -> bool;

    fn payoffs(&self, state: &Self::State, actions: &[f64]) -> Result<Vec<f64>> {
        (0..self.node_count())
            .map(|j| self.payoff(state, actions, j))
            .collect()
    }

    fn expected_payoff(&self, actions: &[f64], node: usize) -> Result<Expectation> {
        self.expectation(|s| self.payoff(s, actions, node))
    }

    fn expected_payoffs(&self, actions: &[f64]) -> Result<Vec<f64>> {
        (0..self.node_count())
            .map(|j| self.expected_payoff(actions, j).map(|e| e.mean))
            .collect()
    }
}

/// Per-state derivative of a node's payoff with respect to its own action.
pub trait GradientOracle: GameModel {
    fn own_gradient(&self, state: &Self::State, actions: &[f64], node: usize) -> Result<f64>;
}

/// A fixed set of state draws used for Monte-Carlo expectations.
///
/// Drawn lazily on first use from a dedicated seed, so repeated expectations
/// share common random numbers and are deterministic.
#[derive(Debug)]
pub struct SampleSet<S> {
    count: usize,
    seed: u64,
    states: OnceLock<Vec<S>>,
}

impl<S: Clone> Clone for SampleSet<S> {
    fn clone(&self) -> Self {
        let states = OnceLock::new();
        if let Some(v) = self.states.get() {
            let _ = states.set(v.clone());
        }
        Self {
            count: self.count,
            seed: self.seed,
            states,
        }
    }
}

impl<S> SampleSet<S> {
    pub fn new(count: usize, seed: u64) -> Self {
        Self {
            count: count.max(1),
            seed,
            states: OnceLock::new(),
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn states<G>(&self, mut draw: G) -> &[S]
    where
        G: FnMut(&mut SimRng) -> S,
    {
        self.states.get_or_init(|| {
            let mut rng = rng_from_seed(self.seed);
            (0..self.count).map(|_| draw(&mut rng)).collect()
        })
    }

    pub fn average<G, F>(&self, draw: G, mut f: F) -> Result<Expectation>
    where
        G: FnMut(&mut SimRng) -> S,
        F: FnMut(&S) -> Result<f64>,
    {
        let values = self
            .states(draw)
            .iter()
            .map(&mut f)
            .collect::<Result<Vec<f64>>>()?;
        Ok(Expectation::from_values(values))
    }
}

/// Actions actually played together with the intermediary values they were
/// built from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionProfile {
    pub hat_a: Vec<f64>,
    pub a: Vec<f64>,
}

impl ActionProfile {
    /// `a_j = hat_a_j + b_j sin(Omega_j khat + phi_j)`, optionally clamped at
    /// zero.
    pub fn perturbed(
        hat_a: &[f64],
        khat: f64,
        params: &PerturbationParams,
        clamp_nonnegative: bool,
    ) -> Self {
        let a = hat_a
            .iter()
            .enumerate()
            .map(|(j, &h)| {
                let v = h + params.signal(j, khat);
                if clamp_nonnegative {
                    v.max(0.0)
                } else {
                    v
                }
            })
            .collect();
        Self {
            hat_a: hat_a.to_vec(),
            a,
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 4.0, 2.5, -3.0, 8.0];
        let e = Expectation::from_values(xs);
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((e.mean - mean).abs() < 1e-14);
        assert!((e.std_error - (var / 5.0).sqrt()).abs() < 1e-14);
        assert_eq!(Expectation::from_values([3.0]).std_error, 0.0);
    }

    #[test]
    fn sample_set_is_seeded_and_cached() {
        use rand::Rng;
        let a = SampleSet::<f64>::new(10, 3);
        let b = SampleSet::<f64>::new(10, 3);
        let va = a.states(|r| r.random::<f64>()).to_vec();
        let vb = b.states(|r| r.random::<f64>()).to_vec();
        assert_eq!(va, vb);
        // second call ignores the generator
        let again = a.states(|_| 0.0).to_vec();
        assert_eq!(va, again);
    }
}
