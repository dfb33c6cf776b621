use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg;

use super::model::{check_len, Expectation, GameModel, GradientOracle, SampleSet, SimRng};

/// Default Monte-Carlo budget for expectations of arbitrary functionals.
pub const DEFAULT_NOISE_SAMPLES: usize = 2000;

/// Linear-quadratic game with optional additive Gaussian payoff noise:
///
/// `r_j(S, a) = c_j + g_j a_j - H_jj a_j^2 / 2 - a_j sum_{i != j} H_ji a_i + S_j`
///
/// with `S_j ~ N(0, noise_std^2)` independent across nodes. The unique
/// stationary profile solves `H a = g`.
#[derive(Debug, Clone)]
pub struct QuadraticGame {
    hessian: Vec<Vec<f64>>,
    linear: Vec<f64>,
    offset: Vec<f64>,
    noise_std: f64,
    samples: SampleSet<Vec<f64>>,
}

impl QuadraticGame {
    pub fn new(
        hessian: Vec<Vec<f64>>,
        linear: Vec<f64>,
        offset: Vec<f64>,
        noise_std: f64,
    ) -> Result<Self> {
        let n = linear.len();
        if n == 0 {
            return Err(Error::invalid("quadratic", "at least one node is required"));
        }
        check_len("hessian rows", n, hessian.len())?;
        for row in &hessian {
            check_len("hessian columns", n, row.len())?;
        }
        check_len("offset", n, offset.len())?;
        let all_finite = hessian
            .iter()
            .flatten()
            .chain(&linear)
            .chain(&offset)
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::invalid("quadratic", "coefficients must be finite"));
        }
        if !(noise_std.is_finite() && noise_std >= 0.0) {
            return Err(Error::invalid(
                "noise_std",
                format!("must be >= 0, got {noise_std}"),
            ));
        }
        Ok(Self {
            hessian,
            linear,
            offset,
            noise_std,
            samples: SampleSet::new(DEFAULT_NOISE_SAMPLES, 0x5eed),
        })
    }

    /// Independent peaks `r_j = -c_j (a_j - t_j)^2 (+ noise)`.
    pub fn separable(targets: &[f64], curvatures: &[f64], noise_std: f64) -> Result<Self> {
        check_len("curvatures", targets.len(), curvatures.len())?;
        let n = targets.len();
        let mut hessian = vec![vec![0.0; n]; n];
        for j in 0..n {
            hessian[j][j] = 2.0 * curvatures[j];
        }
        let linear = (0..n).map(|j| 2.0 * curvatures[j] * targets[j]).collect();
        let offset = (0..n)
            .map(|j| -curvatures[j] * targets[j] * targets[j])
            .collect();
        Self::new(hessian, linear, offset, noise_std)
    }

    /// Single node `r(a) = -(a - target)^2 (+ noise)`.
    pub fn single_peak(target: f64, noise_std: f64) -> Result<Self> {
        Self::separable(&[target], &[1.0], noise_std)
    }

    /// Overrides the Monte-Carlo sample budget used for generic functionals.
    pub fn with_samples(mut self, count: usize, seed: u64) -> Self {
        self.samples = SampleSet::new(count, seed);
        self
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn hessian(&self) -> &[Vec<f64>] {
        &self.hessian
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    fn mean_payoff(&self, a: &[f64], j: usize) -> f64 {
        let row = &self.hessian[j];
        let cross: f64 = (0..a.len())
            .filter(|&i| i != j)
            .map(|i| row[i] * a[i])
            .sum();
        self.offset[j] + self.linear[j] * a[j] - 0.5 * row[j] * a[j] * a[j] - a[j] * cross
    }

    /// Stationary profile `H^{-1} g`.
    pub fn equilibrium(&self) -> Result<Vec<f64>> {
        linalg::solve(&self.hessian, &self.linear)
    }

    fn draw(&self, rng: &mut SimRng) -> Vec<f64> {
        self.sample_state(rng)
    }
}

impl GameModel for QuadraticGame {
    type State = Vec<f64>;

    fn node_count(&self) -> usize {
        self.linear.len()
    }

    fn sample_state<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        if self.noise_std == 0.0 {
            return Vec::new();
        }
        let normal = Normal::new(0.0, self.noise_std).expect("validated noise level");
        (0..self.node_count()).map(|_| normal.sample(rng)).collect()
    }

    fn payoff(&self, state: &Vec<f64>, actions: &[f64], node: usize) -> Result<f64> {
        check_len("actions", self.node_count(), actions.len())?;
        let noise = state.get(node).copied().unwrap_or(0.0);
        Ok(self.mean_payoff(actions, node) + noise)
    }

    fn expectation<F>(&self, mut f: F) -> Result<Expectation>
    where
        F: FnMut(&Vec<f64>) -> Result<f64>,
    {
        if self.is_deterministic() {
            return Ok(Expectation::exact(f(&Vec::new())?));
        }
        self.samples.average(|r| self.draw(r), f)
    }

    fn is_deterministic(&self) -> bool {
        self.noise_std == 0.0
    }

    fn expected_payoff(&self, actions: &[f64], node: usize) -> Result<Expectation> {
        check_len("actions", self.node_count(), actions.len())?;
        Ok(Expectation::exact(self.mean_payoff(actions, node)))
    }
}

impl GradientOracle for QuadraticGame {
    fn own_gradient(&self, _state: &Vec<f64>, actions: &[f64], node: usize) -> Result<f64> {
        check_len("actions", self.node_count(), actions.len())?;
        let row = &self.hessian[node];
        let h_a: f64 = row.iter().zip(actions).map(|(h, a)| h * a).sum();
        Ok(self.linear[node] - h_a)
    }
}
