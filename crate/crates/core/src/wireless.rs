//! Power control on an interference channel.
//!
//! `N` transmitter/receiver pairs share a band. Pair `j` earns
//!
//! `r_j = omega ln(1 + p_j g_jj / (sigma2 + sum_{i != j} p_i g_ij)) - kappa p_j`
//!
//! where `g_ij = |h_ij|^2` is the gain from transmitter `i` into receiver `j`
//! and `h_ij` is circularly-symmetric complex Gaussian with variance
//! `E|h_ij|^2 = var[i][j]`, drawn independently at every step.

use std::sync::OnceLock;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{check_len, Expectation, GameModel, GradientOracle, SampleSet, SimRng};
use crate::linalg;

pub const DEFAULT_MC_SAMPLES: usize = 2000;
pub const DEFAULT_MC_SEED: u64 = 0x00c0_ffee;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WirelessParams {
    /// `omega`, payoff units per nat of rate.
    pub bandwidth: f64,
    /// `kappa`, cost per unit of transmit power.
    pub price: f64,
    /// Thermal noise variance `sigma2`.
    pub noise_power: f64,
    /// `variance[i][j] = E|h_ij|^2`, transmitter `i` to receiver `j`.
    pub variance: Vec<Vec<f64>>,
}

impl WirelessParams {
    /// All direct links share `direct` variance and all cross links `cross`.
    pub fn symmetric(
        n: usize,
        direct: f64,
        cross: f64,
        bandwidth: f64,
        price: f64,
        noise_power: f64,
    ) -> Self {
        let variance = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { direct } else { cross })
                    .collect()
            })
            .collect();
        Self {
            bandwidth,
            price,
            noise_power,
            variance,
        }
    }

    /// Two pairs, unit direct variance, cross amplitude 0.1 (variance 0.01),
    /// `omega = 10`, `kappa = 2`, `sigma2 = 1`.
    pub fn two_pair_reference() -> Self {
        Self::symmetric(2, 1.0, 0.01, 10.0, 2.0, 1.0)
    }

    pub fn node_count(&self) -> usize {
        self.variance.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.node_count();
        if n == 0 {
            return Err(Error::invalid("variance", "at least one pair is required"));
        }
        for row in &self.variance {
            check_len("variance columns", n, row.len())?;
        }
        if let Some(v) = self
            .variance
            .iter()
            .flatten()
            .find(|v| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::invalid(
                "variance",
                format!("entries must be >= 0, got {v}"),
            ));
        }
        for (name, v) in [
            ("bandwidth", self.bandwidth),
            ("price", self.price),
            ("noise_power", self.noise_power),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        Ok(())
    }

    /// Mean gain `E g_ij`.
    #[inline]
    pub fn mean_gain(&self, from: usize, to: usize) -> f64 {
        self.variance[from][to]
    }

    /// Matrix of the mean-gain first-order system: row `j` is the optimizing
    /// pair, column `i` the transmitter, entry `E g_ij`.
    pub fn equilibrium_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.node_count();
        (0..n)
            .map(|j| (0..n).map(|i| self.mean_gain(i, j)).collect())
            .collect()
    }

    /// Right-hand side `omega E g_jj / kappa - sigma2`.
    pub fn equilibrium_target(&self) -> Vec<f64> {
        (0..self.node_count())
            .map(|j| self.bandwidth * self.mean_gain(j, j) / self.price - self.noise_power)
            .collect()
    }

    fn mean_gains(&self) -> Vec<f64> {
        self.variance.iter().flatten().copied().collect()
    }
}

/// One channel draw. Both matrices are row-major `N x N`, indexed
/// `[transmitter * N + receiver]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub n: usize,
    pub h: Vec<Complex64>,
    pub gains: Vec<f64>,
}

impl ChannelRealization {
    #[inline]
    pub fn gain(&self, from: usize, to: usize) -> f64 {
        self.gains[from * self.n + to]
    }

    fn from_gains(n: usize, gains: Vec<f64>) -> Self {
        let h = gains
            .iter()
            .map(|g| Complex64::new(g.sqrt(), 0.0))
            .collect();
        Self { n, h, gains }
    }
}

/// Draws `h_ij` with independent real and imaginary parts of variance
/// `var[i][j] / 2` each.
pub fn sample_channel<R: rand::Rng + ?Sized>(
    params: &WirelessParams,
    rng: &mut R,
) -> ChannelRealization {
    let n = params.node_count();
    let mut h = Vec::with_capacity(n * n);
    let mut gains = Vec::with_capacity(n * n);
    for row in &params.variance {
        for &v in row {
            let s = (v / 2.0).sqrt();
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let c = Complex64::new(s * re, s * im);
            gains.push(c.norm_sqr());
            h.push(c);
        }
    }
    ChannelRealization { n, h, gains }
}

fn interference(gains: &[f64], n: usize, p: &[f64], j: usize) -> f64 {
    (0..n)
        .filter(|&i| i != j)
        .map(|i| p[i] * gains[i * n + j])
        .sum()
}

fn check_powers(p: &[f64]) -> Result<()> {
    match p.iter().position(|v| *v < 0.0 || v.is_nan()) {
        Some(j) => Err(Error::NegativeAction {
            node: j,
            value: p[j],
        }),
        None => Ok(()),
    }
}

/// SINR payoff of pair `j` for a gain matrix laid out as in
/// [`ChannelRealization`].
pub fn payoff(gains: &[f64], p: &[f64], params: &WirelessParams, j: usize) -> Result<f64> {
    let n = params.node_count();
    check_len("powers", n, p.len())?;
    check_len("gains", n * n, gains.len())?;
    check_powers(p)?;
    let sinr = p[j] * gains[j * n + j] / (params.noise_power + interference(gains, n, p, j));
    Ok(params.bandwidth * sinr.ln_1p() - params.price * p[j])
}

/// `d r_j / d p_j` for a fixed channel.
pub fn own_payoff_derivative(
    gains: &[f64],
    p: &[f64],
    params: &WirelessParams,
    j: usize,
) -> Result<f64> {
    let n = params.node_count();
    check_len("powers", n, p.len())?;
    check_powers(p)?;
    let g = gains[j * n + j];
    let denom = params.noise_power + interference(gains, n, p, j) + p[j] * g;
    Ok(params.bandwidth * g / denom - params.price)
}

/// Solution of the mean-gain first-order system.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumSolution {
    pub power: Vec<f64>,
    pub target: Vec<f64>,
    pub residual: f64,
}

/// Solves `Gbar p = abar` where `Gbar[j][i] = E g_ij` and
/// `abar_j = omega E g_jj / kappa - sigma2`.
///
/// This is the stationary point of the payoff evaluated at mean gains; for
/// fading channels the stationary point of the expected payoff differs (see
/// [`exact_expected_equilibrium`]).
pub fn analytic_equilibrium(params: &WirelessParams) -> Result<EquilibriumSolution> {
    params.validate()?;
    let matrix = params.equilibrium_matrix();
    let target = params.equilibrium_target();
    if let Some(j) = target.iter().position(|v| *v <= 0.0) {
        return Err(Error::NonpositiveTarget {
            node: j,
            value: target[j],
        });
    }
    let power = linalg::solve(&matrix, &target)?;
    let residual = linalg::residual_norm(&matrix, &power, &target);
    let tolerance = 1e-10 * linalg::norm(&target);
    if residual > tolerance {
        return Err(Error::Residual {
            residual,
            tolerance,
        });
    }
    if let Some(j) = power.iter().position(|v| *v <= 0.0) {
        return Err(Error::NegativeSolution {
            node: j,
            value: power[j],
        });
    }
    Ok(EquilibriumSolution {
        power,
        target,
        residual,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceReport {
    /// `E g_jj - sum_{i != j} E g_ij` per pair.
    pub margins: Vec<f64>,
    pub dominant: bool,
}

pub fn diagonal_dominance_check(params: &WirelessParams) -> DominanceReport {
    let m = params.equilibrium_matrix();
    let margins: Vec<f64> = m
        .iter()
        .enumerate()
        .map(|(j, row)| {
            let off: f64 = row
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .map(|(_, v)| v.abs())
                .sum();
            row[j].abs() - off
        })
        .collect();
    DominanceReport {
        dominant: margins.iter().all(|m| *m > 0.0),
        margins,
    }
}

/// Quadrature for `E ln(1 + sum_i X_i)` with independent `X_i ~ Exp(mean m_i)`.
///
/// Uses `ln(1 + z) = int_0^inf (e^{-s} - e^{-s(1+z)}) / s ds` and the Laplace
/// transform `E e^{-s X_i} = 1 / (1 + s m_i)`; after `s = e^x` the integrand
/// decays double-exponentially at both ends and a plain trapezoid rule on a
/// uniform grid is spectrally accurate.
struct LogQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl LogQuadrature {
    const LOWER: f64 = -40.0;
    const UPPER: f64 = 4.5;
    const STEP: f64 = 0.05;

    fn get() -> &'static LogQuadrature {
        static RULE: OnceLock<LogQuadrature> = OnceLock::new();
        RULE.get_or_init(|| {
            let count = ((Self::UPPER - Self::LOWER) / Self::STEP).round() as usize + 1;
            let (nodes, weights) = (0..count)
                .map(|i| {
                    let s = (Self::LOWER + i as f64 * Self::STEP).exp();
                    (s, (-s).exp() * Self::STEP)
                })
                .unzip();
            LogQuadrature { nodes, weights }
        })
    }

    /// `E ln(1 + sum X_i)`.
    fn log_one_plus(&self, means: &[f64]) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| {
                let prod: f64 = means.iter().map(|m| 1.0 + s * m).product();
                w * (1.0 - 1.0 / prod)
            })
            .sum()
    }

    /// `d/d m_k E ln(1 + sum X_i) = int w(s) P(s) s / (1 + s m_k)`.
    fn log_one_plus_derivative(&self, means: &[f64], k: usize) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| {
                let prod: f64 = means.iter().map(|m| 1.0 + s * m).product();
                w * s / (prod * (1.0 + s * means[k]))
            })
            .sum()
    }
}

/// `E ln(1 + X)` for `X ~ Exp(mean)` evaluated by the quadrature rule; the
/// closed form is `e^{1/mean} E_1(1/mean)`.
pub fn expected_log1p_exponential(mean: f64) -> f64 {
    LogQuadrature::get().log_one_plus(&[mean])
}

/// How the payoff expectation over the channel law is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ExpectationMode {
    /// Average over a fixed, seeded set of channel draws.
    MonteCarlo { samples: usize, seed: u64 },
    /// Exact Rayleigh-fading expectation by one-dimensional quadrature.
    Quadrature,
    /// Payoff at mean gains. Approximate: ignores the Jensen gap of the log.
    MeanGain,
}

impl Default for ExpectationMode {
    fn default() -> Self {
        ExpectationMode::MonteCarlo {
            samples: DEFAULT_MC_SAMPLES,
            seed: DEFAULT_MC_SEED,
        }
    }
}

/// Channel law used when sampling states.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelMode {
    /// Fresh i.i.d. Rayleigh draws.
    #[default]
    Rayleigh,
    /// Gains frozen at their means (deterministic game).
    FrozenAtMean,
}

/// The power-control game behind the [`GameModel`] interface.
#[derive(Debug, Clone)]
pub struct WirelessGame {
    params: WirelessParams,
    channel: ChannelMode,
    expectation: ExpectationMode,
    samples: SampleSet<ChannelRealization>,
}

impl WirelessGame {
    pub fn new(
        params: WirelessParams,
        channel: ChannelMode,
        expectation: ExpectationMode,
    ) -> Result<Self> {
        params.validate()?;
        let (count, seed) = match expectation {
            ExpectationMode::MonteCarlo { samples, seed } => {
                if samples == 0 {
                    return Err(Error::invalid("expectation.samples", "must be >= 1"));
                }
                (samples, seed)
            }
            _ => (DEFAULT_MC_SAMPLES, DEFAULT_MC_SEED),
        };
        Ok(Self {
            params,
            channel,
            expectation,
            samples: SampleSet::new(count, seed),
        })
    }

    pub fn params(&self) -> &WirelessParams {
        &self.params
    }

    pub fn channel_mode(&self) -> ChannelMode {
        self.channel
    }

    pub fn expectation_mode(&self) -> ExpectationMode {
        self.expectation
    }

    /// `true` when expectations carry the mean-gain approximation.
    pub fn is_approximate(&self) -> bool {
        self.channel == ChannelMode::Rayleigh && self.expectation == ExpectationMode::MeanGain
    }

    fn mean_realization(&self) -> ChannelRealization {
        ChannelRealization::from_gains(self.params.node_count(), self.params.mean_gains())
    }

    fn sample_set(&self) -> &[ChannelRealization] {
        self.samples
            .states(|r: &mut SimRng| sample_channel(&self.params, r))
    }

    fn quadrature_means(&self, p: &[f64], j: usize) -> (Vec<f64>, Vec<f64>) {
        let n = self.params.node_count();
        let s2 = self.params.noise_power;
        let interferers: Vec<f64> = (0..n)
            .filter(|&i| i != j)
            .map(|i| p[i] * self.params.mean_gain(i, j) / s2)
            .collect();
        let mut all = Vec::with_capacity(n);
        all.push(p[j] * self.params.mean_gain(j, j) / s2);
        all.extend_from_slice(&interferers);
        (all, interferers)
    }

    fn quadrature_payoff(&self, p: &[f64], j: usize) -> f64 {
        let rule = LogQuadrature::get();
        let (all, interferers) = self.quadrature_means(p, j);
        self.params.bandwidth * (rule.log_one_plus(&all) - rule.log_one_plus(&interferers))
            - self.params.price * p[j]
    }

    /// Exact `d E r_j / d p_j` under Rayleigh fading.
    pub fn exact_own_gradient(&self, p: &[f64], j: usize) -> Result<f64> {
        check_len("powers", self.params.node_count(), p.len())?;
        check_powers(p)?;
        if self.channel == ChannelMode::FrozenAtMean {
            return own_payoff_derivative(&self.params.mean_gains(), p, &self.params, j);
        }
        let (all, _) = self.quadrature_means(p, j);
        let scale = self.params.mean_gain(j, j) / self.params.noise_power;
        Ok(
            self.params.bandwidth * scale * LogQuadrature::get().log_one_plus_derivative(&all, 0)
                - self.params.price,
        )
    }
}

impl GameModel for WirelessGame {
    type State = ChannelRealization;

    fn node_count(&self) -> usize {
        self.params.node_count()
    }

    fn sample_state<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization {
        match self.channel {
            ChannelMode::Rayleigh => sample_channel(&self.params, rng),
            ChannelMode::FrozenAtMean => self.mean_realization(),
        }
    }

    fn payoff(&self, state: &ChannelRealization, actions: &[f64], node: usize) -> Result<f64> {
        payoff(&state.gains, actions, &self.params, node)
    }

    fn expectation<F>(&self, mut f: F) -> Result<Expectation>
    where
        F: FnMut(&ChannelRealization) -> Result<f64>,
    {
        match (self.channel, self.expectation) {
            (ChannelMode::FrozenAtMean, _) | (_, ExpectationMode::MeanGain) => {
                Ok(Expectation::exact(f(&self.mean_realization())?))
            }
            _ => self.samples.average(|r| sample_channel(&self.params, r), f),
        }
    }

    fn is_deterministic(&self) -> bool {
        self.channel == ChannelMode::FrozenAtMean
    }

    fn expected_payoff(&self, actions: &[f64], node: usize) -> Result<Expectation> {
        check_len("powers", self.node_count(), actions.len())?;
        check_powers(actions)?;
        match (self.channel, self.expectation) {
            (ChannelMode::Rayleigh, ExpectationMode::Quadrature) => {
                Ok(Expectation::exact(self.quadrature_payoff(actions, node)))
            }
            _ => self.expectation(|s| self.payoff(s, actions, node)),
        }
    }

    fn expected_payoffs(&self, actions: &[f64]) -> Result<Vec<f64>> {
        let n = self.node_count();
        check_len("powers", n, actions.len())?;
        check_powers(actions)?;
        match (self.channel, self.expectation) {
            (ChannelMode::Rayleigh, ExpectationMode::MonteCarlo { .. }) => {
                let set = self.sample_set();
                let mut acc = vec![0.0; n];
                for s in set {
                    for (j, a) in acc.iter_mut().enumerate() {
                        *a += payoff(&s.gains, actions, &self.params, j)?;
                    }
                }
                Ok(acc.into_iter().map(|v| v / set.len() as f64).collect())
            }
            _ => (0..n)
                .map(|j| self.expected_payoff(actions, j).map(|e| e.mean))
                .collect(),
        }
    }
}

impl GradientOracle for WirelessGame {
    fn own_gradient(
        &self,
        state: &ChannelRealization,
        actions: &[f64],
        node: usize,
    ) -> Result<f64> {
        own_payoff_derivative(&state.gains, actions, &self.params, node)
    }
}

/// Stationary point of the exact expected payoffs under Rayleigh fading,
/// found by Gauss-Seidel best responses with bisection on the exact own
/// gradient.
pub fn exact_expected_equilibrium(params: &WirelessParams) -> Result<Vec<f64>> {
    let game = WirelessGame::new(
        params.clone(),
        ChannelMode::Rayleigh,
        ExpectationMode::Quadrature,
    )?;
    let n = params.node_count();
    let mut p = analytic_equilibrium(params)
        .map(|s| s.power)
        .unwrap_or_else(|_| vec![1.0; n]);
    for _sweep in 0..500 {
        let mut moved = 0.0f64;
        for j in 0..n {
            let grad_at = |x: f64, p: &mut Vec<f64>| {
                p[j] = x;
                game.exact_own_gradient(p, j)
            };
            let old = p[j];
            let mut q = p.clone();
            let best = if grad_at(0.0, &mut q)? <= 0.0 {
                0.0
            } else {
                let mut hi = old.max(1.0);
                while grad_at(hi, &mut q)? > 0.0 {
                    hi *= 2.0;
                    if hi > 1e12 {
                        return Err(Error::NonFiniteValue("best response bracket".into()));
                    }
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if grad_at(mid, &mut q)? > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-14 * hi.max(1.0) {
                        break;
                    }
                }
                0.5 * (lo + hi)
            };
            p[j] = best;
            moved = moved.max((best - old).abs());
        }
        if moved <= 1e-12 {
            break;
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::rng_from_seed;

    #[test]
    fn zero_power_pays_nothing() {
        let params = WirelessParams::two_pair_reference();
        let mut rng = rng_from_seed(1);
        let ch = sample_channel(&params, &mut rng);
        for j in 0..2 {
            assert_eq!(payoff(&ch.gains, &[0.0, 0.0], &params, j).unwrap(), 0.0);
        }
    }

    #[test]
    fn identity_gain_payoff() {
        let params = WirelessParams::symmetric(2, 1.0, 0.0, 10.0, 2.0, 1.0);
        let gains = [1.0, 0.0, 0.0, 1.0];
        let r = payoff(&gains, &[1.0, 1.0], &params, 0).unwrap();
        assert!((r - (10.0 * 2f64.ln() - 2.0)).abs() < 1e-12);
        assert!((r - 4.931_471_805_599_453).abs() < 1e-12);
    }

    #[test]
    fn dead_direct_link_prefers_silence() {
        let params = WirelessParams::two_pair_reference();
        let gains = [0.0, 0.3, 0.2, 1.0];
        for p in [0.0, 0.5, 3.0] {
            let r = payoff(&gains, &[p, 2.0], &params, 0).unwrap();
            assert!((r + 2.0 * p).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_negative_power() {
        let params = WirelessParams::two_pair_reference();
        assert!(matches!(
            payoff(&[1.0, 0.0, 0.0, 1.0], &[-0.1, 1.0], &params, 1),
            Err(Error::NegativeAction { node: 0, .. })
        ));
    }

    #[test]
    fn zero_variance_entry_gives_zero_gain() {
        let mut params = WirelessParams::two_pair_reference();
        params.variance[0][1] = 0.0;
        let mut rng = rng_from_seed(4);
        for _ in 0..100 {
            assert_eq!(sample_channel(&params, &mut rng).gain(0, 1), 0.0);
        }
    }

    #[test]
    fn direct_gain_mean_is_one() {
        let params = WirelessParams::two_pair_reference();
        let mut rng = rng_from_seed(11);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| sample_channel(&params, &mut rng).gain(0, 0))
            .sum::<f64>()
            / n as f64;
        // Exp(1) has unit standard deviation
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn channel_is_seeded() {
        let params = WirelessParams::two_pair_reference();
        let a = sample_channel(&params, &mut rng_from_seed(5));
        let b = sample_channel(&params, &mut rng_from_seed(5));
        assert_eq!(a, b);
    }

    #[test]
    fn reference_equilibrium() {
        let sol = analytic_equilibrium(&WirelessParams::two_pair_reference()).unwrap();
        assert_eq!(sol.target, vec![4.0, 4.0]);
        for p in &sol.power {
            assert!((p - 4.0 / 1.01).abs() < 1e-12);
            assert_eq!(format!("{p:.4}"), "3.9604");
        }
    }

    #[test]
    fn identity_system_returns_target() {
        let params = WirelessParams::symmetric(3, 1.0, 0.0, 6.0, 2.0, 1.0);
        let sol = analytic_equilibrium(&params).unwrap();
        assert_eq!(sol.power, vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn random_dominant_three_pair_residual() {
        use rand::Rng;
        let mut rng = rng_from_seed(21);
        for _ in 0..50 {
            let mut variance = vec![vec![0.0; 3]; 3];
            for (i, row) in variance.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = if i == j {
                        rng.random_range(1.0..2.0)
                    } else {
                        rng.random_range(0.0..0.4)
                    };
                }
            }
            let params = WirelessParams {
                bandwidth: 10.0,
                price: 1.0,
                noise_power: 1.0,
                variance,
            };
            assert!(diagonal_dominance_check(&params).dominant);
            let sol = analytic_equilibrium(&params).unwrap();
            let m = params.equilibrium_matrix();
            let t = params.equilibrium_target();
            // recompute the residual by hand
            for j in 0..3 {
                let lhs: f64 = (0..3).map(|i| m[j][i] * sol.power[i]).sum();
                assert!((lhs - t[j]).abs() <= 1e-10 * linalg::norm(&t));
            }
        }
    }

    #[test]
    fn equilibrium_errors() {
        let mut p = WirelessParams::two_pair_reference();
        p.price = 20.0; // 10 * 1 / 20 - 1 < 0
        assert!(matches!(
            analytic_equilibrium(&p),
            Err(Error::NonpositiveTarget { .. })
        ));

        let singular = WirelessParams::symmetric(2, 1.0, 1.0, 10.0, 2.0, 1.0);
        assert!(matches!(
            analytic_equilibrium(&singular),
            Err(Error::SingularSystem)
        ));

        // strong interference makes one component negative
        let mut neg = WirelessParams::two_pair_reference();
        neg.variance = vec![vec![1.0, 3.0], vec![0.1, 1.0]];
        neg.bandwidth = 10.0;
        assert!(matches!(
            analytic_equilibrium(&neg),
            Err(Error::NegativeSolution { .. })
        ));
    }

    #[test]
    fn dominance_examples() {
        let r = diagonal_dominance_check(&WirelessParams::two_pair_reference());
        assert!(r.dominant);
        for m in r.margins {
            assert!((m - 0.99).abs() < 1e-12);
        }
        let bad = WirelessParams {
            variance: vec![vec![1.0, 2.0], vec![2.0, 1.0]],
            ..WirelessParams::two_pair_reference()
        };
        assert!(!diagonal_dominance_check(&bad).dominant);
        let single = WirelessParams::symmetric(1, 1.0, 0.0, 10.0, 2.0, 1.0);
        assert!(diagonal_dominance_check(&single).dominant);
    }

    #[test]
    fn quadrature_matches_exponential_integral() {
        // e^{1/m} E_1(1/m), values from a 30-digit reference evaluation
        for (m, exact) in [
            (4.0, 1.340_885_444_831_393_4),
            (0.04, 0.038_514_698_844_904_02),
            (30.0, 2.953_878_989_104_656),
        ] {
            let q = expected_log1p_exponential(m);
            assert!((q - exact).abs() < 1e-11, "m={m}: {q} vs {exact}");
        }
    }

    #[test]
    fn quadrature_expectation_agrees_with_monte_carlo() {
        let params = WirelessParams::two_pair_reference();
        let exact = WirelessGame::new(
            params.clone(),
            ChannelMode::Rayleigh,
            ExpectationMode::Quadrature,
        )
        .unwrap();
        let mc = WirelessGame::new(
            params,
            ChannelMode::Rayleigh,
            ExpectationMode::MonteCarlo {
                samples: 50_000,
                seed: 3,
            },
        )
        .unwrap();
        for p in [[3.96, 3.96], [1.0, 6.0], [12.0, 0.5]] {
            for j in 0..2 {
                let e = exact.expected_payoff(&p, j).unwrap().mean;
                let m = mc.expected_payoff(&p, j).unwrap();
                assert!(
                    (e - m.mean).abs() < 4.0 * m.std_error,
                    "{p:?} {j}: {e} vs {m:?}"
                );
            }
        }
    }

    #[test]
    fn exact_gradient_matches_difference_of_quadrature() {
        let params = WirelessParams::two_pair_reference();
        let g =
            WirelessGame::new(params, ChannelMode::Rayleigh, ExpectationMode::Quadrature).unwrap();
        let p = [2.5, 4.0];
        for j in 0..2 {
            let h = 1e-5;
            let mut a = p;
            let mut b = p;
            a[j] += h;
            b[j] -= h;
            let fd = (g.expected_payoff(&a, j).unwrap().mean
                - g.expected_payoff(&b, j).unwrap().mean)
                / (2.0 * h);
            assert!((fd - g.exact_own_gradient(&p, j).unwrap()).abs() < 1e-7);
        }
    }

    #[test]
    fn frozen_channel_expectation_is_mean_gain_payoff() {
        let params = WirelessParams::two_pair_reference();
        let g = WirelessGame::new(
            params.clone(),
            ChannelMode::FrozenAtMean,
            ExpectationMode::default(),
        )
        .unwrap();
        let p = [2.0, 3.0];
        let direct = payoff(&params.mean_gains(), &p, &params, 1).unwrap();
        assert_eq!(g.expected_payoff(&p, 1).unwrap().mean, direct);
        assert!(g.is_deterministic());
        let s = g.sample_state(&mut rng_from_seed(0));
        assert_eq!(g.payoff(&s, &p, 1).unwrap(), direct);
    }

    #[test]
    fn exact_equilibrium_is_stationary_and_below_mean_gain_solution() {
        let params = WirelessParams::two_pair_reference();
        let p = exact_expected_equilibrium(&params).unwrap();
        let g =
            WirelessGame::new(params, ChannelMode::Rayleigh, ExpectationMode::Quadrature).unwrap();
        for j in 0..2 {
            assert!(g.exact_own_gradient(&p, j).unwrap().abs() < 1e-9);
            assert!(p[j] < 4.0 / 1.01);
        }
    }
}
