//! The limiting non-autonomous ODE
//!
//! `d/dt hat_a_{j,t} = z_j b_j sin(Omega_j t + phi_j) E_S r_j(S, a_t)`,
//! `a_{j,t} = hat_a_{j,t} + b_j sin(Omega_j t + phi_j)`,
//!
//! its stochastic counterpart driven by realized payoffs, the affine
//! interpolation of discrete trajectories on the `khat` clock, and the
//! sup-gap metric between the two.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{check_len, rng_from_seed, GameModel, PerturbationParams};
use crate::linalg;
use crate::seeker::Trajectory;

/// Relative slack accepted at domain edges before an evaluation is rejected.
const EDGE_SLACK: f64 = 1e-9;

/// Default integrator step when comparing against a run with rate `lambda`.
pub fn default_step(lambda: f64) -> f64 {
    0.01f64.min(lambda / 10.0)
}

/// A real-time path with values in action space.
pub trait ContinuousPath {
    fn domain(&self) -> (f64, f64);
    fn eval(&self, t: f64) -> Result<Vec<f64>>;
}

fn check_domain(t: f64, (start, end): (f64, f64)) -> Result<f64> {
    let slack = EDGE_SLACK * start.abs().max(end.abs()).max(1.0);
    if !(t >= start - slack && t <= end + slack) {
        return Err(Error::OutOfDomain { t, start, end });
    }
    Ok(t.clamp(start, end))
}

/// Piecewise-linear evaluation over sorted breakpoints.
fn affine_eval(times: &[f64], values: &[Vec<f64>], t: f64) -> Vec<f64> {
    let i = times.partition_point(|&s| s <= t);
    if i == 0 {
        return values[0].clone();
    }
    if i == times.len() {
        return values[i - 1].clone();
    }
    let (t0, t1) = (times[i - 1], times[i]);
    if t == t0 {
        return values[i - 1].clone();
    }
    let w = (t - t0) / (t1 - t0);
    values[i - 1]
        .iter()
        .zip(&values[i])
        .map(|(a, b)| a + w * (b - a))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeSolution {
    pub grid: Vec<f64>,
    pub hat_a: Vec<Vec<f64>>,
    /// `hat_a` plus the dither at the same grid time.
    pub a: Vec<Vec<f64>>,
    pub step: f64,
}

impl OdeSolution {
    pub fn last_hat_a(&self) -> &[f64] {
        self.hat_a.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

impl ContinuousPath for OdeSolution {
    fn domain(&self) -> (f64, f64) {
        (self.grid[0], *self.grid.last().unwrap())
    }

    fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let t = check_domain(t, self.domain())?;
        Ok(affine_eval(&self.grid, &self.hat_a, t))
    }
}

/// Affine interpolation of a discrete trajectory's intermediary values,
/// with breakpoint `k` at `khat_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolatedPath {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl InterpolatedPath {
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::invalid(
                "path",
                "at least one breakpoint is required",
            ));
        }
        check_len("path values", times.len(), values.len())?;
        if times.iter().any(|t| t.is_nan()) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("path", "breakpoints must be nondecreasing"));
        }
        Ok(Self { times, values })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }
}

impl ContinuousPath for InterpolatedPath {
    fn domain(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let t = check_domain(t, self.domain())?;
        Ok(affine_eval(&self.times, &self.values, t))
    }
}

/// Interpolates `hat_a` on the trajectory's own `khat` clock.
pub fn interpolate(traj: &Trajectory) -> Result<InterpolatedPath> {
    InterpolatedPath::new(
        traj.records.iter().map(|r| r.khat).collect(),
        traj.records.iter().map(|r| r.hat_a.clone()).collect(),
    )
}

fn time_grid(t0: f64, t1: f64, h: f64) -> Result<Vec<f64>> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid(
            "h",
            format!("must be finite and > 0, got {h}"),
        ));
    }
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(Error::invalid(
            "t_span",
            format!("need finite t0 <= t1, got [{t0}, {t1}]"),
        ));
    }
    let full = ((t1 - t0) / h).floor() as usize;
    let mut grid: Vec<f64> = (0..=full).map(|i| t0 + i as f64 * h).collect();
    // drop a point that would leave a vanishing final step
    if grid.len() > 1 && t1 - grid[grid.len() - 1] < 1e-12 * h {
        grid.pop();
    }
    if *grid.last().unwrap() < t1 || grid.len() == 1 {
        grid.push(t1);
    }
    grid.dedup();
    Ok(grid)
}

fn dithered(hat_a: &[f64], t: f64, p: &PerturbationParams) -> Vec<f64> {
    hat_a
        .iter()
        .enumerate()
        .map(|(j, h)| h + p.signal(j, t))
        .collect()
}

fn weighted_drift(t: f64, payoffs: &[f64], p: &PerturbationParams) -> Result<Vec<f64>> {
    payoffs
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let n = p.node(j);
            let f = n.growth * n.amplitude * n.sine(t) * r;
            if f.is_finite() {
                Ok(f)
            } else {
                Err(Error::NonFiniteValue(format!(
                    "drift of node {j} at t = {t}"
                )))
            }
        })
        .collect()
}

/// `f_j(t, hat_a) = z_j b_j sin(Omega_j t + phi_j) E_S r_j(S, a_t)`.
pub fn drift<M: GameModel>(
    model: &M,
    p: &PerturbationParams,
    t: f64,
    hat_a: &[f64],
) -> Result<Vec<f64>> {
    let r = model.expected_payoffs(&dithered(hat_a, t, p))?;
    weighted_drift(t, &r, p)
}

fn check_setup<M: GameModel>(model: &M, p: &PerturbationParams, hat_a0: &[f64]) -> Result<()> {
    check_len("perturbation", model.node_count(), p.len())?;
    check_len("initial", model.node_count(), hat_a0.len())
}

fn axpy(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(x, y)| x + a * y).collect()
}

fn finish(grid: Vec<f64>, hat_a: Vec<Vec<f64>>, p: &PerturbationParams, step: f64) -> OdeSolution {
    let a = grid
        .iter()
        .zip(&hat_a)
        .map(|(&t, h)| dithered(h, t, p))
        .collect();
    OdeSolution {
        grid,
        hat_a,
        a,
        step,
    }
}

/// Classical fixed-step RK4 on `[t0, t1]`; the last step is shortened to land
/// on `t1`.
pub fn integrate_deterministic<M: GameModel>(
    model: &M,
    p: &PerturbationParams,
    hat_a0: &[f64],
    t0: f64,
    t1: f64,
    h: f64,
) -> Result<OdeSolution> {
    check_setup(model, p, hat_a0)?;
    let grid = time_grid(t0, t1, h)?;
    let mut states = Vec::with_capacity(grid.len());
    let mut x = hat_a0.to_vec();
    states.push(x.clone());
    for w in grid.windows(2) {
        let (t, dt) = (w[0], w[1] - w[0]);
        let k1 = drift(model, p, t, &x)?;
        let k2 = drift(model, p, t + dt / 2.0, &axpy(&x, dt / 2.0, &k1))?;
        let k3 = drift(model, p, t + dt / 2.0, &axpy(&x, dt / 2.0, &k2))?;
        let k4 = drift(model, p, t + dt, &axpy(&x, dt, &k3))?;
        for j in 0..x.len() {
            x[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        states.push(x.clone());
    }
    Ok(finish(grid, states, p, h))
}

/// Euler integration of `d/dt hat_a_{j,t} = z_j b_j sin(Omega_j t + phi_j) r_j(S_t, a_t)`
/// with a fresh state drawn at every step.
pub fn integrate_stochastic<M: GameModel>(
    model: &M,
    p: &PerturbationParams,
    hat_a0: &[f64],
    t0: f64,
    t1: f64,
    h: f64,
    seed: u64,
) -> Result<OdeSolution> {
    check_setup(model, p, hat_a0)?;
    let grid = time_grid(t0, t1, h)?;
    let mut rng = rng_from_seed(seed);
    let mut states = Vec::with_capacity(grid.len());
    let mut x = hat_a0.to_vec();
    states.push(x.clone());
    for w in grid.windows(2) {
        let (t, dt) = (w[0], w[1] - w[0]);
        let state = model.sample_state(&mut rng);
        let r = model.payoffs(&state, &dithered(&x, t, p))?;
        let f = weighted_drift(t, &r, p)?;
        x = axpy(&x, dt, &f);
        states.push(x.clone());
    }
    Ok(finish(grid, states, p, h))
}

/// Euler integration of the expected-payoff ODE; the reference for
/// [`integrate_stochastic`] on deterministic models.
pub fn integrate_euler<M: GameModel>(
    model: &M,
    p: &PerturbationParams,
    hat_a0: &[f64],
    t0: f64,
    t1: f64,
    h: f64,
) -> Result<OdeSolution> {
    check_setup(model, p, hat_a0)?;
    let grid = time_grid(t0, t1, h)?;
    let mut states = Vec::with_capacity(grid.len());
    let mut x = hat_a0.to_vec();
    states.push(x.clone());
    for w in grid.windows(2) {
        let f = drift(model, p, w[0], &x)?;
        x = axpy(&x, w[1] - w[0], &f);
        states.push(x.clone());
    }
    Ok(finish(grid, states, p, h))
}

/// Largest Euclidean distance between two paths over the given times.
pub fn sup_gap_on_grid<A, B>(a: &A, b: &B, times: &[f64]) -> Result<f64>
where
    A: ContinuousPath + ?Sized,
    B: ContinuousPath + ?Sized,
{
    let mut worst = 0.0f64;
    for &t in times {
        worst = worst.max(linalg::distance(&a.eval(t)?, &b.eval(t)?));
    }
    Ok(worst)
}

/// `sup_{t in [t0, t1]} ||path(t) - ode(t)||`, evaluated on the ODE grid
/// points inside the window.
pub fn sup_gap<P: ContinuousPath + ?Sized>(
    path: &P,
    ode: &OdeSolution,
    t0: f64,
    t1: f64,
) -> Result<f64> {
    for (start, end) in [path.domain(), ode.domain()] {
        check_domain(t0, (start, end))?;
        check_domain(t1, (start, end))?;
    }
    let times: Vec<f64> = ode
        .grid
        .iter()
        .copied()
        .filter(|&t| t >= t0 && t <= t1)
        .collect();
    sup_gap_on_grid(path, ode, &times)
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowGap {
    pub t0: f64,
    pub length: f64,
    pub gap: f64,
    pub ode: OdeSolution,
}

/// Restarts the deterministic ODE from `path(t0)` and measures the sup gap on
/// `[t0, t0 + length]`.
pub fn window_gap<M: GameModel, P: ContinuousPath + ?Sized>(
    model: &M,
    p: &PerturbationParams,
    path: &P,
    t0: f64,
    length: f64,
    h: f64,
) -> Result<WindowGap> {
    let start = path.eval(t0)?;
    let ode = integrate_deterministic(model, p, &start, t0, t0 + length, h)?;
    let gap = sup_gap(path, &ode, t0, t0 + length)?;
    Ok(WindowGap {
        t0,
        length,
        gap,
        ode,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicReport {
    /// `(1/T) int_0^T mu_j(t) r_j(S_t, a_t) dt` per node.
    pub sampled: Vec<f64>,
    /// `(1/T) int_0^T mu_j(t) E_S r_j(S, a_t) dt` per node.
    pub expected: Vec<f64>,
    pub gap: Vec<f64>,
}

/// The algorithm's own weight `mu_j(t) = sin(Omega_j t + phi_j)`.
pub fn dither_weight(p: &PerturbationParams) -> impl Fn(usize, f64) -> f64 + '_ {
    move |j, t| p.node(j).sine(t)
}

/// Compares time averages of weighted realized and expected payoffs along
/// the action path `actions(t)` over `[0, t_end]` by the trapezoid rule with
/// pitch `h`; one state is drawn per grid point.
pub fn ergodic_average_check<M, A, W>(
    model: &M,
    actions: A,
    weight: W,
    t_end: f64,
    h: f64,
    seed: u64,
) -> Result<ErgodicReport>
where
    M: GameModel,
    A: Fn(f64) -> Result<Vec<f64>>,
    W: Fn(usize, f64) -> f64,
{
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::invalid(
            "t_end",
            format!("must be finite and > 0, got {t_end}"),
        ));
    }
    let grid = time_grid(0.0, t_end, h)?;
    let n = model.node_count();
    let mut rng = rng_from_seed(seed);
    let mut sampled = vec![0.0; n];
    let mut expected = vec![0.0; n];
    let last = grid.len() - 1;
    for (i, &t) in grid.iter().enumerate() {
        let left = if i > 0 { t - grid[i - 1] } else { 0.0 };
        let right = if i < last { grid[i + 1] - t } else { 0.0 };
        let w = 0.5 * (left + right);
        let a = actions(t)?;
        check_len("actions", n, a.len())?;
        let state = model.sample_state(&mut rng);
        let realized = model.payoffs(&state, &a)?;
        let mean = model.expected_payoffs(&a)?;
        for j in 0..n {
            let mu = weight(j, t);
            sampled[j] += w * mu * realized[j];
            expected[j] += w * mu * mean[j];
        }
    }
    for v in sampled.iter_mut().chain(expected.iter_mut()) {
        *v /= t_end;
    }
    let gap = sampled
        .iter()
        .zip(&expected)
        .map(|(s, e)| (s - e).abs())
        .collect();
    Ok(ErgodicReport {
        sampled,
        expected,
        gap,
    })
}
