use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    convergence_time, decompose, fit_stability_envelope, gap_series, lipschitz_estimate,
    martingale_diagnostics, nash_gap_bound, tracking_bound, BoundConstants, ConvergenceTime,
    EnvelopeFit, MartingaleReport, NashGapBound, NoiseTail, StabilityTerm, TrackingBound,
};
use crate::error::{Error, Result};
use crate::game::{rng_from_seed, Expectation, GameModel, GradientOracle, StepSchedule};
use crate::linalg;
use crate::ode::{default_step, interpolate, window_gap, ContinuousPath};
use crate::seeker::{baseline_gradient_ascent, run, SeekerConfig, Trajectory};
use crate::stats::{self, linear_regression, LinearFit};
use crate::wireless::{
    analytic_equilibrium, diagonal_dominance_check, exact_expected_equilibrium,
    own_payoff_derivative, sample_channel, ChannelMode, ExpectationMode, WirelessGame,
};

use super::config::{ExperimentConfig, Game, GameConfig};
use super::plot::plot_trajectory;
use super::trajectory_csv::{read_trajectory, write_trajectory};

/// Channel draws used for the stationarity diagnostic at the equilibrium.
const STATIONARITY_SAMPLES: usize = 100_000;
/// Samples of the gap series used by the envelope fit.
const ENVELOPE_POINTS: usize = 500;

macro_rules! with_model {
    ($game:expr, $m:ident => $body:expr) => {
        match $game {
            Game::Wireless($m) => $body,
            Game::Quadratic($m) => $body,
        }
    };
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Malformed(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn save_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    write_trajectory(traj, BufWriter::new(File::create(path)?))
}

/// Index where the averaging window starts.
pub fn window_start(cfg: &ExperimentConfig, traj: &Trajectory) -> Result<usize> {
    let width = ((traj.len() as f64) * cfg.analysis.window_fraction).ceil() as usize;
    let period = if cfg.analysis.align_periods {
        Some(cfg.seeker.perturbation()?.longest_period())
    } else {
        None
    };
    Ok(traj.window_start(width.max(1), period))
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineSummary {
    pub trajectory: PathBuf,
    pub windowed_mean: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub trajectory: PathBuf,
    pub horizon: usize,
    pub window_start: usize,
    pub window_len: usize,
    pub windowed_mean: Vec<f64>,
    pub final_hat_a: Vec<f64>,
    /// Closed-form reference equilibrium, when available.
    pub reference: Option<Vec<f64>>,
    /// `|mean_j - ref_j| / |ref_j|`.
    pub relative_error: Option<Vec<f64>>,
    /// `||windowed mean - ref||`.
    pub final_gap: Option<f64>,
    pub baseline: Option<BaselineSummary>,
    pub elapsed_seconds: f64,
}

impl RunReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "trajectory: {}", self.trajectory.display());
        let _ = writeln!(s, "horizon: {}", self.horizon);
        let _ = writeln!(
            s,
            "window: records {}..={} ({} records)",
            self.window_start, self.horizon, self.window_len
        );
        let _ = writeln!(s, "windowed mean hat_a: {}", fmt_vec(&self.windowed_mean));
        let _ = writeln!(s, "final hat_a: {}", fmt_vec(&self.final_hat_a));
        if let Some(r) = &self.reference {
            let _ = writeln!(s, "reference equilibrium: {}", fmt_vec(r));
        }
        if let Some(e) = &self.relative_error {
            let _ = writeln!(s, "relative error: {}", fmt_vec(e));
        }
        if let Some(g) = self.final_gap {
            let _ = writeln!(s, "gap to reference: {g:.6}");
        }
        if let Some(b) = &self.baseline {
            let _ = writeln!(s, "baseline windowed mean: {}", fmt_vec(&b.windowed_mean));
        }
        let _ = writeln!(s, "elapsed: {:.3} s", self.elapsed_seconds);
        s
    }
}

fn run_baseline<M: GradientOracle>(
    model: &M,
    cfg: &ExperimentConfig,
    seeker: &SeekerConfig,
    upper: &[f64],
) -> Result<Trajectory> {
    baseline_gradient_ascent(
        model,
        &seeker.schedule,
        upper,
        &seeker.initial,
        seeker.horizon,
        cfg.seeker.seed,
    )
}

/// Runs the learner, writes `trajectory.csv`, `summary.txt` and `summary.json`.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunReport> {
    let started = Instant::now();
    let game = cfg.game.build()?;
    let seeker = cfg.seeker_config()?;
    let traj = with_model!(&game, m => run(m, &seeker))?;
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir)?;
    let path = dir.join("trajectory.csv");
    save_trajectory(&traj, &path)?;

    let start = window_start(cfg, &traj)?;
    let mean = traj.mean_hat_a_from(start);
    let reference = cfg.game.equilibrium().ok();
    let relative_error = reference.as_ref().map(|r| {
        mean.iter()
            .zip(r)
            .map(|(m, r)| (m - r).abs() / r.abs().max(f64::MIN_POSITIVE))
            .collect()
    });
    let final_gap = reference.as_ref().map(|r| linalg::distance(&mean, r));

    let baseline = match &cfg.analysis.baseline {
        Some(b) => {
            let bt = with_model!(&game, m => run_baseline(m, cfg, &seeker, &b.upper))?;
            let bpath = dir.join("baseline.csv");
            save_trajectory(&bt, &bpath)?;
            Some(BaselineSummary {
                trajectory: bpath,
                windowed_mean: bt.mean_hat_a_from(window_start(cfg, &bt)?),
            })
        }
        None => None,
    };

    let report = RunReport {
        trajectory: path,
        horizon: traj.horizon(),
        window_start: start,
        window_len: traj.len() - start,
        final_hat_a: traj.last().map(|r| r.hat_a.clone()).unwrap_or_default(),
        windowed_mean: mean,
        reference,
        relative_error,
        final_gap,
        baseline,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    };
    std::fs::write(dir.join("summary.txt"), report.summary())?;
    write_json(&dir.join("summary.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub mean_gap: f64,
    pub std_error: f64,
    pub gaps: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    /// Mean gaps strictly decrease as the rate decreases.
    pub monotone: bool,
    /// Mean gap regressed on `sqrt(lambda)`.
    pub fit: Option<LinearFit>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub gap_file: PathBuf,
    pub t0: f64,
    pub length: f64,
    pub step: f64,
    pub sup_gap: f64,
    pub sweep: Option<SweepReport>,
}

impl CompareReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "window: [{}, {}] (step {})",
            self.t0,
            self.t0 + self.length,
            self.step
        );
        let _ = writeln!(s, "sup gap: {:.6e}", self.sup_gap);
        let _ = writeln!(s, "gap rows: {}", self.gap_file.display());
        if let Some(sw) = &self.sweep {
            let _ = writeln!(s, "rate sweep:");
            for p in &sw.points {
                let _ = writeln!(
                    s,
                    "  lambda {:<8} mean sup gap {:.6} (se {:.6}, {} seeds)",
                    p.lambda,
                    p.mean_gap,
                    p.std_error,
                    p.gaps.len()
                );
            }
            let _ = writeln!(s, "  strictly decreasing with lambda: {}", sw.monotone);
            if let Some(f) = &sw.fit {
                let _ = writeln!(
                    s,
                    "  gap ~ {:.4} + {:.4} sqrt(lambda), R^2 = {:.4}",
                    f.intercept, f.slope, f.r_squared
                );
            }
        }
        s
    }
}

fn horizon_for(schedule: &StepSchedule, end: f64, minimum: usize) -> usize {
    // smallest k with khat(k) >= end, plus one for safety
    let mut needed = minimum;
    let mut clock = schedule.clock();
    if let Some(t) = clock.find(|t| t.khat >= end) {
        needed = needed.max(t.k + 1);
    }
    needed
}

/// `(t, path value, ODE value, gap)` at one grid time.
type GapRow = (f64, Vec<f64>, Vec<f64>, f64);

fn sup_gap_for<M: GameModel>(
    model: &M,
    seeker: &SeekerConfig,
    t0: f64,
    length: f64,
    h: f64,
) -> Result<(f64, Vec<GapRow>)> {
    let traj = run(model, seeker)?;
    let path = interpolate(&traj)?;
    let w = window_gap(model, &seeker.perturbation, &path, t0, length, h)?;
    let rows = w
        .ode
        .grid
        .iter()
        .zip(&w.ode.hat_a)
        .map(|(&t, o)| {
            let p = path.eval(t)?;
            let g = linalg::distance(&p, o);
            Ok((t, p, o.clone(), g))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((w.gap, rows))
}

fn sweep<M: GameModel + Sync>(
    model: &M,
    base: &SeekerConfig,
    t0: f64,
    length: f64,
    step: Option<f64>,
    lambdas: &[f64],
    seeds: usize,
) -> Result<SweepReport> {
    let jobs: Vec<(usize, u64)> = (0..lambdas.len())
        .flat_map(|i| (0..seeds as u64).map(move |s| (i, s)))
        .collect();
    let gaps: Vec<f64> = jobs
        .par_iter()
        .map(|&(i, s)| {
            let lambda = lambdas[i];
            let schedule = StepSchedule::constant(lambda)?;
            let cfg = SeekerConfig {
                schedule,
                horizon: horizon_for(&schedule, t0 + length, 0),
                seed: base.seed.wrapping_add(s),
                ..base.clone()
            };
            let h = step.unwrap_or_else(|| default_step(lambda));
            sup_gap_for(model, &cfg, t0, length, h).map(|(g, _)| g)
        })
        .collect::<Result<_>>()?;
    let points: Vec<SweepPoint> = lambdas
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let g = gaps[i * seeds..(i + 1) * seeds].to_vec();
            SweepPoint {
                lambda,
                mean_gap: stats::mean(&g),
                std_error: stats::std_error(&g),
                gaps: g,
            }
        })
        .collect();
    let mut by_rate: Vec<&SweepPoint> = points.iter().collect();
    by_rate.sort_by(|a, b| b.lambda.total_cmp(&a.lambda));
    let monotone = by_rate.windows(2).all(|w| w[1].mean_gap < w[0].mean_gap);
    let x: Vec<f64> = points.iter().map(|p| p.lambda.sqrt()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.mean_gap).collect();
    Ok(SweepReport {
        points,
        monotone,
        fit: linear_regression(&x, &y),
    })
}

/// Compares the interpolated learner against the limiting ODE restarted at
/// the window's left edge, and optionally sweeps constant rates over seeds.
/// Writes `compare.csv`, `sweep.csv` (when sweeping) and `compare.txt`.
pub fn cmd_compare(cfg: &ExperimentConfig) -> Result<CompareReport> {
    let window = cfg
        .analysis
        .compare
        .clone()
        .ok_or_else(|| Error::invalid("analysis.compare", "section is required by compare"))?;
    let game = cfg.game.build()?;
    let seeker = cfg.seeker_config()?;
    let h = window
        .step
        .unwrap_or_else(|| default_step(seeker.schedule.scale()));
    let (sup, rows) =
        with_model!(&game, m => sup_gap_for(m, &seeker, window.t0, window.length, h))?;

    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir)?;
    let gap_file = dir.join("compare.csv");
    let n = seeker.initial.len();
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&gap_file)?));
    let mut head = vec!["t".to_string()];
    head.extend((1..=n).map(|j| format!("path_{j}")));
    head.extend((1..=n).map(|j| format!("ode_{j}")));
    head.push("gap".into());
    w.write_record(&head)?;
    for (t, p, o, g) in &rows {
        let mut rec = vec![t.to_string()];
        rec.extend(p.iter().map(f64::to_string));
        rec.extend(o.iter().map(f64::to_string));
        rec.push(g.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;

    let sweep = match &cfg.analysis.sweep {
        Some(s) => {
            let report = with_model!(&game, m => sweep(m, &seeker, window.t0, window.length, window.step, &s.lambdas, s.seeds))?;
            let mut sw =
                csv::Writer::from_writer(BufWriter::new(File::create(dir.join("sweep.csv"))?));
            sw.write_record(["lambda", "seed", "sup_gap"])?;
            for p in &report.points {
                for (i, g) in p.gaps.iter().enumerate() {
                    let seed = seeker.seed.wrapping_add(i as u64);
                    sw.write_record([p.lambda.to_string(), seed.to_string(), g.to_string()])?;
                }
            }
            sw.flush()?;
            Some(report)
        }
        None => None,
    };
    let report = CompareReport {
        gap_file,
        t0: window.t0,
        length: window.length,
        step: h,
        sup_gap: sup,
        sweep,
    };
    std::fs::write(dir.join("compare.txt"), report.summary())?;
    write_json(&dir.join("compare.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumReport {
    pub power: Vec<f64>,
    pub target: Vec<f64>,
    pub residual: f64,
    pub dominance_margins: Vec<f64>,
    pub diagonally_dominant: bool,
    /// Monte-Carlo mean of `d r_j / d p_j` at the solution (fading channel).
    pub stationarity: Vec<Expectation>,
    /// Exact `d E r_j / d p_j` at the solution under Rayleigh fading.
    pub exact_gradient: Vec<f64>,
    /// Stationary point of the exact expected payoffs under Rayleigh fading.
    pub fading_equilibrium: Vec<f64>,
    pub warnings: Vec<String>,
}

impl EquilibriumReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let powers: Vec<String> = self.power.iter().map(|p| format!("{p:.4}")).collect();
        let _ = writeln!(s, "p* = [{}]", powers.join(", "));
        let _ = writeln!(s, "p* (full precision) = {:?}", self.power);
        let _ = writeln!(s, "target = {}", fmt_vec(&self.target));
        let _ = writeln!(s, "linear-system residual = {:.3e}", self.residual);
        let _ = writeln!(
            s,
            "dominance margins = {} (dominant: {})",
            fmt_vec(&self.dominance_margins),
            self.diagonally_dominant
        );
        for (j, e) in self.stationarity.iter().enumerate() {
            let _ = writeln!(
                s,
                "stationarity residual node {}: Monte-Carlo {:.6} +/- {:.6}, exact {:.6}",
                j + 1,
                e.mean,
                e.std_error,
                self.exact_gradient[j]
            );
        }
        let _ = writeln!(
            s,
            "stationary point of the fading-averaged payoffs = {}",
            fmt_vec(&self.fading_equilibrium)
        );
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

/// Solves the mean-gain first-order system and reports how far it is from
/// stationarity under fading.
pub fn cmd_equilibrium(cfg: &ExperimentConfig) -> Result<EquilibriumReport> {
    let GameConfig::Wireless { params, .. } = &cfg.game else {
        return Err(Error::invalid(
            "game.kind",
            "equilibrium requires the wireless game",
        ));
    };
    let dominance = diagonal_dominance_check(params);
    let sol = analytic_equilibrium(params)?;
    let mut warnings = Vec::new();
    if !dominance.dominant {
        warnings.push(
            "mean-gain matrix is not diagonally dominant; uniqueness is not guaranteed".into(),
        );
    }
    let mut rng = rng_from_seed(cfg.seeker.seed);
    let n = params.node_count();
    let mut grads = vec![Vec::with_capacity(STATIONARITY_SAMPLES); n];
    for _ in 0..STATIONARITY_SAMPLES {
        let ch = sample_channel(params, &mut rng);
        for (j, g) in grads.iter_mut().enumerate() {
            g.push(own_payoff_derivative(&ch.gains, &sol.power, params, j)?);
        }
    }
    let stationarity: Vec<Expectation> = grads.into_iter().map(Expectation::from_values).collect();
    let exact = WirelessGame::new(
        params.clone(),
        ChannelMode::Rayleigh,
        ExpectationMode::Quadrature,
    )?;
    let exact_gradient = (0..n)
        .map(|j| exact.exact_own_gradient(&sol.power, j))
        .collect::<Result<Vec<_>>>()?;
    let report = EquilibriumReport {
        fading_equilibrium: exact_expected_equilibrium(params)?,
        power: sol.power,
        target: sol.target,
        residual: sol.residual,
        dominance_margins: dominance.margins,
        diagonally_dominant: dominance.dominant,
        stationarity,
        exact_gradient,
        warnings,
    };
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("equilibrium.txt"), report.summary())?;
    write_json(&dir.join("equilibrium.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub constants: BoundConstants,
    pub lipschitz_estimated: bool,
    pub tail: NoiseTail,
    pub window_start: usize,
    pub tracking: TrackingBound,
    pub stability: Option<StabilityTerm>,
    pub nash_gap: Option<NashGapBound>,
    pub convergence_time: Option<ConvergenceTime>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub martingale: MartingaleSummary,
    pub reference: Option<Vec<f64>>,
    pub envelope: Option<EnvelopeFit>,
    pub envelope_error: Option<String>,
    /// `max_j b_j^3`, the dither part of the floor.
    pub dither_floor: f64,
    pub bounds: Option<BoundsReport>,
}

/// Martingale diagnostics without the per-iteration ratios.
#[derive(Debug, Clone, Serialize)]
pub struct MartingaleSummary {
    pub mean: Vec<Expectation>,
    pub mean_zero: bool,
    pub c_hat: f64,
    pub identically_zero: bool,
}

impl From<&MartingaleReport> for MartingaleSummary {
    fn from(r: &MartingaleReport) -> Self {
        Self {
            mean: r.mean.clone(),
            mean_zero: r.mean_zero,
            c_hat: r.c_hat,
            identically_zero: r.c_hat == 0.0,
        }
    }
}

impl AnalysisReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let m = &self.martingale;
        let _ = writeln!(s, "[martingale]");
        if m.identically_zero {
            let _ = writeln!(s, "noise is identically zero (M = 0)");
        }
        for (j, e) in m.mean.iter().enumerate() {
            let _ = writeln!(
                s,
                "node {}: mean {:.6e} +/- {:.6e}",
                j + 1,
                e.mean,
                e.std_error
            );
        }
        let _ = writeln!(s, "mean within 3 standard errors of zero: {}", m.mean_zero);
        let _ = writeln!(s, "c_hat = max ||M||^2 / (1 + ||a||^2) = {:.6}", m.c_hat);
        let _ = writeln!(s, "[envelope]");
        match (&self.envelope, &self.envelope_error) {
            (Some(f), _) => {
                let _ = writeln!(
                    s,
                    "Mbar = {:.6}, mbar = {:.6}, floor = {:.6} (fitted), Delta0 = {:.6}, R^2 = {:.4}",
                    f.amplitude, f.decay, f.floor, f.delta0, f.r_squared
                );
            }
            (None, Some(e)) => {
                let _ = writeln!(s, "fit unavailable: {e}");
            }
            _ => {
                let _ = writeln!(s, "no reference equilibrium");
            }
        }
        let _ = writeln!(
            s,
            "max_j b_j^3 = {:.6} (unit-constant residual term)",
            self.dither_floor
        );
        if let Some(b) = &self.bounds {
            let _ = writeln!(s, "[bounds]");
            let c = &b.constants;
            let _ = writeln!(
                s,
                "L = {:.6}{}, C0 = {:.6}, T = {}, ||r(0)|| = {:.6}",
                c.lipschitz,
                if b.lipschitz_estimated {
                    " (estimated)"
                } else {
                    ""
                },
                c.action_bound,
                c.window,
                c.payoff_at_origin
            );
            let _ = writeln!(
                s,
                "tail from record {}: sum lambda^2 = {:.6e}, edge lambda = {}, sup ||delta|| = {:.6e}",
                b.window_start, b.tail.sum_squares, b.tail.edge_rate, b.tail.sup_delta
            );
            let t = &b.tracking;
            let _ = writeln!(
                s,
                "C_T = {:.6}, K = {:.6}, e^(LT) = {:.6}, tracking bound = {:.6}",
                t.c_t, t.k, t.growth, t.bound
            );
            if let Some(c2) = &b.nash_gap {
                let _ = writeln!(
                    s,
                    "y1 = {:.6} (residual part {:.6}), y2 = {:.6}, total = {:.6}",
                    c2.y1, c2.y1_residual, c2.y2, c2.total
                );
            }
            if let Some(ct) = &b.convergence_time {
                let _ = writeln!(
                    s,
                    "convergence time = {:.6}{}",
                    ct.time,
                    if ct.already_within {
                        " (already within precision)"
                    } else {
                        ""
                    }
                );
            }
        }
        s
    }
}

fn check_matches(cfg: &ExperimentConfig, traj: &Trajectory) -> Result<()> {
    let n = cfg.game.node_count();
    if traj.node_count() != n {
        return Err(Error::invalid(
            "trajectory",
            format!("has {} nodes, config has {n}", traj.node_count()),
        ));
    }
    let initial = cfg.initial()?;
    let first = &traj.records[0];
    if linalg::distance(&first.hat_a, &initial) > 1e-9 * linalg::norm(&initial).max(1.0) {
        return Err(Error::invalid(
            "trajectory",
            "initial point differs from the config",
        ));
    }
    let rate = cfg.seeker.schedule.rate(0);
    if (first.lambda - rate).abs() > 1e-12 * rate {
        return Err(Error::invalid(
            "trajectory",
            format!(
                "rate {} differs from the configured schedule ({rate})",
                first.lambda
            ),
        ));
    }
    Ok(())
}

fn analyze_with<M: GameModel + Sync>(
    model: &M,
    cfg: &ExperimentConfig,
    traj: &Trajectory,
) -> Result<AnalysisReport> {
    let p = cfg.seeker.perturbation()?;
    let martingale = martingale_diagnostics(traj, model, &p)?;
    let dither_floor = p.max_amplitude().powi(3);
    let reference = cfg.game.equilibrium().ok();

    let path = interpolate(traj)?;
    let end = path.domain().1;
    let (envelope, envelope_error) = match &reference {
        Some(a_star) if end > 0.0 => {
            let times: Vec<f64> = (0..ENVELOPE_POINTS)
                .map(|i| end * i as f64 / (ENVELOPE_POINTS - 1) as f64)
                .collect();
            match gap_series(&path, a_star, &times).and_then(|g| fit_stability_envelope(&times, &g))
            {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            }
        }
        _ => (None, None),
    };

    let bounds = match &cfg.analysis.bounds {
        None => None,
        Some(b) => {
            let (lipschitz, lipschitz_estimated) = match (b.lipschitz, &b.domain) {
                (Some(l), _) => (l, false),
                (None, Some(d)) => {
                    let mut rng = rng_from_seed(cfg.seeker.seed);
                    (
                        lipschitz_estimate(model, d, b.lipschitz_pairs, &mut rng)?.overall,
                        true,
                    )
                }
                (None, None) => unreachable!("validated"),
            };
            let action_bound = b.action_bound.unwrap_or_else(|| {
                traj.records
                    .iter()
                    .map(|r| linalg::norm(&r.a))
                    .fold(0.0, f64::max)
            });
            let zero = vec![0.0; model.node_count()];
            let constants = BoundConstants {
                lipschitz,
                action_bound,
                window: b.window,
                payoff_at_origin: linalg::norm(&model.expected_payoffs(&zero)?),
            };
            let start = traj
                .records
                .partition_point(|r| r.khat < end - b.window)
                .min(traj.len() - 1);
            let decomposition = decompose(traj, model, &p)?;
            let rates: Vec<f64> = traj.records[start..].iter().map(|r| r.lambda).collect();
            let tail = NoiseTail {
                sup_delta: decomposition.sup_delta(start, traj.len() - 1 - start),
                ..NoiseTail::from_rates(&rates, &[])?
            };
            let tracking = tracking_bound(&constants, &tail)?;
            let amplitude = b.amplitude.or(envelope.map(|f| f.amplitude));
            let decay = b.decay.or(envelope.map(|f| f.decay));
            let delta0 = reference
                .as_ref()
                .map(|r| linalg::distance(&traj.records[0].hat_a, r));
            let stability = match (amplitude, decay, delta0) {
                (Some(amplitude), Some(decay), Some(delta0)) => Some(StabilityTerm {
                    amplitude,
                    decay,
                    delta0,
                    eps: b.eps,
                    max_amplitude: p.max_amplitude(),
                    t: end,
                }),
                _ => None,
            };
            let nash_gap = match &stability {
                Some(s) => Some(nash_gap_bound(s, &constants, &tail)?),
                None => None,
            };
            let convergence_time = match &stability {
                Some(s) if s.delta0 > 0.0 => {
                    Some(convergence_time(s.delta0, s.amplitude, s.decay, s.eps)?)
                }
                _ => None,
            };
            Some(BoundsReport {
                constants,
                lipschitz_estimated,
                tail,
                window_start: start,
                tracking,
                stability,
                nash_gap,
                convergence_time,
            })
        }
    };

    Ok(AnalysisReport {
        martingale: MartingaleSummary::from(&martingale),
        reference,
        envelope,
        envelope_error,
        dither_floor,
        bounds,
    })
}

/// Bounds and diagnostics for a saved trajectory. Writes `analysis.txt` and
/// `analysis.json`.
pub fn cmd_analyze(cfg: &ExperimentConfig, trajectory: &Path) -> Result<AnalysisReport> {
    let traj = read_trajectory(File::open(trajectory)?)?;
    check_matches(cfg, &traj)?;
    let game = cfg.game.build()?;
    let report = with_model!(&game, m => analyze_with(m, cfg, &traj))?;
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("analysis.txt"), report.summary())?;
    write_json(&dir.join("analysis.json"), &report)?;
    Ok(report)
}

/// Renders `power.svg` and `payoff.svg` from a trajectory file.
pub fn cmd_plot(trajectory: &Path, out: &Path, reference: Option<&[f64]>) -> Result<Vec<PathBuf>> {
    let traj = read_trajectory(File::open(trajectory)?)?;
    plot_trajectory(&traj, out, reference)
}
