//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::time::{Duration, Instant};

use nash_seek::analysis::{
    convergence_time, fit_stability_envelope, martingale_diagnostics, tracking_bound,
    BoundConstants, NoiseTail,
};
use nash_seek::game::{
    rng_from_seed, validate_frequencies, Expectation, GameModel, GradientOracle, NodeDither,
    PerturbationParams, QuadraticGame, StepSchedule,
};
use nash_seek::harness::{
    cmd_compare, cmd_run, AnalysisSection, CompareSection, ExperimentConfig, GameConfig,
    InitialPoint, OutputSection, SeekerSection, SweepSection,
};
use nash_seek::ode::{integrate_deterministic, interpolate, ContinuousPath};
use nash_seek::seeker::{run, SeekerConfig};
use nash_seek::wireless::{
    analytic_equilibrium, ChannelMode, ExpectationMode, WirelessGame, WirelessParams,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_time(elapsed: Duration, limit: Duration, outcome: Outcome) -> Outcome {
    let note = format!(
        "{:.3} s (limit {} s)",
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    match outcome {
        Ok(d) if elapsed <= limit => Ok(format!("{d}; {note}")),
        Ok(d) => Err(format!("{d}; too slow: {note}")),
        Err(d) => Err(format!("{d}; {note}")),
    }
}

fn scratch_dir() -> tempfile::TempDir {
    tempfile::tempdir().expect("temporary directory")
}

fn equilibrium_oracle() -> Outcome {
    let params = WirelessParams::two_pair_reference();
    let started = Instant::now();
    let sol = analytic_equilibrium(&params).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let rounded: Vec<String> = sol.power.iter().map(|p| format!("{p:.4}")).collect();
    let exact = 4.0 / 1.01;
    let ok = rounded.iter().all(|r| r == "3.9604")
        && sol.power.iter().all(|p| (p - exact).abs() < 1e-12);
    within_time(
        elapsed,
        Duration::from_millis(1),
        check(ok, format!("p* = [{}]", rounded.join(", "))),
    )
}

fn reference_reproduction() -> Outcome {
    let out = scratch_dir();
    let target = 4.0 / 1.01;
    let started = Instant::now();
    let mut passing = 0;
    let mut rows = Vec::new();
    let mut slowest = Duration::ZERO;
    for seed in 0..10u64 {
        let mut cfg = ExperimentConfig::wireless_reference();
        cfg.seeker.seed = seed;
        cfg.output.dir = out.path().join(format!("seed{seed}"));
        let t = Instant::now();
        let report = cmd_run(&cfg).map_err(|e| e.to_string())?;
        slowest = slowest.max(t.elapsed());
        let errors: Vec<f64> = report
            .windowed_mean
            .iter()
            .map(|m| (m - target).abs() / target)
            .collect();
        if errors.iter().all(|&e| e <= 0.10) {
            passing += 1;
        }
        rows.push(format!(
            "seed {seed}: [{}]",
            report
                .windowed_mean
                .iter()
                .map(|m| format!("{m:.3}"))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    let total = started.elapsed();
    let detail = format!(
        "{passing}/10 seeds within 10% of {target:.4} ({}); slowest run {:.2} s",
        rows.join("; "),
        slowest.as_secs_f64()
    );
    within_time(
        slowest,
        Duration::from_secs(60),
        check(passing >= 8, detail),
    )
    .map(|d| format!("{d}; all seeds {:.2} s", total.as_secs_f64()))
}

fn gap_scaling() -> Outcome {
    let out = scratch_dir();
    let cfg = ExperimentConfig {
        game: GameConfig::Quadratic {
            targets: vec![2.0],
            curvatures: vec![1.0],
            noise_std: 1.0,
        },
        seeker: SeekerSection {
            amplitude: vec![0.2],
            frequency: vec![1.0],
            phase: vec![0.0],
            growth: vec![1.0],
            schedule: StepSchedule::Constant { lambda: 0.05 },
            horizon: 1000,
            initial: InitialPoint::Explicit(vec![0.0]),
            seed: 0,
            clamp_nonnegative: Some(false),
        },
        analysis: AnalysisSection {
            compare: Some(CompareSection {
                t0: 10.0,
                length: 20.0,
                step: None,
            }),
            sweep: Some(SweepSection {
                lambdas: vec![0.1, 0.05, 0.025],
                seeds: 30,
            }),
            ..AnalysisSection::default()
        },
        output: OutputSection {
            dir: out.path().to_path_buf(),
        },
    };
    let started = Instant::now();
    let report = cmd_compare(&cfg).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let sweep = report.sweep.ok_or("no sweep in report")?;
    let fit = sweep.fit.ok_or("regression undefined")?;
    let gaps: Vec<String> = sweep
        .points
        .iter()
        .map(|p| format!("{}: {:.4}", p.lambda, p.mean_gap))
        .collect();
    let ratio = sweep.points[0].mean_gap / sweep.points[2].mean_gap;
    let ok = sweep.monotone && fit.r_squared >= 0.9;
    within_time(
        elapsed,
        Duration::from_secs(120),
        check(
            ok,
            format!(
                "mean sup gaps [{}], strictly decreasing {}, R^2 vs sqrt(lambda) {:.4}, g(0.1)/g(0.025) {:.2}",
                gaps.join(", "),
                sweep.monotone,
                fit.r_squared,
                ratio
            ),
        ),
    )
}

fn single_dither(b: f64, w: f64, phi: f64, z: f64) -> PerturbationParams {
    PerturbationParams::new(vec![NodeDither {
        amplitude: b,
        frequency: w,
        phase: phi,
        growth: z,
    }])
    .expect("valid dither")
}

fn integrator_correctness() -> Outcome {
    // E r = c, so hat_a(t) = hat_a0 + z b c (cos(phi) - cos(Omega t + phi)) / Omega
    let (c, b, w, phi, z, a0) = (1.5, 0.8, 1.3, 0.4, 0.7, 0.25);
    let game =
        QuadraticGame::new(vec![vec![0.0]], vec![0.0], vec![c], 0.0).map_err(|e| e.to_string())?;
    let p = single_dither(b, w, phi, z);
    let exact = a0 + z * b * c * (phi.cos() - (w + phi).cos()) / w;
    let err = |h: f64| -> Result<f64, String> {
        let s =
            integrate_deterministic(&game, &p, &[a0], 0.0, 1.0, h).map_err(|e| e.to_string())?;
        Ok((s.last_hat_a()[0] - exact).abs())
    };
    let at_fine = err(1e-3)?;
    let floor = 1e-13;
    let mut ratios = Vec::new();
    let mut ok = at_fine <= 1e-8;
    let mut h = 0.25;
    let mut prev = err(h)?;
    while h > 1e-3 {
        h /= 2.0;
        let cur = err(h)?;
        if cur <= floor {
            break;
        }
        let r = prev / cur;
        ok &= r >= 8.0;
        ratios.push(format!("{r:.1}"));
        prev = cur;
    }
    ok &= !ratios.is_empty();
    check(
        ok,
        format!(
            "error at h=1e-3: {at_fine:.2e}; halving ratios [{}]",
            ratios.join(", ")
        ),
    )
}

fn martingale() -> Outcome {
    let mut cfg = ExperimentConfig::wireless_reference();
    cfg.seeker.horizon = 100_000;
    cfg.seeker.seed = 7;
    let seeker = cfg.seeker_config().map_err(|e| e.to_string())?;
    let game = WirelessGame::new(
        WirelessParams::two_pair_reference(),
        ChannelMode::Rayleigh,
        ExpectationMode::Quadrature,
    )
    .map_err(|e| e.to_string())?;
    let traj = run(&game, &seeker).map_err(|e| e.to_string())?;
    let report =
        martingale_diagnostics(&traj, &game, &seeker.perturbation).map_err(|e| e.to_string())?;
    let half = report.ratio[..report.ratio.len() / 2]
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let growth = report.c_hat / half;
    let means: Vec<String> = report
        .mean
        .iter()
        .map(|e| format!("{:.2e} (se {:.2e})", e.mean, e.std_error))
        .collect();
    check(
        report.mean_zero && growth <= 1.5,
        format!(
            "mean M [{}], |mean| <= 3 se: {}; c_hat {:.4} over 1e5 vs {:.4} over 5e4, ratio {:.3}",
            means.join(", "),
            report.mean_zero,
            report.c_hat,
            half,
            growth
        ),
    )
}

fn bound_calculators() -> Outcome {
    let mut failures = Vec::new();
    let zero = BoundConstants {
        lipschitz: 0.0,
        action_bound: 5.0,
        window: 3.0,
        payoff_at_origin: 0.0,
    };
    if zero.c_t() != 0.0 {
        failures.push(format!("C_T with L = 0, r(0) = 0 is {}", zero.c_t()));
    }
    let (amplitude, decay, eps) = (2.0, 0.5, 0.01);
    match convergence_time(eps / amplitude, amplitude, decay, eps) {
        Ok(t) if t.time == 0.0 => {}
        other => failures.push(format!("T at Delta0 Mbar = eps: {other:?}")),
    }
    let delta0 = 3.0;
    let shift = convergence_time(delta0, amplitude, decay, eps / 10.0)
        .and_then(|a| convergence_time(delta0, amplitude, decay, eps).map(|b| a.time - b.time));
    match shift {
        Ok(d) if (d - 10f64.ln() / decay).abs() <= 1e-12 => {}
        other => failures.push(format!("decade shift: {other:?}")),
    }
    let constants = BoundConstants {
        lipschitz: 1.0,
        action_bound: 1.0,
        window: 1.0,
        payoff_at_origin: 1.0,
    };
    let tail = NoiseTail {
        sum_squares: 0.01,
        edge_rate: 0.1,
        sup_delta: 0.0,
    };
    let bound = tracking_bound(&constants, &tail).map(|b| b.bound);
    match bound {
        Ok(b) if format!("{b:.5e}") == format!("{:.5e}", 0.81862) => {}
        ref other => failures.push(format!("tracking_bound fixture: {other:?}")),
    }
    let value = bound.unwrap_or(f64::NAN);
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("C_T(0) = 0, T(eps) = 0, decade shift = ln 10 / m, tracking fixture {value:.8}")
        } else {
            failures.join("; ")
        },
    )
}

fn invariants() -> Outcome {
    let mut failures = Vec::new();

    let game = QuadraticGame::single_peak(2.0, 0.5).map_err(|e| e.to_string())?;
    let p = single_dither(0.3, 1.0, 0.2, 1.0);
    let base = SeekerConfig {
        perturbation: p.clone(),
        schedule: StepSchedule::vanishing(0.1).map_err(|e| e.to_string())?,
        horizon: 2000,
        initial: vec![1.0],
        seed: 42,
        clamp_nonnegative: false,
    };
    let traj = run(&game, &base).map_err(|e| e.to_string())?;
    if !traj
        .records
        .iter()
        .all(|r| r.a[0] == r.hat_a[0] + p.signal(0, r.khat))
    {
        failures.push("a differs from hat_a plus the dither".to_string());
    }
    if run(&game, &base).map_err(|e| e.to_string())? != traj {
        failures.push("same seed produced a different trajectory".to_string());
    }

    let frozen = SeekerConfig {
        perturbation: single_dither(0.3, 1.0, 0.2, 0.0),
        ..base.clone()
    };
    let still = run(&game, &frozen).map_err(|e| e.to_string())?;
    if !still.records.iter().all(|r| r.hat_a[0] == 1.0) {
        failures.push("z = 0 moved hat_a".to_string());
    }

    let freq = [
        (vec![0.9, 1.0], true),
        (vec![1.0, 1.0], false),
        (vec![1.0, 2.0, 3.0], false),
    ];
    for (w, expect_ok) in freq {
        if validate_frequencies(&w).is_ok() != expect_ok {
            failures.push(format!("frequency validation on {w:?}"));
        }
    }

    let path = interpolate(&traj).map_err(|e| e.to_string())?;
    for r in &traj.records {
        match path.eval(r.khat) {
            Ok(v) if v[0] == r.hat_a[0] => {}
            other => {
                failures.push(format!("interpolation at breakpoint {}: {other:?}", r.k));
                break;
            }
        }
    }

    // derivative of the expected payoff vs expected per-state derivative
    let wireless = WirelessGame::new(
        WirelessParams::two_pair_reference(),
        ChannelMode::Rayleigh,
        ExpectationMode::Quadrature,
    )
    .map_err(|e| e.to_string())?;
    let at = [3.0, 5.0];
    let mut rng = rng_from_seed(2024);
    let draws: Vec<_> = (0..200_000)
        .map(|_| wireless.sample_state(&mut rng))
        .collect();
    let mut exchange = Vec::new();
    for j in 0..2 {
        let h = 1e-4;
        let mut up = at;
        let mut down = at;
        up[j] += h;
        down[j] -= h;
        let fd = (wireless
            .expected_payoff(&up, j)
            .map_err(|e| e.to_string())?
            .mean
            - wireless
                .expected_payoff(&down, j)
                .map_err(|e| e.to_string())?
                .mean)
            / (2.0 * h);
        let grads = draws
            .iter()
            .map(|s| wireless.own_gradient(s, &at, j))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let e = Expectation::from_values(grads);
        let z = (fd - e.mean).abs() / e.std_error;
        exchange.push(format!("{z:.2}"));
        if z > 3.0 {
            failures.push(format!(
                "gradient exchange node {}: {fd} vs {} +/- {}",
                j + 1,
                e.mean,
                e.std_error
            ));
        }
    }

    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "dither decomposition, z = 0 freeze, seed determinism, frequency validation, breakpoints; exchange z-scores [{}]",
                exchange.join(", ")
            )
        } else {
            failures.join("; ")
        },
    )
}

fn envelope_fit() -> Outcome {
    let times: Vec<f64> = (0..=400).map(|i| i as f64 * 0.1).collect();
    let gaps: Vec<f64> = times.iter().map(|t| 5.0 * (-0.3 * t).exp() + 0.1).collect();
    let fit = fit_stability_envelope(&times, &gaps).map_err(|e| e.to_string())?;
    let decay_err = (fit.decay - 0.3).abs() / 0.3;
    let floor_err = (fit.floor - 0.1).abs() / 0.1;
    check(
        decay_err <= 0.10 && floor_err <= 0.20,
        format!(
            "decay {:.4} (error {:.1}%), floor {:.4} (error {:.1}%), amplitude {:.3}",
            fit.decay,
            100.0 * decay_err,
            fit.floor,
            100.0 * floor_err,
            fit.amplitude
        ),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 equilibrium oracle", equilibrium_oracle),
        (
            "2 two-pair power control reproduction",
            reference_reproduction,
        ),
        ("3 gap scaling with sqrt(lambda)", gap_scaling),
        ("4 ODE integrator correctness", integrator_correctness),
        ("5 martingale diagnostics", martingale),
        ("6 bound calculators", bound_calculators),
        ("7 invariant suite", invariants),
        ("8 envelope fit", envelope_fit),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(d) => println!("PASS criterion {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {name}: {d}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
