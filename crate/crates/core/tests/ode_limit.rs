use proptest::prelude::*;

use nash_seek::game::{NodeDither, PerturbationParams, QuadraticGame, StepSchedule};
use nash_seek::harness::{
    cmd_compare, AnalysisSection, CompareSection, ExperimentConfig, GameConfig, InitialPoint,
    OutputSection, SeekerSection, SweepSection,
};
use nash_seek::ode::{
    dither_weight, ergodic_average_check, integrate_deterministic, integrate_stochastic,
    interpolate, sup_gap_on_grid, window_gap, InterpolatedPath,
};
use nash_seek::seeker::{run, SeekerConfig};
use nash_seek::wireless::{ChannelMode, ExpectationMode, WirelessGame, WirelessParams};

fn two_node_dither() -> PerturbationParams {
    PerturbationParams::new(vec![
        NodeDither {
            amplitude: 0.9,
            frequency: 0.9,
            phase: 0.0,
            growth: 0.9,
        },
        NodeDither {
            amplitude: 0.9,
            frequency: 1.0,
            phase: 0.3,
            growth: 0.9,
        },
    ])
    .unwrap()
}

#[test]
fn ode_actions_are_intermediary_plus_dither() {
    let game = WirelessGame::new(
        WirelessParams::two_pair_reference(),
        ChannelMode::Rayleigh,
        ExpectationMode::Quadrature,
    )
    .unwrap();
    let p = two_node_dither();
    let s = integrate_deterministic(&game, &p, &[8.0, 6.0], 0.0, 20.0, 0.01).unwrap();
    for (t, (h, a)) in s.grid.iter().zip(s.hat_a.iter().zip(&s.a)) {
        for j in 0..2 {
            assert_eq!(a[j], h[j] + p.signal(j, *t));
        }
    }
}

#[test]
fn stochastic_ode_on_a_frozen_channel_is_deterministic() {
    let game = WirelessGame::new(
        WirelessParams::two_pair_reference(),
        ChannelMode::FrozenAtMean,
        ExpectationMode::default(),
    )
    .unwrap();
    let p = two_node_dither();
    let a = integrate_stochastic(&game, &p, &[8.0, 6.0], 0.0, 10.0, 0.01, 1).unwrap();
    let b = integrate_stochastic(&game, &p, &[8.0, 6.0], 0.0, 10.0, 0.01, 2).unwrap();
    assert_eq!(a.hat_a, b.hat_a);
}

#[test]
fn learner_tracks_ode_on_a_frozen_channel() {
    let game = WirelessGame::new(
        WirelessParams::two_pair_reference(),
        ChannelMode::FrozenAtMean,
        ExpectationMode::default(),
    )
    .unwrap();
    let gap = |lambda: f64| {
        let cfg = SeekerConfig {
            perturbation: two_node_dither(),
            schedule: StepSchedule::constant(lambda).unwrap(),
            horizon: (40.0 / lambda) as usize + 1,
            initial: vec![8.0, 6.0],
            seed: 0,
            clamp_nonnegative: true,
        };
        let traj = run(&game, &cfg).unwrap();
        let path = interpolate(&traj).unwrap();
        window_gap(&game, &cfg.perturbation, &path, 5.0, 30.0, lambda / 10.0)
            .unwrap()
            .gap
    };
    // noise-free: the remaining gap is discretization of the dither, O(lambda)
    let (coarse, fine) = (gap(0.02), gap(0.005));
    assert!(fine < coarse / 2.5, "{coarse} -> {fine}");
    assert!(fine < 0.05);
}

#[test]
fn ergodic_gap_shrinks_with_horizon() {
    let game = QuadraticGame::single_peak(1.0, 1.0).unwrap();
    let p = PerturbationParams::new(vec![NodeDither {
        amplitude: 0.5,
        frequency: 1.0,
        phase: 0.0,
        growth: 1.0,
    }])
    .unwrap();
    let mean_gap = |t_end: f64| {
        (0..20u64)
            .map(|seed| {
                let actions = |t: f64| Ok(vec![0.5 + p.signal(0, t)]);
                ergodic_average_check(&game, actions, dither_weight(&p), t_end, 0.01, seed)
                    .unwrap()
                    .gap[0]
            })
            .sum::<f64>()
            / 20.0
    };
    let (short, long) = (mean_gap(10.0), mean_gap(1000.0));
    // gap ~ T^{-1/2}: a hundredfold horizon gives about a tenfold reduction
    assert!(long < short / 5.0, "{short} -> {long}");
}

#[test]
fn gap_sweep_fixture() {
    let out = tempfile::tempdir().unwrap();
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
    let sweep = cmd_compare(&cfg).unwrap().sweep.unwrap();
    let means: Vec<f64> = sweep.points.iter().map(|p| p.mean_gap).collect();
    for (got, frozen) in means.iter().zip([0.3437, 0.2286, 0.1454]) {
        assert!((got - frozen).abs() < 1e-3, "{means:?}");
    }
    assert!(means[0] / means[2] >= 1.8);
    let rows = std::fs::read_to_string(out.path().join("sweep.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 90);
}

fn path_strategy() -> impl Strategy<Value = InterpolatedPath> {
    prop::collection::vec(-5.0f64..5.0, 11).prop_map(|v| {
        let times = (0..11).map(|i| i as f64).collect();
        InterpolatedPath::new(times, v.into_iter().map(|x| vec![x, -x / 2.0]).collect()).unwrap()
    })
}

proptest! {
    #[test]
    fn sup_gap_is_a_seminorm(a in path_strategy(), b in path_strategy(), c in path_strategy()) {
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let ab = sup_gap_on_grid(&a, &b, &times).unwrap();
        let bc = sup_gap_on_grid(&b, &c, &times).unwrap();
        let ac = sup_gap_on_grid(&a, &c, &times).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert_eq!(sup_gap_on_grid(&a, &a, &times).unwrap(), 0.0);
        prop_assert_eq!(ab, sup_gap_on_grid(&b, &a, &times).unwrap());
    }
}
