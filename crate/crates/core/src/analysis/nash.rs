use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{check_len, GameModel};
use crate::linalg;

/// `||a - a_star|| < eps`.
pub fn epsilon_close_check(a: &[f64], a_star: &[f64], eps: f64) -> bool {
    a.len() == a_star.len() && linalg::distance(a, a_star) < eps
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NashCheck {
    /// Best probed improvement of `E r_j` by a unilateral deviation, per node.
    pub gain: Vec<f64>,
    pub max_gain: f64,
    pub passes: bool,
}

/// Probes `count` evenly spaced deviations per node on
/// `[a_j - radius, a_j + radius]`, clipped at `lower` when given.
pub fn probe_grid(a: &[f64], radius: f64, count: usize, lower: Option<f64>) -> Vec<Vec<f64>> {
    let count = count.max(2);
    a.iter()
        .map(|&c| {
            (0..count)
                .map(|i| {
                    let v = c - radius + 2.0 * radius * i as f64 / (count - 1) as f64;
                    lower.map_or(v, |lo| v.max(lo))
                })
                .collect()
        })
        .collect()
}

/// Checks that no probed unilateral deviation improves any node's expected
/// payoff by more than `eps`.
pub fn epsilon_nash_check<M: GameModel>(
    model: &M,
    a: &[f64],
    eps: f64,
    probes: &[Vec<f64>],
) -> Result<NashCheck> {
    let n = model.node_count();
    check_len("profile", n, a.len())?;
    check_len("probe grid", n, probes.len())?;
    if eps.is_nan() {
        return Err(Error::invalid("eps", "must not be NaN"));
    }
    let mut gain = vec![f64::NEG_INFINITY; n];
    for j in 0..n {
        let base = model.expected_payoff(a, j)?.mean;
        let mut dev = a.to_vec();
        for &d in &probes[j] {
            dev[j] = d;
            gain[j] = gain[j].max(model.expected_payoff(&dev, j)?.mean - base);
        }
        gain[j] = gain[j].max(0.0);
    }
    let max_gain = gain.iter().copied().fold(0.0, f64::max);
    Ok(NashCheck {
        passes: max_gain <= eps,
        gain,
        max_gain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::lipschitz_estimate;
    use crate::game::{rng_from_seed, QuadraticGame};
    use proptest::prelude::*;

    #[test]
    fn at_the_point_is_close() {
        assert!(epsilon_close_check(&[1.0, 2.0], &[1.0, 2.0], 1e-12));
        assert!(!epsilon_close_check(&[1.0, 2.0], &[1.0, 2.1], 0.1 - 1e-9));
    }

    #[test]
    fn maximizer_is_nash() {
        let g = QuadraticGame::single_peak(2.0, 0.0).unwrap();
        let probes = probe_grid(&[2.0], 1.0, 41, None);
        let c = epsilon_nash_check(&g, &[2.0], 1e-12, &probes).unwrap();
        assert!(c.passes);
        assert_eq!(c.max_gain, 0.0);
        let off = epsilon_nash_check(&g, &[1.5], 0.2, &probe_grid(&[1.5], 1.0, 41, None)).unwrap();
        assert!(!off.passes);
        assert!((off.max_gain - 0.25).abs() < 1e-12);
    }

    #[test]
    fn probe_grid_clips() {
        let p = probe_grid(&[0.5], 1.0, 5, Some(0.0));
        assert_eq!(p[0], vec![0.0, 0.0, 0.5, 1.0, 1.5]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        // For separable games an eps-close point is an (L eps)-Nash point.
        #[test]
        fn close_points_are_lipschitz_nash(
            targets in prop::collection::vec(0.5f64..3.0, 1..4),
            curv in 0.2f64..2.0,
            eps in 0.01f64..0.3,
            dir_seed in 0u64..1000,
        ) {
            let n = targets.len();
            let g = QuadraticGame::separable(&targets, &vec![curv; n], 0.0).unwrap();
            let mut rng = rng_from_seed(dir_seed);
            use rand::Rng;
            let dir: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = linalg::norm(&dir).max(1e-9);
            let a: Vec<f64> = targets.iter().zip(&dir).map(|(t, d)| t + 0.99 * eps * d / norm).collect();
            prop_assert!(epsilon_close_check(&a, &targets, eps));
            let domain: Vec<(f64, f64)> = targets.iter().map(|t| (t - eps, t + eps)).collect();
            let l = lipschitz_estimate(&g, &domain, 4000, &mut rng).unwrap().overall;
            let probes = probe_grid(&a, 2.0 * eps, 21, None);
            let check = epsilon_nash_check(&g, &a, l * eps, &probes).unwrap();
            prop_assert!(check.passes, "gain {} vs {}", check.max_gain, l * eps);
        }
    }
}
