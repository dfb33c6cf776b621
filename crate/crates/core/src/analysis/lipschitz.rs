use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{check_len, GameModel};
use crate::linalg;

/// Attempts per pair before a degenerate box is reported.
const RESAMPLE_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzEstimate {
    /// Largest observed slope of `E r_j` per node.
    pub per_node: Vec<f64>,
    /// `max_j` of `per_node`.
    pub overall: f64,
    pub pairs: usize,
}

/// Lower estimate of the Lipschitz constants of `a -> E r_j(S, a)` over a
/// box from `pairs` uniformly drawn action pairs.
pub fn lipschitz_estimate<M: GameModel, R: Rng + ?Sized>(
    model: &M,
    domain: &[(f64, f64)],
    pairs: usize,
    rng: &mut R,
) -> Result<LipschitzEstimate> {
    let n = model.node_count();
    check_len("domain box", n, domain.len())?;
    if pairs == 0 {
        return Err(Error::invalid("pairs", "must be >= 1"));
    }
    if let Some(j) = domain
        .iter()
        .position(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi))
    {
        return Err(Error::invalid(
            format!("domain[{j}]"),
            "must be a finite interval lo <= hi",
        ));
    }
    let draw = |rng: &mut R| -> Vec<f64> {
        domain
            .iter()
            .map(|&(lo, hi)| {
                if lo == hi {
                    lo
                } else {
                    rng.random_range(lo..=hi)
                }
            })
            .collect()
    };
    let mut per_node = vec![0.0f64; n];
    for _ in 0..pairs {
        let mut attempt = 0;
        let (a, b, dist) = loop {
            let (a, b) = (draw(rng), draw(rng));
            let d = linalg::distance(&a, &b);
            if d > 0.0 {
                break (a, b, d);
            }
            attempt += 1;
            if attempt >= RESAMPLE_LIMIT {
                return Err(Error::invalid(
                    "domain",
                    "box is degenerate; no distinct pairs",
                ));
            }
        };
        let ra = model.expected_payoffs(&a)?;
        let rb = model.expected_payoffs(&b)?;
        for j in 0..n {
            let slope = (ra[j] - rb[j]).abs() / dist;
            if !slope.is_finite() {
                return Err(Error::NonFiniteValue(format!("slope of node {j}")));
            }
            per_node[j] = per_node[j].max(slope);
        }
    }
    Ok(LipschitzEstimate {
        overall: per_node.iter().copied().fold(0.0, f64::max),
        per_node,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{rng_from_seed, QuadraticGame};

    #[test]
    fn linear_payoff_slope_is_exact() {
        // r(a) = 3a
        let g = QuadraticGame::new(vec![vec![0.0]], vec![3.0], vec![0.0], 0.0).unwrap();
        let e = lipschitz_estimate(&g, &[(0.0, 1.0)], 10, &mut rng_from_seed(1)).unwrap();
        assert!((e.overall - 3.0).abs() < 1e-12);
    }

    #[test]
    fn square_payoff_approaches_two() {
        // r(a) = a^2
        let g = QuadraticGame::new(vec![vec![-2.0]], vec![0.0], vec![0.0], 0.0).unwrap();
        let small = lipschitz_estimate(&g, &[(0.0, 1.0)], 10, &mut rng_from_seed(2)).unwrap();
        let large = lipschitz_estimate(&g, &[(0.0, 1.0)], 5000, &mut rng_from_seed(2)).unwrap();
        assert!(small.overall <= 2.0 && large.overall <= 2.0);
        assert!(large.overall >= small.overall);
        assert!(large.overall > 1.95);
    }

    #[test]
    fn constant_payoff_is_flat() {
        let g = QuadraticGame::new(vec![vec![0.0]], vec![0.0], vec![4.0], 0.0).unwrap();
        let e = lipschitz_estimate(&g, &[(0.0, 1.0)], 50, &mut rng_from_seed(3)).unwrap();
        assert_eq!(e.overall, 0.0);
    }

    #[test]
    fn degenerate_box_is_rejected() {
        let g = QuadraticGame::single_peak(0.0, 0.0).unwrap();
        assert!(lipschitz_estimate(&g, &[(1.0, 1.0)], 5, &mut rng_from_seed(3)).is_err());
        assert!(lipschitz_estimate(&g, &[(0.0, 1.0)], 0, &mut rng_from_seed(3)).is_err());
    }
}
