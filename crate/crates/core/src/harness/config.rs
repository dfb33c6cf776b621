use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{NodeDither, PerturbationParams, QuadraticGame, StepSchedule};
use crate::seeker::SeekerConfig;
use crate::wireless::{
    analytic_equilibrium, ChannelMode, ExpectationMode, WirelessGame, WirelessParams,
};

/// A complete experiment description. Read from TOML, or JSON when the file
/// extension is `.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameConfig,
    pub seeker: SeekerSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GameConfig {
    Wireless {
        params: WirelessParams,
        #[serde(default)]
        channel: ChannelMode,
        #[serde(default)]
        expectation: ExpectationMode,
    },
    /// Independent peaks `-c_j (a_j - t_j)^2` plus Gaussian payoff noise.
    Quadratic {
        targets: Vec<f64>,
        curvatures: Vec<f64>,
        #[serde(default)]
        noise_std: f64,
    },
    /// Noise-free linear-quadratic game with explicit coefficients.
    Scripted {
        hessian: Vec<Vec<f64>>,
        linear: Vec<f64>,
        #[serde(default)]
        offset: Option<Vec<f64>>,
    },
}

/// A built game.
#[derive(Debug, Clone)]
pub enum Game {
    Wireless(WirelessGame),
    Quadratic(QuadraticGame),
}

impl GameConfig {
    pub fn build(&self) -> Result<Game> {
        match self {
            GameConfig::Wireless {
                params,
                channel,
                expectation,
            } => Ok(Game::Wireless(WirelessGame::new(
                params.clone(),
                *channel,
                *expectation,
            )?)),
            GameConfig::Quadratic {
                targets,
                curvatures,
                noise_std,
            } => Ok(Game::Quadratic(QuadraticGame::separable(
                targets, curvatures, *noise_std,
            )?)),
            GameConfig::Scripted {
                hessian,
                linear,
                offset,
            } => {
                let offset = offset.clone().unwrap_or_else(|| vec![0.0; linear.len()]);
                Ok(Game::Quadratic(QuadraticGame::new(
                    hessian.clone(),
                    linear.clone(),
                    offset,
                    0.0,
                )?))
            }
        }
    }

    /// Reference equilibrium, when one is available in closed form.
    pub fn equilibrium(&self) -> Result<Vec<f64>> {
        match self {
            GameConfig::Wireless { params, .. } => Ok(analytic_equilibrium(params)?.power),
            GameConfig::Quadratic { targets, .. } => Ok(targets.clone()),
            other => match other.build()? {
                Game::Quadratic(q) => q.equilibrium(),
                Game::Wireless(_) => unreachable!(),
            },
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            GameConfig::Wireless { params, .. } => params.node_count(),
            GameConfig::Quadratic { targets, .. } => targets.len(),
            GameConfig::Scripted { linear, .. } => linear.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialPoint {
    Explicit(Vec<f64>),
    /// Reference equilibrium shifted by a constant on every node.
    Offset {
        equilibrium_offset: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeekerSection {
    pub amplitude: Vec<f64>,
    pub frequency: Vec<f64>,
    pub phase: Vec<f64>,
    pub growth: Vec<f64>,
    pub schedule: StepSchedule,
    pub horizon: usize,
    pub initial: InitialPoint,
    #[serde(default)]
    pub seed: u64,
    /// Clip played actions at zero. Off unless set.
    #[serde(default)]
    pub clamp_nonnegative: Option<bool>,
}

impl SeekerSection {
    pub fn perturbation(&self) -> Result<PerturbationParams> {
        PerturbationParams::from_arrays(&self.amplitude, &self.frequency, &self.phase, &self.growth)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    /// Width of the averaging window as a fraction of the horizon.
    pub window_fraction: f64,
    /// Shrink the window to whole periods of the slowest dither.
    pub align_periods: bool,
    pub compare: Option<CompareSection>,
    pub sweep: Option<SweepSection>,
    pub bounds: Option<BoundsSection>,
    /// Also run projected gradient ascent with oracle gradients.
    pub baseline: Option<BaselineSection>,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            window_fraction: 0.1,
            align_periods: true,
            compare: None,
            sweep: None,
            bounds: None,
            baseline: None,
        }
    }
}

/// ODE comparison window on the `khat` clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub t0: f64,
    pub length: f64,
    /// Integrator step; defaults to `min(0.01, lambda / 10)`.
    #[serde(default)]
    pub step: Option<f64>,
}

/// Multi-seed sweep over constant rates, reusing the compare window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub lambdas: Vec<f64>,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    /// Lipschitz constant; estimated over `domain` when absent.
    #[serde(default)]
    pub lipschitz: Option<f64>,
    #[serde(default)]
    pub domain: Option<Vec<(f64, f64)>>,
    #[serde(default = "default_pairs")]
    pub lipschitz_pairs: usize,
    /// `C0`; defaults to the largest action norm in the trajectory.
    #[serde(default)]
    pub action_bound: Option<f64>,
    /// Window length `T` on the `khat` clock.
    pub window: f64,
    /// Target precision `eps`.
    pub eps: f64,
    /// `Mbar` and `mbar`; fitted from the trajectory when absent.
    #[serde(default)]
    pub amplitude: Option<f64>,
    #[serde(default)]
    pub decay: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSection {
    /// Upper end of each node's projection interval `[0, upper_j]`.
    pub upper: Vec<f64>,
}

fn default_pairs() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub lambda: Option<f64>,
    pub horizon: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Malformed(format!("config: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Malformed(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg = if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"))
        {
            Self::from_json(&text)?
        } else {
            Self::from_toml(&text)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(seed) = o.seed {
            self.seeker.seed = seed;
        }
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
        if let Some(h) = o.horizon {
            self.seeker.horizon = h;
        }
        if let Some(l) = o.lambda {
            self.seeker.schedule = match self.seeker.schedule {
                StepSchedule::Constant { .. } => StepSchedule::Constant { lambda: l },
                StepSchedule::Vanishing { .. } => StepSchedule::Vanishing { lambda0: l },
            };
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let game = self.game.build()?;
        let n = match &game {
            Game::Wireless(g) => g.params().node_count(),
            Game::Quadratic(g) => crate::game::GameModel::node_count(g),
        };
        let p = self.seeker.perturbation()?;
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                what: "seeker dither arrays",
                expected: n,
                got: p.len(),
            });
        }
        self.seeker.schedule.validate()?;
        if let InitialPoint::Explicit(v) = &self.seeker.initial {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "seeker.initial",
                    expected: n,
                    got: v.len(),
                });
            }
        }
        let a = &self.analysis;
        if !(a.window_fraction > 0.0 && a.window_fraction <= 1.0) {
            return Err(Error::invalid(
                "analysis.window_fraction",
                format!("must be in (0, 1], got {}", a.window_fraction),
            ));
        }
        if let Some(c) = &a.compare {
            if !(c.t0.is_finite() && c.t0 >= 0.0 && c.length.is_finite() && c.length > 0.0) {
                return Err(Error::invalid(
                    "analysis.compare",
                    "need t0 >= 0 and length > 0",
                ));
            }
            if let Some(h) = c.step {
                if !(h.is_finite() && h > 0.0) {
                    return Err(Error::invalid("analysis.compare.step", "must be > 0"));
                }
            }
        }
        if let Some(s) = &a.sweep {
            if s.lambdas.is_empty() || s.lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                return Err(Error::invalid(
                    "analysis.sweep.lambdas",
                    "need positive rates",
                ));
            }
            if s.seeds == 0 {
                return Err(Error::invalid("analysis.sweep.seeds", "must be >= 1"));
            }
            if a.compare.is_none() {
                return Err(Error::invalid(
                    "analysis.sweep",
                    "requires analysis.compare",
                ));
            }
        }
        if let Some(b) = &a.baseline {
            if b.upper.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "analysis.baseline.upper",
                    expected: n,
                    got: b.upper.len(),
                });
            }
        }
        if let Some(b) = &a.bounds {
            if !(b.window.is_finite() && b.window > 0.0) {
                return Err(Error::invalid("analysis.bounds.window", "must be > 0"));
            }
            if !(b.eps.is_finite() && b.eps > 0.0) {
                return Err(Error::invalid("analysis.bounds.eps", "must be > 0"));
            }
            if b.lipschitz.is_none() && b.domain.is_none() {
                return Err(Error::invalid(
                    "analysis.bounds",
                    "give either lipschitz or a domain box to estimate it",
                ));
            }
        }
        Ok(())
    }

    pub fn initial(&self) -> Result<Vec<f64>> {
        match &self.seeker.initial {
            InitialPoint::Explicit(v) => Ok(v.clone()),
            InitialPoint::Offset { equilibrium_offset } => Ok(self
                .game
                .equilibrium()?
                .into_iter()
                .map(|v| v + equilibrium_offset)
                .collect()),
        }
    }

    pub fn seeker_config(&self) -> Result<SeekerConfig> {
        Ok(SeekerConfig {
            perturbation: self.seeker.perturbation()?,
            schedule: self.seeker.schedule,
            horizon: self.seeker.horizon,
            initial: self.initial()?,
            seed: self.seeker.seed,
            clamp_nonnegative: self.seeker.clamp_nonnegative.unwrap_or(false),
        })
    }

    /// The two-pair power-control reproduction: `z = b = 0.9`,
    /// `Omega = (0.9, 1.0)`, zero phases, start at `p* + 10`, constant rate
    /// `0.01` for `2e5` iterations.
    pub fn wireless_reference() -> Self {
        let dither = |w: f64| NodeDither {
            amplitude: 0.9,
            frequency: w,
            phase: 0.0,
            growth: 0.9,
        };
        let nodes = [dither(0.9), dither(1.0)];
        Self {
            game: GameConfig::Wireless {
                params: WirelessParams::two_pair_reference(),
                channel: ChannelMode::Rayleigh,
                expectation: ExpectationMode::default(),
            },
            seeker: SeekerSection {
                amplitude: nodes.iter().map(|n| n.amplitude).collect(),
                frequency: nodes.iter().map(|n| n.frequency).collect(),
                phase: nodes.iter().map(|n| n.phase).collect(),
                growth: nodes.iter().map(|n| n.growth).collect(),
                schedule: StepSchedule::Constant { lambda: 0.01 },
                horizon: 200_000,
                initial: InitialPoint::Offset {
                    equilibrium_offset: 10.0,
                },
                seed: 0,
                clamp_nonnegative: None,
            },
            analysis: AnalysisSection::default(),
            output: OutputSection::default(),
        }
    }
}
