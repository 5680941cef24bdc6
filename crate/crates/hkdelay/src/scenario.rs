//! Scenario configuration: the JSON schema the CLI consumes and its
//! translation into model configurations.

use std::path::Path;

use hkdelay_core::config::{DelayConfig, ModelConfig};
use hkdelay_core::history::HistoryFunction;
use hkdelay_core::kernel::Kernel;
use hkdelay_core::point::Point;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Particle,
    MeanfieldCase1,
    MeanfieldCase2,
    StabilityCase1,
    StabilityCase2,
    LimitStudy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Constant { level: f64 },
    InversePower { scale: f64, exponent: f64 },
    TruncatedExponential { scale: f64, width: f64, floor: f64 },
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel<f64>> {
        Ok(match *self {
            KernelSpec::Constant { level } => Kernel::constant(level)?,
            KernelSpec::InversePower { scale, exponent } => {
                Kernel::inverse_power(scale, exponent)?
            }
            KernelSpec::TruncatedExponential { scale, width, floor } => {
                Kernel::truncated_exponential(scale, width, floor)?
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelsSpec {
    pub psi: KernelSpec,
    pub phi: KernelSpec,
    pub rho: KernelSpec,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaysSpec {
    pub tau1: f64,
    pub tau2: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSpec {
    pub m: usize,
    pub n: usize,
}

/// One explicit history: `(time, coordinates)` samples ending at t = 0.
pub type HistorySamples = Vec<(f64, Vec<f64>)>;

/// Materialized leader and follower history blocks.
pub type HistoryPair = (Vec<HistoryFunction<f64>>, Vec<HistoryFunction<f64>>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoryStyle {
    Constant,
    Linear,
    Mixed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HistoriesSpec {
    Explicit {
        leaders: Vec<HistorySamples>,
        followers: Vec<HistorySamples>,
    },
    Random {
        seed: u64,
        support_radius: f64,
        style: HistoryStyle,
        dim: usize,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSpec {
    pub step: f64,
    pub t_end: f64,
    pub samples_per_window: usize,
}

fn default_csv() -> String {
    "series.csv".into()
}

fn default_json() -> String {
    "report.json".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default = "default_csv")]
    pub csv: String,
    #[serde(default = "default_json")]
    pub json: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub mode: Mode,
    pub kernels: KernelsSpec,
    pub delays: DelaysSpec,
    pub population: PopulationSpec,
    pub histories: HistoriesSpec,
    pub numerics: NumericsSpec,
    pub output: OutputSpec,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&raw).map_err(|source| Error::Schema {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn delays(&self) -> Result<DelayConfig<f64>> {
        Ok(DelayConfig::new(self.delays.tau1, self.delays.tau2)?)
    }

    /// The seed driving random history generation, if any.
    pub fn seed(&self) -> Option<u64> {
        match self.histories {
            HistoriesSpec::Random { seed, .. } => Some(seed),
            HistoriesSpec::Explicit { .. } => None,
        }
    }

    /// Materializes the initial histories for `m` leaders and `n`
    /// followers, honoring an optional seed override.
    pub fn build_histories(
        &self,
        m: usize,
        n: usize,
        seed_override: Option<u64>,
    ) -> Result<HistoryPair> {
        let tau = self.delays()?.tau();
        match &self.histories {
            HistoriesSpec::Explicit { leaders, followers } => {
                if leaders.len() != m || followers.len() != n {
                    return Err(Error::Scenario(format!(
                        "explicit histories count ({}, {}) does not match population ({m}, {n})",
                        leaders.len(),
                        followers.len()
                    )));
                }
                let build = |samples: &HistorySamples| -> Result<HistoryFunction<f64>> {
                    let pts = samples
                        .iter()
                        .map(|(t, coords)| Ok((*t, Point::new(coords.clone())?)))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(HistoryFunction::new(pts)?)
                };
                Ok((
                    leaders.iter().map(build).collect::<Result<_>>()?,
                    followers.iter().map(build).collect::<Result<_>>()?,
                ))
            }
            HistoriesSpec::Random { seed, support_radius, style, dim } => {
                let seed = seed_override.unwrap_or(*seed);
                Ok(random_histories(seed, *support_radius, *style, *dim, m, n, tau))
            }
        }
    }

    /// Full particle configuration (requires m >= 2, n > m).
    pub fn build_config(&self, seed_override: Option<u64>) -> Result<ModelConfig<f64>> {
        let (leaders, followers) =
            self.build_histories(self.population.m, self.population.n, seed_override)?;
        Ok(ModelConfig::new(
            self.kernels.psi.build()?,
            self.kernels.phi.build()?,
            self.kernels.rho.build()?,
            self.delays()?,
            leaders,
            followers,
        )?)
    }
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Point<f64> {
    let bound = radius / (dim as f64).sqrt();
    Point::new((0..dim).map(|_| rng.gen_range(-bound..bound)).collect()).unwrap()
}

/// Seeded random histories. The first leader is pinned at exactly the
/// support radius, so the certificate's initial radius (and hence its
/// rate) is set by the scenario, not by the sample — refinements with
/// more atoms share the same constants.
pub fn random_histories(
    seed: u64,
    support_radius: f64,
    style: HistoryStyle,
    dim: usize,
    m: usize,
    n: usize,
    tau: f64,
) -> HistoryPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inner = 0.9 * support_radius;
    let one = |rng: &mut ChaCha8Rng| -> HistoryFunction<f64> {
        let linear = match style {
            HistoryStyle::Constant => false,
            HistoryStyle::Linear => tau > 0.0,
            HistoryStyle::Mixed => tau > 0.0 && rng.gen_bool(0.5),
        };
        if linear {
            HistoryFunction::linear(
                random_point(rng, dim, inner),
                random_point(rng, dim, inner),
                tau,
            )
            .unwrap()
        } else {
            HistoryFunction::constant(random_point(rng, dim, inner), tau).unwrap()
        }
    };
    let mut pin = vec![0.0; dim];
    pin[0] = support_radius;
    let mut leaders = vec![HistoryFunction::constant(Point::new(pin).unwrap(), tau).unwrap()];
    for _ in 1..m {
        leaders.push(one(&mut rng));
    }
    let followers = (0..n).map(|_| one(&mut rng)).collect();
    (leaders, followers)
}
