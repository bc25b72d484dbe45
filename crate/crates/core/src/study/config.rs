//! Study declarations read from JSON.

use crate::engine::TestFunction;
use crate::error::{Error, Result};
use crate::noise::LevyLaw;
use crate::propagators::EquationKind;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Ladder of mesh widths h = 1/cells with a fixed time family.
    Spatial,
    /// Ladder of time steps Δt with a fixed space.
    Temporal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceConfig {
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Power-law decay s; derived from β when absent.
    #[serde(default)]
    pub decay: Option<f64>,
}

impl Default for CovarianceConfig {
    fn default() -> Self {
        Self { amplitude: 1.0, decay: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DyadicRange {
    /// Coarsest level 2^{−from}.
    pub from: i32,
    /// Finest level 2^{−to}.
    pub to: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ladder {
    Values(Vec<f64>),
    Dyadic { dyadic: DyadicRange },
}

impl Ladder {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::Values(v) => v.clone(),
            Self::Dyadic { dyadic } => (dyadic.from..=dyadic.to).map(|i| 2f64.powi(-i)).collect(),
        }
    }
}

/// Space used by temporal studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceConfig {
    #[default]
    Spectral,
    Fem {
        cells: usize,
    },
}

/// Time family used by spatial studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeConfig {
    #[default]
    Exact,
    Steps(usize),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default)]
    pub displacement: Vec<f64>,
    #[serde(default)]
    pub velocity: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub paths: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub schema_version: u32,
    pub name: String,
    pub equation: EquationKind,
    pub axis: Axis,
    pub beta: f64,
    #[serde(default)]
    pub covariance: CovarianceConfig,
    #[serde(default = "default_noise")]
    pub noise: LevyLaw,
    #[serde(default = "one")]
    pub horizon: f64,
    pub ladder: Ladder,
    pub modes: usize,
    #[serde(default)]
    pub space: SpaceConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub test_function: TestFunction,
    #[serde(default)]
    pub monte_carlo: Option<McConfig>,
    /// CSV file name, relative to the output directory.
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub inject_exact: bool,
    #[serde(default = "default_nodes")]
    pub quadrature_nodes: usize,
}

fn one() -> f64 {
    1.0
}

fn default_nodes() -> usize {
    8
}

fn default_noise() -> LevyLaw {
    LevyLaw::VarianceGamma { variance_rate: 0.5 }
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("study configs serialize")
    }

    /// Structural checks that need no numerics.
    pub fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return fail(format!("schema_version {} is not supported, expected {SCHEMA_VERSION}", self.schema_version));
        }
        if self.name.trim().is_empty() {
            return fail("name must not be empty".into());
        }
        let ladder = self.ladder.values();
        if ladder.len() < 4 {
            return fail(format!("ladder needs at least 4 levels, got {}", ladder.len()));
        }
        if ladder.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return fail("ladder values must be positive and finite".into());
        }
        if ladder.windows(2).any(|w| w[1] >= w[0]) {
            return fail("ladder must be strictly decreasing".into());
        }
        if self.modes == 0 {
            return fail("modes must be positive".into());
        }
        if !(self.beta.is_finite()) {
            return fail("beta must be finite".into());
        }
        if let Some(mc) = self.monte_carlo {
            if mc.paths == 0 {
                return fail("monte_carlo.paths must be positive".into());
            }
            if !matches!(self.noise, LevyLaw::CompoundPoisson { .. }) {
                return fail(format!("monte_carlo needs a compound_poisson noise law, got {}", self.noise.name()));
            }
        }
        Ok(())
    }
}
