use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, DEFAULT_LENGTH};
use crate::integrator::{RunConfig, Scheme, ThresholdReference};
use crate::littlewood_paley::Summability;
use crate::model::{validate_params, AbcdParams, InitialSpec, Profile};

use super::sweep::{Horizon, SweepSpec, DEFAULT_LADDER};

/// A preset name or an explicit quadruple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamsSpec {
    Preset(String),
    Quadruple { a: f64, b: f64, c: f64, d: f64 },
}

impl Default for ParamsSpec {
    fn default() -> Self {
        ParamsSpec::Preset("bbm-bbm".into())
    }
}

impl ParamsSpec {
    pub fn resolve(&self, epsilon: f64) -> Result<AbcdParams> {
        match self {
            ParamsSpec::Preset(name) => AbcdParams::preset(name, epsilon),
            ParamsSpec::Quadruple { a, b, c, d } => validate_params(*a, *b, *c, *d, epsilon),
        }
    }
}

fn default_grid() -> GridSpec {
    GridSpec {
        dim: 1,
        length: DEFAULT_LENGTH,
        points: 512,
    }
}
fn default_s() -> f64 {
    1.0
}
fn default_r() -> Summability {
    Summability::TWO
}
fn default_factor() -> f64 {
    4.0
}
fn default_one() -> usize {
    1
}
fn default_constant() -> f64 {
    1.0
}

/// The single JSON document read by the command-line tools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub params: ParamsSpec,
    /// `ε` for a single run (default 0.1).
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub epsilon_ladder: Option<Vec<f64>>,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_r")]
    pub r: Summability,
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    /// Horizon of a single run.
    #[serde(default)]
    pub t_end: Option<f64>,
    /// Horizon rule of a sweep.
    #[serde(default)]
    pub horizon: Option<Horizon>,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_factor")]
    pub blow_up_factor: f64,
    #[serde(default)]
    pub blow_up_reference: ThresholdReference,
    #[serde(default)]
    pub blow_up_cap: Option<f64>,
    #[serde(default = "default_one")]
    pub output_every: usize,
    #[serde(default)]
    pub seed: u64,
    /// Replicate seeds of a sweep; defaults to `[seed]`.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub topography: Option<Profile>,
    #[serde(default = "default_constant")]
    pub bound_constant: f64,
    #[serde(default)]
    pub snapshot_every: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn run_config_at(&self, params: AbcdParams, t_end: f64) -> RunConfig {
        RunConfig {
            params,
            grid: self.grid,
            s: self.s,
            r: self.r,
            m: self.m,
            dt: self.dt,
            t_end,
            scheme: self.scheme,
            blow_up_factor: self.blow_up_factor,
            blow_up_reference: self.blow_up_reference,
            blow_up_cap: self.blow_up_cap,
            output_every: self.output_every,
            seed: self.seed,
            bound_constant: self.bound_constant,
            topography: self.topography.clone(),
            snapshot_every: self.snapshot_every,
            keep_states: false,
        }
    }

    /// Configuration of a single run. Without `t_end` a fixed horizon
    /// `K/ε` is used when one is given.
    pub fn run_config(&self) -> Result<RunConfig> {
        let eps = self.epsilon.unwrap_or(0.1);
        let params = self.params.resolve(eps)?;
        let t_end = match (self.t_end, &self.horizon) {
            (Some(t), _) => t,
            (None, Some(Horizon::Fixed { k })) => k / eps,
            _ => return Err(Error::ConfigInvalid("a run needs t_end or a fixed horizon".into())),
        };
        let c = self.run_config_at(params, t_end);
        c.validate()?;
        Ok(c)
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let ladder = self.epsilon_ladder.clone().unwrap_or_else(|| DEFAULT_LADDER.to_vec());
        let first = *ladder
            .first()
            .ok_or_else(|| Error::ConfigInvalid("empty epsilon ladder".into()))?;
        let params = self.params.resolve(first)?;
        let horizon = match (&self.horizon, self.t_end) {
            (Some(h), _) => h.clone(),
            (None, Some(t)) => Horizon::Fixed { k: t * first },
            (None, None) => Horizon::default(),
        };
        Ok(SweepSpec {
            base: self.run_config_at(params, 1.0),
            epsilon_ladder: ladder,
            initial: self.initial.clone(),
            seeds: self.seeds.clone().unwrap_or_else(|| vec![self.seed]),
            horizon,
        })
    }
}
