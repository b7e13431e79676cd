//! Run configuration: one JSON document, with command-line overrides.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use vsi_achieve::montecarlo::{CheckerKind, GridSpec, SamplingConfig};
use vsi_achieve::oracle::{self, LabeledProfile, TrajectoryOptions};
use vsi_achieve::{Checker, Gain, GridProfile, PlantParams, PowerState, SearchOptions};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub horizon: f64,
    /// Longest horizon the trajectory checker may stretch to for slow gains.
    pub max_horizon: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: oracle::DEFAULT_DT,
            horizon: oracle::DEFAULT_HORIZON,
            max_horizon: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SteadyStateConfig {
    pub n_grid: usize,
}

impl Default for SteadyStateConfig {
    fn default() -> Self {
        Self {
            n_grid: oracle::DEFAULT_N_GRID,
        }
    }
}

/// One ensemble member; voltages in V, times in s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant {
        label: String,
        value: f64,
    },
    Sinusoid {
        label: String,
        mean: f64,
        amplitude: f64,
        period: f64,
    },
    RandomWalk {
        label: String,
        step: f64,
        seed: u64,
        /// Defaults to the integrator step.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        knot_dt: Option<f64>,
    },
}

impl ProfileSpec {
    fn resolve(
        &self,
        params: &PlantParams,
        integ: &IntegratorConfig,
    ) -> Result<LabeledProfile, CliError> {
        let span = integ.horizon.max(integ.max_horizon);
        let (label, profile) = match self {
            ProfileSpec::Constant { label, value } => {
                (label, GridProfile::constant(*value, params))
            }
            ProfileSpec::Sinusoid {
                label,
                mean,
                amplitude,
                period,
            } => (
                label,
                GridProfile::sinusoid(*mean, *amplitude, *period, params),
            ),
            ProfileSpec::RandomWalk {
                label,
                step,
                seed,
                knot_dt,
            } => (
                label,
                GridProfile::random_walk(*step, *seed, knot_dt.unwrap_or(integ.dt), span, params),
            ),
        };
        Ok(LabeledProfile::new(
            label.clone(),
            profile.map_err(CliError::config)?,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub plant: PlantParams,
    pub sampling: SamplingConfig,
    /// Explicit gain for check/map/simulate; `K = 0` when absent.
    pub gain: Option<Gain>,
    pub grid: GridSpec,
    /// Profile ensemble; the built-in audit ensemble when absent.
    pub ensemble: Option<Vec<ProfileSpec>>,
    pub integrator: IntegratorConfig,
    pub steady_state: SteadyStateConfig,
    pub search: SearchOptions,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            plant: PlantParams::nominal(),
            sampling: SamplingConfig::default(),
            gain: None,
            grid: GridSpec::default(),
            ensemble: None,
            integrator: IntegratorConfig::default(),
            steady_state: SteadyStateConfig::default(),
            search: SearchOptions::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(CliError::config)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.sampling.validate().map_err(CliError::config)?;
        self.grid.validate().map_err(CliError::config)?;
        let i = &self.integrator;
        if !(i.dt > 0.0) || !(i.horizon >= i.dt) || !(i.max_horizon >= i.horizon) {
            return Err(CliError::Config(format!(
                "integrator needs 0 < dt <= horizon <= max_horizon (got {i:?})"
            )));
        }
        if self.steady_state.n_grid < 2 {
            return Err(CliError::Config("steady_state.n_grid must be >= 2".into()));
        }
        if let Some(g) = &self.gain {
            if !g.is_finite() {
                return Err(CliError::Config("gain entries must be finite".into()));
            }
        }
        self.ensemble()?;
        Ok(())
    }

    pub fn gain(&self) -> Gain {
        self.gain.unwrap_or(Gain::ZERO)
    }

    pub fn ensemble(&self) -> Result<Vec<LabeledProfile>, CliError> {
        match &self.ensemble {
            None => {
                let span = self.integrator.horizon.max(self.integrator.max_horizon);
                oracle::default_ensemble(&self.plant, self.integrator.dt, span, self.sampling.seed)
                    .map_err(CliError::config)
            }
            Some(specs) if specs.is_empty() => {
                Err(CliError::Config("ensemble must not be empty".into()))
            }
            Some(specs) => specs
                .iter()
                .map(|s| s.resolve(&self.plant, &self.integrator))
                .collect(),
        }
    }

    pub fn trajectory_options(&self) -> Result<TrajectoryOptions, CliError> {
        Ok(TrajectoryOptions::new(
            self.integrator.dt,
            self.integrator.horizon,
            self.ensemble()?,
        ))
    }

    /// The configured checker, fully resolved. Trajectories start at the
    /// origin.
    pub fn checker(&self) -> Result<Checker, CliError> {
        Ok(match self.sampling.checker {
            CheckerKind::Certificate => Checker::Certificate(self.search),
            CheckerKind::SteadyState => Checker::SteadyState {
                n_grid: self.steady_state.n_grid,
            },
            CheckerKind::Trajectory => Checker::Trajectory {
                x0: PowerState::ZERO,
                opts: self.trajectory_options()?,
                max_horizon: self.integrator.max_horizon,
            },
        })
    }
}
