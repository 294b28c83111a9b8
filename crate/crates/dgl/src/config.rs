//! TOML experiment configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use dgl_core::evolve::{Coupling, EvolveOptions};
use dgl_core::potential::{presets, Envelope, FieldTerm, GaugeTerm};
use dgl_core::{EMPotential, GaugeFunction, Grid1D, ModeBank};
use serde::{Deserialize, Serialize};

use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Evolve,
    GaugeCheck,
    CanonicalDemo,
    Identities,
    Convergence,
    CrossOracle,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::GaugeCheck => "gauge-check",
            ExperimentKind::CanonicalDemo => "canonical-demo",
            ExperimentKind::Identities => "identities",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::CrossOracle => "cross-oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// When set, must match the subcommand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    pub grid: GridConfig,
    #[serde(default)]
    pub physics: PhysicsConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<ChiConfig>,
    #[serde(default)]
    pub canonical: CanonicalConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceConfig>,
    #[serde(default)]
    pub cross_oracle: CrossOracleConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Overrides of the per-experiment default tolerances, by check name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "two_pi")]
    pub length: f64,
    pub sites: usize,
}

fn two_pi() -> f64 {
    2.0 * PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub charge: f64,
    #[serde(default)]
    pub coupling: Coupling,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self { mass: 1.0, charge: 1.0, coupling: Coupling::Covariant }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default)]
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "one_step")]
    pub snapshot_every: usize,
}

fn one_step() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    #[default]
    Zero,
    Explicit,
    PureGauge,
    Transformed,
}

/// `explicit` uses `field`, `pure_gauge` uses `[chi]`, `transformed` uses both.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(default)]
    pub kind: PotentialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldConfig {
    /// `A = amplitude · sin²(π (t - t0) / duration) · cos(2πx/L)`.
    ReferencePulse {
        #[serde(default = "half")]
        amplitude: f64,
        /// Defaults to the run length.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        duration: Option<f64>,
    },
    Terms { terms: Vec<FieldTerm> },
}

fn half() -> f64 {
    0.5
}

/// Gauge function generators. The ramps start at `t0`, so the initial
/// conditions hold by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChiConfig {
    RampedSine {
        #[serde(default = "half")]
        amplitude: f64,
        #[serde(default = "first_harmonic")]
        k: u32,
        #[serde(default)]
        phase: f64,
        /// Defaults to the run length.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rise: Option<f64>,
    },
    Uniform {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rise: Option<f64>,
    },
    Terms { terms: Vec<GaugeTerm> },
}

fn first_harmonic() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanonicalConfig {
    /// Truncation size `M`, lowest |p| first.
    #[serde(default = "six")]
    pub modes: usize,
}

impl Default for CanonicalConfig {
    fn default() -> Self {
        Self { modes: 6 }
    }
}

fn six() -> usize {
    6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub levels: Vec<LevelConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelConfig {
    pub sites: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OraclePotential {
    Zero,
    PureGauge,
    Pulse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossOracleConfig {
    #[serde(default = "all_oracle_potentials")]
    pub potentials: Vec<OraclePotential>,
    /// Repeat each comparison at `dt / 2` and report the ratio.
    #[serde(default = "yes")]
    pub refine: bool,
}

impl Default for CrossOracleConfig {
    fn default() -> Self {
        Self { potentials: all_oracle_potentials(), refine: true }
    }
}

fn all_oracle_potentials() -> Vec<OraclePotential> {
    vec![OraclePotential::Zero, OraclePotential::PureGauge, OraclePotential::Pulse]
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Used when `--out` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Write the per-site CSV series.
    #[serde(default = "yes")]
    pub series: bool,
    /// Cross-check the mode-sum current against the `R` route.
    #[serde(default = "yes")]
    pub dual_route: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, series: true, dual_route: true }
    }
}

fn config_error(key: &str, err: impl std::fmt::Display) -> RunError {
    RunError::Config(format!("`{key}`: {err}"))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn grid(&self) -> Result<Grid1D, RunError> {
        self.grid_with(self.grid.sites)
    }

    pub fn grid_with(&self, sites: usize) -> Result<Grid1D, RunError> {
        Grid1D::new(self.grid.length, sites).map_err(|e| config_error("grid", e))
    }

    pub fn bank(&self) -> Result<ModeBank, RunError> {
        self.bank_with(self.grid.sites)
    }

    pub fn bank_with(&self, sites: usize) -> Result<ModeBank, RunError> {
        ModeBank::free_modes(self.grid_with(sites)?, self.physics.mass, self.physics.charge)
            .map_err(|e| config_error("physics", e))
    }

    pub fn evolve_options(&self) -> Result<EvolveOptions, RunError> {
        self.evolve_options_with(self.time.dt)
    }

    pub fn evolve_options_with(&self, dt: f64) -> Result<EvolveOptions, RunError> {
        if self.time.snapshot_every == 0 {
            return Err(config_error("time.snapshot_every", "must be at least 1"));
        }
        let opts = EvolveOptions::new(self.time.t0, self.time.t_end, dt)
            .every(self.time.snapshot_every)
            .with_coupling(self.physics.coupling);
        opts.step_count().map_err(|e| config_error("time", e))?;
        Ok(opts)
    }

    fn span(&self) -> f64 {
        self.time.t_end - self.time.t0
    }

    pub fn chi(&self) -> Result<GaugeFunction, RunError> {
        let spec = self.chi.as_ref().ok_or_else(|| config_error("chi", "this experiment needs a [chi] table"))?;
        let length = self.grid.length;
        let t0 = self.time.t0;
        let chi = match *spec {
            ChiConfig::RampedSine { amplitude, k, phase, rise } => GaugeFunction::separable(
                length,
                amplitude,
                k,
                phase,
                Envelope::Ramp { start: t0, rise: rise.unwrap_or(self.span()) },
            ),
            ChiConfig::Uniform { amplitude, rise } => {
                GaugeFunction::uniform(length, amplitude, Envelope::Ramp { start: t0, rise: rise.unwrap_or(self.span()) })
            }
            ChiConfig::Terms { ref terms } => GaugeFunction::new(length, terms.clone()),
        }
        .map_err(|e| config_error("chi", e))?;
        chi.check_initial(t0).map_err(|e| config_error("chi", e))?;
        Ok(chi)
    }

    fn field(&self) -> Result<EMPotential, RunError> {
        let spec = self
            .potential
            .field
            .as_ref()
            .ok_or_else(|| config_error("potential.field", "required for this potential kind"))?;
        match *spec {
            FieldConfig::ReferencePulse { amplitude, duration } => {
                presets::reference_pulse(self.grid.length, amplitude, self.time.t0, duration.unwrap_or(self.span()))
            }
            FieldConfig::Terms { ref terms } => {
                dgl_core::potential::ExplicitField::new(self.grid.length, terms.clone()).map(EMPotential::Explicit)
            }
        }
        .map_err(|e| config_error("potential.field", e))
    }

    /// The configured potential, checked against the grid of `sites` points.
    pub fn potential_on(&self, sites: usize) -> Result<EMPotential, RunError> {
        let grid = self.grid_with(sites)?;
        let pot = match self.potential.kind {
            PotentialKind::Zero => EMPotential::zero(self.grid.length).map_err(|e| config_error("potential", e))?,
            PotentialKind::Explicit => self.field()?,
            PotentialKind::PureGauge => {
                EMPotential::pure_gauge(self.chi()?, &grid).map_err(|e| config_error("chi", e))?
            }
            PotentialKind::Transformed => {
                self.field()?.gauge_transform(&self.chi()?, &grid).map_err(|e| config_error("chi", e))?
            }
        };
        pot.check_grid(&grid).map_err(|e| config_error("potential", e))?;
        Ok(pot)
    }

    pub fn potential(&self) -> Result<EMPotential, RunError> {
        self.potential_on(self.grid.sites)
    }

    /// The reference pulse over the whole run, for experiments that need a
    /// physical field regardless of `[potential]`.
    pub fn reference_pulse(&self) -> Result<EMPotential, RunError> {
        presets::reference_pulse(self.grid.length, 0.5, self.time.t0, self.span()).map_err(|e| config_error("time", e))
    }

    /// Uniform ramp, the only pure gauge a three-site grid can carry.
    pub fn uniform_chi(&self) -> Result<GaugeFunction, RunError> {
        GaugeFunction::uniform(self.grid.length, 1.0, Envelope::Ramp { start: self.time.t0, rise: self.span() })
            .map_err(|e| config_error("time", e))
    }
}
