//! Tolerance checks and the JSON run summary.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::RunError;

/// Bumped whenever a field of [`Summary`] changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Passes when `value <= tolerance`.
    Max,
    /// Passes when `value > tolerance`; used for witnesses that must be visible.
    Min,
}

/// Default tolerances per experiment, keyed by check name.
pub fn default_tolerances(kind: ExperimentKind) -> &'static [(&'static str, Bound, f64)] {
    use Bound::*;
    match kind {
        ExperimentKind::Evolve => &[
            ("gram_residual", Max, 1e-9),
            ("total_charge", Max, 1e-9),
            ("dual_route", Max, 1e-9),
            ("imaginary_residue", Max, 1e-12),
            ("negative_energy", Max, 1e-10),
            ("continuity", Max, 1e-4),
            ("pure_gauge_current", Max, 1e-6),
            ("pure_gauge_density", Max, 1e-6),
        ],
        ExperimentKind::GaugeCheck => &[("max_dj", Max, 1e-6), ("phase_residual", Max, 1e-6), ("total_charge", Max, 1e-9)],
        ExperimentKind::Convergence => &[
            ("max_dj", Max, 1e-6),
            ("phase_residual", Max, 1e-6),
            ("monotone_violation", Max, 0.0),
            ("final_reduction", Min, 10.0),
        ],
        ExperimentKind::Identities => &[
            ("projector_algebra", Max, 1e-12),
            ("initial_two_point", Max, 1e-12),
            ("g_squared", Max, 1e-8),
            ("appendix", Max, 1e-8),
            ("r_routes", Max, 1e-8),
            ("two_point_structure", Max, 1e-8),
            ("ode_relative", Max, 1e-4),
            ("ode_ratio_low", Min, 3.0),
            ("ode_ratio_high", Max, 5.0),
        ],
        ExperimentKind::CanonicalDemo => &[
            ("anticommutator", Max, 1e-12),
            ("ground_energy", Max, 1e-12),
            ("ground_state_defect", Max, 1e-12),
            ("spectral_gap", Min, 1e-9),
            ("max_energy", Min, 1e-3),
            ("negative_energy", Max, 1e-10),
            ("current_deviation", Min, 1e-4),
            ("norm_drift", Max, 1e-10),
        ],
        ExperimentKind::CrossOracle => &[("current_difference", Max, 1e-8)],
    }
}

/// One row of the residual table. Diagnostics carry no bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<Bound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct Checks {
    table: BTreeMap<&'static str, (Bound, f64)>,
    pub rows: Vec<CheckRow>,
}

impl Checks {
    /// Defaults for `kind` with the config's overrides applied. Unknown
    /// override keys are configuration errors.
    pub fn new(kind: ExperimentKind, overrides: &BTreeMap<String, f64>) -> Result<Self, RunError> {
        let mut table: BTreeMap<&'static str, (Bound, f64)> =
            default_tolerances(kind).iter().map(|&(k, b, v)| (k, (b, v))).collect();
        for (key, &value) in overrides {
            let slot = table.get_mut(key.as_str()).ok_or_else(|| {
                let known: Vec<&str> = default_tolerances(kind).iter().map(|t| t.0).collect();
                RunError::Config(format!("`tolerances.{key}`: no such check for {}; known: {}", kind.name(), known.join(", ")))
            })?;
            if !value.is_finite() {
                return Err(RunError::Config(format!("`tolerances.{key}`: must be finite")));
            }
            slot.1 = value;
        }
        Ok(Self { table, rows: Vec::new() })
    }

    pub fn tolerance(&self, key: &str) -> f64 {
        self.table[key].1
    }

    pub fn check(&mut self, key: &'static str, value: f64) -> bool {
        self.check_named(key, key.to_string(), value)
    }

    /// Row `name` judged against the tolerance of `key`.
    pub fn check_named(&mut self, key: &'static str, name: String, value: f64) -> bool {
        let (bound, tolerance) = self.table[key];
        let pass = match bound {
            Bound::Max => value <= tolerance,
            Bound::Min => value > tolerance,
        };
        self.rows.push(CheckRow { name, value, bound: Some(bound), tolerance: Some(tolerance), pass: Some(pass) });
        pass
    }

    pub fn diagnostic(&mut self, name: impl Into<String>, value: f64) {
        self.rows.push(CheckRow { name: name.into(), value, bound: None, tolerance: None, pass: None });
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }
}

/// Why a run stopped before its checks were complete.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRecord {
    pub kind: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub experiment: &'static str,
    pub config: ExperimentConfig,
    pub checks: Vec<CheckRow>,
    /// Experiment-specific reports.
    pub details: serde_json::Value,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureRecord>,
}

impl Summary {
    pub fn completed(kind: ExperimentKind, config: &ExperimentConfig, checks: Checks, details: serde_json::Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: kind.name(),
            config: config.clone(),
            pass: checks.passed(),
            checks: checks.rows,
            details,
            failure: None,
        }
    }

    pub fn aborted(kind: ExperimentKind, config: &ExperimentConfig, failure: FailureRecord) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: kind.name(),
            config: config.clone(),
            checks: Vec::new(),
            details: serde_json::Value::Null,
            pass: false,
            failure: Some(failure),
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("summary serializes");
        text.push('\n');
        text
    }
}
