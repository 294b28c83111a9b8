//! Classical potentials `(A₀, A)`, gauge functions `χ`, gauge transformations
//! and the electric field.
//!
//! Potentials are evaluated lazily at `(x_j, t)`, so integrators can sample
//! them at arbitrary midpoints. Every analytic generator is separable:
//! `amplitude · envelope(t) · profile(x)`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::linalg::C64;

/// Time dependence of a generator term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Envelope {
    /// Always 1.
    Constant,
    /// `sin²(π (t - start) / duration)` on `[start, start + duration]`, zero elsewhere.
    Pulse { start: f64, duration: f64 },
    /// Rises as `sin²(π (t - start) / (2 rise))` and holds at 1 after `start + rise`.
    Ramp { start: f64, rise: f64 },
}

impl Envelope {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Envelope::Constant => 1.0,
            Envelope::Pulse { start, duration } => {
                let s = (t - start) / duration;
                if s <= 0.0 || s >= 1.0 {
                    0.0
                } else {
                    let v = libm::sin(PI * s);
                    v * v
                }
            }
            Envelope::Ramp { start, rise } => {
                let s = (t - start) / rise;
                if s <= 0.0 {
                    0.0
                } else if s >= 1.0 {
                    1.0
                } else {
                    let v = libm::sin(0.5 * PI * s);
                    v * v
                }
            }
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Envelope::Constant => 0.0,
            Envelope::Pulse { start, duration } => {
                let s = (t - start) / duration;
                if s <= 0.0 || s >= 1.0 {
                    0.0
                } else {
                    PI / duration * libm::sin(2.0 * PI * s)
                }
            }
            Envelope::Ramp { start, rise } => {
                let s = (t - start) / rise;
                if s <= 0.0 || s >= 1.0 {
                    0.0
                } else {
                    0.5 * PI / rise * libm::sin(PI * s)
                }
            }
        }
    }

    /// True when the envelope and its derivative are identically zero up to `t`.
    pub fn quiet_until(&self, t: f64) -> bool {
        match *self {
            Envelope::Constant => false,
            Envelope::Pulse { start, .. } | Envelope::Ramp { start, .. } => start >= t,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Envelope::Constant => Ok(()),
            Envelope::Pulse { start, duration: width } | Envelope::Ramp { start, rise: width } => {
                if !start.is_finite() {
                    return Err(Error::InvalidParameter { name: "envelope start", value: start });
                }
                if !(width.is_finite() && width > 0.0) {
                    return Err(Error::InvalidParameter { name: "envelope width", value: width });
                }
                Ok(())
            }
        }
    }
}

/// Spatial dependence of a generator term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Uniform,
    /// `sin(2π k x / L + phase)`, `k >= 1`.
    Sine { k: u32, phase: f64 },
}

impl Profile {
    fn angle(k: u32, phase: f64, x: f64, length: f64) -> f64 {
        2.0 * PI * k as f64 * x / length + phase
    }

    pub fn value(&self, x: f64, length: f64) -> f64 {
        match *self {
            Profile::Uniform => 1.0,
            Profile::Sine { k, phase } => libm::sin(Self::angle(k, phase, x, length)),
        }
    }

    pub fn derivative(&self, x: f64, length: f64) -> f64 {
        match *self {
            Profile::Uniform => 0.0,
            Profile::Sine { k, phase } => {
                2.0 * PI * k as f64 / length * libm::cos(Self::angle(k, phase, x, length))
            }
        }
    }

    /// Periodic antiderivative of the zero-mean part.
    pub fn antiderivative(&self, x: f64, length: f64) -> f64 {
        match *self {
            Profile::Uniform => 0.0,
            Profile::Sine { k, phase } => {
                -libm::cos(Self::angle(k, phase, x, length)) * length / (2.0 * PI * k as f64)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Profile::Uniform => 1.0,
            Profile::Sine { .. } => 0.0,
        }
    }

    /// Highest Fourier index present.
    pub fn band(&self) -> usize {
        match *self {
            Profile::Uniform => 0,
            Profile::Sine { k, .. } => k as usize,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Profile::Uniform => Ok(()),
            Profile::Sine { k, phase } => {
                if k == 0 {
                    return Err(Error::InvalidParameter { name: "profile k", value: 0.0 });
                }
                if !phase.is_finite() {
                    return Err(Error::InvalidParameter { name: "profile phase", value: phase });
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeTerm {
    pub amplitude: f64,
    pub profile: Profile,
    pub envelope: Envelope,
}

/// A real gauge function `χ(x, t) = Σ amplitude · envelope(t) · profile(x)`.
///
/// Every term's envelope must be quiet before some start time, which gives
/// `χ = ∂χ/∂t = 0` there. Constant envelopes are rejected.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeFunction {
    length: f64,
    terms: Vec<GaugeTerm>,
}

impl GaugeFunction {
    pub fn new(length: f64, terms: Vec<GaugeTerm>) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidLength(length));
        }
        for term in &terms {
            if !term.amplitude.is_finite() {
                return Err(Error::InvalidParameter { name: "gauge amplitude", value: term.amplitude });
            }
            term.profile.validate()?;
            term.envelope.validate()?;
            if matches!(term.envelope, Envelope::Constant) {
                return Err(Error::InitialConditionViolated { t0: f64::NEG_INFINITY });
            }
        }
        Ok(Self { length, terms })
    }

    pub fn zero(length: f64) -> Result<Self> {
        Self::new(length, Vec::new())
    }

    /// `amplitude · envelope(t) · sin(2πkx/L + phase)`.
    pub fn separable(length: f64, amplitude: f64, k: u32, phase: f64, envelope: Envelope) -> Result<Self> {
        Self::new(
            length,
            vec![GaugeTerm { amplitude, profile: Profile::Sine { k, phase }, envelope }],
        )
    }

    /// Spatially uniform `amplitude · envelope(t)`: a pure shift of `A₀`.
    pub fn uniform(length: f64, amplitude: f64, envelope: Envelope) -> Result<Self> {
        Self::new(
            length,
            vec![GaugeTerm { amplitude, profile: Profile::Uniform, envelope }],
        )
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn terms(&self) -> &[GaugeTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.amplitude == 0.0)
    }

    /// `χ₁ + χ₂`.
    pub fn plus(&self, other: &GaugeFunction) -> Result<Self> {
        check_length(self.length, other.length)?;
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self::new(self.length, terms)
    }

    pub fn band_limit(&self) -> usize {
        self.terms.iter().map(|t| t.profile.band()).max().unwrap_or(0)
    }

    /// Band limit `B <= (N-1)/4` and matching box length.
    pub fn check_grid(&self, grid: &Grid1D) -> Result<()> {
        check_length(grid.length(), self.length)?;
        let band = self.band_limit();
        if band > grid.dealias_limit() {
            return Err(Error::BandLimitExceeded { band, limit: grid.dealias_limit() });
        }
        Ok(())
    }

    /// `χ(·, t0) = 0` and `∂χ/∂t(·, t0) = 0`.
    pub fn check_initial(&self, t0: f64) -> Result<()> {
        if self.terms.iter().all(|t| t.amplitude == 0.0 || t.envelope.quiet_until(t0)) {
            Ok(())
        } else {
            Err(Error::InitialConditionViolated { t0 })
        }
    }

    fn sum(&self, f: impl Fn(&GaugeTerm) -> f64) -> f64 {
        self.terms.iter().map(f).sum()
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        self.sum(|g| g.amplitude * g.envelope.value(t) * g.profile.value(x, self.length))
    }

    pub fn time_derivative(&self, x: f64, t: f64) -> f64 {
        self.sum(|g| g.amplitude * g.envelope.derivative(t) * g.profile.value(x, self.length))
    }

    pub fn space_derivative(&self, x: f64, t: f64) -> f64 {
        self.sum(|g| g.amplitude * g.envelope.value(t) * g.profile.derivative(x, self.length))
    }

    pub fn mixed_derivative(&self, x: f64, t: f64) -> f64 {
        self.sum(|g| g.amplitude * g.envelope.derivative(t) * g.profile.derivative(x, self.length))
    }

    /// `χ(x_j, t)` at every site.
    pub fn sample(&self, grid: &Grid1D, t: f64) -> Vec<f64> {
        (0..grid.sites()).map(|j| self.value(grid.position(j), t)).collect()
    }

    /// Diagonal phase `e^{-iqχ(x_j, t)}` per site.
    pub fn phase_factors(&self, grid: &Grid1D, charge: f64, t: f64) -> Vec<C64> {
        self.sample(grid, t)
            .into_iter()
            .map(|chi| crate::linalg::cis(-charge * chi))
            .collect()
    }

    fn is_static(&self) -> bool {
        self.is_zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    /// `A₀`
    Scalar,
    /// `A` (the single spatial component)
    Vector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldTerm {
    pub component: Component,
    pub amplitude: f64,
    pub profile: Profile,
    pub envelope: Envelope,
}

/// Analytic potential built from separable terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplicitField {
    length: f64,
    terms: Vec<FieldTerm>,
}

impl ExplicitField {
    pub fn new(length: f64, terms: Vec<FieldTerm>) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidLength(length));
        }
        for term in &terms {
            if !term.amplitude.is_finite() {
                return Err(Error::InvalidParameter { name: "field amplitude", value: term.amplitude });
            }
            term.profile.validate()?;
            term.envelope.validate()?;
        }
        Ok(Self { length, terms })
    }

    pub fn zero(length: f64) -> Result<Self> {
        Self::new(length, Vec::new())
    }

    pub fn terms(&self) -> &[FieldTerm] {
        &self.terms
    }

    fn is_static(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.amplitude == 0.0 || matches!(t.envelope, Envelope::Constant))
    }
}

/// Potential sampled on the grid sites at a list of times; linear in time
/// between samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TabulatedField {
    length: f64,
    times: Vec<f64>,
    scalar: Vec<Vec<f64>>,
    vector: Vec<Vec<f64>>,
}

impl TabulatedField {
    pub fn new(length: f64, times: Vec<f64>, scalar: Vec<Vec<f64>>, vector: Vec<Vec<f64>>) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidLength(length));
        }
        if times.is_empty() || scalar.len() != times.len() || vector.len() != times.len() {
            return Err(Error::MalformedTable(String::from("row count must match the time count")));
        }
        if times.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(core::cmp::Ordering::Greater)) {
            return Err(Error::MalformedTable(String::from("times must be strictly increasing")));
        }
        let sites = scalar[0].len();
        if scalar.iter().chain(&vector).any(|row| row.len() != sites) {
            return Err(Error::MalformedTable(String::from("rows have unequal lengths")));
        }
        Ok(Self { length, times, scalar, vector })
    }

    pub fn sites(&self) -> usize {
        self.scalar[0].len()
    }

    fn bracket(&self, t: f64) -> (usize, usize, f64) {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return (0, 0, 0.0);
        }
        if t >= self.times[n - 1] {
            return (n - 1, n - 1, 0.0);
        }
        let hi = self.times.partition_point(|&s| s <= t).min(n - 1);
        let lo = hi - 1;
        let w = (t - self.times[lo]) / (self.times[hi] - self.times[lo]);
        (lo, hi, w)
    }

    fn interpolate(rows: &[Vec<f64>], (lo, hi, w): (usize, usize, f64)) -> Vec<f64> {
        rows[lo]
            .iter()
            .zip(&rows[hi])
            .map(|(a, b)| a + w * (b - a))
            .collect()
    }

    fn time_slope(&self, rows: &[Vec<f64>], t: f64) -> Result<Vec<f64>> {
        let n = self.times.len();
        if n < 2 {
            return Err(Error::CannotDifferentiate(n));
        }
        let hi = self.times.partition_point(|&s| s <= t).clamp(1, n - 1);
        let lo = hi - 1;
        let span = self.times[hi] - self.times[lo];
        Ok(rows[lo]
            .iter()
            .zip(&rows[hi])
            .map(|(a, b)| (b - a) / span)
            .collect())
    }

    fn check_grid(&self, grid: &Grid1D) -> Result<()> {
        check_length(grid.length(), self.length)?;
        if self.sites() != grid.sites() {
            return Err(Error::DimensionMismatch {
                context: "tabulated potential",
                expected: grid.sites(),
                found: self.sites(),
            });
        }
        Ok(())
    }
}

/// Classical potential with a provenance trail.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EMPotential {
    Explicit(ExplicitField),
    /// `(∂χ/∂t, -∂χ/∂x)`.
    PureGauge(GaugeFunction),
    /// `(A₀ + ∂χ/∂t, A - ∂χ/∂x)`.
    Transformed { base: Box<EMPotential>, chi: GaugeFunction },
    Tabulated(TabulatedField),
}

/// Potential evaluated at the grid sites at one instant.
///
/// `vector_antiderivative` and `vector_mean` describe `A` well enough to form
/// link phases `∫_{x_l}^{x_j} A dx` along the shortest periodic path.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSample {
    pub t: f64,
    pub scalar: Vec<f64>,
    pub vector: Vec<f64>,
    pub vector_mean: f64,
    pub vector_antiderivative: Vec<f64>,
}

impl PotentialSample {
    fn zeros(sites: usize, t: f64) -> Self {
        Self {
            t,
            scalar: vec![0.0; sites],
            vector: vec![0.0; sites],
            vector_mean: 0.0,
            vector_antiderivative: vec![0.0; sites],
        }
    }

    /// `∫_{x_l}^{x_j} A dx` along the shortest periodic path.
    pub fn link_phase(&self, grid: &Grid1D, j: usize, l: usize) -> f64 {
        self.vector_antiderivative[j] - self.vector_antiderivative[l]
            + self.vector_mean * grid.wrapped_separation(j, l)
    }

    pub fn is_zero(&self) -> bool {
        self.scalar.iter().chain(&self.vector).all(|&v| v == 0.0) && self.vector_mean == 0.0
    }
}

impl EMPotential {
    pub fn zero(length: f64) -> Result<Self> {
        Ok(EMPotential::Explicit(ExplicitField::zero(length)?))
    }

    /// Pure-gauge potential generated by `chi`, checked against the grid.
    pub fn pure_gauge(chi: GaugeFunction, grid: &Grid1D) -> Result<Self> {
        chi.check_grid(grid)?;
        Ok(EMPotential::PureGauge(chi))
    }

    /// Gauge transform of `self` by `chi`.
    pub fn gauge_transform(&self, chi: &GaugeFunction, grid: &Grid1D) -> Result<Self> {
        check_length(self.length(), chi.length())?;
        chi.check_grid(grid)?;
        Ok(EMPotential::Transformed {
            base: Box::new(self.clone()),
            chi: chi.clone(),
        })
    }

    pub fn length(&self) -> f64 {
        match self {
            EMPotential::Explicit(f) => f.length,
            EMPotential::PureGauge(chi) => chi.length,
            EMPotential::Transformed { base, .. } => base.length(),
            EMPotential::Tabulated(t) => t.length,
        }
    }

    /// Provenance trail, e.g. `transformed(pure_gauge)`.
    pub fn provenance(&self) -> String {
        match self {
            EMPotential::Explicit(_) => String::from("explicit"),
            EMPotential::PureGauge(_) => String::from("pure_gauge"),
            EMPotential::Transformed { base, .. } => format!("transformed({})", base.provenance()),
            EMPotential::Tabulated(_) => String::from("tabulated"),
        }
    }

    /// True when the potential does not depend on time.
    pub fn is_static(&self) -> bool {
        match self {
            EMPotential::Explicit(f) => f.is_static(),
            EMPotential::PureGauge(chi) => chi.is_static(),
            EMPotential::Transformed { base, chi } => base.is_static() && chi.is_static(),
            EMPotential::Tabulated(t) => t.times.len() == 1,
        }
    }

    /// Every gauge function in the provenance trail.
    pub fn gauge_functions(&self) -> Vec<&GaugeFunction> {
        match self {
            EMPotential::Explicit(_) | EMPotential::Tabulated(_) => Vec::new(),
            EMPotential::PureGauge(chi) => vec![chi],
            EMPotential::Transformed { base, chi } => {
                let mut all = base.gauge_functions();
                all.push(chi);
                all
            }
        }
    }

    /// Length, band-limit and table-shape checks against `grid`.
    pub fn check_grid(&self, grid: &Grid1D) -> Result<()> {
        check_length(grid.length(), self.length())?;
        match self {
            EMPotential::Explicit(_) => Ok(()),
            EMPotential::PureGauge(chi) => chi.check_grid(grid),
            EMPotential::Transformed { base, chi } => {
                chi.check_grid(grid)?;
                base.check_grid(grid)
            }
            EMPotential::Tabulated(t) => t.check_grid(grid),
        }
    }

    /// Samples at every grid site at time `t`; rejects non-finite values.
    pub fn sample(&self, grid: &Grid1D, t: f64) -> Result<PotentialSample> {
        let mut s = PotentialSample::zeros(grid.sites(), t);
        self.accumulate(grid, t, &mut s)?;
        for (site, (a0, a)) in s.scalar.iter().zip(&s.vector).enumerate() {
            if !(a0.is_finite() && a.is_finite() && s.vector_antiderivative[site].is_finite()) {
                return Err(Error::NonFinitePotential { site, t });
            }
        }
        if !s.vector_mean.is_finite() {
            return Err(Error::NonFinitePotential { site: 0, t });
        }
        Ok(s)
    }

    fn accumulate(&self, grid: &Grid1D, t: f64, s: &mut PotentialSample) -> Result<()> {
        match self {
            EMPotential::Explicit(field) => {
                for term in &field.terms {
                    let scale = term.amplitude * term.envelope.value(t);
                    if scale == 0.0 {
                        continue;
                    }
                    for j in 0..grid.sites() {
                        let x = grid.position(j);
                        let v = scale * term.profile.value(x, field.length);
                        match term.component {
                            Component::Scalar => s.scalar[j] += v,
                            Component::Vector => {
                                s.vector[j] += v;
                                s.vector_antiderivative[j] +=
                                    scale * term.profile.antiderivative(x, field.length);
                            }
                        }
                    }
                    if term.component == Component::Vector {
                        s.vector_mean += scale * term.profile.mean();
                    }
                }
            }
            EMPotential::PureGauge(chi) => add_gauge(chi, grid, t, s),
            EMPotential::Transformed { base, chi } => {
                base.accumulate(grid, t, s)?;
                add_gauge(chi, grid, t, s);
            }
            EMPotential::Tabulated(table) => {
                table.check_grid(grid)?;
                let b = table.bracket(t);
                let scalar = TabulatedField::interpolate(&table.scalar, b);
                let vector = TabulatedField::interpolate(&table.vector, b);
                let mean = vector.iter().sum::<f64>() / vector.len() as f64;
                let anti = spectral_antiderivative(grid, &vector);
                for j in 0..grid.sites() {
                    s.scalar[j] += scalar[j];
                    s.vector[j] += vector[j];
                    s.vector_antiderivative[j] += anti[j];
                }
                s.vector_mean += mean;
            }
        }
        Ok(())
    }

    /// Electric field `E = -(∂A/∂t + ∂A₀/∂x)` at the grid sites.
    ///
    /// Analytic generators are differentiated exactly. Tabulated potentials use
    /// the time slope between bracketing samples and the spectral derivative in
    /// space; a single-sample table cannot be differentiated in time.
    pub fn field_strength(&self, grid: &Grid1D, t: f64) -> Result<Vec<f64>> {
        check_length(grid.length(), self.length())?;
        let mut dt_vector = vec![0.0; grid.sites()];
        let mut dx_scalar = vec![0.0; grid.sites()];
        self.accumulate_derivatives(grid, t, &mut dt_vector, &mut dx_scalar)?;
        Ok(dt_vector
            .iter()
            .zip(&dx_scalar)
            .map(|(a, b)| -(a + b))
            .collect())
    }

    fn accumulate_derivatives(
        &self,
        grid: &Grid1D,
        t: f64,
        dt_vector: &mut [f64],
        dx_scalar: &mut [f64],
    ) -> Result<()> {
        match self {
            EMPotential::Explicit(field) => {
                for term in &field.terms {
                    for j in 0..grid.sites() {
                        let x = grid.position(j);
                        match term.component {
                            Component::Vector => {
                                dt_vector[j] += term.amplitude
                                    * term.envelope.derivative(t)
                                    * term.profile.value(x, field.length)
                            }
                            Component::Scalar => {
                                dx_scalar[j] += term.amplitude
                                    * term.envelope.value(t)
                                    * term.profile.derivative(x, field.length)
                            }
                        }
                    }
                }
            }
            EMPotential::PureGauge(chi) => add_gauge_derivatives(chi, grid, t, dt_vector, dx_scalar),
            EMPotential::Transformed { base, chi } => {
                base.accumulate_derivatives(grid, t, dt_vector, dx_scalar)?;
                add_gauge_derivatives(chi, grid, t, dt_vector, dx_scalar);
            }
            EMPotential::Tabulated(table) => {
                table.check_grid(grid)?;
                let slope = table.time_slope(&table.vector, t)?;
                let scalar = TabulatedField::interpolate(&table.scalar, table.bracket(t));
                let d_scalar = grid.differentiate(&scalar);
                for j in 0..grid.sites() {
                    dt_vector[j] += slope[j];
                    dx_scalar[j] += d_scalar[j];
                }
            }
        }
        Ok(())
    }
}

fn add_gauge(chi: &GaugeFunction, grid: &Grid1D, t: f64, s: &mut PotentialSample) {
    if chi.is_zero() {
        return;
    }
    for j in 0..grid.sites() {
        let x = grid.position(j);
        s.scalar[j] += chi.time_derivative(x, t);
        s.vector[j] -= chi.space_derivative(x, t);
        s.vector_antiderivative[j] -= chi.value(x, t);
    }
}

fn add_gauge_derivatives(chi: &GaugeFunction, grid: &Grid1D, t: f64, dt_vector: &mut [f64], dx_scalar: &mut [f64]) {
    for j in 0..grid.sites() {
        let mixed = chi.mixed_derivative(grid.position(j), t);
        dt_vector[j] -= mixed;
        dx_scalar[j] += mixed;
    }
}

/// Periodic antiderivative of the zero-mean part of `samples`.
fn spectral_antiderivative(grid: &Grid1D, samples: &[f64]) -> Vec<f64> {
    let values: Vec<C64> = samples.iter().map(|&v| C64::new(v, 0.0)).collect();
    let mut coefficients = grid.to_momentum(&values);
    for (c, &p) in coefficients.iter_mut().zip(grid.momenta()) {
        *c = if p == 0.0 { C64::new(0.0, 0.0) } else { *c / C64::new(0.0, p) };
    }
    grid.from_momentum(&coefficients).iter().map(|z| z.re).collect()
}

fn check_length(expected: f64, found: f64) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}

/// Ready-made generators used by the reference experiments.
pub mod presets {
    use super::*;

    /// Ramped sine `amplitude · sin²(π (t - t0) / (2 rise)) · sin(2πx/L)`,
    /// held at full strength after `t0 + rise`.
    pub fn reference_chi(length: f64, amplitude: f64, t0: f64, rise: f64) -> Result<GaugeFunction> {
        GaugeFunction::separable(length, amplitude, 1, 0.0, Envelope::Ramp { start: t0, rise })
    }

    /// `A(x, t) = amplitude · sin²(π (t - t0) / duration) · cos(2πx/L)`, `A₀ = 0`.
    pub fn reference_pulse(length: f64, amplitude: f64, t0: f64, duration: f64) -> Result<EMPotential> {
        Ok(EMPotential::Explicit(ExplicitField::new(
            length,
            vec![FieldTerm {
                component: Component::Vector,
                amplitude,
                profile: Profile::Sine { k: 1, phase: PI / 2.0 },
                envelope: Envelope::Pulse { start: t0, duration },
            }],
        )?))
    }
}
