//! Vacuum current, charge density, free-field sea energy, the continuity
//! residual and the two-run gauge comparison.
//!
//! All quantities carry the charge `q`. Column vectors hold `sqrt(dx) φ(x_j)`,
//! so site densities divide by `dx`.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dirac::ModeBank;
use crate::error::{Error, Result};
use crate::evolve::{covariant_derivative, evolve_sea_observed, Coupling, EvolveOptions, IntegratorStats};
use crate::grid::Grid1D;
use crate::linalg::{gram_residual, max_abs_diff, ModeMatrix, OperatorMatrix, C64};
use crate::potential::{EMPotential, GaugeFunction, PotentialSample};
use crate::twopoint::{build_q, build_r};

/// `J(x_j)` at one instant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurrentDensity {
    pub t: f64,
    pub values: Vec<f64>,
    /// Largest imaginary part discarded from the spinor sums.
    pub imaginary_residue: f64,
}

/// `ρ(x_j)` at one instant, relative to the sea density at `t0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChargeDensity {
    pub t: f64,
    pub values: Vec<f64>,
}

impl ChargeDensity {
    /// `∫ρ dx`.
    pub fn total(&self, dx: f64) -> f64 {
        self.values.iter().sum::<f64>() * dx
    }
}

/// `J(x_j) = q Σ_cols φ†(x_j) σ₁ φ(x_j)`.
pub fn vacuum_current(bank: &ModeBank, phi: &ModeMatrix, t: f64) -> CurrentDensity {
    let n = bank.grid().sites();
    let scale = bank.charge() / bank.grid().dx();
    let mut values = Vec::with_capacity(n);
    let mut imaginary_residue = 0.0_f64;
    for j in 0..n {
        let mut acc = C64::new(0.0, 0.0);
        for c in 0..phi.ncols() {
            let up = phi[(2 * j, c)];
            let down = phi[(2 * j + 1, c)];
            acc += up.conj() * down + down.conj() * up;
        }
        imaginary_residue = imaginary_residue.max(libm::fabs(acc.im * scale));
        values.push(acc.re * scale);
    }
    CurrentDensity { t, values, imaginary_residue }
}

/// `J(x_j) = q · ½ tr(σ₁ R(x_j, x_j))`.
pub fn current_from_r(bank: &ModeBank, r: &OperatorMatrix, t: f64) -> CurrentDensity {
    let scale = 0.5 * bank.charge() / bank.grid().dx();
    let mut imaginary_residue = 0.0_f64;
    let values = (0..bank.grid().sites())
        .map(|j| {
            let tr = r[(2 * j, 2 * j + 1)] + r[(2 * j + 1, 2 * j)];
            imaginary_residue = imaginary_residue.max(libm::fabs(tr.im * scale));
            tr.re * scale
        })
        .collect();
    CurrentDensity { t, values, imaginary_residue }
}

/// `Σ_cols |φ(x_j)|²` times `dx`, per site.
pub fn site_occupation(phi: &ModeMatrix) -> Vec<f64> {
    (0..phi.nrows() / 2)
        .map(|j| {
            phi.column_iter()
                .map(|c| c[2 * j].norm_sqr() + c[2 * j + 1].norm_sqr())
                .sum()
        })
        .collect()
}

/// `ρ(x_j) = q (Σ_cols |φ(x_j)|² - ρ_ref(x_j))`, with `reference` from
/// [`site_occupation`] of the initial sea.
pub fn charge_density(bank: &ModeBank, phi: &ModeMatrix, reference: &[f64], t: f64) -> ChargeDensity {
    let scale = bank.charge() / bank.grid().dx();
    let values = site_occupation(phi)
        .iter()
        .zip(reference)
        .map(|(o, r)| (o - r) * scale)
        .collect();
    ChargeDensity { t, values }
}

/// `Σ_cols φ† h₀ φ - Σ_neg (-E_p)`; zero for the free sea.
pub fn sea_energy(bank: &ModeBank, h0: &OperatorMatrix, phi: &ModeMatrix) -> f64 {
    let hphi = h0 * phi;
    let raw: f64 = phi.iter().zip(hphi.iter()).map(|(a, b)| (a.conj() * b).re).sum();
    raw - bank.sea_energy_offset()
}

/// `∂J/∂x` via the product rule, `2q Re Σ_cols φ†(x_j) σ₁ (D_A φ)(x_j)`.
///
/// `D_A` is the derivative that enters the Hamiltonian, so the local
/// continuity equation holds up to the time discretization only.
pub fn current_divergence(bank: &ModeBank, phi: &ModeMatrix, d_a: &DMatrix<C64>) -> Vec<f64> {
    let n = bank.grid().sites();
    let scale = 2.0 * bank.charge() / bank.grid().dx();
    let mut up = DMatrix::<C64>::zeros(n, phi.ncols());
    let mut down = DMatrix::<C64>::zeros(n, phi.ncols());
    for j in 0..n {
        for c in 0..phi.ncols() {
            up[(j, c)] = phi[(2 * j, c)];
            down[(j, c)] = phi[(2 * j + 1, c)];
        }
    }
    let d_up = d_a * &up;
    let d_down = d_a * &down;
    (0..n)
        .map(|j| {
            let acc: f64 = (0..phi.ncols())
                .map(|c| (up[(j, c)].conj() * d_down[(j, c)] + down[(j, c)].conj() * d_up[(j, c)]).re)
                .sum();
            acc * scale
        })
        .collect()
}

/// Spectral derivative of sampled `J`. Aliasing of the spinor product makes
/// this a poor continuity witness; see [`current_divergence`].
pub fn spectral_divergence(grid: &Grid1D, current: &[f64]) -> Vec<f64> {
    grid.differentiate(current)
}

/// `max |(ρ_{n+1} - ρ_{n-1}) / (2Δt) + ∂J/∂x|_n` over interior snapshots.
///
/// Snapshots must be equally spaced in time.
pub fn continuity_residual(times: &[f64], density: &[Vec<f64>], divergence: &[Vec<f64>]) -> Result<f64> {
    let count = times.len();
    if count < 3 {
        return Err(Error::TooFewSnapshots(count));
    }
    if density.len() != count || divergence.len() != count {
        return Err(Error::DimensionMismatch { context: "continuity series", expected: count, found: density.len().min(divergence.len()) });
    }
    let spacing = times[1] - times[0];
    if times.windows(2).any(|w| libm::fabs((w[1] - w[0]) - spacing) > 1e-9 * spacing) {
        return Err(Error::RunMismatch("snapshot spacing"));
    }
    let mut worst = 0.0_f64;
    for n in 1..count - 1 {
        for j in 0..density[n].len() {
            let rate = (density[n + 1][j] - density[n - 1][j]) / (2.0 * spacing);
            worst = worst.max(libm::fabs(rate + divergence[n][j]));
        }
    }
    Ok(worst)
}

/// What [`record_run`] keeps besides the scalar series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RecordOptions {
    /// Store `Φ` at every snapshot (needed for phase residuals).
    pub keep_phi: bool,
    /// Cross-check the mode-sum current against the `R` trace route.
    pub dual_route: bool,
}

/// Snapshot series of one sea evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub sites: usize,
    pub dx: f64,
    pub times: Vec<f64>,
    pub current: Vec<Vec<f64>>,
    pub density: Vec<Vec<f64>>,
    pub divergence: Vec<Vec<f64>>,
    pub energy: Vec<f64>,
    /// `∫ρ dx` per snapshot.
    pub total_charge: Vec<f64>,
    pub phi: Vec<ModeMatrix>,
    pub max_gram_residual: f64,
    pub max_imaginary_residue: f64,
    /// `max |J_modes - J_R|`, when requested.
    pub dual_route_residual: Option<f64>,
    pub stats: IntegratorStats,
}

impl RunRecord {
    pub fn max_abs_current(&self) -> f64 {
        max_series(&self.current)
    }

    pub fn max_abs_density(&self) -> f64 {
        max_series(&self.density)
    }

    pub fn max_abs_total_charge(&self) -> f64 {
        self.total_charge.iter().fold(0.0, |a, v| a.max(libm::fabs(*v)))
    }

    pub fn continuity_residual(&self) -> Result<f64> {
        continuity_residual(&self.times, &self.density, &self.divergence)
    }
}

fn max_series(series: &[Vec<f64>]) -> f64 {
    series.iter().flatten().fold(0.0, |a, v| a.max(libm::fabs(*v)))
}

/// Evolves the sea and records observables at every snapshot.
pub fn record_run(bank: &ModeBank, pot: &EMPotential, opts: &EvolveOptions, keep: RecordOptions) -> Result<RunRecord> {
    let grid = bank.grid();
    let reference = site_occupation(&bank.negative_sea());
    let h0 = bank.free_hamiltonian();
    let phi0 = bank.negative_sea();
    let derivative = grid.spectral_derivative();
    let mut rec = RunRecord {
        sites: grid.sites(),
        dx: grid.dx(),
        times: Vec::new(),
        current: Vec::new(),
        density: Vec::new(),
        divergence: Vec::new(),
        energy: Vec::new(),
        total_charge: Vec::new(),
        phi: Vec::new(),
        max_gram_residual: 0.0,
        max_imaginary_residue: 0.0,
        dual_route_residual: keep.dual_route.then_some(0.0),
        stats: IntegratorStats::default(),
    };
    let sea = evolve_sea_observed(bank, pot, opts, |_, t, phi| {
        let sample: PotentialSample = pot.sample(grid, t)?;
        let d_a = covariant_derivative(bank, &derivative, &sample, opts.coupling);
        let j = vacuum_current(bank, phi, t);
        let rho = charge_density(bank, phi, &reference, t);
        if let Some(worst) = rec.dual_route_residual.as_mut() {
            let jr = current_from_r(bank, &build_r(&build_q(phi, &phi0)), t);
            let diff = j.values.iter().zip(&jr.values).fold(0.0_f64, |a, (x, y)| a.max(libm::fabs(x - y)));
            *worst = worst.max(diff);
            rec.max_imaginary_residue = rec.max_imaginary_residue.max(jr.imaginary_residue);
        }
        rec.max_imaginary_residue = rec.max_imaginary_residue.max(j.imaginary_residue);
        rec.max_gram_residual = rec.max_gram_residual.max(gram_residual(phi));
        rec.total_charge.push(rho.total(grid.dx()));
        rec.divergence.push(current_divergence(bank, phi, &d_a));
        rec.energy.push(sea_energy(bank, &h0, phi));
        rec.times.push(t);
        rec.current.push(j.values);
        rec.density.push(rho.values);
        if keep.keep_phi {
            rec.phi.push(phi.clone());
        }
        Ok(())
    })?;
    rec.stats = sea.stats;
    Ok(rec)
}

/// Pointwise discrepancies between a run under `A` and one under the gauge
/// transform `A'`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeComparisonReport {
    pub max_dj: f64,
    pub max_drho: f64,
    /// `max |Φ_{A'} - e^{-iqχ} ⊙ Φ_A|` over snapshot entries (unit-norm columns).
    pub phase_residual: f64,
    pub sites: usize,
    pub length: f64,
    pub dt: f64,
    pub t0: f64,
    pub t_end: f64,
    pub snapshots: usize,
    pub coupling: Coupling,
    pub chi: GaugeFunction,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares two records taken with identical banks and time settings.
/// `b` must come from the potential transformed by `chi`.
pub fn compare_records(
    bank: &ModeBank,
    opts: &EvolveOptions,
    chi: &GaugeFunction,
    a: &RunRecord,
    b: &RunRecord,
    tolerance: f64,
) -> Result<GaugeComparisonReport> {
    if a.times != b.times {
        return Err(Error::RunMismatch("snapshot times"));
    }
    if a.sites != b.sites || a.dx != b.dx || a.sites != bank.grid().sites() {
        return Err(Error::RunMismatch("grid"));
    }
    let diff = |x: &[Vec<f64>], y: &[Vec<f64>]| {
        x.iter()
            .flatten()
            .zip(y.iter().flatten())
            .fold(0.0_f64, |acc, (p, q)| acc.max(libm::fabs(p - q)))
    };
    let max_dj = diff(&a.current, &b.current);
    let max_drho = diff(&a.density, &b.density);
    let mut phase_residual = 0.0_f64;
    if a.phi.len() == a.times.len() && b.phi.len() == b.times.len() {
        for ((t, pa), pb) in a.times.iter().zip(&a.phi).zip(&b.phi) {
            let u = chi.phase_factors(bank.grid(), bank.charge(), *t);
            let moved = ModeMatrix::from_fn(pa.nrows(), pa.ncols(), |r, c| u[r / 2] * pa[(r, c)]);
            phase_residual = phase_residual.max(max_abs_diff(&moved, pb));
        }
    } else {
        phase_residual = f64::NAN;
    }
    let pass = max_dj <= tolerance && max_drho <= tolerance && phase_residual <= tolerance;
    Ok(GaugeComparisonReport {
        max_dj,
        max_drho,
        phase_residual,
        sites: a.sites,
        length: bank.grid().length(),
        dt: opts.dt,
        t0: opts.t0,
        t_end: opts.t_end,
        snapshots: a.times.len(),
        coupling: opts.coupling,
        chi: chi.clone(),
        tolerance,
        pass,
    })
}

/// Runs `pot` and its gauge transform by `chi` from the same free sea and
/// compares them.
pub fn gauge_compare(
    bank: &ModeBank,
    pot: &EMPotential,
    chi: &GaugeFunction,
    opts: &EvolveOptions,
    tolerance: f64,
) -> Result<GaugeComparisonReport> {
    chi.check_initial(opts.t0)?;
    let moved = pot.gauge_transform(chi, bank.grid())?;
    let keep = RecordOptions { keep_phi: true, dual_route: false };
    let a = record_run(bank, pot, opts, keep)?;
    let b = record_run(bank, &moved, opts, keep)?;
    compare_records(bank, opts, chi, &a, &b, tolerance)
}
