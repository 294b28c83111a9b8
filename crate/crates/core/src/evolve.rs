//! One-particle Hamiltonian `h(t)` and Crank–Nicolson evolution of the
//! negative-energy sea.
//!
//! Two couplings of the vector potential are available:
//!
//! * [`Coupling::Covariant`] (default) puts `A` into the spectral derivative
//!   as link phases, `D_A(j, l) = D(j, l) · exp(iq ∫_{x_l}^{x_j} A dx)`.
//!   A periodic gauge transformation then acts on `h` as an exact similarity
//!   `h_{A'} = U h_A U†` with `U = diag(e^{-iqχ(x_j)})`.
//! * [`Coupling::Minimal`] adds `-q σ₁ A(x_j)` pointwise. On a truncated
//!   momentum set this breaks the product rule, and the vacuum current picks
//!   up a cutoff-sized gauge dependence.
//!
//! Both reduce to `h₀ + q A₀` when `A = 0`.

use nalgebra::linalg::LU;
use nalgebra::{DMatrix, Dyn};
use serde::{Deserialize, Serialize};

use crate::dirac::ModeBank;
use crate::error::{Error, Result};
use crate::linalg::{cis, ModeMatrix, OperatorMatrix, C64, I};
use crate::potential::{EMPotential, PotentialSample};

/// Largest column-norm drift tolerated before a run aborts.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    #[default]
    Covariant,
    Minimal,
}

/// `h(t)` with the default coupling.
pub fn hamiltonian_matrix(bank: &ModeBank, pot: &EMPotential, t: f64) -> Result<OperatorMatrix> {
    hamiltonian_with(bank, pot, t, Coupling::Covariant)
}

pub fn hamiltonian_with(bank: &ModeBank, pot: &EMPotential, t: f64, coupling: Coupling) -> Result<OperatorMatrix> {
    pot.check_grid(bank.grid())?;
    let sample = pot.sample(bank.grid(), t)?;
    Ok(assemble(bank, &bank.grid().spectral_derivative(), &sample, coupling))
}

/// Spectral derivative with the vector potential folded in: `∂ - iqA` for
/// [`Coupling::Covariant`], plain `∂` for [`Coupling::Minimal`].
///
/// The lower triangle mirrors the upper, so the result is anti-Hermitian bit
/// for bit.
pub fn covariant_derivative(bank: &ModeBank, d: &DMatrix<f64>, s: &PotentialSample, coupling: Coupling) -> DMatrix<C64> {
    let grid = bank.grid();
    let n = grid.sites();
    let q = bank.charge();
    let mut out = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        for l in (j + 1)..n {
            let mut v = C64::new(d[(j, l)], 0.0);
            if coupling == Coupling::Covariant {
                v *= cis(q * s.link_phase(grid, j, l));
            }
            out[(j, l)] = v;
            out[(l, j)] = -v.conj();
        }
    }
    out
}

fn assemble(bank: &ModeBank, d: &DMatrix<f64>, s: &PotentialSample, coupling: Coupling) -> OperatorMatrix {
    let n = bank.grid().sites();
    let q = bank.charge();
    let m = bank.mass();
    let dc = covariant_derivative(bank, d, s, coupling);
    let mut h = OperatorMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for l in 0..n {
            let k = -I * dc[(j, l)];
            h[(2 * j, 2 * l + 1)] = k;
            h[(2 * j + 1, 2 * l)] = k;
        }
        let a0 = q * s.scalar[j];
        h[(2 * j, 2 * j)] = C64::new(m + a0, 0.0);
        h[(2 * j + 1, 2 * j + 1)] = C64::new(-m + a0, 0.0);
        if coupling == Coupling::Minimal {
            let a = C64::new(-q * s.vector[j], 0.0);
            h[(2 * j, 2 * j + 1)] += a;
            h[(2 * j + 1, 2 * j)] += a;
        }
    }
    h
}

/// Time window and integrator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveOptions {
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Snapshot cadence in steps; 0 keeps only the first and last.
    pub snapshot_every: usize,
    pub coupling: Coupling,
}

impl EvolveOptions {
    pub fn new(t0: f64, t_end: f64, dt: f64) -> Self {
        Self { t0, t_end, dt, snapshot_every: 0, coupling: Coupling::Covariant }
    }

    pub fn every(mut self, steps: usize) -> Self {
        self.snapshot_every = steps;
        self
    }

    pub fn with_coupling(mut self, coupling: Coupling) -> Self {
        self.coupling = coupling;
        self
    }

    /// Number of steps; `dt` must divide `t_end - t0` to 1e-9 relative.
    pub fn step_count(&self) -> Result<usize> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidTimeStep(self.dt));
        }
        let span = self.t_end - self.t0;
        if !(self.t0.is_finite() && span.is_finite() && span > 0.0) {
            return Err(Error::InvalidParameter { name: "t_end", value: self.t_end });
        }
        let n = libm::round(span / self.dt);
        if n < 1.0 || libm::fabs(n * self.dt - span) > 1e-9 * span {
            return Err(Error::StepDoesNotDivide { t0: self.t0, t_end: self.t_end, dt: self.dt });
        }
        Ok(n as usize)
    }

    pub fn time_at(&self, step: usize) -> f64 {
        self.t0 + step as f64 * self.dt
    }

    fn is_snapshot(&self, step: usize, total: usize) -> bool {
        step == 0 || step == total || (self.snapshot_every > 0 && step % self.snapshot_every == 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct IntegratorStats {
    pub steps: usize,
    /// Largest `| ‖φ‖ - 1 |` over all columns and steps.
    pub max_norm_drift: f64,
}

/// Negative-energy modes evolved to time `t`.
#[derive(Debug, Clone)]
pub struct EvolvedSea<'a> {
    pub bank: &'a ModeBank,
    pub phi: ModeMatrix,
    pub t: f64,
    pub stats: IntegratorStats,
}

impl<'a> EvolvedSea<'a> {
    /// The free sea at `t0`.
    pub fn initial(bank: &'a ModeBank, t0: f64) -> Self {
        Self { bank, phi: bank.negative_sea(), t: t0, stats: IntegratorStats::default() }
    }
}

/// Reusable Crank–Nicolson stepper. The factorization is cached when the
/// potential does not depend on time.
pub struct Stepper<'a> {
    bank: &'a ModeBank,
    pot: &'a EMPotential,
    coupling: Coupling,
    derivative: DMatrix<f64>,
    cached: Option<(f64, LU<C64, Dyn, Dyn>)>,
}

impl<'a> Stepper<'a> {
    pub fn new(bank: &'a ModeBank, pot: &'a EMPotential, coupling: Coupling) -> Result<Self> {
        pot.check_grid(bank.grid())?;
        Ok(Self { bank, pot, coupling, derivative: bank.grid().spectral_derivative(), cached: None })
    }

    pub fn derivative(&self) -> &DMatrix<f64> {
        &self.derivative
    }

    pub fn hamiltonian(&self, t: f64) -> Result<OperatorMatrix> {
        let sample = self.pot.sample(self.bank.grid(), t)?;
        Ok(assemble(self.bank, &self.derivative, &sample, self.coupling))
    }

    fn factor(&self, t_mid: f64, dt: f64) -> Result<LU<C64, Dyn, Dyn>> {
        let mut a = self.hamiltonian(t_mid)? * C64::new(0.0, 0.5 * dt);
        for i in 0..a.nrows() {
            a[(i, i)] += C64::new(1.0, 0.0);
        }
        if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::SolveFailed("crank-nicolson factorization"));
        }
        Ok(a.lu())
    }

    /// `Φ' = (I + i h dt/2)⁻¹ (I - i h dt/2) Φ` with `h` sampled at `t + dt/2`.
    ///
    /// Uses `(I - iK) = 2I - (I + iK)`, so `Φ' = 2X - Φ` with `(I + iK) X = Φ`.
    pub fn step(&mut self, phi: &ModeMatrix, t: f64, dt: f64) -> Result<ModeMatrix> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidTimeStep(dt));
        }
        let x = if self.pot.is_static() {
            if self.cached.as_ref().map(|(cdt, _)| *cdt) != Some(dt) {
                self.cached = Some((dt, self.factor(t + 0.5 * dt, dt)?));
            }
            self.cached.as_ref().unwrap().1.solve(phi)
        } else {
            self.factor(t + 0.5 * dt, dt)?.solve(phi)
        };
        let x = x.ok_or(Error::SolveFailed("crank-nicolson step"))?;
        let out = x * C64::new(2.0, 0.0) - phi;
        if out.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::SolveFailed("crank-nicolson step"));
        }
        Ok(out)
    }
}

/// Single Crank–Nicolson step with the default coupling.
pub fn step(bank: &ModeBank, pot: &EMPotential, phi: &ModeMatrix, t: f64, dt: f64) -> Result<ModeMatrix> {
    Stepper::new(bank, pot, Coupling::Covariant)?.step(phi, t, dt)
}

pub fn column_norm_drift(phi: &ModeMatrix) -> f64 {
    phi.column_iter()
        .map(|c| libm::fabs(c.norm() - 1.0))
        .fold(0.0, f64::max)
}

pub fn evolve_sea<'a>(bank: &'a ModeBank, pot: &EMPotential, opts: &EvolveOptions) -> Result<EvolvedSea<'a>> {
    evolve_sea_observed(bank, pot, opts, |_, _, _| Ok(()))
}

/// Evolves the sea from `t0` to `t_end`, calling `observer(step, t, Φ)` at
/// step 0, every `snapshot_every` steps and at the final step.
pub fn evolve_sea_observed<'a, F>(
    bank: &'a ModeBank,
    pot: &EMPotential,
    opts: &EvolveOptions,
    mut observer: F,
) -> Result<EvolvedSea<'a>>
where
    F: FnMut(usize, f64, &ModeMatrix) -> Result<()>,
{
    let total = opts.step_count()?;
    let mut stepper = Stepper::new(bank, pot, opts.coupling)?;
    let mut sea = EvolvedSea::initial(bank, opts.t0);
    observer(0, opts.t0, &sea.phi)?;
    for n in 0..total {
        let t = opts.time_at(n);
        sea.phi = stepper.step(&sea.phi, t, opts.dt)?;
        let t_next = opts.time_at(n + 1);
        let drift = column_norm_drift(&sea.phi);
        sea.stats.max_norm_drift = sea.stats.max_norm_drift.max(drift);
        if drift > NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift { drift, limit: NORM_DRIFT_LIMIT, t: t_next });
        }
        sea.t = t_next;
        sea.stats.steps = n + 1;
        if opts.is_snapshot(n + 1, total) {
            observer(n + 1, t_next, &sea.phi)?;
        }
    }
    Ok(sea)
}

/// Free evolution in closed form: `Φ₀ · diag(e^{+iE_p (t - t0)})`.
pub fn free_sea(bank: &ModeBank, elapsed: f64) -> ModeMatrix {
    let mut phi = bank.negative_sea();
    let negative = bank.branch_indices(crate::dirac::Branch::Negative);
    for (c, &i) in negative.iter().enumerate() {
        let phase = cis(bank.modes()[i].energy * elapsed);
        for z in phi.column_mut(c).iter_mut() {
            *z *= phase;
        }
    }
    phi
}
