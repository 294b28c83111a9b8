//! Truncated second-quantized model over `M <= 12` selected free modes.
//!
//! Fermion operators use a Jordan–Wigner ordering given by the selection
//! list: bit `i` of a ket is the occupation of `selection[i]` and
//!
//! ```text
//! c_i |n⟩ = (-1)^{Σ_{j<i} n_j} |n - e_i⟩
//! ```
//!
//! One-body operators `Σ_ab O_ab c_a† c_b` conserve particle number, so the
//! dynamics runs in the sector of kets with the vacuum's particle number.
//! The full `2^M` space is only materialized for verification at small `M`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::linalg::LU;
use nalgebra::{DMatrix, DVector, Dyn};
use serde::Serialize;

use crate::dirac::{Branch, Mode, ModeBank};
use crate::error::{Error, Result};
use crate::evolve::{hamiltonian_with, Coupling, EvolveOptions, NORM_DRIFT_LIMIT};
use crate::linalg::{hermiticity_residual, max_abs, ModeMatrix, OperatorMatrix, C64};
use crate::observables::{record_run, site_occupation, RecordOptions};
use crate::potential::{EMPotential, GaugeFunction};

pub const MAX_MODES: usize = 12;
/// Largest truncation for which full-space matrices are built.
pub const MAX_DENSE_MODES: usize = 10;

/// Selected modes, their Fock operators and the number sector of the vacuum.
#[derive(Debug, Clone)]
pub struct FockSpace {
    bank: ModeBank,
    selection: Vec<usize>,
    basis: ModeMatrix,
    eps_r: f64,
    sector: Vec<u32>,
    vacuum_ket: u32,
    vacuum: usize,
    reference_density: Vec<f64>,
}

/// Largest deviations of `{c_i, c_j†} = δ_ij` and `{c_i, c_j} = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnticommutatorReport {
    pub mixed: f64,
    pub same: f64,
}

impl FockSpace {
    /// Builds the space over `selection` (indices into the bank, in
    /// Jordan–Wigner order). Every selected `(λ, k)` needs its partner `(-λ, k)`.
    pub fn new(bank: &ModeBank, selection: &[usize]) -> Result<Self> {
        let m = selection.len();
        if m > MAX_MODES {
            return Err(Error::TooManyModes(m));
        }
        if m == 0 {
            return Err(Error::InvalidSelection(String::from("no modes selected")));
        }
        let modes = bank.modes();
        for (pos, &i) in selection.iter().enumerate() {
            if i >= modes.len() {
                return Err(Error::InvalidSelection(format!("mode index {i} out of range")));
            }
            if selection[..pos].contains(&i) {
                return Err(Error::InvalidSelection(format!("mode index {i} selected twice")));
            }
        }
        for &i in selection {
            let mode = modes[i];
            let partner = bank.index_of(mode.branch.opposite(), mode.wave_number).unwrap();
            if !selection.contains(&partner) {
                return Err(Error::InvalidSelection(format!(
                    "mode ({:?}, k = {}) has no partner of the opposite branch",
                    mode.branch, mode.wave_number
                )));
            }
        }

        let basis = bank.modes_matrix(selection);
        let mut vacuum_ket = 0u32;
        let mut eps_r = 0.0;
        for (bit, &i) in selection.iter().enumerate() {
            if modes[i].branch == Branch::Negative {
                vacuum_ket |= 1 << bit;
                eps_r += modes[i].eigenvalue();
            }
        }
        let particles = vacuum_ket.count_ones();
        let sector: Vec<u32> = (0..1u32 << m).filter(|k| k.count_ones() == particles).collect();
        let vacuum = sector.binary_search(&vacuum_ket).unwrap();
        let negatives: Vec<usize> = selection.iter().copied().filter(|&i| modes[i].branch == Branch::Negative).collect();
        let reference_density = site_occupation(&bank.modes_matrix(&negatives));

        let space = Self {
            bank: bank.clone(),
            selection: selection.to_vec(),
            basis,
            eps_r,
            sector,
            vacuum_ket,
            vacuum,
            reference_density,
        };
        let ac = space.anticommutator_residuals();
        if ac.mixed > 1e-12 || ac.same > 1e-12 {
            return Err(Error::InvalidSelection(format!("anticommutators violated: {ac:?}")));
        }
        Ok(space)
    }

    /// The `m / 2` lowest-|k| wave numbers with both branches, negative
    /// wave numbers first on ties.
    pub fn lowest_momentum_pairs(bank: &ModeBank, m: usize) -> Result<Vec<usize>> {
        if m % 2 != 0 {
            return Err(Error::InvalidSelection(format!("mode count {m} is odd; modes come in pairs")));
        }
        if m > MAX_MODES {
            return Err(Error::TooManyModes(m));
        }
        let mut ks: Vec<i64> = bank.grid().wave_numbers().collect();
        ks.sort_by_key(|k| (k.abs(), *k));
        if m / 2 > ks.len() {
            return Err(Error::InvalidSelection(format!("grid has only {} wave numbers", ks.len())));
        }
        let mut chosen: Vec<i64> = ks[..m / 2].to_vec();
        chosen.sort();
        let mut out = Vec::with_capacity(m);
        for branch in [Branch::Negative, Branch::Positive] {
            for &k in &chosen {
                out.push(bank.index_of(branch, k).unwrap());
            }
        }
        Ok(out)
    }

    /// Every mode of the bank.
    pub fn complete(bank: &ModeBank) -> Result<Self> {
        let all: Vec<usize> = (0..bank.modes().len()).collect();
        Self::new(bank, &all)
    }

    pub fn bank(&self) -> &ModeBank {
        &self.bank
    }

    pub fn mode_count(&self) -> usize {
        self.selection.len()
    }

    pub fn selection(&self) -> &[usize] {
        &self.selection
    }

    pub fn selected_modes(&self) -> Vec<Mode> {
        self.selection.iter().map(|&i| self.bank.modes()[i]).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.selection.len() == self.bank.modes().len()
    }

    /// `2^M`.
    pub fn dimension(&self) -> usize {
        1 << self.selection.len()
    }

    pub fn sector_dimension(&self) -> usize {
        self.sector.len()
    }

    pub fn sector(&self) -> &[u32] {
        &self.sector
    }

    /// `ε_r = Σ_{selected λ=-1} (-E_p)`.
    pub fn eps_r(&self) -> f64 {
        self.eps_r
    }

    pub fn vacuum_ket(&self) -> u32 {
        self.vacuum_ket
    }

    pub fn vacuum_index(&self) -> usize {
        self.vacuum
    }

    pub fn vacuum_state(&self) -> FockState {
        let mut amplitudes = DVector::zeros(self.sector.len());
        amplitudes[self.vacuum] = C64::new(1.0, 0.0);
        FockState { amplitudes }
    }

    /// State for an arbitrary ket of the vacuum's number sector.
    pub fn basis_state(&self, ket: u32) -> Option<FockState> {
        let index = self.sector.binary_search(&ket).ok()?;
        let mut amplitudes = DVector::zeros(self.sector.len());
        amplitudes[index] = C64::new(1.0, 0.0);
        Some(FockState { amplitudes })
    }

    /// `c_i |ket⟩` as `(sign, ket')`.
    pub fn annihilate(i: usize, ket: u32) -> Option<(f64, u32)> {
        if ket & (1 << i) == 0 {
            return None;
        }
        Some((parity_below(ket, i), ket & !(1 << i)))
    }

    /// `c_i† |ket⟩` as `(sign, ket')`.
    pub fn create(i: usize, ket: u32) -> Option<(f64, u32)> {
        if ket & (1 << i) != 0 {
            return None;
        }
        Some((parity_below(ket, i), ket | (1 << i)))
    }

    /// `c_a† c_b |ket⟩`.
    fn hop(a: usize, b: usize, ket: u32) -> Option<(f64, u32)> {
        let (s1, k1) = Self::annihilate(b, ket)?;
        let (s2, k2) = Self::create(a, k1)?;
        Some((s1 * s2, k2))
    }

    /// Checks both anticommutators on every ket of the full space.
    pub fn anticommutator_residuals(&self) -> AnticommutatorReport {
        let m = self.selection.len();
        let mut mixed = 0.0_f64;
        let mut same = 0.0_f64;
        let mut out = vec![0.0_f64; 1 << m];
        let mut touched: Vec<u32> = Vec::new();
        let accumulate = |out: &mut [f64], touched: &mut Vec<u32>, r: Option<(f64, u32)>| {
            if let Some((s, k)) = r {
                if out[k as usize] == 0.0 {
                    touched.push(k);
                }
                out[k as usize] += s;
            }
        };
        for ket in 0..(1u32 << m) {
            for i in 0..m {
                for j in 0..m {
                    // {c_i, c_j†}
                    accumulate(&mut out, &mut touched, Self::create(j, ket).and_then(|(s, k)| Self::annihilate(i, k).map(|(t, k2)| (s * t, k2))));
                    accumulate(&mut out, &mut touched, Self::annihilate(i, ket).and_then(|(s, k)| Self::create(j, k).map(|(t, k2)| (s * t, k2))));
                    let expect = |k: u32| if i == j && k == ket { 1.0 } else { 0.0 };
                    mixed = mixed.max(libm::fabs(out[ket as usize] - expect(ket)));
                    for &k in &touched {
                        mixed = mixed.max(libm::fabs(out[k as usize] - expect(k)));
                        out[k as usize] = 0.0;
                    }
                    out[ket as usize] = 0.0;
                    touched.clear();

                    // {c_i, c_j}
                    accumulate(&mut out, &mut touched, Self::annihilate(j, ket).and_then(|(s, k)| Self::annihilate(i, k).map(|(t, k2)| (s * t, k2))));
                    accumulate(&mut out, &mut touched, Self::annihilate(i, ket).and_then(|(s, k)| Self::annihilate(j, k).map(|(t, k2)| (s * t, k2))));
                    for &k in &touched {
                        same = same.max(libm::fabs(out[k as usize]));
                        out[k as usize] = 0.0;
                    }
                    touched.clear();
                }
            }
        }
        AnticommutatorReport { mixed, same }
    }

    fn check_dense(&self) -> Result<()> {
        if self.selection.len() > MAX_DENSE_MODES {
            Err(Error::TooManyModes(self.selection.len()))
        } else {
            Ok(())
        }
    }

    /// Dense `c_i` on the full `2^M` space.
    pub fn annihilation_matrix(&self, i: usize) -> Result<DMatrix<C64>> {
        self.check_dense()?;
        let dim = self.dimension();
        let mut c = DMatrix::zeros(dim, dim);
        for ket in 0..dim as u32 {
            if let Some((s, k)) = Self::annihilate(i, ket) {
                c[(k as usize, ket as usize)] = C64::new(s, 0.0);
            }
        }
        Ok(c)
    }

    /// `B† h B`, the one-particle matrix restricted to the selected modes.
    pub fn restrict(&self, h: &OperatorMatrix) -> DMatrix<C64> {
        self.basis.adjoint() * h * &self.basis
    }

    fn check_hermitian(h_one: &DMatrix<C64>) -> Result<()> {
        let residual = hermiticity_residual(h_one);
        if residual > 1e-12 * max_abs(h_one).max(1.0) {
            return Err(Error::NonHermitian(residual));
        }
        Ok(())
    }

    /// `Σ_ab (h_one)_ab c_a† c_b - shift` on the vacuum's number sector.
    pub fn second_quantize(&self, h_one: &DMatrix<C64>, shift: f64) -> Result<DMatrix<C64>> {
        let m = self.selection.len();
        if h_one.shape() != (m, m) {
            return Err(Error::DimensionMismatch { context: "one-particle matrix", expected: m, found: h_one.nrows() });
        }
        Self::check_hermitian(h_one)?;
        let dim = self.sector.len();
        let mut out = DMatrix::zeros(dim, dim);
        for (col, &ket) in self.sector.iter().enumerate() {
            for a in 0..m {
                for b in 0..m {
                    let v = h_one[(a, b)];
                    if v == C64::new(0.0, 0.0) {
                        continue;
                    }
                    if let Some((s, k)) = Self::hop(a, b, ket) {
                        let row = self.sector.binary_search(&k).unwrap();
                        out[(row, col)] += v * s;
                    }
                }
            }
            out[(col, col)] -= C64::new(shift, 0.0);
        }
        Ok(out)
    }

    /// Same as [`second_quantize`](Self::second_quantize) on the full `2^M` space.
    pub fn second_quantize_full(&self, h_one: &DMatrix<C64>, shift: f64) -> Result<DMatrix<C64>> {
        self.check_dense()?;
        let m = self.selection.len();
        Self::check_hermitian(h_one)?;
        let dim = self.dimension();
        let mut out = DMatrix::zeros(dim, dim);
        for ket in 0..dim as u32 {
            for a in 0..m {
                for b in 0..m {
                    if let Some((s, k)) = Self::hop(a, b, ket) {
                        out[(k as usize, ket as usize)] += h_one[(a, b)] * s;
                    }
                }
            }
            out[(ket as usize, ket as usize)] -= C64::new(shift, 0.0);
        }
        Ok(out)
    }

    /// `Ĥ₀ = Σ (h₀)_ab c_a† c_b - ε_r` on the number sector.
    pub fn free_hamiltonian(&self) -> Result<DMatrix<C64>> {
        self.second_quantize(&self.restrict(&self.bank.free_hamiltonian()), self.eps_r)
    }

    /// `Ĥ₀` on the full `2^M` space.
    pub fn free_hamiltonian_full(&self) -> Result<DMatrix<C64>> {
        self.second_quantize_full(&self.restrict(&self.bank.free_hamiltonian()), self.eps_r)
    }

    /// `Ĥ(t)` from the one-particle `h(t)` restricted to the selected modes.
    pub fn hamiltonian(&self, pot: &EMPotential, t: f64, coupling: Coupling) -> Result<DMatrix<C64>> {
        let h = hamiltonian_with(&self.bank, pot, t, coupling)?;
        self.second_quantize(&self.restrict(&h), self.eps_r)
    }

    /// `Γ_ab = ⟨c_a† c_b⟩`.
    pub fn one_body_density(&self, state: &FockState) -> DMatrix<C64> {
        let m = self.selection.len();
        let mut gamma = DMatrix::zeros(m, m);
        for (col, &ket) in self.sector.iter().enumerate() {
            let amp = state.amplitudes[col];
            if amp == C64::new(0.0, 0.0) {
                continue;
            }
            for a in 0..m {
                for b in 0..m {
                    if let Some((s, k)) = Self::hop(a, b, ket) {
                        let row = self.sector.binary_search(&k).unwrap();
                        gamma[(a, b)] += state.amplitudes[row].conj() * amp * s;
                    }
                }
            }
        }
        gamma
    }

    /// `⟨Ĵ(x_j)⟩ = (q/dx) Σ_ab (v_a(j)† σ₁ v_b(j)) Γ_ab`.
    pub fn current(&self, state: &FockState) -> Vec<f64> {
        self.site_expectation(state, |up_a, dn_a, up_b, dn_b| up_a.conj() * dn_b + dn_a.conj() * up_b)
    }

    /// `⟨ρ̂(x_j)⟩` without vacuum subtraction.
    pub fn raw_density(&self, state: &FockState) -> Vec<f64> {
        self.site_expectation(state, |up_a, dn_a, up_b, dn_b| up_a.conj() * up_b + dn_a.conj() * dn_b)
    }

    /// `⟨ρ̂(x_j)⟩` minus the truncated vacuum density.
    pub fn density(&self, state: &FockState) -> Vec<f64> {
        let scale = self.bank.charge() / self.bank.grid().dx();
        self.raw_density(state)
            .iter()
            .zip(&self.reference_density)
            .map(|(r, v)| r - v * scale)
            .collect()
    }

    fn site_expectation(&self, state: &FockState, kernel: impl Fn(C64, C64, C64, C64) -> C64) -> Vec<f64> {
        let gamma = self.one_body_density(state);
        let m = self.selection.len();
        let scale = self.bank.charge() / self.bank.grid().dx();
        (0..self.bank.grid().sites())
            .map(|j| {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..m {
                    for b in 0..m {
                        let k = kernel(
                            self.basis[(2 * j, a)],
                            self.basis[(2 * j + 1, a)],
                            self.basis[(2 * j, b)],
                            self.basis[(2 * j + 1, b)],
                        );
                        acc += k * gamma[(a, b)];
                    }
                }
                acc.re * scale
            })
            .collect()
    }
}

fn parity_below(ket: u32, i: usize) -> f64 {
    if (ket & ((1u32 << i) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Normalized amplitudes over the number sector.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    pub amplitudes: DVector<C64>,
}

impl FockState {
    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `|⟨other|self⟩|`.
    pub fn fidelity(&self, other: &FockState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm()
    }

    /// `⟨self| op |self⟩`, real part.
    pub fn expectation(&self, op: &DMatrix<C64>) -> f64 {
        self.amplitudes.dotc(&(op * &self.amplitudes)).re
    }
}

/// Crank–Nicolson in the number sector; `observer(step, t, state)` is called
/// at the same cadence as the one-particle evolution.
pub fn evolve_fock<F>(
    space: &FockSpace,
    start: &FockState,
    pot: &EMPotential,
    opts: &EvolveOptions,
    mut observer: F,
) -> Result<FockState>
where
    F: FnMut(usize, f64, &FockState) -> Result<()>,
{
    let total = opts.step_count()?;
    pot.check_grid(space.bank.grid())?;
    let mut state = start.clone();
    observer(0, opts.t0, &state)?;
    let mut cached: Option<LU<C64, Dyn, Dyn>> = None;
    let factor = |t_mid: f64| -> Result<LU<C64, Dyn, Dyn>> {
        let mut a = space.hamiltonian(pot, t_mid, opts.coupling)? * C64::new(0.0, 0.5 * opts.dt);
        for i in 0..a.nrows() {
            a[(i, i)] += C64::new(1.0, 0.0);
        }
        Ok(a.lu())
    };
    for n in 0..total {
        let t_mid = opts.time_at(n) + 0.5 * opts.dt;
        let x = if pot.is_static() {
            if cached.is_none() {
                cached = Some(factor(t_mid)?);
            }
            cached.as_ref().unwrap().solve(&state.amplitudes)
        } else {
            factor(t_mid)?.solve(&state.amplitudes)
        }
        .ok_or(Error::SolveFailed("fock crank-nicolson step"))?;
        state.amplitudes = x * C64::new(2.0, 0.0) - &state.amplitudes;
        let t = opts.time_at(n + 1);
        let drift = libm::fabs(state.norm() - 1.0);
        if drift.is_nan() || drift > NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift { drift, limit: NORM_DRIFT_LIMIT, t });
        }
        if n + 1 == total || (opts.snapshot_every > 0 && (n + 1) % opts.snapshot_every == 0) {
            observer(n + 1, t, &state)?;
        }
    }
    Ok(state)
}

/// Witness levels used by [`counterexample_report`]. These are choices of
/// this artifact, not values from the theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterexampleThresholds {
    /// `max ⟨Ĥ₀⟩` above this counts as leaving the vacuum floor.
    pub energy_witness: f64,
    /// `max |⟨Ĵ⟩ - J_free|` above this counts as a gauge-dependent current.
    pub current_witness: f64,
    /// `⟨Ĥ₀⟩` below `-floor` would break the free-energy lower bound.
    pub floor: f64,
}

impl Default for CounterexampleThresholds {
    fn default() -> Self {
        Self { energy_witness: 1e-3, current_witness: 1e-4, floor: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub modes: Vec<Mode>,
    pub times: Vec<f64>,
    /// `⟨Ω(t)|Ĥ₀|Ω(t)⟩`
    pub energy: Vec<f64>,
    pub current: Vec<Vec<f64>>,
    pub density: Vec<Vec<f64>>,
    /// `|⟨0|Ω(t)⟩|`
    pub vacuum_fidelity: Vec<f64>,
    pub free_current: Vec<Vec<f64>>,
    pub max_energy: f64,
    pub min_energy: f64,
    pub max_current_deviation: f64,
    pub max_norm_drift: f64,
    pub thresholds: CounterexampleThresholds,
    /// `max ⟨Ĥ₀⟩` exceeds the energy witness although a gauge-invariant
    /// theory would keep it at zero.
    pub energy_violation: bool,
    /// `⟨Ĥ₀⟩ >= -floor` throughout.
    pub floor_respected: bool,
    pub current_violation: bool,
}

/// Evolves the truncated vacuum under the pure-gauge potential of `chi` and
/// under zero potential, and reports the free-field energy and current.
pub fn counterexample_report(
    space: &FockSpace,
    chi: &GaugeFunction,
    opts: &EvolveOptions,
    thresholds: CounterexampleThresholds,
) -> Result<CounterexampleReport> {
    chi.check_initial(opts.t0)?;
    let grid = space.bank.grid();
    let pot = EMPotential::pure_gauge(chi.clone(), grid)?;
    let zero = EMPotential::zero(grid.length())?;
    let h0 = space.free_hamiltonian()?;
    let vacuum = space.vacuum_state();

    let mut free_current = Vec::new();
    evolve_fock(space, &vacuum, &zero, opts, |_, _, s| {
        free_current.push(space.current(s));
        Ok(())
    })?;

    let mut times = Vec::new();
    let mut energy = Vec::new();
    let mut current = Vec::new();
    let mut density = Vec::new();
    let mut vacuum_fidelity = Vec::new();
    let mut max_norm_drift = 0.0_f64;
    evolve_fock(space, &vacuum, &pot, opts, |_, t, s| {
        times.push(t);
        energy.push(s.expectation(&h0));
        current.push(space.current(s));
        density.push(space.density(s));
        vacuum_fidelity.push(s.fidelity(&vacuum));
        max_norm_drift = max_norm_drift.max(libm::fabs(s.norm() - 1.0));
        Ok(())
    })?;

    let max_energy = energy.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_energy = energy.iter().copied().fold(f64::INFINITY, f64::min);
    let max_current_deviation = current
        .iter()
        .flatten()
        .zip(free_current.iter().flatten())
        .fold(0.0_f64, |a, (x, y)| a.max(libm::fabs(x - y)));
    Ok(CounterexampleReport {
        modes: space.selected_modes(),
        times,
        energy,
        current,
        density,
        vacuum_fidelity,
        free_current,
        max_energy,
        min_energy,
        max_current_deviation,
        max_norm_drift,
        thresholds,
        energy_violation: max_energy > thresholds.energy_witness,
        floor_respected: min_energy >= -thresholds.floor,
        current_violation: max_current_deviation > thresholds.current_witness,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossOracleReport {
    pub sites: usize,
    pub dt: f64,
    pub snapshots: usize,
    /// `max |⟨Ĵ⟩_Fock - J_modes|` over sites and snapshots.
    pub max_current_difference: f64,
    pub max_abs_current: f64,
}

/// Canonical current from the complete Fock space against the one-particle
/// mode sum, snapshot by snapshot.
pub fn cross_oracle(space: &FockSpace, pot: &EMPotential, opts: &EvolveOptions) -> Result<CrossOracleReport> {
    if !space.is_complete() {
        return Err(Error::InvalidSelection(format!(
            "cross-oracle needs every mode of the bank; {} of {} selected",
            space.mode_count(),
            space.bank.modes().len()
        )));
    }
    let record = record_run(&space.bank, pot, opts, RecordOptions::default())?;
    let mut canonical = Vec::new();
    evolve_fock(space, &space.vacuum_state(), pot, opts, |_, _, s| {
        canonical.push(space.current(s));
        Ok(())
    })?;
    if canonical.len() != record.current.len() {
        return Err(Error::RunMismatch("snapshot count"));
    }
    let max_current_difference = canonical
        .iter()
        .flatten()
        .zip(record.current.iter().flatten())
        .fold(0.0_f64, |a, (x, y)| a.max(libm::fabs(x - y)));
    Ok(CrossOracleReport {
        sites: space.bank.grid().sites(),
        dt: opts.dt,
        snapshots: canonical.len(),
        max_current_difference,
        max_abs_current: record.max_abs_current(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::linalg::{hermitian_eigenvalues, identity, max_abs_diff};
    use crate::potential::presets;
    use core::f64::consts::PI;

    fn bank(n: usize) -> ModeBank {
        ModeBank::free_modes(Grid1D::new(2.0 * PI, n).unwrap(), 1.0, 1.0).unwrap()
    }

    fn space(n: usize, m: usize) -> FockSpace {
        let b = bank(n);
        let sel = FockSpace::lowest_momentum_pairs(&b, m).unwrap();
        FockSpace::new(&b, &sel).unwrap()
    }

    #[test]
    fn two_mode_space() {
        let f = space(5, 2);
        assert_eq!(f.dimension(), 4);
        let c = f.annihilation_matrix(0).unwrap();
        let ac = &c * c.adjoint() + c.adjoint() * &c;
        assert!(max_abs_diff(&ac, &identity(4)) == 0.0);
    }

    #[test]
    fn dense_anticommutators_at_six_modes() {
        let f = space(9, 6);
        let cs: Vec<DMatrix<C64>> = (0..6).map(|i| f.annihilation_matrix(i).unwrap()).collect();
        let id = identity(64);
        for i in 0..6 {
            for j in 0..6 {
                let mixed = &cs[i] * cs[j].adjoint() + cs[j].adjoint() * &cs[i];
                let expect = if i == j { id.clone() } else { DMatrix::zeros(64, 64) };
                assert!(max_abs_diff(&mixed, &expect) <= 1e-12);
                assert!(max_abs(&(&cs[i] * &cs[j] + &cs[j] * &cs[i])) <= 1e-12);
            }
        }
        let ac = f.anticommutator_residuals();
        assert_eq!((ac.mixed, ac.same), (0.0, 0.0));
    }

    #[test]
    fn selection_rules() {
        let b = bank(9);
        assert_eq!(FockSpace::lowest_momentum_pairs(&b, 6).unwrap().len(), 6);
        let k0 = b.index_of(Branch::Negative, 0).unwrap();
        assert!(matches!(FockSpace::new(&b, &[k0]), Err(Error::InvalidSelection(_))));
        assert!(matches!(FockSpace::lowest_momentum_pairs(&b, 14), Err(Error::TooManyModes(14))));
        assert!(matches!(FockSpace::new(&b, &[k0, k0]), Err(Error::InvalidSelection(_))));
        let big = bank(9);
        let all: Vec<usize> = (0..14).collect();
        assert!(matches!(FockSpace::new(&big, &all), Err(Error::TooManyModes(14))));
    }

    #[test]
    fn free_spectrum_floor_is_the_sea() {
        let f = space(9, 6);
        let h0 = f.free_hamiltonian_full().unwrap();
        let ev = hermitian_eigenvalues(&h0);
        assert!(ev[0].abs() < 1e-12);
        assert!(ev[1] > 0.5);
        let sea = f.vacuum_ket() as usize;
        assert!(h0[(sea, sea)].norm() < 1e-12);
        let sector = f.free_hamiltonian().unwrap();
        assert!(f.vacuum_state().expectation(&sector).abs() < 1e-12);
    }

    #[test]
    fn single_excitation_energy() {
        let b = bank(9);
        let sel = FockSpace::lowest_momentum_pairs(&b, 6).unwrap();
        let f = FockSpace::new(&b, &sel).unwrap();
        let h0 = f.free_hamiltonian_full().unwrap();
        let pos = sel.iter().position(|&i| i == b.index_of(Branch::Positive, 1).unwrap()).unwrap();
        let ket = f.vacuum_ket() | (1 << pos);
        let e = b.modes()[sel[pos]].energy;
        assert!((h0[(ket as usize, ket as usize)].re - e).abs() < 1e-12);
    }

    #[test]
    fn vacuum_charge_matches_mode_sum() {
        let f = space(9, 6);
        let raw: f64 = f.raw_density(&f.vacuum_state()).iter().sum::<f64>() * f.bank().grid().dx();
        assert!((raw - 3.0).abs() < 1e-12);
        assert!(f.density(&f.vacuum_state()).iter().all(|v| v.abs() < 1e-12));
        assert!(f.current(&f.vacuum_state()).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn zero_potential_keeps_vacuum() {
        let f = space(9, 6);
        let zero = EMPotential::zero(2.0 * PI).unwrap();
        let end = evolve_fock(&f, &f.vacuum_state(), &zero, &EvolveOptions::new(0.0, 1.0, 1e-2), |_, _, s| {
            assert!((s.norm() - 1.0).abs() < 1e-12);
            Ok(())
        })
        .unwrap();
        assert!((end.fidelity(&f.vacuum_state()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn non_hermitian_input_rejected() {
        let f = space(5, 2);
        let mut h = DMatrix::<C64>::zeros(2, 2);
        h[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(f.second_quantize(&h, 0.0), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn zero_chi_has_no_violation() {
        let f = space(9, 6);
        let rep = counterexample_report(&f, &GaugeFunction::zero(2.0 * PI).unwrap(), &EvolveOptions::new(0.0, 0.5, 1e-2).every(5), Default::default()).unwrap();
        assert!(rep.max_energy.abs() < 1e-12);
        assert_eq!(rep.max_current_deviation, 0.0);
        assert!(!rep.energy_violation && !rep.current_violation && rep.floor_respected);
    }

    #[test]
    fn cross_oracle_rejects_truncation() {
        let f = space(5, 2);
        let zero = EMPotential::zero(2.0 * PI).unwrap();
        assert!(matches!(cross_oracle(&f, &zero, &EvolveOptions::new(0.0, 0.1, 1e-2)), Err(Error::InvalidSelection(_))));
    }

    #[test]
    fn cross_oracle_converges_on_pulse() {
        let b = bank(3);
        let f = FockSpace::complete(&b).unwrap();
        let pot = presets::reference_pulse(2.0 * PI, 0.5, 0.0, 1.0).unwrap();
        let coarse = cross_oracle(&f, &pot, &EvolveOptions::new(0.0, 1.0, 2e-3).every(10)).unwrap();
        let fine = cross_oracle(&f, &pot, &EvolveOptions::new(0.0, 1.0, 1e-3).every(20)).unwrap();
        assert!(coarse.max_abs_current > 1e-3);
        let ratio = coarse.max_current_difference / fine.max_current_difference;
        assert!((3.0..5.0).contains(&ratio), "{coarse:?} {fine:?}");
    }
}
