//! Free Dirac eigenmodes on the periodic grid and the static operators built
//! from them: `P₋`, `P₊`, `G_v = P₋ - P₊` and the free Hamiltonian `h₀`.
//!
//! In 1+1 dimensions `α = σ₁`, `β = σ₃`, so for momentum `p`
//!
//! ```text
//! H₀(p) = [[ m,  p ],
//!          [ p, -m ]],   E_p = sqrt(p² + m²)
//! ```
//!
//! with closed-form eigenvectors `u₊ ∝ (E + m, p)` and `u₋ ∝ (-p, E + m)`.
//! These reduce to `(1, 0)` and `(0, 1)` at `p = 0`; the massless zero mode
//! (where both expressions vanish) uses the same assignment.

use alloc::vec::Vec;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::linalg::{ModeMatrix, OperatorMatrix, C64, I};

/// Sign of the free energy, `λ = ±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Negative,
    Positive,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Negative => -1.0,
            Branch::Positive => 1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Branch::Negative => Branch::Positive,
            Branch::Positive => Branch::Negative,
        }
    }
}

/// One free eigenmode `u_{λ,p} e^{ipx}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    pub branch: Branch,
    pub wave_number: i64,
    pub momentum: f64,
    /// `E_p = +sqrt(p² + m²)`; the eigenvalue is `λ E_p`.
    pub energy: f64,
    /// Spin label. There is no spin in 1+1D; the index is kept with a single value.
    pub spin: u8,
    pub spinor: [f64; 2],
}

impl Mode {
    pub fn eigenvalue(&self) -> f64 {
        self.branch.sign() * self.energy
    }
}

/// Unit spinor of the free Dirac Hamiltonian for the given branch.
pub fn free_spinor(branch: Branch, momentum: f64, mass: f64) -> [f64; 2] {
    let energy = libm::hypot(momentum, mass);
    let big = energy + mass;
    if big == 0.0 {
        return match branch {
            Branch::Positive => [1.0, 0.0],
            Branch::Negative => [0.0, 1.0],
        };
    }
    let norm = libm::sqrt(2.0 * energy * big);
    match branch {
        Branch::Positive => [big / norm, momentum / norm],
        Branch::Negative => [-momentum / norm, big / norm],
    }
}

/// All 2N free modes of a grid: N negative-energy modes then N positive-energy
/// modes, each block in ascending wave number.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBank {
    grid: Grid1D,
    mass: f64,
    charge: f64,
    modes: Vec<Mode>,
    sea_energy_offset: f64,
}

impl ModeBank {
    pub fn free_modes(grid: Grid1D, mass: f64, charge: f64) -> Result<Self> {
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(Error::InvalidParameter { name: "mass", value: mass });
        }
        if !charge.is_finite() {
            return Err(Error::InvalidParameter { name: "charge", value: charge });
        }
        let mut modes = Vec::with_capacity(grid.dimension());
        for branch in [Branch::Negative, Branch::Positive] {
            for (k, &p) in grid.wave_numbers().zip(grid.momenta()) {
                modes.push(Mode {
                    branch,
                    wave_number: k,
                    momentum: p,
                    energy: libm::hypot(p, mass),
                    spin: 0,
                    spinor: free_spinor(branch, p, mass),
                });
            }
        }
        let sea_energy_offset = modes
            .iter()
            .filter(|m| m.branch == Branch::Negative)
            .map(|m| -m.energy)
            .sum();
        Ok(Self {
            grid,
            mass,
            charge,
            modes,
            sea_energy_offset,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }

    pub fn dimension(&self) -> usize {
        self.grid.dimension()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// `Σ_{λ=-1} (-E_p)`, the free energy of the filled sea.
    pub fn sea_energy_offset(&self) -> f64 {
        self.sea_energy_offset
    }

    /// Index of the mode with the given branch and wave number.
    pub fn index_of(&self, branch: Branch, wave_number: i64) -> Option<usize> {
        let half = self.grid.max_wave_number() as i64;
        if wave_number.abs() > half {
            return None;
        }
        let offset = match branch {
            Branch::Negative => 0,
            Branch::Positive => self.grid.sites(),
        };
        Some(offset + (wave_number + half) as usize)
    }

    /// Coefficient vector of mode `index` (unit Euclidean norm).
    pub fn mode_vector(&self, index: usize) -> DVector<C64> {
        let mode = &self.modes[index];
        let norm = 1.0 / libm::sqrt(self.grid.sites() as f64);
        DVector::from_fn(self.dimension(), |r, _| {
            let phase = self.grid.plane_wave_phase(mode.wave_number, r / 2);
            phase * (mode.spinor[r % 2] * norm)
        })
    }

    /// Columns are the modes at `indices`, in order.
    pub fn modes_matrix(&self, indices: &[usize]) -> ModeMatrix {
        let mut m = ModeMatrix::zeros(self.dimension(), indices.len());
        for (c, &i) in indices.iter().enumerate() {
            m.set_column(c, &self.mode_vector(i));
        }
        m
    }

    pub fn branch_indices(&self, branch: Branch) -> Vec<usize> {
        (0..self.modes.len())
            .filter(|&i| self.modes[i].branch == branch)
            .collect()
    }

    /// The negative-energy sea `Φ₀` (D×N).
    pub fn negative_sea(&self) -> ModeMatrix {
        self.modes_matrix(&self.branch_indices(Branch::Negative))
    }

    pub fn positive_modes(&self) -> ModeMatrix {
        self.modes_matrix(&self.branch_indices(Branch::Positive))
    }

    /// All 2N modes as columns (D×D, unitary).
    pub fn all_modes(&self) -> ModeMatrix {
        let all: Vec<usize> = (0..self.modes.len()).collect();
        self.modes_matrix(&all)
    }

    /// `(P₋, P₊)`, the spectral projectors onto the negative and positive branches.
    pub fn projectors(&self) -> (OperatorMatrix, OperatorMatrix) {
        let neg = self.negative_sea();
        let pos = self.positive_modes();
        (&neg * neg.adjoint(), &pos * pos.adjoint())
    }

    /// Vacuum kernel `G_v = P₋ - P₊`.
    pub fn vacuum_g(&self) -> OperatorMatrix {
        let (minus, plus) = self.projectors();
        minus - plus
    }

    /// `h₀ = -i σ₁ ⊗ D + m σ₃` on the coefficient space.
    pub fn free_hamiltonian(&self) -> OperatorMatrix {
        let n = self.grid.sites();
        let d = self.grid.spectral_derivative();
        let mut h = OperatorMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            for l in 0..n {
                let kinetic = -I * d[(j, l)];
                h[(2 * j, 2 * l + 1)] = kinetic;
                h[(2 * j + 1, 2 * l)] = kinetic;
            }
            h[(2 * j, 2 * j)] = C64::new(self.mass, 0.0);
            h[(2 * j + 1, 2 * j + 1)] = C64::new(-self.mass, 0.0);
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, identity, max_abs_diff, trace};
    use core::f64::consts::PI;

    fn bank(n: usize, m: f64) -> ModeBank {
        ModeBank::free_modes(Grid1D::new(2.0 * PI, n).unwrap(), m, 1.0).unwrap()
    }

    #[test]
    fn rest_spinors() {
        assert_eq!(free_spinor(Branch::Positive, 0.0, 1.0), [1.0, 0.0]);
        assert_eq!(free_spinor(Branch::Negative, 0.0, 1.0), [0.0, 1.0]);
        assert_eq!(free_spinor(Branch::Positive, 0.0, 0.0), [1.0, 0.0]);
        assert_eq!(free_spinor(Branch::Negative, 0.0, 0.0), [0.0, 1.0]);
    }

    #[test]
    fn energy_is_hypot() {
        let g = Grid1D::new(2.0 * PI, 7).unwrap();
        let b = ModeBank::free_modes(g, 4.0, 1.0).unwrap();
        let m = b.modes()[b.index_of(Branch::Positive, 3).unwrap()];
        assert_eq!(m.energy, 5.0);
        assert_eq!(m.eigenvalue(), 5.0);
    }

    #[test]
    fn spinors_are_eigenvectors() {
        for &(p, m) in &[(0.3, 1.0), (-2.0, 0.5), (5.0, 0.0), (-1.0, 0.0)] {
            for branch in [Branch::Negative, Branch::Positive] {
                let u = free_spinor(branch, p, m);
                let hu = [m * u[0] + p * u[1], p * u[0] - m * u[1]];
                let e = branch.sign() * libm::hypot(p, m);
                assert!((hu[0] - e * u[0]).abs() < 1e-14);
                assert!((hu[1] - e * u[1]).abs() < 1e-14);
                assert!((u[0] * u[0] + u[1] * u[1] - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gram_of_all_modes_is_identity() {
        let b = bank(5, 1.0);
        let all = b.all_modes();
        assert!(max_abs_diff(&(all.adjoint() * &all), &identity(10)) < 1e-12);
        assert!(max_abs_diff(&(&all * all.adjoint()), &identity(10)) < 1e-12);
    }

    #[test]
    fn modes_diagonalize_free_hamiltonian() {
        let b = bank(9, 0.7);
        let h0 = b.free_hamiltonian();
        for i in 0..b.modes().len() {
            let v = b.mode_vector(i);
            let hv = &h0 * &v;
            let expect = &v * C64::new(b.modes()[i].eigenvalue(), 0.0);
            assert!(max_abs_diff(&hv, &expect) < 1e-10);
        }
    }

    #[test]
    fn projector_identities() {
        let b = bank(9, 1.0);
        let (pm, pp) = b.projectors();
        assert!(max_abs_diff(&(&pm * &pm), &pm) < 1e-12);
        assert!(max_abs_diff(&(&pp * &pp), &pp) < 1e-12);
        assert!(crate::linalg::max_abs(&(&pm * &pp)) < 1e-12);
        assert!(max_abs_diff(&(&pm + &pp), &identity(18)) < 1e-12);
        assert!((trace(&pm).re - 9.0).abs() < 1e-12);
    }

    #[test]
    fn vacuum_g_is_involutive_with_balanced_spectrum() {
        let b = bank(7, 0.0);
        let g = b.vacuum_g();
        assert!(max_abs_diff(&(&g * &g), &identity(14)) < 1e-12);
        assert!(trace(&g).norm() < 1e-12);
        let ev = hermitian_eigenvalues(&g);
        assert!(ev[..7].iter().all(|v| (v + 1.0).abs() < 1e-12));
        assert!(ev[7..].iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn deterministic_banks() {
        assert_eq!(bank(11, 0.3), bank(11, 0.3));
        assert_eq!(bank(11, 0.3).all_modes(), bank(11, 0.3).all_modes());
    }

    #[test]
    fn rejects_negative_mass() {
        let g = Grid1D::new(1.0, 3).unwrap();
        assert!(ModeBank::free_modes(g, -1.0, 1.0).is_err());
    }
}
