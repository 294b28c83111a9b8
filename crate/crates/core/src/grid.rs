//! Periodic 1D lattice with a symmetric momentum set.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{cis, C64};

/// Periodic lattice of `sites` points on a box of length `length`.
///
/// The site count is odd so the momenta `2πk/L`, `k = -(N-1)/2 ..= (N-1)/2`,
/// come in exact `±p` pairs and there is no unpaired Nyquist mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    length: f64,
    sites: usize,
    dx: f64,
    momenta: Vec<f64>,
}

impl Grid1D {
    pub fn new(length: f64, sites: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidLength(length));
        }
        if sites < 3 || sites % 2 == 0 {
            return Err(Error::EvenOrTooFewSites(sites));
        }
        let momenta = wave_numbers(sites)
            .map(|k| 2.0 * PI * k as f64 / length)
            .collect();
        Ok(Self {
            length,
            sites,
            dx: length / sites as f64,
            momenta,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// One-particle dimension: sites × 2 spinor components.
    pub fn dimension(&self) -> usize {
        2 * self.sites
    }

    /// Largest wave number `(N-1)/2`.
    pub fn max_wave_number(&self) -> usize {
        (self.sites - 1) / 2
    }

    /// Highest Fourier index a gauge function may carry, `(N-1)/4`.
    pub fn dealias_limit(&self) -> usize {
        (self.sites - 1) / 4
    }

    /// Momenta in ascending wave-number order.
    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn wave_numbers(&self) -> impl Iterator<Item = i64> {
        wave_numbers(self.sites)
    }

    pub fn position(&self, site: usize) -> f64 {
        site as f64 * self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.sites).map(|j| self.position(j)).collect()
    }

    /// Phase `e^{i 2π k j / N}` evaluated with the product reduced mod N.
    pub fn plane_wave_phase(&self, wave_number: i64, site: usize) -> C64 {
        let n = self.sites as i64;
        let r = (wave_number * site as i64).rem_euclid(n);
        cis(2.0 * PI * r as f64 / n as f64)
    }

    /// Unitary N×N matrix whose column `c` is the plane wave with wave number
    /// `c - (N-1)/2`, normalized to unit Euclidean norm.
    pub fn fourier_matrix(&self) -> DMatrix<C64> {
        let norm = 1.0 / libm::sqrt(self.sites as f64);
        let ks: Vec<i64> = self.wave_numbers().collect();
        DMatrix::from_fn(self.sites, self.sites, |j, c| {
            self.plane_wave_phase(ks[c], j) * norm
        })
    }

    /// Coefficients in the plane-wave basis (ascending wave number).
    pub fn to_momentum(&self, samples: &[C64]) -> Vec<C64> {
        let norm = 1.0 / libm::sqrt(self.sites as f64);
        self.wave_numbers()
            .map(|k| {
                samples
                    .iter()
                    .enumerate()
                    .map(|(j, f)| self.plane_wave_phase(k, j).conj() * f)
                    .sum::<C64>()
                    * norm
            })
            .collect()
    }

    pub fn from_momentum(&self, coefficients: &[C64]) -> Vec<C64> {
        let norm = 1.0 / libm::sqrt(self.sites as f64);
        (0..self.sites)
            .map(|j| {
                self.wave_numbers()
                    .zip(coefficients)
                    .map(|(k, c)| self.plane_wave_phase(k, j) * c)
                    .sum::<C64>()
                    * norm
            })
            .collect()
    }

    /// Exact derivative on the sampled plane waves: `D e^{ipx} = i p e^{ipx}`.
    ///
    /// The kernel is real and depends only on `(j - l) mod N`; the lower half
    /// is mirrored from the upper so `D^T = -D` holds bit for bit.
    pub fn spectral_derivative(&self) -> DMatrix<f64> {
        let n = self.sites;
        let mut row = alloc::vec![0.0; n];
        for d in 1..=self.max_wave_number() {
            let mut acc = 0.0;
            for k in 1..=self.max_wave_number() {
                let r = (k * d) % n;
                acc += self.momenta[self.max_wave_number() + k]
                    * libm::sin(2.0 * PI * r as f64 / n as f64);
            }
            row[d] = -2.0 * acc / n as f64;
            row[n - d] = -row[d];
        }
        DMatrix::from_fn(n, n, |j, l| row[(j + n - l) % n])
    }

    /// Spectral derivative of real samples.
    pub fn differentiate(&self, samples: &[f64]) -> Vec<f64> {
        let d = self.spectral_derivative();
        (0..self.sites)
            .map(|j| (0..self.sites).map(|l| d[(j, l)] * samples[l]).sum())
            .collect()
    }

    /// Signed separation `x_j - x_l` wrapped into `(-L/2, L/2)`.
    pub fn wrapped_separation(&self, j: usize, l: usize) -> f64 {
        let n = self.sites as i64;
        let mut d = (j as i64 - l as i64).rem_euclid(n);
        if d > n / 2 {
            d -= n;
        }
        d as f64 * self.dx
    }
}

fn wave_numbers(sites: usize) -> impl Iterator<Item = i64> {
    let half = ((sites - 1) / 2) as i64;
    -half..=half
}
