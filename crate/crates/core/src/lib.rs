//! Numerical laboratory for the gauge behaviour of the Dirac sea in 1+1
//! dimensions.
//!
//! The one-particle Dirac equation is discretized spectrally on a periodic
//! grid. On top of it sit the functional two-point description (`G`, `R`),
//! the observables (current, density, energy) and a truncated Fock-space
//! model used as an independent cross-check.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod canonical;
pub mod dirac;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod linalg;
pub mod observables;
pub mod potential;
pub mod twopoint;

pub use dirac::{Branch, Mode, ModeBank};
pub use error::{Error, Result};
pub use grid::Grid1D;
pub use linalg::{ModeMatrix, OperatorMatrix, C64};
pub use potential::{EMPotential, Envelope, GaugeFunction, PotentialSample, Profile};
