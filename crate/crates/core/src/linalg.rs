//! Dense complex matrix helpers shared by every module.
//!
//! Matrices act on the one-particle coefficient space: index `2 * site + spinor`,
//! with vectors stored as `sqrt(dx) * psi(x_j)` so that kernel composition
//! `∫ K(x, z) L(z, y) dz` is a plain matrix product.

use alloc::vec::Vec;

use nalgebra::{DMatrix, Dim, Matrix, Storage};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Dense complex D×D matrix over the one-particle space.
pub type OperatorMatrix = DMatrix<C64>;

/// Dense complex matrix with one column per mode (D×N).
pub type ModeMatrix = DMatrix<C64>;

/// Largest condition number accepted before an inverse is rejected.
pub const MAX_CONDITION: f64 = 1e10;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn identity(dim: usize) -> OperatorMatrix {
    OperatorMatrix::identity(dim, dim)
}

pub fn max_abs<R: Dim, C: Dim, S: Storage<C64, R, C>>(m: &Matrix<C64, R, C, S>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff<R: Dim, C: Dim, S1, S2>(a: &Matrix<C64, R, C, S1>, b: &Matrix<C64, R, C, S2>) -> f64
where
    S1: Storage<C64, R, C>,
    S2: Storage<C64, R, C>,
{
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max |M - M†|`.
pub fn hermiticity_residual(m: &OperatorMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max |A†A - I|` over the column Gram matrix.
pub fn gram_residual(a: &ModeMatrix) -> f64 {
    let gram = a.adjoint() * a;
    max_abs_diff(&gram, &identity(a.ncols()))
}

pub fn trace(m: &OperatorMatrix) -> C64 {
    m.diagonal().iter().sum()
}

fn norm1(m: &OperatorMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse with a 1-norm condition-number guard.
///
/// `diagnosis` names the upstream invariant whose loss would make `m` singular;
/// it is carried into the error.
pub fn inverse_guarded(
    m: &OperatorMatrix,
    context: &'static str,
    diagnosis: &'static str,
) -> Result<OperatorMatrix> {
    let inv = m.clone().lu().try_inverse().ok_or(Error::IllConditioned {
        context,
        condition: f64::INFINITY,
        diagnosis,
    })?;
    let condition = norm1(m) * norm1(&inv);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::IllConditioned {
            context,
            condition,
            diagnosis,
        });
    }
    Ok(inv)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &OperatorMatrix) -> Vec<f64> {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Ascending eigenpairs `(value, vector)` of a Hermitian matrix.
pub fn hermitian_eigh(m: &OperatorMatrix) -> (Vec<f64>, OperatorMatrix) {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = OperatorMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Unit-modulus phase `e^{i theta}`.
pub fn cis(theta: f64) -> C64 {
    C64::new(libm::cos(theta), libm::sin(theta))
}
