//! `Q(t)`, `G(t)`, `R(t)` from the evolved sea, and named residuals for every
//! algebraic identity that links them.
//!
//! `G` is formed from `Q` in closed form rather than by integrating its
//! nonlinear equation of motion; that equation is checked as a residual.

use alloc::vec::Vec;

use serde::Serialize;

use crate::error::Result;
use crate::linalg::{
    hermiticity_residual, identity, inverse_guarded, max_abs, max_abs_diff, trace, ModeMatrix, OperatorMatrix, C64,
};

/// Named max-norm residuals, in evaluation order.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ResidualReport {
    pub entries: Vec<Residual>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub name: &'static str,
    pub value: f64,
}

impl ResidualReport {
    pub fn push(&mut self, name: &'static str, value: f64) {
        self.entries.push(Residual { name, value });
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|r| r.name == name).map(|r| r.value)
    }

    /// Largest residual; NaN propagates.
    pub fn max(&self) -> f64 {
        self.entries.iter().map(|r| r.value).fold(0.0, |a, b| if b.is_nan() || b > a { b } else { a })
    }

    pub fn all_below(&self, tol: f64) -> bool {
        self.entries.iter().all(|r| r.value <= tol)
    }

    /// Merges by keeping the worst value per name.
    pub fn absorb(&mut self, other: &ResidualReport) {
        for r in &other.entries {
            match self.entries.iter_mut().find(|e| e.name == r.name) {
                Some(e) => e.value = if r.value.is_nan() { r.value } else { e.value.max(r.value) },
                None => self.entries.push(*r),
            }
        }
    }
}

/// `Q = Φ(t) Φ₀†`.
pub fn build_q(phi: &ModeMatrix, phi0: &ModeMatrix) -> OperatorMatrix {
    phi * phi0.adjoint()
}

/// `G = 2Q(Q + P₊)⁻¹ - I`.
pub fn build_g(q: &OperatorMatrix, p_plus: &OperatorMatrix) -> Result<OperatorMatrix> {
    let inv = shifted_inverse(q, p_plus)?;
    Ok(q * inv * C64::new(2.0, 0.0) - identity(q.nrows()))
}

fn shifted_inverse(q: &OperatorMatrix, p_plus: &OperatorMatrix) -> Result<OperatorMatrix> {
    inverse_guarded(
        &(q + p_plus),
        "Q + P₊",
        "the evolved sea lost column orthonormality, so Q†Q = P₋ no longer holds",
    )
}

/// `R = 2QQ†`.
pub fn build_r(q: &OperatorMatrix) -> OperatorMatrix {
    q * q.adjoint() * C64::new(2.0, 0.0)
}

/// `R = (I + G)(G + G†)⁻¹(I + G†)`.
pub fn build_r_via_g(g: &OperatorMatrix) -> Result<OperatorMatrix> {
    let id = identity(g.nrows());
    let gd = g.adjoint();
    let inv = inverse_guarded(&(g + &gd), "G + G†", "G is no longer an involution")?;
    Ok((&id + g) * inv * (&id + gd))
}

/// `Ḡ = (G†)⁻¹`, computed directly rather than assumed equal to `G†`.
pub fn g_bar(g: &OperatorMatrix) -> Result<OperatorMatrix> {
    inverse_guarded(&g.adjoint(), "G†", "G is no longer an involution")
}

/// Residuals of the chain that proves `G² = I` from `Q†Q = P₋` and `QP₊ = 0`,
/// plus the `Q` identities it rests on.
pub fn appendix_audit(q: &OperatorMatrix, p_minus: &OperatorMatrix, p_plus: &OperatorMatrix) -> Result<ResidualReport> {
    let d = q.nrows();
    let id = identity(d);
    let two = C64::new(2.0, 0.0);
    let four = C64::new(4.0, 0.0);
    let inv = shifted_inverse(q, p_plus)?;
    let qm = q * &inv;
    let g = &qm * two - &id;
    let g2 = &g * &g;

    let mut r = ResidualReport::default();
    r.push("q_adjoint_q_equals_p_minus", max_abs_diff(&(q.adjoint() * q), p_minus));
    r.push("q_p_plus_vanishes", max_abs(&(q * p_plus)));
    r.push("q_p_minus_equals_q", max_abs_diff(&(q * p_minus), q));
    r.push("g_squared_expanded", max_abs_diff(&g2, &(&qm * &qm * four - &qm * four + &id)));
    r.push("g_squared_projector_form", max_abs_diff(&g2, &(&id - &qm * p_plus * &inv * four)));
    r.push("shift_fixes_p_plus", max_abs_diff(&((q + p_plus) * p_plus), p_plus));
    r.push("inverse_fixes_p_plus", max_abs_diff(&(&inv * p_plus), p_plus));
    r.push("g_squared_reduced", max_abs_diff(&g2, &(&id - q * p_plus * &inv * four)));
    r.push("g_squared_identity", max_abs_diff(&g2, &id));
    Ok(r)
}

/// `Q`, `G`, `R` at one instant with their invariant residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPointState {
    pub t: f64,
    pub q: OperatorMatrix,
    pub g: OperatorMatrix,
    pub r: OperatorMatrix,
    pub residuals: ResidualReport,
    /// `max |G - G†|`. Not an invariant: `Q(Q + P₊)⁻¹` projects onto the
    /// evolved sea along the initial positive modes, which is oblique as soon
    /// as pairs are created. Zero while the sea stays orthogonal to them.
    pub g_hermiticity: f64,
}

impl TwoPointState {
    pub fn new(
        t: f64,
        phi: &ModeMatrix,
        phi0: &ModeMatrix,
        p_minus: &OperatorMatrix,
        p_plus: &OperatorMatrix,
    ) -> Result<Self> {
        let q = build_q(phi, phi0);
        let g = build_g(&q, p_plus)?;
        let r = build_r(&q);
        let r_via_g = build_r_via_g(&g)?;
        let gb = g_bar(&g)?;
        let half_r = &r * C64::new(0.5, 0.0);

        let mut residuals = appendix_audit(&q, p_minus, p_plus)?;
        residuals.push("g_bar_equals_g_adjoint", max_abs_diff(&gb, &g.adjoint()));
        residuals.push("r_routes_agree", max_abs_diff(&r, &r_via_g));
        residuals.push("r_hermitian", hermiticity_residual(&r));
        residuals.push("half_r_idempotent", max_abs_diff(&(&half_r * &half_r), &half_r));
        residuals.push("half_r_trace", (trace(&half_r) - C64::new(phi.ncols() as f64, 0.0)).norm());
        let g_hermiticity = hermiticity_residual(&g);
        Ok(Self { t, q, g, r, residuals, g_hermiticity })
    }
}

/// Central-difference check of `i dG/dt = ½(I - G) h (I + G)` at the middle
/// of three snapshots spaced by `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeResidual {
    /// `max |i (G₊ - G₋)/(2dt) - ½(I - G) h (I + G)|`
    pub absolute: f64,
    /// `max |½(I - G) h (I + G)|`, the scale for a relative residual.
    pub scale: f64,
}

pub fn ode_residual(
    g_before: &OperatorMatrix,
    g_center: &OperatorMatrix,
    g_after: &OperatorMatrix,
    h_center: &OperatorMatrix,
    dt: f64,
) -> OdeResidual {
    let id = identity(g_center.nrows());
    let lhs = (g_after - g_before) * C64::new(0.0, 0.5 / dt);
    let rhs = (&id - g_center) * h_center * (&id + g_center) * C64::new(0.5, 0.0);
    OdeResidual { absolute: max_abs_diff(&lhs, &rhs), scale: max_abs(&rhs) }
}
