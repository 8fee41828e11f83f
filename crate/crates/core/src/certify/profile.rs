//! Brackets of the positivity system for `f = x^{1/6} h(z)`, written in terms
//! of `phi = (1 - 54 z^2) h'/h`, and the Ricci-flat variant.

use crate::error::{Error, Result};
use crate::identities::Residual;
use crate::jet::{compose_univariate, Jet1, Jet2};
use crate::pdi::{self, PdiContext};
use crate::spectrum::Z_MAX;

use super::abel::AbelSolution;

/// `I2` bracket `3 u phi' + 3 phi^2 + 54 z phi + 14 u`, `u = 1 - 54 z^2`.
pub fn bracket_i2(z: f64, phi: f64, phip: f64) -> f64 {
    let u = 1.0 - 54.0 * z * z;
    3.0 * u * phip + 3.0 * phi * phi + 54.0 * z * phi + 14.0 * u
}

/// `I3` bracket `3 u (u - 9 z phi) phi' - 27 z phi^3 - 9 (1 + 108 z^2) phi^2 + 10 u^2`.
pub fn bracket_i3(z: f64, phi: f64, phip: f64) -> f64 {
    let u = 1.0 - 54.0 * z * z;
    3.0 * u * (u - 9.0 * z * phi) * phip - 27.0 * z * phi.powi(3) - 9.0 * (1.0 + 108.0 * z * z) * phi * phi
        + 10.0 * u * u
}

/// `I1, I2, I3` for `f = x^{1/6} h(z)` with prefactors
/// `(1/6) h x^{1/6}`, `(1/3) h x^{-5/6} u^{-1}` and `(1/9) h^2 x^{-5/3} u^{-2}`.
///
/// `hp` is accepted for symmetry with the raw form; the brackets only
/// involve `phi = u h'/h` and its derivative.
pub fn thm13_brackets(z: f64, h: f64, _hp: f64, phi: f64, phip: f64, x: f64, r: f64) -> Result<[f64; 3]> {
    if !(x > 0.0) || !(h >= 0.0) || !(0.0..Z_MAX).contains(&z) {
        return Err(Error::InvalidInput(format!(
            "thm13_brackets needs x > 0, h >= 0, 0 <= z < 1/(3 sqrt 6) (got x = {x}, h = {h}, z = {z})"
        )));
    }
    let u = 1.0 - 54.0 * z * z;
    Ok([
        h * x.powf(1.0 / 6.0) / 6.0 * (r - 6.0 * x.sqrt() * (phi + 6.0 * z)),
        h * x.powf(-5.0 / 6.0) / (3.0 * u) * bracket_i2(z, phi, phip),
        h * h * x.powf(-5.0 / 3.0) / (9.0 * u * u) * bracket_i3(z, phi, phip),
    ])
}

/// `phi` and `phi'` of a profile given as a value/derivative jet in `z`.
pub fn phi_from_profile(z: f64, h: Jet1) -> (f64, f64) {
    let u = 1.0 - 54.0 * z * z;
    let g = h.d1 / h.v;
    let gp = h.d2 / h.v - g * g;
    (u * g, -108.0 * z * g + u * gp)
}

/// Maximum normalized deviation between [`thm13_brackets`] and the system
/// evaluated directly on the jet of `x^{1/6} h(z)`, where `h` is a
/// polynomial in `z` with coefficients in increasing degree.
pub fn thm13_crosscheck(h_coeffs: &[f64], x: f64, y: f64, r: f64) -> Result<f64> {
    let z = y / x.powf(1.5);
    let hz = Jet1::poly(h_coeffs, z);
    if !(hz.v > 0.0) {
        return Err(Error::Domain(format!("profile h({z}) = {} is not positive", hz.v)));
    }
    let zj = Jet2::var_y(y) * Jet2::var_x(x).powf(-1.5)?;
    let f = Jet2::var_x(x).powf(1.0 / 6.0)? * compose_univariate(hz, zj);
    let direct = pdi::closed_form_terms(x, y, &f, PdiContext { r })?;
    let (phi, phip) = phi_from_profile(z, hz);
    let b = thm13_brackets(z, hz.v, hz.d1, phi, phip, x, r)?;
    let pairs = [(b[0], direct.i1), (b[1], direct.i2), (b[2], direct.i3)];
    Ok(pairs.iter().fold(0.0f64, |m, (c, t)| {
        let scale = c.abs().max(t.scale);
        m.max(if scale > 0.0 { (c - t.value).abs() / scale } else { 0.0 })
    }))
}

/// The bracket identity `(u - 9 z phi) i2 - i3 = 12 phi^2 + 4 (u - 9 z phi)^2`,
/// in which `phi'` cancels. The scale is the largest constituent term.
pub fn thm13_identity_residual(z: f64, phi: f64, phip: f64) -> Residual {
    let u = 1.0 - 54.0 * z * z;
    let g = u - 9.0 * z * phi;
    let lhs = g * bracket_i2(z, phi, phip) - bracket_i3(z, phi, phip);
    let rhs = 12.0 * phi * phi + 4.0 * g * g;
    let terms = [
        g * 3.0 * u * phip,
        g * 3.0 * phi * phi,
        g * 54.0 * z * phi,
        g * 14.0 * u,
        27.0 * z * phi.powi(3),
        9.0 * (1.0 + 108.0 * z * z) * phi * phi,
        10.0 * u * u,
        rhs,
    ];
    Residual {
        value: (lhs - rhs).abs(),
        scale: terms.iter().fold(0.0f64, |m, t| m.max(t.abs())),
    }
}

/// `|LHS - RHS|` of the bracket identity.
pub fn thm13_identity(z: f64, phi: f64, phip: f64) -> f64 {
    thm13_identity_residual(z, phi, phip).value
}

/// `I1 = -h x^{2/3} psi` for scalar curvature zero.
pub fn thm14_variant(_z: f64, h: f64, psi: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !(h >= 0.0) {
        return Err(Error::InvalidInput(format!("thm14_variant needs x > 0, h >= 0 (got x = {x}, h = {h})")));
    }
    Ok(-h * x.powf(2.0 / 3.0) * psi)
}

/// Smallest values along a gridded solution of the `I1` sign factor
/// `-(phi + 6 z) = -psi`, the `I3` bracket (the inequality slack) and the
/// `I2` bracket relative to its scale, the latter recovered through the
/// bracket identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileMargins {
    pub i1_factor: f64,
    pub i2_rel: f64,
    pub i3: f64,
}

pub fn profile_margins(sol: &AbelSolution) -> ProfileMargins {
    let mut m = ProfileMargins {
        i1_factor: f64::INFINITY,
        i2_rel: f64::INFINITY,
        i3: f64::INFINITY,
    };
    for i in 0..sol.len() {
        let (z, phi, b3) = (sol.grid[i], sol.phi[i], sol.slack[i]);
        let g = 1.0 - 54.0 * z * z - 9.0 * z * phi;
        let extra = 12.0 * phi * phi + 4.0 * g * g;
        let b2 = (b3 + extra) / g;
        m.i1_factor = m.i1_factor.min(-sol.psi[i]);
        m.i2_rel = m.i2_rel.min(b2 / (extra / g));
        m.i3 = m.i3.min(b3);
    }
    m
}
