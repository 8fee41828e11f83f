//! The family `F_k = x^{1/6} (1 - 54 z^2)^k`.
//!
//! With `u = 1 - 54 z^2` and `w = z^2`, the positivity system reduces to
//!
//! ```text
//! I1 = (1/6) x^{1/6} u^k [R + 36 (18k - 1) y / x]
//! I2 = (2/3) x^{-5/6} u^{k-1} [54 (18k-1)(18k+7) w - (162k - 7)]
//! I3 = (2/9) x^{-5/3} u^{2k-2} [2916 (18k-1)^2 (18k+5) w^2
//!                               - 108 (1944k^2 - 162k + 5) w - (162k - 5)]
//! I4 = 0
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcdsl::{self, Mode};
use crate::pdi::{self, PdiContext, PdiValues};
use crate::spectrum::{self, Region, SampleRange, Z_MAX};

/// Inputs to the minimal-`k` search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FkParams {
    pub k: u64,
    pub r: f64,
    /// Lower bound for `z`.
    pub delta1: f64,
    /// Lower bound for `y / x`.
    pub delta2: f64,
}

impl FkParams {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidInput("k must be at least 1".into()));
        }
        if !(self.delta1 > 0.0 && self.delta1 <= Z_MAX) {
            return Err(Error::InvalidInput(format!(
                "delta1 = {} must lie in (0, 1/(3 sqrt 6)]",
                self.delta1
            )));
        }
        if !(self.delta2 > 0.0 && self.delta2.is_finite()) {
            return Err(Error::InvalidInput(format!("delta2 = {} must be positive", self.delta2)));
        }
        Ok(())
    }
}

/// Source text of `F_k` in the expression language.
pub fn fk_source(k: u64) -> String {
    format!("x^(1/6)*(1-54*z^2)^{k}")
}

/// Bracket of `I2` as a function of `w = z^2`.
pub fn i2_bracket(k: f64, w: f64) -> f64 {
    54.0 * (18.0 * k - 1.0) * (18.0 * k + 7.0) * w - (162.0 * k - 7.0)
}

/// Coefficients `(a, b, c)` of the `I3` bracket `a w^2 + b w + c`.
pub fn i3_bracket_coeffs(k: f64) -> (f64, f64, f64) {
    (
        2916.0 * (18.0 * k - 1.0).powi(2) * (18.0 * k + 5.0),
        -108.0 * (1944.0 * k * k - 162.0 * k + 5.0),
        -(162.0 * k - 5.0),
    )
}

pub fn i3_bracket(k: f64, w: f64) -> f64 {
    let (a, b, c) = i3_bracket_coeffs(k);
    (a * w + b) * w + c
}

/// `2916` times the `I3` bracket at `w = 1/54`, in exact integer arithmetic.
pub fn i3_bracket_kahler_scaled(k: i128) -> i128 {
    let a = 2916 * (18 * k - 1).pow(2) * (18 * k + 5);
    let b = -108 * (1944 * k * k - 162 * k + 5);
    let c = -(162 * k - 5);
    a + 54 * b + 2916 * c
}

/// `54` times the `I2` bracket at `w = 1/54`, in exact integer arithmetic.
pub fn i2_bracket_kahler_scaled(k: i128) -> i128 {
    54 * (18 * k - 1) * (18 * k + 7) - 54 * (162 * k - 7)
}

/// Closed forms of `I1..I4` at `(x, z)`, with `y = z x^{3/2}`.
pub fn fk_brackets(k: u64, r: f64, x: f64, z: f64) -> Result<PdiValues> {
    if !(x > 0.0) || z.abs() > Z_MAX * (1.0 + 1e-12) || k < 1 {
        return Err(Error::InvalidInput(format!(
            "fk_brackets needs x > 0, |z| <= 1/(3 sqrt 6), k >= 1 (got x = {x}, z = {z}, k = {k})"
        )));
    }
    let kf = k as f64;
    let w = z * z;
    let u = (1.0 - 54.0 * w).max(0.0);
    let y = z * x.powf(1.5);
    let upow = |n: u64| {
        if n <= i32::MAX as u64 {
            u.powi(n as i32)
        } else {
            u.powf(n as f64)
        }
    };
    Ok(PdiValues {
        i1: x.powf(1.0 / 6.0) / 6.0 * upow(k) * (r + 36.0 * (18.0 * kf - 1.0) * y / x),
        i2: 2.0 / 3.0 * x.powf(-5.0 / 6.0) * upow(k - 1) * i2_bracket(kf, w),
        i3: 2.0 / 9.0 * x.powf(-5.0 / 3.0) * upow(2 * k - 2) * i3_bracket(kf, w),
        i4: 0.0,
    })
}

/// Maximum normalized deviation between [`fk_brackets`] and the system
/// evaluated on the jet of the parsed `F_k` at one point `(x, y)`.
pub fn fk_deviation_at(k: u64, ctx: PdiContext, x: f64, y: f64) -> Result<f64> {
    let ast = funcdsl::parse(&fk_source(k), Mode::F)?;
    fk_deviation_with(&ast, k, ctx, x, y)
}

fn fk_deviation_with(ast: &funcdsl::ExprAst, k: u64, ctx: PdiContext, x: f64, y: f64) -> Result<f64> {
    let z = y / x.powf(1.5);
    let closed = fk_brackets(k, ctx.r, x, z)?;
    let ad = pdi::closed_form_terms(x, y, &ast.eval_jet(x, y)?, ctx)?;
    let pairs = [
        (closed.i1, ad.i1),
        (closed.i2, ad.i2),
        (closed.i3, ad.i3),
        (closed.i4, ad.i4),
    ];
    Ok(pairs.iter().fold(0.0f64, |m, (c, a)| {
        let scale = c.abs().max(a.scale);
        let dev = if scale > 0.0 { (c - a.value).abs() / scale } else { 0.0 };
        m.max(dev)
    }))
}

/// Compares the closed forms with jet evaluation at seeded interior points
/// of `Omega`; returns the maximum normalized deviation.
pub fn fk_crosscheck(k: u64, r: f64, points: usize, seed: u64) -> Result<f64> {
    let ast = funcdsl::parse(&fk_source(k), Mode::F)?;
    let range = SampleRange {
        z_fraction: 0.999,
        ..SampleRange::default()
    };
    let pts = spectrum::sample_in(Region::Omega, range, points, seed)?;
    let ctx = PdiContext { r };
    let devs = pts
        .par_iter()
        .map(|s| {
            let p = s.invariants();
            fk_deviation_with(&ast, k, ctx, p.x, p.y)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

/// Result of the minimal-`k` search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinK {
    pub k0: u64,
    /// `I2` bracket at `z = delta1` for `k0`.
    pub i2_at_delta1: f64,
    /// Minimum of the `I3` bracket over `w in [delta1^2, 1/54]` for `k0`.
    pub i3_min: f64,
    pub i3_argmin_w: f64,
}

/// Scan cap beyond the lower bound forced by the curvature condition.
pub const MIN_K_SCAN: u64 = 1_000_000;

/// Exact minimum of the `I3` bracket over `[w_lo, 1/54]`.
pub fn i3_bracket_min(k: f64, w_lo: f64) -> (f64, f64) {
    let w_hi = 1.0 / 54.0;
    let (a, b, _) = i3_bracket_coeffs(k);
    let mut best = (w_lo, i3_bracket(k, w_lo));
    let mut consider = |w: f64| {
        let v = i3_bracket(k, w);
        if v < best.1 {
            best = (w, v);
        }
    };
    consider(w_hi);
    if a > 0.0 {
        let vertex = -b / (2.0 * a);
        if vertex > w_lo && vertex < w_hi {
            consider(vertex);
        }
    }
    best
}

fn curvature_ok(k: u64, delta2: f64, rmin: f64) -> bool {
    rmin + 36.0 * (18.0 * k as f64 - 1.0) * delta2 >= 0.0
}

/// Smallest `k >= 1` for which `F_k` satisfies the system on `Omega_delta`:
/// the curvature condition `Rmin + 36 (18k-1) delta2 >= 0`, the `I2` bracket
/// at `z = delta1`, and the `I3` bracket on `[delta1^2, 1/54]`.
pub fn fk_min_k(delta1: f64, delta2: f64, rmin: f64) -> Result<MinK> {
    FkParams {
        k: 1,
        r: rmin,
        delta1,
        delta2,
    }
    .validate()?;
    if !rmin.is_finite() {
        return Err(Error::InvalidInput(format!("rmin = {rmin} must be finite")));
    }
    // Condition (a) is monotone in k; start the scan at its threshold.
    let mut k = if rmin >= 0.0 {
        1
    } else {
        let t = ((-rmin / (36.0 * delta2)) + 1.0) / 18.0;
        (t.ceil().max(1.0)) as u64
    };
    while k > 1 && curvature_ok(k - 1, delta2, rmin) {
        k -= 1;
    }
    while !curvature_ok(k, delta2, rmin) {
        k += 1;
    }
    let w_lo = delta1 * delta1;
    let limit = k.saturating_add(MIN_K_SCAN);
    while k <= limit {
        let kf = k as f64;
        let i2 = i2_bracket(kf, w_lo);
        let (w, i3) = i3_bracket_min(kf, w_lo);
        if i2 >= 0.0 && i3 >= 0.0 {
            return Ok(MinK {
                k0: k,
                i2_at_delta1: i2,
                i3_min: i3,
                i3_argmin_w: w,
            });
        }
        k += 1;
    }
    Err(Error::NoSolution { limit })
}
