//! Second-order forward-mode jets.
//!
//! A [`Jet2`] carries the value and all partial derivatives up to order two
//! of a scalar function of `(x, y)` at one point. Arithmetic on jets is the
//! truncated Taylor arithmetic, so composing primitives yields exact
//! (to rounding) first and second partials without symbolic expansion.
//! [`Jet1`] is the univariate analogue used for profiles `h(z)`.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value and partials `f, f_x, f_y, f_xx, f_xy, f_yy` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jet2 {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

/// Value, first and second derivative of a univariate function.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jet1 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Negates the first operand; the second is ignored.
    Neg,
}

/// Coordinate jets at `(px, py)`.
pub fn seed(px: f64, py: f64) -> (Jet2, Jet2) {
    (Jet2::var_x(px), Jet2::var_y(py))
}

/// Binary jet arithmetic by operator tag.
pub fn arith(op: ArithOp, a: Jet2, b: Jet2) -> Result<Jet2> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.try_div(b)?,
        ArithOp::Neg => -a,
    })
}

impl Jet2 {
    pub const fn constant(c: f64) -> Self {
        Self {
            v: c,
            dx: 0.0,
            dy: 0.0,
            dxx: 0.0,
            dxy: 0.0,
            dyy: 0.0,
        }
    }

    pub const fn var_x(px: f64) -> Self {
        Self {
            v: px,
            dx: 1.0,
            ..Self::constant(0.0)
        }
    }

    pub const fn var_y(py: f64) -> Self {
        Self {
            v: py,
            dy: 1.0,
            ..Self::constant(0.0)
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.v, self.dx, self.dy, self.dxx, self.dxy, self.dyy]
            .iter()
            .all(|t| t.is_finite())
    }

    /// Multiplies every component by `t`.
    pub fn scale(self, t: f64) -> Self {
        Self {
            v: self.v * t,
            dx: self.dx * t,
            dy: self.dy * t,
            dxx: self.dxx * t,
            dxy: self.dxy * t,
            dyy: self.dyy * t,
        }
    }

    /// Applies a univariate `g` given `g(v), g'(v), g''(v)`.
    pub fn chain(self, g0: f64, g1: f64, g2: f64) -> Self {
        Self {
            v: g0,
            dx: g1 * self.dx,
            dy: g1 * self.dy,
            dxx: g2 * self.dx * self.dx + g1 * self.dxx,
            dxy: g2 * self.dx * self.dy + g1 * self.dxy,
            dyy: g2 * self.dy * self.dy + g1 * self.dyy,
        }
    }

    pub fn recip(self) -> Result<Self> {
        if self.v == 0.0 {
            return Err(Error::DivisionByZero);
        }
        let inv = 1.0 / self.v;
        Ok(self.chain(inv, -inv * inv, 2.0 * inv * inv * inv))
    }

    pub fn try_div(self, rhs: Self) -> Result<Self> {
        Ok(self * rhs.recip()?)
    }

    /// `self^r` for a constant exponent.
    ///
    /// Positive bases accept any `r`. Integer `r >= 0` accepts any base, and
    /// negative integer `r` any nonzero base. A zero base with non-integer
    /// `r >= 2` is allowed; every other zero-base case is singular.
    pub fn powf(self, r: f64) -> Result<Self> {
        let v = self.v;
        let is_int = r.fract() == 0.0 && r.abs() < i32::MAX as f64;
        if is_int && (r >= 0.0 || v != 0.0) {
            let n = r as i32;
            let g1 = if n == 0 { 0.0 } else { r * v.powi(n - 1) };
            let g2 = if n == 0 || n == 1 {
                0.0
            } else {
                r * (r - 1.0) * v.powi(n - 2)
            };
            return Ok(self.chain(v.powi(n), g1, g2));
        }
        if v > 0.0 || (v == 0.0 && r >= 2.0) {
            return Ok(self.chain(
                v.powf(r),
                r * v.powf(r - 1.0),
                r * (r - 1.0) * v.powf(r - 2.0),
            ));
        }
        Err(Error::SingularJet(format!(
            "base {v} raised to non-integer power {r}"
        )))
    }

    pub fn sqrt(self) -> Result<Self> {
        if self.v < 0.0 {
            return Err(Error::Domain(format!("sqrt of negative value {}", self.v)));
        }
        self.powf(0.5)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Result<Self> {
        if self.v <= 0.0 {
            return Err(Error::Domain(format!("log of nonpositive value {}", self.v)));
        }
        let inv = 1.0 / self.v;
        Ok(self.chain(self.v.ln(), inv, -inv * inv))
    }
}

/// Second-order chain rule for `h(inner(x, y))`, where `hj` holds
/// `h, h', h''` evaluated at `inner.v`.
pub fn compose_univariate(hj: Jet1, inner: Jet2) -> Jet2 {
    inner.chain(hj.v, hj.d1, hj.d2)
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, b: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + b.v,
            dx: self.dx + b.dx,
            dy: self.dy + b.dy,
            dxx: self.dxx + b.dxx,
            dxy: self.dxy + b.dxy,
            dyy: self.dyy + b.dyy,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, b: Jet2) -> Jet2 {
        self + (-b)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, b: Jet2) -> Jet2 {
        let a = self;
        Jet2 {
            v: a.v * b.v,
            dx: a.dx * b.v + a.v * b.dx,
            dy: a.dy * b.v + a.v * b.dy,
            dxx: a.dxx * b.v + 2.0 * a.dx * b.dx + a.v * b.dxx,
            dxy: a.dxy * b.v + a.dx * b.dy + a.dy * b.dx + a.v * b.dxy,
            dyy: a.dyy * b.v + 2.0 * a.dy * b.dy + a.v * b.dyy,
        }
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, c: f64) -> Jet2 {
        self.v += c;
        self
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Jet2 {
        self.scale(c)
    }
}

impl Jet1 {
    pub const fn constant(c: f64) -> Self {
        Self { v: c, d1: 0.0, d2: 0.0 }
    }

    pub const fn var(z: f64) -> Self {
        Self { v: z, d1: 1.0, d2: 0.0 }
    }

    /// Horner evaluation of `sum coeffs[i] z^i`.
    pub fn poly(coeffs: &[f64], z: f64) -> Self {
        let t = Jet1::var(z);
        coeffs
            .iter()
            .rev()
            .fold(Jet1::constant(0.0), |acc, &c| acc * t + Jet1::constant(c))
    }

    pub fn chain(self, g0: f64, g1: f64, g2: f64) -> Self {
        Self {
            v: g0,
            d1: g1 * self.d1,
            d2: g2 * self.d1 * self.d1 + g1 * self.d2,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }
}

impl Add for Jet1 {
    type Output = Jet1;
    fn add(self, b: Jet1) -> Jet1 {
        Jet1 {
            v: self.v + b.v,
            d1: self.d1 + b.d1,
            d2: self.d2 + b.d2,
        }
    }
}

impl Sub for Jet1 {
    type Output = Jet1;
    fn sub(self, b: Jet1) -> Jet1 {
        self + (-b)
    }
}

impl Neg for Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        Jet1 {
            v: -self.v,
            d1: -self.d1,
            d2: -self.d2,
        }
    }
}

impl Mul for Jet1 {
    type Output = Jet1;
    fn mul(self, b: Jet1) -> Jet1 {
        Jet1 {
            v: self.v * b.v,
            d1: self.d1 * b.v + self.v * b.d1,
            d2: self.d2 * b.v + 2.0 * self.d1 * b.d1 + self.v * b.d2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn seeding() {
        let (x, y) = seed(2.0, 3.0);
        assert_eq!(x, Jet2 { v: 2.0, dx: 1.0, ..Jet2::default() });
        assert_eq!(y, Jet2 { v: 3.0, dy: 1.0, ..Jet2::default() });
        let (x, y) = seed(0.0, 0.0);
        assert_eq!((x.v, x.dx, y.v, y.dy), (0.0, 1.0, 0.0, 1.0));
        let (x, y) = seed(1.0, -1.0);
        assert_eq!((x.v, y.v), (1.0, -1.0));
    }

    #[test]
    fn arithmetic_examples() {
        let (x, _) = seed(3.0, 0.0);
        let sq = arith(ArithOp::Mul, x, x).unwrap();
        assert_eq!((sq.v, sq.dx, sq.dxx), (9.0, 6.0, 2.0));

        let (x, y) = seed(2.0, 5.0);
        let p = x * y;
        assert_eq!((p.v, p.dx, p.dy, p.dxy, p.dxx, p.dyy), (10.0, 5.0, 2.0, 1.0, 0.0, 0.0));

        let (x, _) = seed(2.0, 0.0);
        let q = arith(ArithOp::Div, Jet2::constant(1.0), x).unwrap();
        // x^{-1}: -x^{-2}, 2 x^{-3}
        assert_eq!((q.v, q.dx, q.dxx), (0.5, -0.25, 0.25));

        assert_eq!(
            arith(ArithOp::Div, x, Jet2::constant(0.0)),
            Err(Error::DivisionByZero)
        );
        assert_eq!(arith(ArithOp::Neg, x, x).unwrap().v, -2.0);
        assert_eq!(arith(ArithOp::Sub, x, x).unwrap(), Jet2::default());
    }

    #[test]
    fn pow_examples() {
        let j = Jet2::var_x(64.0).powf(1.0 / 6.0).unwrap();
        assert!(close(j.v, 2.0, 1e-15));
        assert!(close(j.dx, 1.0 / 192.0, 1e-14));

        let j = Jet2::var_x(4.0).powf(-1.5).unwrap();
        assert!(close(j.v, 0.125, 1e-15));
        // -3/2 * 4^{-5/2} = -3/64
        assert!(close(j.dx, -3.0 / 64.0, 1e-15));

        assert!(matches!(
            Jet2::var_x(0.0).powf(1.0 / 6.0),
            Err(Error::SingularJet(_))
        ));
        assert!(Jet2::var_x(0.0).powf(2.5).is_ok());
        assert!(Jet2::var_x(-2.0).powf(0.5).is_err());
        let j = Jet2::var_x(-2.0).powf(3.0).unwrap();
        assert_eq!((j.v, j.dx, j.dxx), (-8.0, 12.0, -12.0));
        let j = Jet2::var_x(-2.0).powf(-1.0).unwrap();
        assert_eq!((j.v, j.dx), (-0.5, -0.25));
        assert!(Jet2::var_x(0.0).powf(-1.0).is_err());
    }

    #[test]
    fn compose_examples() {
        let z = Jet2 { v: 0.3, dx: 0.7, dy: -1.1, dxx: 0.2, dxy: 0.5, dyy: -0.4 };
        assert_eq!(compose_univariate(Jet1::var(0.3), z), z);

        // h(z) = 1 - 54 z^2 at z = 0
        let (x, y) = seed(1.0, 0.0);
        let zj = y * x.powf(-1.5).unwrap();
        let h = Jet1 { v: 1.0, d1: 0.0, d2: -108.0 };
        let r = compose_univariate(h, zj);
        assert_eq!((r.v, r.dy), (1.0, 0.0));

        // h(z) = z^2 with inner = x at 3
        let h = Jet1 { v: 9.0, d1: 6.0, d2: 2.0 };
        let r = compose_univariate(h, Jet2::var_x(3.0));
        assert_eq!((r.v, r.dx, r.dxx), (9.0, 6.0, 2.0));
    }

    #[test]
    fn exp_log_sqrt() {
        let x = Jet2::var_x(2.0);
        let e = x.exp();
        assert!(close(e.dxx, 2f64.exp(), 1e-15));
        let l = x.ln().unwrap();
        assert_eq!((l.dx, l.dxx), (0.5, -0.25));
        assert!(Jet2::constant(0.0).ln().is_err());
        assert!(Jet2::constant(-1.0).sqrt().is_err());
        let s = Jet2::var_x(4.0).sqrt().unwrap();
        assert_eq!((s.v, s.dx), (2.0, 0.25));
    }

    #[test]
    fn poly_jet1() {
        // 1 - 54 z^2 at z = 0.1
        let p = Jet1::poly(&[1.0, 0.0, -54.0], 0.1);
        assert!(close(p.v, 0.46, 1e-15));
        assert!(close(p.d1, -10.8, 1e-15));
        assert_eq!(p.d2, -108.0);
    }
}
