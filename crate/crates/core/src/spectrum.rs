//! Traceless symmetric spectra and their invariants.
//!
//! A [`Spectrum`] is the ordered eigenvalue triple `l1 <= l2 <= l3` of a
//! traceless symmetric operator on a three-dimensional space. Its two
//! nontrivial invariants are `x = l1^2 + l2^2 + l3^2` (the squared norm) and
//! `y = l1 l2 l3` (the determinant); every spectrum satisfies
//! `x^3 >= 54 y^2`, with equality exactly when two eigenvalues coincide.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `1 / (3 sqrt 6)`, the largest value of `z = y x^{-3/2}` on a spectrum.
pub const Z_MAX: f64 = 0.136_082_763_487_954_34;

/// Relative trace tolerance accepted by [`Spectrum::from_eigenvalues`].
pub const TRACE_TOL: f64 = 1e-9;

/// Relative slack allowed on `x^3 - 54 y^2 >= 0` before a point is rejected.
pub const REGION_TOL: f64 = 1e-10;

/// Ordered traceless eigenvalue triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    l: [f64; 3],
}

/// The invariants `(x, y, z)` of a spectrum. `z` is `None` at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantPoint {
    pub x: f64,
    pub y: f64,
    pub z: Option<f64>,
}

impl InvariantPoint {
    /// Builds a point from `(x, y)`, deriving `z` when `x > 0`.
    pub fn new(x: f64, y: f64) -> Self {
        let z = (x > 0.0).then(|| y / x.powf(1.5));
        Self { x, y, z }
    }

    /// `sigma_2 = -x / 2`.
    pub fn sigma2(&self) -> f64 {
        -0.5 * self.x
    }

    /// `sigma_3 = y`.
    pub fn sigma3(&self) -> f64 {
        self.y
    }

    /// Discriminant-like quantity `x^3 - 54 y^2`.
    pub fn gap(&self) -> f64 {
        self.x.powi(3) - 54.0 * self.y * self.y
    }
}

/// Subsets of the invariant plane used by the certificates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    /// `x^3 >= 54 y^2`.
    Omega,
    /// `Omega` intersected with `y >= delta`, `delta > 0`.
    OmegaDelta(f64),
    /// `Omega` intersected with `x > 0, y >= 0`.
    OmegaZero,
}

impl Region {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        if !in_omega(x, y) {
            return false;
        }
        match *self {
            Region::Omega => true,
            Region::OmegaDelta(delta) => y >= delta,
            Region::OmegaZero => x > 0.0 && y >= 0.0,
        }
    }
}

impl std::str::FromStr for Region {
    type Err = Error;

    /// Parses `omega`, `omega-zero` or `omega-delta:<delta>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omega" => Ok(Region::Omega),
            "omega-zero" => Ok(Region::OmegaZero),
            _ => {
                let delta = s
                    .strip_prefix("omega-delta:")
                    .and_then(|d| d.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidInput(format!("unknown region `{s}`")))?;
                if !(delta > 0.0 && delta.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "omega-delta requires a positive delta, got {delta}"
                    )));
                }
                Ok(Region::OmegaDelta(delta))
            }
        }
    }
}

/// Membership in `Omega = {x^3 >= 54 y^2}` up to [`REGION_TOL`].
pub fn in_omega(x: f64, y: f64) -> bool {
    let x3 = x.powi(3);
    x >= 0.0 && x3 - 54.0 * y * y >= -REGION_TOL * x3.max(1.0)
}

/// Real roots of `t^3 + p t + q = 0`, ascending, by the trigonometric
/// method. Requires `p <= 0`; the `acos` argument is clamped so points just
/// outside the three-real-root region collapse onto the double-root boundary.
pub(crate) fn depressed_cubic_roots(p: f64, q: f64) -> [f64; 3] {
    if p >= 0.0 {
        // Only p = q = 0 has three real roots here.
        return [0.0; 3];
    }
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = ((3.0 * q) / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let mut r = [
        m * theta.cos(),
        m * (theta - 2.0 * PI / 3.0).cos(),
        m * (theta - 4.0 * PI / 3.0).cos(),
    ];
    r.sort_by(f64::total_cmp);
    r
}

impl Spectrum {
    /// Sorts and recenters three eigenvalues whose sum is zero up to
    /// [`TRACE_TOL`] relative.
    pub fn from_eigenvalues(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite eigenvalue in ({a}, {b}, {c})"
            )));
        }
        let sum = a + b + c;
        let scale = 1f64.max(a.abs()).max(b.abs()).max(c.abs());
        if sum.abs() > TRACE_TOL * scale {
            return Err(Error::Trace { a, b, c, sum });
        }
        let mean = sum / 3.0;
        let mut l = [a - mean, b - mean, c - mean];
        l.sort_by(f64::total_cmp);
        Ok(Self { l })
    }

    /// The pattern `(-lambda, -lambda, 2 lambda)`, in sorted order.
    pub fn kahler(lambda: f64) -> Self {
        let mut l = [-lambda, -lambda, 2.0 * lambda];
        l.sort_by(f64::total_cmp);
        Self { l }
    }

    /// Inverts `(x, y)` to the roots of `t^3 - (x/2) t - y = 0`.
    pub fn from_invariants(p: InvariantPoint) -> Result<Self> {
        let InvariantPoint { x, y, .. } = p;
        if !(x.is_finite() && y.is_finite()) || x < 0.0 {
            return Err(Error::Region {
                x,
                y,
                reason: "x must be finite and nonnegative".into(),
            });
        }
        if !in_omega(x, y) {
            return Err(Error::Region {
                x,
                y,
                reason: "x^3 < 54 y^2 (complex eigenvalues)".into(),
            });
        }
        if x == 0.0 {
            return Ok(Self { l: [0.0; 3] });
        }
        let r = depressed_cubic_roots(-0.5 * x, -y);
        let mean = (r[0] + r[1] + r[2]) / 3.0;
        Ok(Self {
            l: [r[0] - mean, r[1] - mean, r[2] - mean],
        })
    }

    pub fn l1(&self) -> f64 {
        self.l[0]
    }

    pub fn l2(&self) -> f64 {
        self.l[1]
    }

    pub fn l3(&self) -> f64 {
        self.l[2]
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        self.l
    }

    pub fn invariants(&self) -> InvariantPoint {
        let [a, b, c] = self.l;
        InvariantPoint::new(a * a + b * b + c * c, a * b * c)
    }

    /// The algebraic inequality `3 sqrt(6) |y| <= x^{3/2}`.
    pub fn algebraic_bound(&self) -> AlgebraicBound {
        let p = self.invariants();
        let lhs = 3.0 * 6f64.sqrt() * p.y.abs();
        let rhs = p.x.powf(1.5);
        AlgebraicBound {
            lhs,
            rhs,
            equality: (lhs - rhs).abs() <= 1e-10 * rhs.max(1.0),
            holds: lhs <= rhs + 1e-10,
        }
    }

    /// Number of eigenvalue clusters: neighbours closer than `tol` merge.
    pub fn spectrum_count(&self, tol: f64) -> usize {
        1 + self.l.windows(2).filter(|w| w[1] - w[0] > tol).count()
    }

    /// `|2 prod (l_i - l_j)^2 - (x^3 - 54 y^2)|`.
    pub fn discriminant_identity(&self) -> f64 {
        let [a, b, c] = self.l;
        let lhs = 2.0 * ((a - b) * (b - c) * (c - a)).powi(2);
        (lhs - self.invariants().gap()).abs()
    }

    /// Smallest gap between consecutive eigenvalues.
    pub fn min_gap(&self) -> f64 {
        (self.l[1] - self.l[0]).min(self.l[2] - self.l[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraicBound {
    pub lhs: f64,
    pub rhs: f64,
    pub equality: bool,
    pub holds: bool,
}

/// Range of `x` used when sampling a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRange {
    pub x_min: f64,
    pub x_max: f64,
    /// Fraction of `[-Z_MAX, Z_MAX]` that `z` may occupy; `1.0` reaches the boundary.
    pub z_fraction: f64,
}

impl Default for SampleRange {
    fn default() -> Self {
        Self {
            x_min: 0.1,
            x_max: 10.0,
            z_fraction: 1.0,
        }
    }
}

/// Draws `count` spectra from `region` using the default [`SampleRange`].
pub fn sample(region: Region, count: usize, seed: u64) -> Result<Vec<Spectrum>> {
    sample_in(region, SampleRange::default(), count, seed)
}

/// Draws `count` spectra with `x` uniform in the range and `z` uniform in the
/// part of `[-Z_MAX, Z_MAX]` admitted by the region.
pub fn sample_in(
    region: Region,
    range: SampleRange,
    count: usize,
    seed: u64,
) -> Result<Vec<Spectrum>> {
    if count == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    let SampleRange {
        x_min,
        x_max,
        z_fraction,
    } = range;
    if !(x_min > 0.0 && x_max >= x_min && (0.0..=1.0).contains(&z_fraction)) {
        return Err(Error::InvalidInput(format!("bad sample range {range:?}")));
    }
    let z_hi = Z_MAX * z_fraction;
    let x_lo = match region {
        Region::OmegaDelta(delta) => {
            // y = z x^{3/2} >= delta needs x^{3/2} >= delta / z_hi.
            let needed = (delta / z_hi).powf(2.0 / 3.0);
            if !(delta > 0.0) || needed > x_max {
                return Err(Error::Region {
                    x: x_max,
                    y: delta,
                    reason: format!("no point with y >= {delta} and x <= {x_max}"),
                });
            }
            x_min.max(needed)
        }
        _ => x_min,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let x = if x_max > x_lo { rng.gen_range(x_lo..=x_max) } else { x_lo };
        let z_lo = match region {
            Region::Omega => -z_hi,
            Region::OmegaZero => 0.0,
            Region::OmegaDelta(delta) => (delta / x.powf(1.5)).min(z_hi),
        };
        let z = if z_hi > z_lo { rng.gen_range(z_lo..=z_hi) } else { z_hi };
        let mut y = z * x.powf(1.5);
        if let Region::OmegaDelta(delta) = region {
            y = y.max(delta);
        }
        out.push(Spectrum::from_invariants(InvariantPoint::new(x, y))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(a: f64, b: f64, c: f64) -> Spectrum {
        Spectrum::from_eigenvalues(a, b, c).unwrap()
    }

    #[test]
    fn z_max_constant() {
        assert!((Z_MAX - 1.0 / (3.0 * 6f64.sqrt())).abs() < 1e-17);
    }

    #[test]
    fn from_eigenvalues_sorts() {
        assert_eq!(spec(2.0, -1.0, -1.0).eigenvalues(), [-1.0, -1.0, 2.0]);
        assert_eq!(spec(0.0, 0.0, 0.0).eigenvalues(), [0.0; 3]);
        assert_eq!(spec(1.0, 0.5, -1.5).eigenvalues(), [-1.5, 0.5, 1.0]);
    }

    #[test]
    fn from_eigenvalues_recenters_and_rejects() {
        let s = spec(1.0 + 3e-10, 0.0, -1.0);
        assert!((s.l1() + s.l2() + s.l3()).abs() < 1e-15);
        assert!(matches!(
            Spectrum::from_eigenvalues(1.0, 1.0, 1.0),
            Err(Error::Trace { .. })
        ));
        assert!(Spectrum::from_eigenvalues(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn invariants_examples() {
        let p = spec(-1.0, -1.0, 2.0).invariants();
        assert_eq!((p.x, p.y), (6.0, 2.0));
        assert!((p.z.unwrap() - Z_MAX).abs() < 1e-15);
        let p = spec(-1.0, 0.0, 1.0).invariants();
        assert_eq!((p.x, p.y, p.z), (2.0, 0.0, Some(0.0)));
        let p = spec(0.0, 0.0, 0.0).invariants();
        assert_eq!((p.x, p.y, p.z), (0.0, 0.0, None));
        assert_eq!(p.sigma2(), 0.0);
        assert_eq!(spec(-1.0, -1.0, 2.0).invariants().sigma2(), -3.0);
    }

    #[test]
    fn from_invariants_examples() {
        let close = |s: Spectrum, e: [f64; 3]| {
            for (a, b) in s.eigenvalues().iter().zip(e) {
                assert!((a - b).abs() < 1e-7, "{s:?} vs {e:?}");
            }
        };
        close(Spectrum::from_invariants(InvariantPoint::new(6.0, 2.0)).unwrap(), [-1.0, -1.0, 2.0]);
        close(Spectrum::from_invariants(InvariantPoint::new(2.0, 0.0)).unwrap(), [-1.0, 0.0, 1.0]);
        close(Spectrum::from_invariants(InvariantPoint::new(14.0, 6.0)).unwrap(), [-2.0, -1.0, 3.0]);
        assert!(matches!(
            Spectrum::from_invariants(InvariantPoint::new(1.0, 1.0)),
            Err(Error::Region { .. })
        ));
    }

    #[test]
    fn algebraic_bound_examples() {
        let b = spec(-1.0, -1.0, 2.0).algebraic_bound();
        assert!((b.lhs - 6f64.powf(1.5)).abs() < 1e-12 && b.equality && b.holds);
        let b = spec(-1.0, 0.0, 1.0).algebraic_bound();
        assert_eq!(b.lhs, 0.0);
        assert!(!b.equality);
        let b = spec(-1.5, 0.5, 1.0).algebraic_bound();
        assert!((b.lhs - 3.0 * 6f64.sqrt() * 0.75).abs() < 1e-12);
        // x = 2.25 + 0.25 + 1 = 3.5
        assert!((b.lhs - 5.5114).abs() < 1e-4);
        assert!((b.rhs - 3.5f64.powf(1.5)).abs() < 1e-12);
        assert!(!b.equality && b.holds);
    }

    #[test]
    fn spectrum_count_examples() {
        assert_eq!(spec(-1.0, -1.0, 2.0).spectrum_count(1e-9), 2);
        assert_eq!(spec(0.0, 0.0, 0.0).spectrum_count(1e-9), 1);
        assert_eq!(spec(-1.5, 0.5, 1.0).spectrum_count(1e-9), 3);
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(spec(-1.0, 0.0, 1.0).discriminant_identity(), 0.0);
        assert_eq!(spec(-1.0, -1.0, 2.0).discriminant_identity(), 0.0);
        assert_eq!(spec(-2.0, -1.0, 3.0).discriminant_identity(), 0.0);
        assert_eq!(spec(-2.0, -1.0, 3.0).invariants().gap(), 800.0);
    }

    #[test]
    fn sampling_respects_regions() {
        for s in sample(Region::Omega, 3, 7).unwrap() {
            assert!(s.invariants().gap() >= -1e-9);
        }
        let s = sample(Region::OmegaZero, 1, 1).unwrap()[0].invariants();
        assert!(s.y >= 0.0 && s.x > 0.0);
        let s = sample(Region::OmegaDelta(0.5), 1, 1).unwrap()[0].invariants();
        assert!(s.y >= 0.5 - 1e-12, "{s:?}");
        assert!(matches!(
            sample(Region::OmegaDelta(100.0), 1, 1),
            Err(Error::Region { .. })
        ));
        assert!(sample(Region::Omega, 0, 1).is_err());
        assert_eq!(sample(Region::Omega, 5, 9).unwrap(), sample(Region::Omega, 5, 9).unwrap());
    }

    #[test]
    fn region_parsing() {
        assert_eq!("omega".parse::<Region>().unwrap(), Region::Omega);
        assert_eq!("omega-zero".parse::<Region>().unwrap(), Region::OmegaZero);
        assert_eq!("omega-delta:0.25".parse::<Region>().unwrap(), Region::OmegaDelta(0.25));
        assert!("omega-delta:-1".parse::<Region>().is_err());
        assert!("plane".parse::<Region>().is_err());
    }

    #[test]
    fn kahler_pattern_z() {
        for lambda in [0.1, 1.0, 3.7, 250.0] {
            let z = Spectrum::kahler(lambda).invariants().z.unwrap();
            assert!((z - Z_MAX).abs() <= 1e-14, "{lambda}: {z}");
            let z = Spectrum::kahler(-lambda).invariants().z.unwrap();
            assert!((z + Z_MAX).abs() <= 1e-14);
        }
    }
}
