//! Randomized checks of the gradient and Laplacian identities for the
//! eigenvalues of `W+` and for the invariants `x`, `y`.
//!
//! The three vectors `U = (i_a w3)#`, `V = (i_b w1)#`, `W = (i_c w2)#` enter
//! only through their Gram matrix, so every vector below is a coefficient
//! triple in the basis `(U, V, W)` and norms are taken with that Gram matrix.
//! With `X = (l1 - l2) U`, `Y = (l2 - l3) V`, `Z = (l3 - l1) W` the eigenvalue
//! gradients are `grad l1 = Z - X`, `grad l2 = X - Y`, `grad l3 = Y - Z`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::profile::thm13_identity_residual;
use crate::error::{Error, Result};
use crate::jet::{compose_univariate, Jet1, Jet2};
use crate::pdi::{self, PdiContext, VectorTriple};
use crate::spectrum::{self, Region, SampleRange, Spectrum, Z_MAX};

/// Eigenvalue gaps below this are rejected by [`LaplacianInputs::new`].
pub const GAP_FLOOR: f64 = 1e-6;

/// An absolute residual with the magnitude of the largest term it was
/// assembled from.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    /// `value / scale`, or `value` itself when the scale vanishes.
    pub fn normalized(&self) -> f64 {
        if self.scale > 0.0 {
            self.value / self.scale
        } else {
            self.value
        }
    }

    fn of(lhs: f64, rhs: f64, terms: &[f64]) -> Self {
        Self {
            value: (lhs - rhs).abs(),
            scale: terms.iter().fold(0.0f64, |m, t| m.max(t.abs())),
        }
    }
}

/// Gram data of `U, V, W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbstractVectorData {
    pub u2: f64,
    pub v2: f64,
    pub w2: f64,
    pub uv: f64,
    pub uw: f64,
    pub vw: f64,
}

impl AbstractVectorData {
    /// Validates positive semidefiniteness of the Gram matrix.
    pub fn new(u2: f64, v2: f64, w2: f64, uv: f64, uw: f64, vw: f64) -> Result<Self> {
        let d = Self { u2, v2, w2, uv, uw, vw };
        VectorTriple::from_gram(d.gram())?;
        Ok(d)
    }

    pub fn from_triple(t: &VectorTriple) -> Self {
        let g = t.gram();
        Self {
            u2: g[0][0],
            v2: g[1][1],
            w2: g[2][2],
            uv: g[0][1],
            uw: g[0][2],
            vw: g[1][2],
        }
    }

    pub fn orthonormal() -> Self {
        Self::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap()
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap()
    }

    pub fn gram(&self) -> [[f64; 3]; 3] {
        [
            [self.u2, self.uv, self.uw],
            [self.uv, self.v2, self.vw],
            [self.uw, self.vw, self.w2],
        ]
    }

    fn is_zero(&self) -> bool {
        self.gram().iter().flatten().all(|&g| g == 0.0)
    }

    fn dot(&self, a: [f64; 3], b: [f64; 3]) -> f64 {
        let g = self.gram();
        (0..3).map(|i| (0..3).map(|k| a[i] * g[i][k] * b[k]).sum::<f64>()).sum()
    }

    fn norm(&self, a: [f64; 3]) -> f64 {
        self.dot(a, a).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacianInputs {
    pub s: Spectrum,
    pub avd: AbstractVectorData,
    pub r: f64,
}

impl LaplacianInputs {
    /// Rejects spectra with an eigenvalue gap below [`GAP_FLOOR`] unless all
    /// vectors vanish.
    pub fn new(s: Spectrum, avd: AbstractVectorData, r: f64) -> Result<Self> {
        if !avd.is_zero() && s.min_gap() < GAP_FLOOR {
            return Err(Error::Gap {
                gap: s.min_gap(),
                floor: GAP_FLOOR,
            });
        }
        if !r.is_finite() {
            return Err(Error::InvalidInput(format!("R = {r} must be finite")));
        }
        Ok(Self { s, avd, r })
    }

    fn lambdas(&self) -> (f64, f64, f64) {
        (self.s.l1(), self.s.l2(), self.s.l3())
    }

    /// `X, Y, Z` as coefficient triples.
    fn xyz(&self) -> [[f64; 3]; 3] {
        let (l1, l2, l3) = self.lambdas();
        [[l1 - l2, 0.0, 0.0], [0.0, l2 - l3, 0.0], [0.0, 0.0, l3 - l1]]
    }

    /// `grad l1, grad l2, grad l3` from the eigenvalue display.
    fn grad_lambda(&self) -> [[f64; 3]; 3] {
        let (l1, l2, l3) = self.lambdas();
        [
            [l2 - l1, 0.0, l3 - l1],
            [l1 - l2, l3 - l2, 0.0],
            [0.0, l2 - l3, l1 - l3],
        ]
    }

    /// `Delta l1, Delta l2, Delta l3` as lists of terms.
    fn lap_lambda_terms(&self) -> [[f64; 5]; 3] {
        let (l1, l2, l3) = self.lambdas();
        let a = &self.avd;
        let r = self.r;
        [
            [2.0 * (l1 - l2) * a.u2, 2.0 * (l1 - l3) * a.w2, r / 2.0 * l1, -2.0 * l1 * l1, -4.0 * l2 * l3],
            [2.0 * (l2 - l1) * a.u2, 2.0 * (l2 - l3) * a.v2, r / 2.0 * l2, -2.0 * l2 * l2, -4.0 * l1 * l3],
            [2.0 * (l3 - l1) * a.w2, 2.0 * (l3 - l2) * a.v2, r / 2.0 * l3, -2.0 * l3 * l3, -4.0 * l1 * l2],
        ]
    }

    /// `|X|^2, |Y|^2, |Z|^2, <X,Y>, <X,Z>, <Y,Z>`.
    fn xyz_gram(&self) -> [f64; 6] {
        let [x, y, z] = self.xyz();
        let a = &self.avd;
        [a.dot(x, x), a.dot(y, y), a.dot(z, z), a.dot(x, y), a.dot(x, z), a.dot(y, z)]
    }
}

fn combo(terms: &[(f64, [f64; 3])]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (c, v) in terms {
        for i in 0..3 {
            out[i] += c * v[i];
        }
    }
    out
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn gram_residual(avd: &AbstractVectorData, lhs: &[(f64, [f64; 3])], rhs: &[(f64, [f64; 3])]) -> Residual {
    let d = sub(combo(lhs), combo(rhs));
    let scale = lhs
        .iter()
        .chain(rhs)
        .map(|(c, v)| avd.norm([c * v[0], c * v[1], c * v[2]]))
        .fold(0.0, f64::max);
    Residual {
        value: avd.norm(d),
        scale,
    }
}

/// Gradient identities: `grad x = 2 sum l_i grad l_i` and
/// `grad y = sum l_j l_k grad l_i` against the closed forms in `X, Y, Z`.
/// Returns the larger of the two residuals (by normalized value).
pub fn check_gradients(inp: &LaplacianInputs) -> Residual {
    let (l1, l2, l3) = inp.lambdas();
    let [g1, g2, g3] = inp.grad_lambda();
    let [x, y, z] = inp.xyz();
    let rx = gram_residual(
        &inp.avd,
        &[(2.0 * l1, g1), (2.0 * l2, g2), (2.0 * l3, g3)],
        &[(-2.0 * (l1 - l2), x), (-2.0 * (l2 - l3), y), (-2.0 * (l3 - l1), z)],
    );
    let ry = gram_residual(
        &inp.avd,
        &[(l2 * l3, g1), (l1 * l3, g2), (l1 * l2, g3)],
        &[(l3 * (l1 - l2), x), (l1 * (l2 - l3), y), (l2 * (l3 - l1), z)],
    );
    if rx.normalized() >= ry.normalized() {
        rx
    } else {
        ry
    }
}

/// `sum grad l_i`, which vanishes because the spectrum is traceless.
pub fn gradient_sum(inp: &LaplacianInputs) -> Residual {
    let [g1, g2, g3] = inp.grad_lambda();
    gram_residual(&inp.avd, &[(1.0, g1), (1.0, g2), (1.0, g3)], &[])
}

/// Laplacian identities for `x` and `y`, assembled from the eigenvalue
/// Laplacians and gradients, against the closed forms.
pub fn check_laplacians(inp: &LaplacianInputs) -> (Residual, Residual) {
    let (l1, l2, l3) = inp.lambdas();
    let l = [l1, l2, l3];
    let p = inp.s.invariants();
    let (x, y, r) = (p.x, p.y, inp.r);
    let g = inp.grad_lambda();
    let lap = inp.lap_lambda_terms();
    let [xx, yy, zz, xy, xz, yz] = inp.xyz_gram();

    let mut terms_x = Vec::with_capacity(24);
    for i in 0..3 {
        terms_x.extend(lap[i].iter().map(|t| 2.0 * l[i] * t));
        terms_x.push(2.0 * inp.avd.dot(g[i], g[i]));
    }
    let closed_x = [
        8.0 * xx,
        8.0 * yy,
        8.0 * zz,
        -4.0 * xy,
        -4.0 * xz,
        -4.0 * yz,
        r * x,
        -36.0 * y,
    ];
    let mut all = terms_x.clone();
    all.extend_from_slice(&closed_x);
    let res_x = Residual::of(terms_x.iter().sum(), closed_x.iter().sum(), &all);

    let cof = [l2 * l3, l1 * l3, l1 * l2];
    let mut terms_y = Vec::with_capacity(24);
    for i in 0..3 {
        terms_y.extend(lap[i].iter().map(|t| cof[i] * t));
    }
    for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
        terms_y.push(2.0 * l[k] * inp.avd.dot(g[i], g[j]));
    }
    let closed_y = [
        -4.0 * l3 * xx,
        -4.0 * l1 * yy,
        -4.0 * l2 * zz,
        -4.0 * l2 * xy,
        -4.0 * l1 * xz,
        -4.0 * l3 * yz,
        1.5 * r * y,
        -x * x,
    ];
    let mut all = terms_y.clone();
    all.extend_from_slice(&closed_y);
    let res_y = Residual::of(terms_y.iter().sum(), closed_y.iter().sum(), &all);
    (res_x, res_y)
}

/// Curvature part of the Laplacian of `x`: `sum 2 l_i (R l_i / 2 - 2 l_i^2 -
/// 4 l_j l_k)` against `R x - 36 y`.
pub fn weitzenbock_consistency(inp: &LaplacianInputs) -> Residual {
    let (l1, l2, l3) = inp.lambdas();
    let r = inp.r;
    let p = inp.s.invariants();
    let terms: Vec<f64> = [(l1, l2 * l3), (l2, l1 * l3), (l3, l1 * l2)]
        .iter()
        .flat_map(|&(li, ljk)| [r * li * li, -4.0 * li * li * li, -8.0 * li * ljk])
        .collect();
    let rhs = [r * p.x, -36.0 * p.y];
    let mut all = terms.clone();
    all.extend_from_slice(&rhs);
    Residual::of(terms.iter().sum(), rhs.iter().sum(), &all)
}

/// Largest normalized `|I4|` for `f = x^{1/6} h(z)` at seeded interior
/// points of `Omega`, `h` given by polynomial coefficients in increasing degree.
pub fn check_i4_vanishing(h_coeffs: &[f64], points: usize, seed: u64) -> Result<f64> {
    if h_coeffs.is_empty() {
        return Err(Error::InvalidInput("h needs at least one coefficient".into()));
    }
    let range = SampleRange {
        z_fraction: 0.999,
        ..SampleRange::default()
    };
    let pts = spectrum::sample_in(Region::Omega, range, points, seed)?;
    let res = pts
        .par_iter()
        .map(|s| {
            let p = s.invariants();
            let z = p.y / p.x.powf(1.5);
            let zj = Jet2::var_y(p.y) * Jet2::var_x(p.x).powf(-1.5)?;
            let f = Jet2::var_x(p.x).powf(1.0 / 6.0)? * compose_univariate(Jet1::poly(h_coeffs, z), zj);
            let t = pdi::closed_form_terms(p.x, p.y, &f, PdiContext { r: 0.0 })?;
            Ok(Residual {
                value: t.i4.value.abs(),
                scale: t.i4.scale,
            }
            .normalized())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(res.into_iter().fold(0.0, f64::max))
}

/// Draws a random Gram matrix of three vectors in `R^4` and a random spectrum
/// with gaps above the floor.
pub fn random_inputs(count: usize, seed: u64) -> Result<Vec<LaplacianInputs>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spectra = spectrum::sample(Region::Omega, count * 2 + 16, seed ^ 0x5eed)?;
    let mut spectra = spectra.into_iter().filter(|s| s.min_gap() >= GAP_FLOOR);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut v = [[0.0; 4]; 3];
        for row in v.iter_mut() {
            for c in row.iter_mut() {
                *c = rng.gen_range(-1.0..1.0);
            }
        }
        let avd = AbstractVectorData::from_triple(&VectorTriple::from_vectors(&v));
        let s = spectra
            .next()
            .ok_or_else(|| Error::Consistency("ran out of non-degenerate spectra".into()))?;
        let r = rng.gen_range(-10.0..10.0);
        // Every tenth input uses zero vectors to exercise the limit-free case.
        let avd = if i % 10 == 9 { AbstractVectorData::zero() } else { avd };
        out.push(LaplacianInputs::new(s, avd, r)?);
    }
    Ok(out)
}

/// Maximum normalized residual of each identity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IdentitySummary {
    pub gradients: f64,
    pub gradient_sum: f64,
    pub laplacian_x: f64,
    pub laplacian_y: f64,
    pub weitzenbock: f64,
    pub discriminant: f64,
    pub bracket_identity: f64,
}

impl IdentitySummary {
    pub fn entries(&self) -> [(&'static str, f64); 7] {
        [
            ("gradients", self.gradients),
            ("gradient_sum", self.gradient_sum),
            ("laplacian_x", self.laplacian_x),
            ("laplacian_y", self.laplacian_y),
            ("weitzenbock", self.weitzenbock),
            ("discriminant", self.discriminant),
            ("bracket_identity", self.bracket_identity),
        ]
    }

    pub fn max(&self) -> f64 {
        self.entries().iter().map(|e| e.1).fold(0.0, f64::max)
    }

    fn merge(self, o: Self) -> Self {
        Self {
            gradients: self.gradients.max(o.gradients),
            gradient_sum: self.gradient_sum.max(o.gradient_sum),
            laplacian_x: self.laplacian_x.max(o.laplacian_x),
            laplacian_y: self.laplacian_y.max(o.laplacian_y),
            weitzenbock: self.weitzenbock.max(o.weitzenbock),
            discriminant: self.discriminant.max(o.discriminant),
            bracket_identity: self.bracket_identity.max(o.bracket_identity),
        }
    }
}

/// Runs every identity on `samples` seeded inputs.
pub fn identity_suite(samples: usize, seed: u64) -> Result<IdentitySummary> {
    let inputs = random_inputs(samples, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let phis: Vec<(f64, f64, f64)> = (0..samples)
        .map(|_| (rng.gen_range(0.0..Z_MAX), rng.gen_range(-20.0..5.0), rng.gen_range(-100.0..100.0)))
        .collect();
    let per: Vec<IdentitySummary> = inputs
        .par_iter()
        .zip(phis.par_iter())
        .map(|(inp, &(z, phi, phip))| {
            let (lx, ly) = check_laplacians(inp);
            let x3 = inp.s.invariants().x.powi(3);
            IdentitySummary {
                gradients: check_gradients(inp).normalized(),
                gradient_sum: gradient_sum(inp).value,
                laplacian_x: lx.normalized(),
                laplacian_y: ly.normalized(),
                weitzenbock: weitzenbock_consistency(inp).normalized(),
                discriminant: inp.s.discriminant_identity() / x3.max(1.0),
                bracket_identity: thm13_identity_residual(z, phi, phip).normalized(),
            }
        })
        .collect();
    Ok(per.into_iter().fold(IdentitySummary::default(), IdentitySummary::merge))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(a: f64, b: f64, c: f64, avd: AbstractVectorData, r: f64) -> LaplacianInputs {
        LaplacianInputs::new(Spectrum::from_eigenvalues(a, b, c).unwrap(), avd, r).unwrap()
    }

    #[test]
    fn orthonormal_examples() {
        let inp = inputs(-1.0, 0.0, 1.0, AbstractVectorData::orthonormal(), 2.0);
        assert!(check_gradients(&inp).value <= 1e-12);
        let (rx, ry) = check_laplacians(&inp);
        assert!(rx.value <= 1e-12 && ry.value <= 1e-12, "{rx:?} {ry:?}");
        assert_eq!(gradient_sum(&inp).value, 0.0);
    }

    #[test]
    fn zero_vectors() {
        for (a, b, c) in [(-1.0, -1.0, 2.0), (-2.0, 0.5, 1.5), (0.0, 0.0, 0.0)] {
            let inp = inputs(a, b, c, AbstractVectorData::zero(), 3.0);
            assert_eq!(check_gradients(&inp).value, 0.0);
            let (rx, ry) = check_laplacians(&inp);
            assert!(rx.normalized() <= 1e-15 && ry.normalized() <= 1e-15);
        }
    }

    #[test]
    fn weitzenbock_examples() {
        let inp = inputs(-1.0, -1.0, 2.0, AbstractVectorData::zero(), 1.0);
        assert_eq!(weitzenbock_consistency(&inp).value, 0.0);
        let p = inp.s.invariants();
        assert_eq!(inp.r * p.x - 36.0 * p.y, -66.0);
        let inp = inputs(0.0, 0.0, 0.0, AbstractVectorData::zero(), 1.0);
        assert_eq!(weitzenbock_consistency(&inp).value, 0.0);
    }

    #[test]
    fn validation() {
        assert!(AbstractVectorData::new(1.0, 1.0, 1.0, 2.0, 0.0, 0.0).is_err());
        let s = Spectrum::from_eigenvalues(-1.0, 0.5, 0.5).unwrap();
        assert!(matches!(
            LaplacianInputs::new(s, AbstractVectorData::orthonormal(), 0.0),
            Err(Error::Gap { .. })
        ));
        assert!(LaplacianInputs::new(s, AbstractVectorData::zero(), 0.0).is_ok());
    }

    #[test]
    fn suite_small() {
        let s = identity_suite(2000, 42).unwrap();
        for (name, v) in s.entries() {
            let tol = if name == "discriminant" { 1e-9 } else { 1e-10 };
            assert!(v <= tol, "{name}: {v}");
        }
        assert!(s.gradient_sum <= 1e-12);
    }

    #[test]
    fn i4_vanishes_for_homogeneous_variations() {
        assert!(check_i4_vanishing(&[1.0], 1000, 1).unwrap() <= 1e-10);
        assert!(check_i4_vanishing(&[1.0, 0.0, -54.0], 1000, 2).unwrap() <= 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for deg in [5, 8] {
            let h: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let v = check_i4_vanishing(&h, 1000, 4).unwrap();
            assert!(v <= 1e-9, "{deg}: {v}");
        }
    }

    #[test]
    fn rotation_invariance() {
        // Rotating the vectors leaves the Gram matrix, hence the residual inputs, unchanged.
        let v = [[0.3, -0.2, 0.9, 0.1], [0.5, 0.4, -0.1, 0.7], [-0.6, 0.2, 0.3, 0.2]];
        let (c, s) = (0.6f64, 0.8f64);
        let rot = v.map(|r| [c * r[0] - s * r[1], s * r[0] + c * r[1], r[2], r[3]]);
        let a = AbstractVectorData::from_triple(&VectorTriple::from_vectors(&v));
        let b = AbstractVectorData::from_triple(&VectorTriple::from_vectors(&rot));
        let sp = Spectrum::from_eigenvalues(-1.2, 0.2, 1.0).unwrap();
        let ra = check_laplacians(&LaplacianInputs::new(sp, a, 1.0).unwrap());
        let rb = check_laplacians(&LaplacianInputs::new(sp, b, 1.0).unwrap());
        assert!((ra.0.scale - rb.0.scale).abs() <= 1e-12 * ra.0.scale);
        assert!(ra.0.normalized() <= 1e-14 && rb.0.normalized() <= 1e-14);
    }
}
