//! The Laplacian expansion of `f(x, y)` and its positivity system.
//!
//! [`coefficient_form`] evaluates the six coefficients `A..F` of the
//! quadratic form in the vector fields `X, Y, Z`, plus the curvature part
//! `II`. [`closed_form`] evaluates the four polynomial quantities `I1..I4`
//! directly from `(x, y)` and the jet of `f`. The two presentations agree up
//! to fixed positive constants, which [`equivalence_constants`] measures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::spectrum::{self, depressed_cubic_roots, Region, SampleRange, Spectrum};

/// Scalar curvature, the only parameter of the system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdiContext {
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QFormCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl QFormCoeffs {
    /// Symmetric matrix `[[A, D, E], [D, B, F], [E, F, C]]`.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        [
            [self.a, self.d, self.e],
            [self.d, self.b, self.f],
            [self.e, self.f, self.c],
        ]
    }

    pub fn diagonal_sum(&self) -> f64 {
        self.a + self.b + self.c
    }

    pub fn minor_sum(&self) -> f64 {
        let QFormCoeffs { a, b, c, d, e, f } = *self;
        a * b + a * c + b * c - d * d - e * e - f * f
    }

    pub fn determinant(&self) -> f64 {
        let QFormCoeffs { a, b, c, d, e, f } = *self;
        a * b * c - a * f * f - b * e * e - c * d * d + 2.0 * d * e * f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PdiValues {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
}

/// A sum of monomials together with the magnitude of its largest term.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TermSum {
    pub value: f64,
    pub scale: f64,
}

impl TermSum {
    fn of(terms: &[f64]) -> Self {
        Self {
            value: terms.iter().sum(),
            scale: terms.iter().fold(0.0, |m, t| m.max(t.abs())),
        }
    }
}

/// `I1..I4` with per-quantity term scales.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PdiTerms {
    pub i1: TermSum,
    pub i2: TermSum,
    pub i3: TermSum,
    pub i4: TermSum,
}

impl PdiTerms {
    pub fn values(&self) -> PdiValues {
        PdiValues {
            i1: self.i1.value,
            i2: self.i2.value,
            i3: self.i3.value,
            i4: self.i4.value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SylvesterMinors {
    pub i31: f64,
    pub i32: f64,
    pub i33: f64,
    pub i4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailReason {
    DiagonalSumNotPositive,
    MinorSumNotPositive,
    DeterminantNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SylvesterVerdict {
    PositiveSemidefinitePath,
    Fail(FailReason),
}

/// Three-way outcome of a sign condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Positivity {
    Strict,
    NonnegativeWithinTol,
    Violated,
}

/// Classifies `value` against `margin` with slack `tol * scale`.
pub fn classify(value: f64, scale: f64, margin: f64, tol: f64) -> Positivity {
    if value > margin {
        Positivity::Strict
    } else if value >= -tol * scale.max(f64::MIN_POSITIVE) {
        Positivity::NonnegativeWithinTol
    } else {
        Positivity::Violated
    }
}

/// Coefficients of `|X|^2, |Y|^2, |Z|^2` (A, B, C) and half-coefficients of
/// `<X,Y>, <X,Z>, <Y,Z>` (D, E, F), plus the curvature part `II`.
pub fn coefficient_form(s: &Spectrum, j: &Jet2, ctx: PdiContext) -> (QFormCoeffs, f64) {
    let [l1, l2, l3] = s.eigenvalues();
    let p = s.invariants();
    let (fx, fy, fxx, fxy, fyy) = (j.dx, j.dy, j.dxx, j.dxy, j.dyy);
    let diag = |li: f64, gap: f64| {
        8.0 * fx - 4.0 * li * fy + gap * gap * (4.0 * fxx + li * li * fyy - 4.0 * li * fxy)
    };
    let off = |lm: f64, prod: f64, gaps: f64| {
        -2.0 * fx - 2.0 * lm * fy + gaps * (4.0 * fxx + prod * fyy + 2.0 * lm * fxy)
    };
    let q = QFormCoeffs {
        a: diag(l3, l1 - l2),
        b: diag(l1, l2 - l3),
        c: diag(l2, l3 - l1),
        d: off(l2, l1 * l3, (l1 - l2) * (l2 - l3)),
        e: off(l1, l2 * l3, (l1 - l2) * (l3 - l1)),
        f: off(l3, l1 * l2, (l2 - l3) * (l3 - l1)),
    };
    (q, curvature_part(p.x, p.y, j, ctx))
}

/// `(R x - 36 y) f_x + (3/2 R y - x^2) f_y`.
pub fn curvature_part(x: f64, y: f64, j: &Jet2, ctx: PdiContext) -> f64 {
    (ctx.r * x - 36.0 * y) * j.dx + (1.5 * ctx.r * y - x * x) * j.dy
}

/// Absolute-value envelopes of `A..F`, used to normalize rounding.
fn coefficient_envelope(s: &Spectrum, j: &Jet2) -> QFormCoeffs {
    let [l1, l2, l3] = s.eigenvalues();
    let (fx, fy, fxx, fxy, fyy) = (j.dx.abs(), j.dy.abs(), j.dxx.abs(), j.dxy.abs(), j.dyy.abs());
    let diag = |li: f64, gap: f64| {
        8.0 * fx + 4.0 * li.abs() * fy + gap * gap * (4.0 * fxx + li * li * fyy + 4.0 * li.abs() * fxy)
    };
    let off = |lm: f64, prod: f64, gaps: f64| {
        2.0 * fx + 2.0 * lm.abs() * fy + gaps.abs() * (4.0 * fxx + prod.abs() * fyy + 2.0 * lm.abs() * fxy)
    };
    QFormCoeffs {
        a: diag(l3, l1 - l2),
        b: diag(l1, l2 - l3),
        c: diag(l2, l3 - l1),
        d: off(l2, l1 * l3, (l1 - l2) * (l2 - l3)),
        e: off(l1, l2 * l3, (l1 - l2) * (l3 - l1)),
        f: off(l3, l1 * l2, (l2 - l3) * (l3 - l1)),
    }
}

/// The four polynomial quantities of the system, expanded into monomials.
pub fn closed_form_terms(x: f64, y: f64, j: &Jet2, ctx: PdiContext) -> Result<PdiTerms> {
    if !spectrum::in_omega(x, y) {
        return Err(Error::Region {
            x,
            y,
            reason: "x^3 < 54 y^2".into(),
        });
    }
    let r = ctx.r;
    let (fx, fy, fxx, fxy, fyy) = (j.dx, j.dy, j.dxx, j.dxy, j.dyy);
    let (x2, x3, y2) = (x * x, x * x * x, y * y);
    let i1 = TermSum::of(&[r * x * fx, -36.0 * y * fx, 1.5 * r * y * fy, -x2 * fy]);
    let i2 = TermSum::of(&[24.0 * x * fxx, 72.0 * y * fxy, x2 * fyy, 48.0 * fx]);
    let i3 = TermSum::of(&[
        6.0 * x3 * fxx * fyy,
        -324.0 * y2 * fxx * fyy,
        -6.0 * x3 * fxy * fxy,
        324.0 * y2 * fxy * fxy,
        168.0 * x * fx * fxx,
        -288.0 * y * fy * fxx,
        504.0 * y * fx * fxy,
        -16.0 * x2 * fy * fxy,
        7.0 * x2 * fx * fyy,
        -12.0 * x * y * fy * fyy,
        180.0 * fx * fx,
        -12.0 * x * fy * fy,
    ]);
    let i4 = TermSum::of(&[
        6.0 * x3 * fxx * fyy * fx,
        -324.0 * y2 * fxx * fyy * fx,
        -6.0 * x3 * fxy * fxy * fx,
        324.0 * y2 * fxy * fxy * fx,
        120.0 * x * fx * fx * fxx,
        -288.0 * y * fx * fy * fxx,
        -4.0 * x2 * fy * fy * fxx,
        360.0 * y * fx * fx * fxy,
        -16.0 * x2 * fx * fy * fxy,
        -12.0 * x * y * fy * fy * fxy,
        5.0 * x2 * fx * fx * fyy,
        -12.0 * x * y * fx * fy * fyy,
        -9.0 * y2 * fy * fy * fyy,
        100.0 * fx * fx * fx,
        -14.0 * x * fx * fy * fy,
        -8.0 * y * fy * fy * fy,
    ]);
    Ok(PdiTerms { i1, i2, i3, i4 })
}

/// `I1..I4` at `(x, y)` for the jet `j`.
pub fn closed_form(x: f64, y: f64, j: &Jet2, ctx: PdiContext) -> Result<PdiValues> {
    Ok(closed_form_terms(x, y, j, ctx)?.values())
}

/// Sufficient positivity test: diagonal sum `> margin`, sum of 2x2 minors
/// `> margin`, determinant `>= 0`.
pub fn sylvester_reduce_with_margin(
    c: &QFormCoeffs,
    margin: f64,
) -> (SylvesterMinors, SylvesterVerdict) {
    let QFormCoeffs { a, b, c: cc, d, e, f } = *c;
    let minors = SylvesterMinors {
        i31: a * b - d * d,
        i32: a * cc - e * e,
        i33: b * cc - f * f,
        i4: c.determinant(),
    };
    let verdict = if c.diagonal_sum() <= margin {
        SylvesterVerdict::Fail(FailReason::DiagonalSumNotPositive)
    } else if minors.i31 + minors.i32 + minors.i33 <= margin {
        SylvesterVerdict::Fail(FailReason::MinorSumNotPositive)
    } else if minors.i4 < 0.0 {
        SylvesterVerdict::Fail(FailReason::DeterminantNegative)
    } else {
        SylvesterVerdict::PositiveSemidefinitePath
    };
    (minors, verdict)
}

pub fn sylvester_reduce(c: &QFormCoeffs) -> (SylvesterMinors, SylvesterVerdict) {
    sylvester_reduce_with_margin(c, 0.0)
}

/// Eigenvalues of a symmetric 3x3 matrix, ascending.
pub fn symmetric_eigenvalues(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let mean = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    let b = [
        [m[0][0] - mean, m[0][1], m[0][2]],
        [m[1][0], m[1][1] - mean, m[1][2]],
        [m[2][0], m[2][1], m[2][2] - mean],
    ];
    let tr_b2: f64 = (0..3)
        .flat_map(|i| (0..3).map(move |k| (i, k)))
        .map(|(i, k)| b[i][k] * b[k][i])
        .sum();
    let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    depressed_cubic_roots(-0.5 * tr_b2, -det).map(|r| r + mean)
}

/// Gram data of three tangent vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VectorTriple {
    gram: [[f64; 3]; 3],
}

/// Relative eigenvalue floor for Gram validation.
pub const GRAM_FLOOR: f64 = 1e-10;

impl VectorTriple {
    /// Validates symmetry and positive semidefiniteness
    /// (smallest eigenvalue `>= -1e-10 * trace`).
    pub fn from_gram(gram: [[f64; 3]; 3]) -> Result<Self> {
        for i in 0..3 {
            for k in 0..i {
                if gram[i][k] != gram[k][i] {
                    return Err(Error::InvalidInput("Gram matrix is not symmetric".into()));
                }
            }
        }
        let trace = gram[0][0] + gram[1][1] + gram[2][2];
        let min = symmetric_eigenvalues(&gram)[0];
        if !(min >= -GRAM_FLOOR * trace.max(0.0)) {
            return Err(Error::Gram { min_eigenvalue: min });
        }
        Ok(Self { gram })
    }

    /// Gram matrix of three explicit vectors in `R^n`.
    pub fn from_vectors<const N: usize>(v: &[[f64; N]; 3]) -> Self {
        let mut gram = [[0.0; 3]; 3];
        for i in 0..3 {
            for k in 0..3 {
                gram[i][k] = (0..N).map(|t| v[i][t] * v[k][t]).sum();
            }
        }
        Self { gram }
    }

    pub fn gram(&self) -> &[[f64; 3]; 3] {
        &self.gram
    }
}

/// `A|X|^2 + B|Y|^2 + C|Z|^2 + 2D<X,Y> + 2E<X,Z> + 2F<Y,Z>`.
pub fn quadratic_form_value(c: &QFormCoeffs, vt: &VectorTriple) -> f64 {
    let g = vt.gram;
    c.a * g[0][0]
        + c.b * g[1][1]
        + c.c * g[2][2]
        + 2.0 * (c.d * g[0][1] + c.e * g[0][2] + c.f * g[1][2])
}

/// Fitted proportionality constants between the closed-form quantities and
/// the coefficient combinations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceConstants {
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// Largest normalized deviation from `closed = c * coefficient` over
    /// the samples, across all three relations.
    pub max_rel_dev: f64,
    /// Largest normalized deviation between `I1` and `II`.
    pub i1_dev: f64,
}

/// Threshold above which [`equivalence_constants`] reports inconsistency.
pub const EQUIVALENCE_TOL: f64 = 1e-8;

struct PairSample {
    closed: [TermSum; 3],
    coef: [TermSum; 3],
    i1_dev: f64,
}

fn pair_sample(s: &Spectrum, j: &Jet2, ctx: PdiContext) -> Result<PairSample> {
    let p = s.invariants();
    let terms = closed_form_terms(p.x, p.y, j, ctx)?;
    let (q, ii) = coefficient_form(s, j, ctx);
    let env = coefficient_envelope(s, j);
    let coef = [
        TermSum {
            value: q.diagonal_sum(),
            scale: env.diagonal_sum(),
        },
        TermSum {
            value: q.minor_sum(),
            scale: env.a * env.b + env.a * env.c + env.b * env.c
                + env.d * env.d + env.e * env.e + env.f * env.f,
        },
        TermSum {
            value: q.determinant(),
            scale: env.a * env.b * env.c
                + env.a * env.f * env.f + env.b * env.e * env.e + env.c * env.d * env.d
                + 2.0 * env.d * env.e * env.f,
        },
    ];
    let i1_dev = (terms.i1.value - ii).abs() / terms.i1.scale.max(f64::MIN_POSITIVE);
    Ok(PairSample {
        closed: [terms.i2, terms.i3, terms.i4],
        coef,
        i1_dev: if terms.i1.scale == 0.0 { 0.0 } else { i1_dev },
    })
}

/// Seeded spectra over `Omega` (one in ten on the repeated-eigenvalue
/// boundary) paired with random jets.
pub fn random_pairs(samples: usize, seed: u64) -> Result<Vec<(Spectrum, Jet2)>> {
    let spectra = spectrum::sample_in(Region::Omega, SampleRange::default(), samples, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    Ok(spectra
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let s = if i % 10 == 9 {
                Spectrum::kahler(s.l3().max(-s.l1()) * if s.invariants().y >= 0.0 { 0.5 } else { -0.5 })
            } else {
                s
            };
            let mut u = || rng.gen_range(-1.0..=1.0);
            let j = Jet2 {
                v: u(),
                dx: u(),
                dy: u(),
                dxx: u(),
                dxy: u(),
                dyy: u(),
            };
            (s, j)
        })
        .collect())
}

/// Fits `I2 = c2 (A+B+C)`, `I3 = c3 (AB+AC+BC-D^2-E^2-F^2)` and
/// `I4 = c4 (ABC - AF^2 - BE^2 - CD^2 + 2DEF)` over seeded samples.
pub fn equivalence_constants(samples: usize, seed: u64, ctx: PdiContext) -> Result<EquivalenceConstants> {
    if samples < 100 {
        return Err(Error::InvalidInput("equivalence_constants needs at least 100 samples".into()));
    }
    let pairs = random_pairs(samples, seed)?;
    equivalence_constants_on(&pairs, ctx)
}

/// [`equivalence_constants`] on caller-supplied samples.
pub fn equivalence_constants_on(pairs: &[(Spectrum, Jet2)], ctx: PdiContext) -> Result<EquivalenceConstants> {
    let data: Vec<PairSample> = pairs
        .par_iter()
        .map(|(s, j)| pair_sample(s, j, ctx))
        .collect::<Result<_>>()?;
    let mut consts = [0.0; 3];
    for (k, c) in consts.iter_mut().enumerate() {
        let (mut num, mut den) = (0.0, 0.0);
        for d in &data {
            let w = d.closed[k].scale.max(d.coef[k].scale);
            if w == 0.0 {
                continue;
            }
            num += d.closed[k].value * d.coef[k].value / (w * w);
            den += d.coef[k].value * d.coef[k].value / (w * w);
        }
        *c = if den > 0.0 { num / den } else { f64::NAN };
    }
    let mut max_rel_dev = 0.0f64;
    let mut i1_dev = 0.0f64;
    for d in &data {
        for k in 0..3 {
            let scale = d.closed[k].scale.max(consts[k].abs() * d.coef[k].scale);
            if scale > 0.0 {
                let dev = (d.closed[k].value - consts[k] * d.coef[k].value).abs() / scale;
                max_rel_dev = max_rel_dev.max(dev);
            }
        }
        i1_dev = i1_dev.max(d.i1_dev);
    }
    let out = EquivalenceConstants {
        c2: consts[0],
        c3: consts[1],
        c4: consts[2],
        max_rel_dev,
        i1_dev,
    };
    if !(max_rel_dev <= EQUIVALENCE_TOL) {
        return Err(Error::Consistency(format!(
            "no global constants: {out:?}"
        )));
    }
    Ok(out)
}
