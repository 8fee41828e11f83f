//! The constrained Abel inequality
//!
//! ```text
//! 3 (1 - 54 z^2)(1 - 9 z psi) psi' - 27 z psi^3 - 9 (1 + 54 z^2) psi^2
//!     + 270 z psi - 8 (1 + 54 z^2) >= 0,        psi <= 0,
//! ```
//!
//! on `[0, 1/(3 sqrt 6))`, and the profile `h` recovered from
//! `h'/h = phi / (1 - 54 z^2)` with `phi = psi - 6 z`, `h(0) = 1`.
//!
//! The solver tracks the equality ODE while its right-hand side numerator is
//! positive. Once the numerator reaches zero every nondecreasing `psi` with
//! `N <= 0` satisfies the inequality, and the solution is continued by a
//! monotone cubic Hermite segment that reaches `-3 sqrt 6` at the endpoint.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, Options, Termination};
use crate::report::VerificationReport;
use crate::spectrum::Z_MAX;

/// `3 sqrt 6`, the target value `-psi(1/(3 sqrt 6))`.
pub const THREE_SQRT6: f64 = 7.348_469_228_349_534;
/// `6 sqrt 6`, the initial value `-psi(0)`.
pub const SIX_SQRT6: f64 = 14.696_938_456_699_067;

/// Denominators below this are treated as the endpoint singularity.
pub const SINGULAR_TOL: f64 = 1e-14;
/// Default relative tolerance of [`abel_verify`], applied to the largest
/// `|N| + |D psi'|` on the refinement.
pub const VERIFY_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbelRhs {
    pub slope: f64,
    pub numerator: f64,
    pub denominator: f64,
}

/// Numerator of the equality ODE.
pub fn abel_numerator(z: f64, psi: f64) -> f64 {
    let s = 1.0 + 54.0 * z * z;
    ((27.0 * z * psi + 9.0 * s) * psi - 270.0 * z) * psi + 8.0 * s
}

/// Coefficient of `psi'`.
pub fn abel_denominator(z: f64, psi: f64) -> f64 {
    3.0 * (1.0 - 54.0 * z * z) * (1.0 - 9.0 * z * psi)
}

/// The equality ODE `psi' = N / D`.
pub fn abel_rhs(z: f64, psi: f64) -> Result<AbelRhs> {
    let numerator = abel_numerator(z, psi);
    let denominator = abel_denominator(z, psi);
    if denominator.abs() < SINGULAR_TOL {
        return Err(Error::SingularPoint { z, numerator });
    }
    Ok(AbelRhs {
        slope: numerator / denominator,
        numerator,
        denominator,
    })
}

/// Exact rational `num / den` used for spot values of the numerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: i128,
    pub den: i128,
}

impl Ratio {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i128;
        let s = if den < 0 { -1 } else { 1 };
        Self {
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn int(n: i128) -> Self {
        Self { num: n, den: 1 }
    }

    fn add(self, o: Self) -> Self {
        Self::new(self.num * o.den + o.num * self.den, self.den * o.den)
    }

    fn mul(self, o: Self) -> Self {
        Self::new(self.num * o.num, self.den * o.den)
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// The numerator written through the products `z psi`, `z^2` and `psi^2`,
/// which are rational at the points of interest even when `z` and `psi`
/// are not: `27 (z psi) psi^2 + 9 (1 + 54 z^2) psi^2 - 270 (z psi) + 8 (1 + 54 z^2)`.
pub fn abel_numerator_exact(zpsi: Ratio, z2: Ratio, psi2: Ratio) -> Ratio {
    let s = Ratio::int(1).add(Ratio::int(54).mul(z2));
    Ratio::int(27)
        .mul(zpsi)
        .mul(psi2)
        .add(Ratio::int(9).mul(s).mul(psi2))
        .add(Ratio::int(-270).mul(zpsi))
        .add(Ratio::int(8).mul(s))
}

/// Left-hand side of the inequality, `D psi' - N`.
pub fn eq3_lhs(z: f64, psi: f64, dpsi: f64) -> f64 {
    abel_denominator(z, psi) * dpsi - abel_numerator(z, psi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AbelMode {
    EqualityTracking,
    SlackContinuation,
}

impl AbelMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AbelMode::EqualityTracking => "equality",
            AbelMode::SlackContinuation => "slack",
        }
    }
}

impl FromStr for AbelMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equality" => Ok(AbelMode::EqualityTracking),
            "slack" => Ok(AbelMode::SlackContinuation),
            _ => Err(Error::InvalidInput(format!("unknown mode `{s}`"))),
        }
    }
}

/// One grid node of a solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbelState {
    pub z: f64,
    pub psi: f64,
    pub slack: f64,
    pub mode: AbelMode,
}

/// A gridded solution (or candidate) of the inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelSolution {
    pub grid: Vec<f64>,
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
    pub h: Vec<f64>,
    pub slack: Vec<f64>,
    pub mode: Vec<AbelMode>,
    /// Extrapolated `psi(1/(3 sqrt 6))`.
    pub endpoint_estimate: f64,
    pub monotone: bool,
    /// Where equality tracking handed over to the continuation, if it did.
    pub switch_z: Option<f64>,
}

/// Cubic Hermite value and derivative on `[z0, z1]`.
fn hermite(z0: f64, z1: f64, p0: f64, p1: f64, m0: f64, m1: f64, z: f64) -> (f64, f64) {
    let dz = z1 - z0;
    let t = (z - z0) / dz;
    let (t2, t3) = (t * t, t * t * t);
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * p0
        + (t3 - 2.0 * t2 + t) * dz * m0
        + (-2.0 * t3 + 3.0 * t2) * p1
        + (t3 - t2) * dz * m1;
    let d = (6.0 * t2 - 6.0 * t) / dz * (p0 - p1) + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (3.0 * t2 - 2.0 * t) * m1;
    (v, d)
}

/// Piecewise cubic Hermite interpolant through nodes with given slopes.
#[derive(Debug, Clone)]
struct Pchip {
    z: Vec<f64>,
    v: Vec<f64>,
    m: Vec<f64>,
}

impl Pchip {
    fn eval(&self, z: f64) -> (f64, f64) {
        let n = self.z.len();
        let i = match self.z.partition_point(|&t| t <= z) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        hermite(self.z[i], self.z[i + 1], self.v[i], self.v[i + 1], self.m[i], self.m[i + 1], z)
    }
}

/// Slack continuation from the switch point to the endpoint.
#[derive(Debug, Clone, Copy)]
struct Continuation {
    z0: f64,
    p0: f64,
    m0: f64,
    p1: f64,
    m1: f64,
}

impl Continuation {
    fn new(z0: f64, p0: f64, slope0: f64) -> Self {
        let p1 = p0.max(-THREE_SQRT6);
        let secant = (p1 - p0) / (Z_MAX - z0);
        // With m0 = 0 and m1 = secant the Fritsch–Carlson condition holds, so
        // the segment is monotone.
        let m0 = slope0.clamp(0.0, 3.0 * secant);
        Self { z0, p0, m0, p1, m1: secant }
    }

    fn eval(&self, z: f64) -> (f64, f64) {
        hermite(self.z0, Z_MAX, self.p0, self.p1, self.m0, self.m1, z)
    }
}

const GL8: [(f64, f64); 4] = [
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    r * GL8.iter().map(|&(x, w)| w * (f(c - r * x) + f(c + r * x))).sum::<f64>()
}

fn dlnh(z: f64, psi: f64) -> f64 {
    (psi - 6.0 * z) / (1.0 - 54.0 * z * z)
}

/// Endpoint distances of the continuation grid: 400 uniform steps, then 50
/// geometric steps per decade down to `eps_end`.
fn continuation_distances(d0: f64, eps_end: f64) -> Vec<f64> {
    let dg = d0 / 10.0;
    let mut out: Vec<f64> = (1..=400).map(|i| d0 - (d0 - dg) * i as f64 / 400.0).collect();
    let mut j = 1;
    loop {
        let d = dg * 10f64.powf(-(j as f64) / 50.0);
        if d <= eps_end {
            break;
        }
        out.push(d);
        j += 1;
    }
    out.retain(|&d| d > eps_end);
    out.push(eps_end);
    out
}

/// Richardson limit of `psi(Z_MAX - e)` from `e = 100 eps, 10 eps, eps`,
/// cancelling the linear and quadratic error terms.
fn richardson(psi_at: impl Fn(f64) -> f64, eps: f64) -> f64 {
    let (p1, p2, p3) = (psi_at(100.0 * eps), psi_at(10.0 * eps), psi_at(eps));
    let l1 = (10.0 * p2 - p1) / 9.0;
    let l2 = (10.0 * p3 - p2) / 9.0;
    (100.0 * l2 - l1) / 99.0
}

/// Solves the inequality from `psi(0) = psi0` up to `z_end = 1/(3 sqrt 6) - eps_end`.
///
/// `step_tol` bounds the admissible negative slack at grid nodes and sets
/// the integrator tolerances.
pub fn abel_solve(psi0: f64, step_tol: f64, eps_end: f64) -> Result<AbelSolution> {
    if !(psi0 <= 0.0) || !psi0.is_finite() {
        return Err(Error::InvalidInput(format!("psi0 = {psi0} must be finite and <= 0")));
    }
    if !(eps_end > 0.0 && eps_end < Z_MAX) {
        return Err(Error::InvalidInput(format!("eps_end = {eps_end} must lie in (0, 1/(3 sqrt 6))")));
    }
    if !(step_tol > 0.0) {
        return Err(Error::InvalidInput(format!("step_tol = {step_tol} must be positive")));
    }
    let z_end = Z_MAX - eps_end;
    let opts = Options {
        rtol: step_tol.clamp(1e-13, 1e-8),
        atol: step_tol.clamp(1e-13, 1e-8),
        h_init: 1e-6,
        h_max: 1e-4,
        ..Options::default()
    };
    let rhs = |z: f64, s: &[f64; 2]| -> Result<[f64; 2]> {
        if s[0] > 0.0 {
            return Err(Error::ConstraintViolation { z, psi: s[0] });
        }
        Ok([abel_rhs(z, s[0])?.slope, dlnh(z, s[0])])
    };
    let event = |z: f64, s: &[f64; 2]| abel_numerator(z, s[0]);

    // Phase 1: equality tracking, in segments ending at the extrapolation
    // points so that a run without a switch still has exact values there.
    let mut stops: Vec<f64> = [100.0, 10.0]
        .iter()
        .map(|f| Z_MAX - f * eps_end)
        .filter(|&s| s > 0.0)
        .collect();
    stops.push(z_end);
    let (mut z, mut state) = (0.0, [psi0, 0.0]);
    let mut zs = vec![0.0];
    let mut ys = vec![state];
    let mut h_init = opts.h_init;
    let mut switched = false;
    for &stop in &stops {
        let tr = ode::integrate(rhs, z, state, stop, &Options { h_init, ..opts }, Some(event))?;
        zs.extend_from_slice(&tr.t[1..]);
        ys.extend_from_slice(&tr.y[1..]);
        z = *zs.last().unwrap();
        state = *ys.last().unwrap();
        h_init = tr.last_step;
        if tr.termination == Termination::Event {
            switched = true;
            break;
        }
    }
    if let Some(i) = ys.iter().position(|s| s[0] > 0.0) {
        return Err(Error::ConstraintViolation { z: zs[i], psi: ys[i][0] });
    }

    let mut sol = AbelSolution {
        grid: Vec::new(),
        psi: Vec::new(),
        phi: Vec::new(),
        h: Vec::new(),
        slack: Vec::new(),
        mode: Vec::new(),
        endpoint_estimate: f64::NAN,
        monotone: true,
        switch_z: None,
    };
    let mut slopes = Vec::with_capacity(zs.len());
    for (&zi, s) in zs.iter().zip(&ys) {
        let r = abel_rhs(zi, s[0])?;
        // At the event node N <= 0; a zero slope is the admissible choice there.
        let slope = r.slope.max(0.0);
        slopes.push(slope);
        sol.push(zi, s[0], s[1].exp(), eq3_lhs(zi, s[0], slope), AbelMode::EqualityTracking);
    }
    let phase1 = Pchip {
        z: zs.clone(),
        v: ys.iter().map(|s| s[0]).collect(),
        m: slopes.clone(),
    };

    let psi_at: Box<dyn Fn(f64) -> f64> = if switched {
        let cont = Continuation::new(z, state[0], *slopes.last().unwrap());
        sol.switch_z = Some(z);
        let mut lnh = state[1];
        let mut prev = z;
        for d in continuation_distances(Z_MAX - z, eps_end) {
            let zi = Z_MAX - d;
            if zi <= prev {
                continue;
            }
            lnh += gauss_legendre(|t| dlnh(t, cont.eval(t).0), prev, zi);
            let (p, dp) = cont.eval(zi);
            sol.push(zi, p, lnh.exp(), eq3_lhs(zi, p, dp), AbelMode::SlackContinuation);
            prev = zi;
        }
        Box::new(move |t: f64| if t <= cont.z0 { phase1.eval(t).0 } else { cont.eval(t).0 })
    } else {
        Box::new(move |t: f64| phase1.eval(t).0)
    };

    sol.endpoint_estimate = if 100.0 * eps_end < Z_MAX {
        richardson(|e| psi_at(Z_MAX - e), eps_end)
    } else {
        *sol.psi.last().unwrap()
    };

    for i in 0..sol.grid.len() {
        if sol.psi[i] > 0.0 {
            return Err(Error::ConstraintViolation { z: sol.grid[i], psi: sol.psi[i] });
        }
        if i > 0 && sol.psi[i] < sol.psi[i - 1] {
            return Err(Error::MonotonicityFailure { z: sol.grid[i] });
        }
        if sol.slack[i] < -step_tol {
            return Err(Error::SlackViolation { z: sol.grid[i], slack: sol.slack[i] });
        }
    }
    Ok(sol)
}

impl AbelSolution {
    fn push(&mut self, z: f64, psi: f64, h: f64, slack: f64, mode: AbelMode) {
        self.grid.push(z);
        self.psi.push(psi);
        self.phi.push(psi - 6.0 * z);
        self.h.push(h);
        self.slack.push(slack);
        self.mode.push(mode);
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn states(&self) -> impl Iterator<Item = AbelState> + '_ {
        (0..self.len()).map(|i| AbelState {
            z: self.grid[i],
            psi: self.psi[i],
            slack: self.slack[i],
            mode: self.mode[i],
        })
    }

    pub fn min_slack(&self) -> f64 {
        self.slack.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn h_nonincreasing(&self) -> bool {
        self.h.windows(2).all(|w| w[1] <= w[0])
    }

    /// Least-squares slope of `ln h` against `ln(Z_MAX - z)` over the last
    /// decade of grid points.
    pub fn endpoint_exponent(&self) -> Option<f64> {
        let d_min = Z_MAX - *self.grid.last()?;
        let pts: Vec<(f64, f64)> = self
            .grid
            .iter()
            .zip(&self.h)
            .map(|(&z, &h)| (Z_MAX - z, h))
            .filter(|&(d, h)| d <= 10.0 * d_min * (1.0 + 1e-12) && h > 0.0)
            .map(|(d, h)| (d.ln(), h.ln()))
            .collect();
        if pts.len() < 3 {
            return None;
        }
        let n = pts.len() as f64;
        let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
        let (sxy, sxx) = pts
            .iter()
            .fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2)));
        Some(sxy / sxx)
    }

    /// Exponent predicted by the endpoint asymptotics, `-phi(z*) / (6 sqrt 6)`.
    pub fn predicted_exponent(&self) -> f64 {
        -(self.endpoint_estimate - 6.0 * Z_MAX) / SIX_SQRT6
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("z,psi,phi,h,slack,mode\n");
        for i in 0..self.len() {
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                self.grid[i],
                self.psi[i],
                self.phi[i],
                self.h[i],
                self.slack[i],
                self.mode[i].as_str()
            );
        }
        s
    }

    /// Parses the CSV form. The endpoint estimate becomes the last `psi`
    /// value; monotonicity is recomputed.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::InvalidInput("empty CSV".into()))?;
        if header.trim() != "z,psi,phi,h,slack,mode" {
            return Err(Error::InvalidInput(format!("unexpected CSV header `{header}`")));
        }
        let mut sol = AbelSolution {
            grid: Vec::new(),
            psi: Vec::new(),
            phi: Vec::new(),
            h: Vec::new(),
            slack: Vec::new(),
            mode: Vec::new(),
            endpoint_estimate: f64::NAN,
            monotone: true,
            switch_z: None,
        };
        for (n, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 6 {
                return Err(Error::InvalidInput(format!("CSV row {} has {} columns", n + 2, cols.len())));
            }
            let num = |k: usize| -> Result<f64> {
                cols[k]
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("CSV row {}: bad number `{}`", n + 2, cols[k])))
            };
            let mode: AbelMode = cols[5].parse()?;
            if mode == AbelMode::SlackContinuation && sol.switch_z.is_none() {
                sol.switch_z = sol.grid.last().copied();
            }
            sol.grid.push(num(0)?);
            sol.psi.push(num(1)?);
            sol.phi.push(num(2)?);
            sol.h.push(num(3)?);
            sol.slack.push(num(4)?);
            sol.mode.push(mode);
        }
        if sol.grid.len() < 2 {
            return Err(Error::InvalidInput("a candidate needs at least two rows".into()));
        }
        sol.endpoint_estimate = *sol.psi.last().unwrap();
        sol.monotone = sol.psi.windows(2).all(|w| w[1] >= w[0]);
        Ok(sol)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }

    /// A candidate with only `z` and `psi` filled in, for verification.
    pub fn candidate(grid: Vec<f64>, psi: Vec<f64>) -> Self {
        let n = grid.len();
        let phi = grid.iter().zip(&psi).map(|(z, p)| p - 6.0 * z).collect();
        let monotone = psi.windows(2).all(|w| w[1] >= w[0]);
        let endpoint_estimate = psi.last().copied().unwrap_or(f64::NAN);
        Self {
            grid,
            psi,
            phi,
            h: vec![f64::NAN; n],
            slack: vec![f64::NAN; n],
            mode: vec![AbelMode::EqualityTracking; n],
            endpoint_estimate,
            monotone,
            switch_z: None,
        }
    }
}

/// Derivative at `at` of the Lagrange polynomial through `(z[i], v[i])`.
fn lagrange_derivative(z: &[f64], v: &[f64], at: f64) -> f64 {
    let n = z.len();
    let mut d = 0.0;
    for i in 0..n {
        // l_i'(at) = l_i(at) * sum_{j != i} 1 / (at - z_j), expanded to avoid 0/0.
        let mut sum = 0.0;
        for m in 0..n {
            if m == i {
                continue;
            }
            let mut prod = 1.0 / (z[i] - z[m]);
            for j in 0..n {
                if j != i && j != m {
                    prod *= (at - z[j]) / (z[i] - z[j]);
                }
            }
            sum += prod;
        }
        d += v[i] * sum;
    }
    d
}

/// Derivative estimates at the nodes from Lagrange stencils of `width`
/// points centered where possible.
fn fd_slopes(z: &[f64], v: &[f64], width: usize) -> Vec<f64> {
    let n = z.len();
    let w = width.min(n);
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(w / 2).min(n - w);
            lagrange_derivative(&z[lo..lo + w], &v[lo..lo + w], z[i])
        })
        .collect()
}

/// Verifies a candidate independently of how it was produced, with the
/// default tolerance [`VERIFY_TOL`].
pub fn abel_verify(candidate: &AbelSolution, grid_n: usize) -> VerificationReport {
    abel_verify_with(candidate, grid_n, VERIFY_TOL)
}

/// Interpolates the candidate, refines it with `grid_n` uniform nodes and
/// re-evaluates the inequality with centered differences; checks `psi <= 0`,
/// monotonicity and `slack >= -tol * scale`, where `scale` is the largest
/// `|N| + |D psi'|` on the refinement.
pub fn abel_verify_with(candidate: &AbelSolution, grid_n: usize, tol: f64) -> VerificationReport {
    let start = Instant::now();
    let mut rep = VerificationReport::new("abel-verify", 0, grid_n as u64);
    rep.input("nodes", candidate.len()).input("grid_n", grid_n);
    let (z, v) = (&candidate.grid, &candidate.psi);
    if z.len() < 2 || z.len() != v.len() || z.windows(2).any(|w| !(w[1] > w[0])) {
        rep.fail("grid", [("nodes", z.len() as f64)]);
        rep.residual(f64::NAN);
        rep.finish(tol);
        return rep;
    }

    for i in 0..z.len() {
        if !(v[i] <= 0.0) {
            rep.fail(format!("psi > 0 at z = {}", z[i]), [("z", z[i]), ("psi", v[i])]);
        }
        if i > 0 && v[i] < v[i - 1] {
            rep.fail(format!("psi decreases at z = {}", z[i]), [("z", z[i]), ("dpsi", v[i] - v[i - 1])]);
        }
    }

    let interp = Pchip {
        z: z.clone(),
        v: v.clone(),
        m: fd_slopes(z, v, 5),
    };
    let (a, b) = (z[0], *z.last().unwrap());
    let mut rz: Vec<f64> = z.clone();
    rz.extend((0..grid_n).map(|i| a + (b - a) * i as f64 / (grid_n.max(2) - 1) as f64));
    rz.sort_by(f64::total_cmp);
    rz.dedup_by(|p, q| (*p - *q).abs() <= 1e-15 * q.abs().max(1e-3));
    let rv: Vec<f64> = rz.iter().map(|&t| interp.eval(t).0).collect();
    let n = rz.len();
    let slopes = fd_slopes(&rz, &rv, 3);

    let mut scale: f64 = 0.0;
    let mut slack = Vec::with_capacity(n);
    for i in 0..n {
        let (num, den) = (abel_numerator(rz[i], rv[i]), abel_denominator(rz[i], rv[i]));
        scale = scale.max(num.abs() + (den * slopes[i]).abs());
        slack.push(den * slopes[i] - num);
    }
    let scale = scale.max(1.0);
    for i in 0..n {
        let s = slack[i] / scale;
        rep.residual(s.min(0.0));
        if s < -tol {
            rep.fail(format!("slack < 0 at z = {}", rz[i]), [("z", rz[i]), ("slack", slack[i])]);
        }
    }
    rep.input("scale", scale);
    rep.finish(tol);
    rep.wall_time_ms = start.elapsed().as_millis() as u64;
    rep
}
