//! Command-line front end: runs the verification suites and writes
//! machine-readable reports.
//!
//! Exit codes: `0` all checks pass, `1` verification failure, `2` input or
//! parse error. Set `WEYLCERT_VERBOSE=1` to echo the JSON report on stderr.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use weylcert_core::certify::abel::{self, AbelSolution, SIX_SQRT6, VERIFY_TOL};
use weylcert_core::certify::{fk, kato};
use weylcert_core::identities::{check_i4_vanishing, identity_suite};
use weylcert_core::pdi::{self, classify, PdiContext, Positivity};
use weylcert_core::report::{emit_report, VerificationReport};
use weylcert_core::spectrum::{self, Region};
use weylcert_core::{parse, Error, Mode};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "weylcert", version, about = "Verification suites for subharmonic functions of W+ invariants")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Write the report as JSON to this path.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Override the suite's default tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gradient, Laplacian, bracket and discriminant identities, and I4 vanishing.
    Identities {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the positivity system for f(x, y) over sampled region points.
    PdiSweep {
        #[arg(long)]
        function: String,
        /// omega, omega-zero or omega-delta:D
        #[arg(long, default_value = "omega")]
        region: String,
        #[arg(long = "R", alias = "r", default_value_t = 0.0, allow_hyphen_values = true)]
        r: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Strictness margin for I2 and I3.
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Minimal k for x^(1/6) (1 - 54 z^2)^k and the closed-form cross-check.
    CertifyFk {
        #[arg(long, allow_hyphen_values = true)]
        delta1: f64,
        #[arg(long, allow_hyphen_values = true)]
        delta2: f64,
        #[arg(long, allow_hyphen_values = true)]
        rmin: f64,
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Solve the constrained Abel inequality and reconstruct h.
    Abel {
        #[arg(long, default_value_t = -SIX_SQRT6, allow_hyphen_values = true)]
        psi0: f64,
        #[arg(long, default_value_t = 1e-6)]
        eps_end: f64,
        #[arg(long, default_value_t = 1e-10)]
        step_tol: f64,
        /// Write the solution as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Refinement size for the independent re-verification.
        #[arg(long, default_value_t = 4000)]
        grid_n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Verify a CSV candidate against the Abel inequality.
    AbelVerify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 4000)]
        grid_n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Check Delta_D x^alpha >= 0 under the refined Kato inequality.
    Kato {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Run every suite with defaults and write one combined report.
    Report {
        #[arg(long)]
        json: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn verbosity() -> u32 {
    std::env::var("WEYLCERT_VERBOSE")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

/// Input-side errors map to exit code 2; everything else is a failed check.
fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. }
        | Error::Mode { .. }
        | Error::Exponent { .. }
        | Error::InvalidInput(_)
        | Error::Io(_)
        | Error::Region { .. }
        | Error::Trace { .. }
        | Error::Gram { .. } => EXIT_INPUT,
        _ => EXIT_FAIL,
    }
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
        }
    };
    let start = Instant::now();
    let (result, common) = dispatch(cli.cmd);
    match result {
        Ok(mut rep) => {
            rep.wall_time_ms = start.elapsed().as_millis() as u64;
            println!("{}", if rep.pass { "PASS" } else { "FAIL" });
            if verbosity() >= 1 {
                eprintln!("{}", rep.to_json());
            }
            if let Some(path) = common.json {
                if let Err(e) = emit_report(&rep, &path) {
                    eprintln!("error: {e}");
                    return EXIT_INPUT;
                }
            }
            if rep.pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn dispatch(cmd: Command) -> (weylcert_core::Result<VerificationReport>, Common) {
    match cmd {
        Command::Identities { samples, seed, common } => (identities(samples, seed, common.tol), common),
        Command::PdiSweep {
            function,
            region,
            r,
            samples,
            seed,
            margin,
            common,
        } => (pdi_sweep(&function, &region, r, samples, seed, margin, common.tol), common),
        Command::CertifyFk {
            delta1,
            delta2,
            rmin,
            points,
            seed,
            common,
        } => (certify_fk(delta1, delta2, rmin, points, seed, common.tol), common),
        Command::Abel {
            psi0,
            eps_end,
            step_tol,
            out,
            grid_n,
            common,
        } => (abel_cmd(psi0, eps_end, step_tol, out, grid_n, common.tol), common),
        Command::AbelVerify { input, grid_n, common } => (abel_verify_cmd(&input, grid_n, common.tol), common),
        Command::Kato {
            alpha,
            samples,
            seed,
            common,
        } => (kato_cmd(alpha, samples, seed, common.tol), common),
        Command::Report { json, seed } => (
            report_all(seed),
            Common {
                json: Some(json),
                tol: None,
            },
        ),
    }
}

fn identities(samples: usize, seed: u64, tol: Option<f64>) -> weylcert_core::Result<VerificationReport> {
    let tol = tol.unwrap_or(1e-10);
    let mut rep = VerificationReport::new("identities", seed, samples as u64);
    let s = identity_suite(samples, seed)?;
    let i4 = [
        ("i4_h_one", check_i4_vanishing(&[1.0], 1000, seed)?),
        ("i4_h_kahler", check_i4_vanishing(&[1.0, 0.0, -54.0], 1000, seed)?),
    ];
    for (name, v) in s.entries().into_iter().chain(i4) {
        println!("{name:>14}: {v:.3e}");
        rep.residual(v);
        if !(v <= tol) {
            rep.fail(name, [("residual", v)]);
        }
    }
    Ok(rep.finish(tol).clone())
}

#[allow(clippy::too_many_arguments)]
fn pdi_sweep(
    function: &str,
    region: &str,
    r: f64,
    samples: usize,
    seed: u64,
    margin: f64,
    tol: Option<f64>,
) -> weylcert_core::Result<VerificationReport> {
    let tol = tol.unwrap_or(1e-10);
    let ast = parse(function, Mode::F)?;
    let reg: Region = region.parse()?;
    let pts = spectrum::sample(reg, samples, seed)?;
    let ctx = PdiContext { r };
    let mut rep = VerificationReport::new("pdi-sweep", seed, samples as u64);
    rep.input("function", &ast)
        .input("region", region)
        .input("R", r)
        .input("margin", margin);
    // Points are evaluated in parallel; the reduction below runs in sample order.
    let evaluated: Vec<_> = pts
        .par_iter()
        .map(|s| {
            let p = s.invariants();
            (p, ast.eval_jet(p.x, p.y).and_then(|j| pdi::closed_form_terms(p.x, p.y, &j, ctx)))
        })
        .collect();
    let mut not_strict = [0u64; 2];
    for (p, terms) in evaluated {
        let at = format!("x = {}, y = {}", p.x, p.y);
        let terms = match terms {
            Ok(t) => t,
            Err(e) => {
                rep.fail(format!("{at}: {e}"), [("x", p.x), ("y", p.y)]);
                continue;
            }
        };
        let checks = [
            ("I1", terms.i1, 0.0),
            ("I2", terms.i2, margin),
            ("I3", terms.i3, margin),
            ("I4", terms.i4, 0.0),
        ];
        for (k, (name, t, m)) in checks.into_iter().enumerate() {
            let v = if t.scale > 0.0 { t.value / t.scale } else { t.value };
            rep.residual(v.min(0.0));
            match classify(t.value, t.scale, m, tol) {
                Positivity::Violated => {
                    rep.fail(format!("{at}: {name} < 0"), [("x", p.x), ("y", p.y), (name, t.value)])
                }
                Positivity::NonnegativeWithinTol if k == 1 || k == 2 => not_strict[k - 1] += 1,
                _ => {}
            }
        }
    }
    rep.input("i2_not_strict", not_strict[0]).input("i3_not_strict", not_strict[1]);
    println!("     function: {ast}");
    println!("       points: {}", pts.len());
    println!("   violations: {}", rep.failures.len());
    println!("I2/I3 only nonnegative within tolerance: {} / {}", not_strict[0], not_strict[1]);
    Ok(rep.finish(tol).clone())
}

fn certify_fk(
    delta1: f64,
    delta2: f64,
    rmin: f64,
    points: usize,
    seed: u64,
    tol: Option<f64>,
) -> weylcert_core::Result<VerificationReport> {
    let tol = tol.unwrap_or(1e-10);
    let m = fk::fk_min_k(delta1, delta2, rmin)?;
    let mut rep = VerificationReport::new("certify-fk", seed, points as u64);
    rep.input("delta1", delta1)
        .input("delta2", delta2)
        .input("rmin", rmin)
        .input("k0", m.k0);
    println!("k0 = {}", m.k0);
    println!("I2 bracket at z = delta1: {}", m.i2_at_delta1);
    println!("I3 bracket minimum: {} at w = {}", m.i3_min, m.i3_argmin_w);
    if m.k0 > 1 {
        let prev = (m.k0 - 1) as f64;
        let (w, v) = fk::i3_bracket_min(prev, delta1 * delta1);
        println!("k = {}: I2 bracket {}, I3 bracket minimum {v} at w = {w}", m.k0 - 1, fk::i2_bracket(prev, delta1 * delta1));
    }
    let dev = fk::fk_crosscheck(m.k0, rmin, points, seed)?;
    println!("closed form vs jet evaluation: {dev:.3e}");
    rep.residual(dev);
    Ok(rep.finish(tol).clone())
}

fn abel_cmd(
    psi0: f64,
    eps_end: f64,
    step_tol: f64,
    out: Option<PathBuf>,
    grid_n: usize,
    tol: Option<f64>,
) -> weylcert_core::Result<VerificationReport> {
    let tol = tol.unwrap_or(1e-8);
    let mut rep = VerificationReport::new("abel", 0, grid_n as u64);
    rep.input("psi0", psi0).input("eps_end", eps_end).input("step_tol", step_tol);
    let sol = match abel::abel_solve(psi0, step_tol, eps_end) {
        Ok(s) => s,
        Err(e @ Error::InvalidInput(_)) => return Err(e),
        Err(e) => {
            println!("solver stopped: {e}");
            rep.fail(e.to_string(), []);
            return Ok(rep.finish(tol).clone());
        }
    };
    if let Some(path) = &out {
        sol.write_csv(path)?;
        println!("wrote {} rows to {}", sol.len(), path.display());
    }
    let expo = sol.endpoint_exponent().unwrap_or(f64::NAN);
    println!("nodes: {}", sol.len());
    if let Some(z) = sol.switch_z {
        println!("switch to continuation at z = {z}");
    }
    println!("min slack: {:.3e}", sol.min_slack());
    println!("endpoint estimate: {} (target {})", sol.endpoint_estimate, -3.0 * 6f64.sqrt());
    println!("h(z_end) = {:.6e}, endpoint exponent {expo:.4} (predicted {:.4})", sol.h.last().unwrap(), sol.predicted_exponent());
    rep.input("nodes", sol.len())
        .input("endpoint_estimate", sol.endpoint_estimate)
        .input("endpoint_exponent", expo);
    rep.residual(sol.min_slack().min(0.0));
    let verify = abel::abel_verify(&sol, grid_n);
    println!("independent verification: {}", if verify.pass { "pass" } else { "fail" });
    if !verify.pass {
        rep.fail("abel-verify", [("max_abs_residual", verify.max_abs_residual)]);
    }
    Ok(rep.finish(tol).clone())
}

fn abel_verify_cmd(input: &PathBuf, grid_n: usize, tol: Option<f64>) -> weylcert_core::Result<VerificationReport> {
    let cand = AbelSolution::read_csv(input)?;
    let mut rep = abel::abel_verify_with(&cand, grid_n, tol.unwrap_or(VERIFY_TOL));
    rep.input("in", input.display());
    println!("nodes: {}, refinement: {grid_n}", cand.len());
    println!("max normalized negative slack: {:.3e}", rep.max_abs_residual);
    for f in rep.failures.iter().take(5) {
        println!("  {}", f.point);
    }
    Ok(rep)
}

fn kato_cmd(alpha: f64, samples: usize, seed: u64, tol: Option<f64>) -> weylcert_core::Result<VerificationReport> {
    use rand::{Rng, SeedableRng};
    let tol = tol.unwrap_or(0.0);
    let verdict = kato::kato_minimality(alpha)?;
    let mut rep = VerificationReport::new("kato", seed, samples as u64);
    rep.input("alpha", alpha);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut min = f64::INFINITY;
    for _ in 0..samples {
        let p: f64 = rng.gen_range(0.0..10.0);
        let q = rng.gen_range(5.0 / 3.0 * p..=10.0 * p);
        let x = rng.gen_range(0.01..100.0);
        let v = kato::kato_delta_d(alpha, kato::KatoPoint::new(p, q, x)?);
        min = min.min(v);
        rep.residual(v.min(0.0));
    }
    println!("min Delta_D x^alpha over samples: {min:.3e}");
    match verdict {
        kato::KatoVerdict::NonnegativeForAllKato => println!("nonnegative for every point with q >= (5/3) p"),
        kato::KatoVerdict::CounterexampleFound { p, q, x } => {
            let v = kato::kato_delta_d(alpha, kato::KatoPoint::new(p, q, x)?);
            println!("counterexample: p = {p}, q = {q}, x = {x}, Delta_D x^alpha = {v:e}");
            rep.fail("counterexample", [("p", p), ("q", q), ("x", x), ("value", v)]);
        }
    }
    Ok(rep.finish(tol).clone())
}

fn equivalence(samples: usize, seed: u64) -> weylcert_core::Result<VerificationReport> {
    let c = pdi::equivalence_constants(samples, seed, PdiContext { r: 1.0 })?;
    println!("equivalence constants: c2 = {}, c3 = {}, c4 = {}", c.c2, c.c3, c.c4);
    let mut rep = VerificationReport::new("equivalence", seed, samples as u64);
    rep.residual(c.max_rel_dev);
    rep.residual(c.i1_dev);
    for (name, got, want) in [("c2", c.c2, 2.0), ("c3", c.c3, 1.0), ("c4", c.c4, 0.25)] {
        let dev = (got - want).abs() / want;
        rep.residual(dev);
        rep.input(name, got);
    }
    Ok(rep.finish(pdi::EQUIVALENCE_TOL).clone())
}

fn report_all(seed: u64) -> weylcert_core::Result<VerificationReport> {
    let suites: Vec<(&str, f64, VerificationReport)> = vec![
        ("identities", 1e-10, identities(10_000, seed, None)?),
        ("certify-fk", 1e-10, certify_fk(0.1, 0.01, 1.0, 1000, seed, None)?),
        ("abel", 1e-8, abel_cmd(-SIX_SQRT6, 1e-6, 1e-10, None, 4000, None)?),
        ("kato", 0.0, kato_cmd(1.0 / 6.0, 10_000, seed, None)?),
        ("equivalence", pdi::EQUIVALENCE_TOL, equivalence(10_000, seed)?),
    ];
    let mut rep = VerificationReport::new("report", seed, suites.iter().map(|s| s.2.samples).sum());
    for (name, tol, sub) in &suites {
        rep.input(name, if sub.pass { "pass" } else { "fail" });
        // Residuals of different suites are compared relative to their own tolerances.
        let scaled = if *tol > 0.0 { sub.max_abs_residual / tol } else { sub.max_abs_residual };
        rep.residual(scaled);
        if !sub.pass {
            rep.fail(format!("{name} failed"), [("max_abs_residual", sub.max_abs_residual)]);
        }
    }
    rep.input("residual_units", "multiples of each suite's tolerance");
    Ok(rep.finish(1.0).clone())
}
