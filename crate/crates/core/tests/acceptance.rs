//! Acceptance suite: one PASS/FAIL line per criterion, with runtime.
//! Runs without the libtest harness so the lines always reach stdout.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weylcert_core::certify::abel::{self, abel_numerator_exact, Ratio, SIX_SQRT6, THREE_SQRT6};
use weylcert_core::certify::fk::{self, i2_bracket_kahler_scaled, i3_bracket_kahler_scaled};
use weylcert_core::certify::kato::{kato_delta_d, kato_minimality, KatoPoint, KatoVerdict};
use weylcert_core::identities::{check_i4_vanishing, identity_suite};
use weylcert_core::pdi::{self, quadratic_form_value, QFormCoeffs, SylvesterVerdict, VectorTriple};
use weylcert_core::spectrum::{self, Region, Spectrum};
use weylcert_core::PdiContext;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(cond: bool, detail: String, failures: &mut Vec<String>) {
    if !cond {
        failures.push(detail);
    }
}

fn run(n: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let t = start.elapsed();
    let within = t <= budget;
    let pass = out.pass && within;
    println!(
        "{} criterion {n} ({name}): {} [{:.3} s, budget {} s{}]",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        t.as_secs_f64(),
        budget.as_secs(),
        if within { "" } else { ", exceeded" }
    );
    pass
}

fn outcome(failures: Vec<String>, summary: String) -> Outcome {
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            summary
        } else {
            format!("{summary}; failed: {}", failures.join("; "))
        },
    }
}

fn algebraic_bound() -> Outcome {
    let mut fails = Vec::new();
    let spectra = spectrum::sample(Region::Omega, 100_000, 1).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for s in &spectra {
        let p = s.invariants();
        let excess = 3.0 * 6f64.sqrt() * p.y.abs() - (p.x.powf(1.5) + 1e-10);
        worst = worst.max(excess);
    }
    check(worst <= 0.0, format!("max excess {worst:e}"), &mut fails);
    // Exact multiplicities: equality exactly on repeated eigenvalues.
    for lambda in [-3.0, -0.5, 0.25, 1.0, 7.0] {
        let b = Spectrum::kahler(lambda).algebraic_bound();
        check(b.equality && b.holds, format!("kahler({lambda}) not equality"), &mut fails);
    }
    for (a, b) in [(-1.0, 0.0), (-2.0, 0.5), (-0.3, 0.1), (-5.0, 1.0)] {
        let bd = Spectrum::from_eigenvalues(a, b, -a - b).unwrap().algebraic_bound();
        check(!bd.equality && bd.holds, format!("({a}, {b}) reported equality"), &mut fails);
    }
    outcome(fails, format!("1e5 spectra, max(3 sqrt6 |y| - x^1.5 - 1e-10) = {worst:.3e}"))
}

fn identities() -> Outcome {
    let s = identity_suite(10_000, 42).unwrap();
    let mut fails = Vec::new();
    for (name, v) in [
        ("gradients", s.gradients),
        ("laplacian_x", s.laplacian_x),
        ("laplacian_y", s.laplacian_y),
        ("bracket_identity", s.bracket_identity),
        ("discriminant", s.discriminant),
    ] {
        check(v <= 1e-10, format!("{name} = {v:e}"), &mut fails);
    }
    outcome(
        fails,
        format!(
            "1e4 samples, max normalized: grad {:.1e}, lap_x {:.1e}, lap_y {:.1e}, bracket identity {:.1e}, discriminant {:.1e}",
            s.gradients, s.laplacian_x, s.laplacian_y, s.bracket_identity, s.discriminant
        ),
    )
}

fn i4_vanishing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut fails = Vec::new();
    let mut worst: f64 = 0.0;
    for deg in 0..=8usize {
        let h: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let v = check_i4_vanishing(&h, 1000, 100 + deg as u64).unwrap();
        worst = worst.max(v);
        check(v <= 1e-9, format!("degree {deg}: {v:e}"), &mut fails);
    }
    outcome(fails, format!("degrees 0..=8, 1e3 points each, max normalized |I4| = {worst:.2e}"))
}

fn equivalence() -> Outcome {
    let mut fails = Vec::new();
    let c = pdi::equivalence_constants(10_000, 7, PdiContext { r: 1.0 });
    match c {
        Ok(c) => {
            for (name, got, want) in [("c2", c.c2, 2.0), ("c3", c.c3, 1.0), ("c4", c.c4, 0.25)] {
                check((got - want).abs() <= 1e-8 * want, format!("{name} = {got}"), &mut fails);
            }
            check(c.max_rel_dev <= 1e-8, format!("max_rel_dev = {:e}", c.max_rel_dev), &mut fails);
            outcome(
                fails,
                format!("(c2, c3, c4) = ({}, {}, {}), max rel dev {:.2e}", c.c2, c.c3, c.c4, c.max_rel_dev),
            )
        }
        Err(e) => outcome(vec![e.to_string()], "fit failed".into()),
    }
}

fn theorem_fk() -> Outcome {
    let mut fails = Vec::new();
    let mut worst: f64 = 0.0;
    for k in [1, 2, 3, 5] {
        for r in [0.0, 1.0, 10.0] {
            let d = fk::fk_crosscheck(k, r, 1000, 11 + k).unwrap();
            worst = worst.max(d);
            check(d <= 1e-10, format!("crosscheck k={k} R={r}: {d:e}"), &mut fails);
        }
    }
    let m = fk::fk_min_k(0.1, 0.01, 1.0).unwrap();
    check(m.k0 == 2, format!("fk_min_k = {}", m.k0), &mut fails);
    let witness = fk::i3_bracket(1.0, 0.01);
    check((witness + 148.7).abs() < 0.05, format!("k=1 witness {witness}"), &mut fails);
    let kahler_ok = (1..=10_000i128).all(|k| {
        i3_bracket_kahler_scaled(k) == 2916 * 2916 * k * k * (2 * k - 1)
            && i2_bracket_kahler_scaled(k) == 54 * 54 * k * (6 * k - 1)
    });
    check(kahler_ok, "w = 1/54 simplification".into(), &mut fails);
    outcome(
        fails,
        format!(
            "crosscheck max {worst:.2e}; k0(0.1, 0.01, 1) = {}, k=1 witness {witness:.3}, k=2 minimum {:.2}; w=1/54 exact for k <= 1e4",
            m.k0, m.i3_min
        ),
    )
}

fn theorem_abel() -> Outcome {
    let mut fails = Vec::new();
    let sol = match abel::abel_solve(-SIX_SQRT6, 1e-10, 1e-6) {
        Ok(s) => s,
        Err(e) => return outcome(vec![e.to_string()], "abel_solve failed".into()),
    };
    check(sol.psi.iter().all(|&p| p <= 0.0), "psi > 0 somewhere".into(), &mut fails);
    check(sol.psi.windows(2).all(|w| w[1] >= w[0]), "psi not monotone".into(), &mut fails);
    let min_slack = sol.min_slack();
    check(min_slack >= -1e-8, format!("min slack {min_slack:e}"), &mut fails);
    let slope = abel::abel_rhs(0.0, sol.psi[0]).unwrap().slope;
    check(
        ((slope - 1952.0 / 3.0) / (1952.0 / 3.0)).abs() <= 1e-9,
        format!("initial slope {slope}"),
        &mut fails,
    );
    let end_err = (sol.endpoint_estimate + THREE_SQRT6).abs();
    check(end_err <= 1e-4, format!("endpoint error {end_err:e}"), &mut fails);
    check(sol.h.iter().all(|&h| h > 0.0), "h not positive".into(), &mut fails);
    check(sol.h_nonincreasing(), "h increases".into(), &mut fails);
    let expo = sol.endpoint_exponent().unwrap_or(f64::NAN);
    check((expo - 5.0 / 9.0).abs() <= 0.05, format!("exponent {expo}"), &mut fails);
    let spot = abel_numerator_exact(Ratio::int(-1), Ratio::new(1, 54), Ratio::int(54));
    check(spot == Ratio::int(-200), format!("spot numerator {spot:?}"), &mut fails);
    let verify = abel::abel_verify(&sol, 4000);
    check(verify.pass, format!("abel_verify residual {:e}", verify.max_abs_residual), &mut fails);
    let ricci_flat = sol
        .psi
        .iter()
        .zip(&sol.h)
        .all(|(&p, &h)| weylcert_core::certify::thm14_variant(0.0, h, p, 1.0).unwrap() >= 0.0);
    check(ricci_flat, "R = 0 variant negative".into(), &mut fails);
    outcome(
        fails,
        format!(
            "{} nodes, switch z = {:.6}, min slack {min_slack:.2e}, slope(0) = {slope:.9}, endpoint {:.8} (err {end_err:.1e}), exponent {expo:.4}, N(z*, psi*) = {}/{}",
            sol.len(),
            sol.switch_z.unwrap_or(f64::NAN),
            sol.endpoint_estimate,
            spot.num,
            spot.den
        ),
    )
}

fn kato() -> Outcome {
    let mut fails = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut min = f64::INFINITY;
    for _ in 0..10_000 {
        let p: f64 = rng.gen_range(0.0..10.0);
        let q = rng.gen_range(5.0 / 3.0 * p..=10.0 * p);
        let x = rng.gen_range(0.01..100.0);
        min = min.min(kato_delta_d(1.0 / 6.0, KatoPoint::new(p, q, x).unwrap()));
    }
    check(min >= 0.0, format!("min {min:e}"), &mut fails);
    for p in [0.1, 1.0, 3.0, 42.0] {
        let v = kato_delta_d(1.0 / 6.0, KatoPoint::new(p, 5.0 / 3.0 * p, 1.0).unwrap());
        check(v == 0.0, format!("equality case p={p}: {v:e}"), &mut fails);
    }
    for a in [0.16, 0.166, 1.0 / 6.0 - 1e-6] {
        let found = matches!(kato_minimality(a), Ok(KatoVerdict::CounterexampleFound { .. }));
        check(found, format!("no counterexample at alpha = {a}"), &mut fails);
    }
    outcome(fails, format!("1e4 samples, min Delta_D x^(1/6) = {min:.3e}; counterexamples below 1/6"))
}

fn sylvester() -> Outcome {
    let mut fails = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut coeffs = Vec::with_capacity(1000);
    let mut drawn = 0;
    while coeffs.len() < 1000 {
        drawn += 1;
        let mut u = || rng.gen_range(-3.0f64..3.0);
        let c = QFormCoeffs {
            a: u().abs(),
            b: u().abs(),
            c: u().abs(),
            d: u(),
            e: u(),
            f: u(),
        };
        if pdi::sylvester_reduce(&c).1 == SylvesterVerdict::PositiveSemidefinitePath {
            coeffs.push(c);
        }
    }
    let grams: Vec<VectorTriple> = (0..1000)
        .map(|_| {
            let mut v = [[0.0; 4]; 3];
            for row in v.iter_mut() {
                for c in row.iter_mut() {
                    *c = rng.gen_range(-1.0..1.0);
                }
            }
            VectorTriple::from_vectors(&v)
        })
        .collect();
    let min = coeffs
        .iter()
        .flat_map(|c| grams.iter().map(move |g| quadratic_form_value(c, g)))
        .fold(f64::INFINITY, f64::min);
    check(min >= -1e-10, format!("min {min:e}"), &mut fails);
    outcome(fails, format!("1e3 passing sets ({drawn} drawn) x 1e3 Grams, min value {min:.3e}"))
}

fn main() {
    let results = [
        run(1, "algebraic bound", Duration::from_secs(1), algebraic_bound),
        run(2, "identities", Duration::from_secs(5), identities),
        run(3, "I4 vanishing", Duration::from_secs(5), i4_vanishing),
        run(4, "equivalence constants", Duration::from_secs(5), equivalence),
        run(5, "F_k certificate", Duration::from_secs(5), theorem_fk),
        run(6, "Abel inequality", Duration::from_secs(10), theorem_abel),
        run(7, "Kato", Duration::from_secs(1), kato),
        run(8, "Sylvester soundness", Duration::from_secs(10), sylvester),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
