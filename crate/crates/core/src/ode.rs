//! Adaptive Dormand–Prince 5(4) integration with a sign-change stop event.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: 1e-6,
            h_max: f64::INFINITY,
            h_min: 1e-16,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The requested end point was reached.
    Reached,
    /// The event function changed sign from positive to nonpositive.
    Event,
}

#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub termination: Termination,
    /// Size of the last accepted step, a good initial step for a restart.
    pub last_step: f64,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One trial step; returns the fifth-order solution and the scaled error norm.
fn try_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64, opts: &Options) -> Result<([f64; N], f64)>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut k = [[0.0; N]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (p, kp) in k.iter().enumerate().take(s) {
            for i in 0..N {
                ys[i] += h * A[s][p] * kp[i];
            }
        }
        k[s] = f(t + C[s] * h, &ys)?;
    }
    let mut y5 = *y;
    let mut err = 0.0;
    for i in 0..N {
        let (mut d5, mut e) = (0.0, 0.0);
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            e += (B5[s] - B4[s]) * k[s][i];
        }
        y5[i] += h * d5;
        let sc = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
        err += (h * e / sc).powi(2);
    }
    Ok((y5, (err / N as f64).sqrt()))
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end`.
///
/// When `event` is given and its value goes from positive to nonpositive
/// across a step, the crossing is located by bisecting the step length and
/// integration stops there. Every accepted step is recorded.
pub fn integrate<const N: usize, F, E>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &Options,
    event: Option<E>,
) -> Result<Trajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    E: Fn(f64, &[f64; N]) -> f64,
{
    let mut traj = Trajectory {
        t: vec![t0],
        y: vec![y0],
        termination: Termination::Reached,
        last_step: opts.h_init,
    };
    let (mut t, mut y) = (t0, y0);
    let mut h = opts.h_init.min(opts.h_max).min(t_end - t0);
    let mut g_prev = event.as_ref().map(|e| e(t, &y));
    let mut steps = 0;
    while t < t_end {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Consistency(format!("step budget exhausted at t = {t}")));
        }
        let last = t + h >= t_end;
        let h_try = if last { t_end - t } else { h };
        let (y_new, err) = try_step(&f, t, &y, h_try, opts)?;
        if !(err <= 1.0) {
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.2 };
            h = h_try * fac;
            if h < opts.h_min {
                return Err(Error::Consistency(format!("step size underflow at t = {t}")));
            }
            continue;
        }
        if let (Some(ev), Some(gp)) = (event.as_ref(), g_prev) {
            let g_new = ev(t + h_try, &y_new);
            if gp > 0.0 && g_new <= 0.0 {
                // Bisect on the step length from the accepted state.
                let (mut lo, mut hi) = (0.0, h_try);
                let mut best = (t + h_try, y_new);
                while hi - lo > 1e-15 * t.abs().max(1.0) {
                    let mid = 0.5 * (lo + hi);
                    let (ym, _) = try_step(&f, t, &y, mid, opts)?;
                    if ev(t + mid, &ym) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                        best = (t + mid, ym);
                    }
                }
                traj.t.push(best.0);
                traj.y.push(best.1);
                traj.termination = Termination::Event;
                traj.last_step = h_try;
                return Ok(traj);
            }
            g_prev = Some(g_new);
        }
        t = if last { t_end } else { t + h_try };
        y = y_new;
        traj.t.push(t);
        traj.y.push(y);
        traj.last_step = h_try;
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h_try * fac).min(opts.h_max);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    type NoEvent = fn(f64, &[f64; 1]) -> f64;

    #[test]
    fn exponential_growth() {
        let tr = integrate(|_, y: &[f64; 1]| Ok([y[0]]), 0.0, [1.0], 1.0, &Options::default(), None::<NoEvent>)
            .unwrap();
        assert_eq!(tr.termination, Termination::Reached);
        assert_eq!(*tr.t.last().unwrap(), 1.0);
        assert!((tr.y.last().unwrap()[0] - 1f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn gaussian_two_components() {
        // y0' = -2 t y0, y1' = y0; y1 accumulates the integral of exp(-t^2).
        let tr = integrate(
            |t, y: &[f64; 2]| Ok([-2.0 * t * y[0], y[0]]),
            0.0,
            [1.0, 0.0],
            2.0,
            &Options::default(),
            None::<fn(f64, &[f64; 2]) -> f64>,
        )
        .unwrap();
        let y = tr.y.last().unwrap();
        assert!((y[0] - (-4f64).exp()).abs() < 1e-9);
        // integral_0^2 exp(-t^2) dt
        assert!((y[1] - 0.882_081_390_762_421_4).abs() < 1e-9);
    }

    #[test]
    fn event_stops_at_crossing() {
        let tr = integrate(
            |_, _: &[f64; 1]| Ok([1.0]),
            0.0,
            [0.0],
            2.0,
            &Options { h_init: 0.3, ..Options::default() },
            Some(|_, y: &[f64; 1]| 0.5 - y[0]),
        )
        .unwrap();
        assert_eq!(tr.termination, Termination::Event);
        assert!((tr.t.last().unwrap() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn rhs_errors_propagate() {
        let r = integrate(
            |t, _: &[f64; 1]| if t > 0.5 { Err(Error::DivisionByZero) } else { Ok([1.0]) },
            0.0,
            [0.0],
            1.0,
            &Options::default(),
            None::<NoEvent>,
        );
        assert!(r.is_err());
    }
}
