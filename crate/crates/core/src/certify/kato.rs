//! The derivative part of the Weitzenböck formula for `f = x^alpha` under
//! the refined Kato inequality `|grad W+|^2 >= (5/3) |grad |W+||^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `p = |grad |W+||^2`, `q = |grad W+|^2`, `x = |W+|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KatoPoint {
    p: f64,
    q: f64,
    x: f64,
}

impl KatoPoint {
    pub fn new(p: f64, q: f64, x: f64) -> Result<Self> {
        if !(p >= 0.0) || !q.is_finite() || !p.is_finite() || !(x > 0.0) || !x.is_finite() {
            return Err(Error::InvalidInput(format!("Kato point needs p >= 0, x > 0 (got p = {p}, q = {q}, x = {x})")));
        }
        if q < 5.0 / 3.0 * p {
            return Err(Error::InvalidInput(format!("q = {q} violates q >= (5/3) p = {}", 5.0 / 3.0 * p)));
        }
        Ok(Self { p, q, x })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn x(&self) -> f64 {
        self.x
    }
}

/// `2 alpha x^{alpha-1} (q + 2 p (alpha - 1))`.
///
/// The factor is grouped as `(q - 5p/3) + 2p (alpha - 1/6)` so that the
/// equality case `alpha = 1/6, q = 5p/3` evaluates to exactly zero.
pub fn kato_delta_d(alpha: f64, kp: KatoPoint) -> f64 {
    let factor = (kp.q - 5.0 / 3.0 * kp.p) + 2.0 * kp.p * (alpha - 1.0 / 6.0);
    2.0 * alpha * kp.x.powf(alpha - 1.0) * factor
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KatoVerdict {
    NonnegativeForAllKato,
    CounterexampleFound { p: f64, q: f64, x: f64 },
}

/// Whether `Delta_D x^alpha >= 0` for every point satisfying the Kato bound.
///
/// The factor is linear in `q`, so its infimum is attained at `q = 5p/3`,
/// where it equals `2p (alpha - 1/6)`.
pub fn kato_minimality(alpha: f64) -> Result<KatoVerdict> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("alpha = {alpha} must be positive")));
    }
    if alpha >= 1.0 / 6.0 {
        return Ok(KatoVerdict::NonnegativeForAllKato);
    }
    let kp = KatoPoint::new(1.0, 5.0 / 3.0, 1.0)?;
    debug_assert!(kato_delta_d(alpha, kp) < 0.0);
    Ok(KatoVerdict::CounterexampleFound { p: kp.p, q: kp.q, x: kp.x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn examples() {
        for p in [0.5, 1.0, 3.0, 1e4] {
            assert_eq!(kato_delta_d(1.0 / 6.0, KatoPoint::new(p, 5.0 / 3.0 * p, 1.0).unwrap()), 0.0);
        }
        let v = kato_delta_d(1.0 / 6.0, KatoPoint::new(3.0, 6.0, 1.0).unwrap());
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        let v = kato_delta_d(1.0 / 6.0, KatoPoint::new(0.0, 1.0, 1.0).unwrap());
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        assert!(KatoPoint::new(1.0, 1.0, 1.0).is_err());
        assert!(KatoPoint::new(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn minimality() {
        assert_eq!(kato_minimality(1.0 / 6.0).unwrap(), KatoVerdict::NonnegativeForAllKato);
        assert_eq!(kato_minimality(0.5).unwrap(), KatoVerdict::NonnegativeForAllKato);
        for a in [0.16, 0.166, 1.0 / 6.0 - 1e-6] {
            match kato_minimality(a).unwrap() {
                KatoVerdict::CounterexampleFound { p, q, x } => {
                    let v = kato_delta_d(a, KatoPoint::new(p, q, x).unwrap());
                    assert!(v < 0.0, "{a}: {v}");
                }
                v => panic!("{a}: {v:?}"),
            }
        }
        // factor 5/3 + 0.32 - 2 = -1/75
        let f = kato_delta_d(0.16, KatoPoint::new(1.0, 5.0 / 3.0, 1.0).unwrap()) / 0.32;
        assert!((f + 1.0 / 75.0).abs() < 1e-12, "{f}");
        assert!(kato_minimality(0.0).is_err());
    }

    #[test]
    fn nonnegative_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let p: f64 = rng.gen_range(0.0..10.0);
            let q = rng.gen_range(5.0 / 3.0 * p..=10.0 * p.max(1e-12));
            let x = rng.gen_range(0.01..100.0);
            assert!(kato_delta_d(1.0 / 6.0, KatoPoint::new(p, q, x).unwrap()) >= 0.0);
        }
    }
}
