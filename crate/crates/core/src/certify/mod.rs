//! Certificates for the explicit subharmonic constructions.
//!
//! * [`fk`]: the family `x^{1/6} (1 - 54 z^2)^k` on `Omega_delta`, its closed
//!   forms and the minimal admissible `k`.
//! * [`abel`]: the constrained Abel inequality for `psi(z)`, its solver,
//!   verifier and the reconstruction of the profile `h`.
//! * [`profile`]: the `phi`-form brackets for `f = x^{1/6} h(z)` and the
//!   Ricci-flat variant.
//! * [`kato`]: the derivative part of the Weitzenböck formula for powers of `x`.

pub mod abel;
pub mod fk;
pub mod kato;
pub mod profile;

pub use abel::{abel_rhs, abel_solve, abel_verify, AbelMode, AbelSolution};
pub use fk::{fk_brackets, fk_crosscheck, fk_min_k};
pub use kato::{kato_delta_d, kato_minimality, KatoPoint, KatoVerdict};
pub use profile::{thm13_brackets, thm13_identity, thm14_variant};
