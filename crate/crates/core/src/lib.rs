//! Verification toolkit for subharmonic functions of the self-dual Weyl
//! curvature invariants `x = |W+|^2` and `y = det W+` on Einstein
//! four-manifolds.
//!
//! The crate is organized bottom-up:
//!
//! * [`spectrum`]: traceless spectra, the invariants `x, y, z`, regions.
//! * [`jet`]: second-order forward-mode derivative jets.
//! * [`funcdsl`]: parser for candidate functions `f(x, y)` and profiles `h(z)`.
//! * [`pdi`]: the quadratic-form coefficients and the positivity system.
//! * [`identities`]: randomized checks of the gradient and Laplacian identities.
//! * [`certify`]: certificates for the explicit constructions and the Abel
//!   inequality solver.
//! * [`report`]: machine-readable verification reports.

pub mod certify;
pub mod error;
pub mod funcdsl;
pub mod identities;
pub mod jet;
pub mod ode;
pub mod pdi;
pub mod report;
pub mod spectrum;

pub use error::{Error, Result};
pub use funcdsl::{parse, ExprAst, Mode};
pub use jet::{Jet1, Jet2};
pub use pdi::{PdiContext, PdiValues, QFormCoeffs, VectorTriple};
pub use report::{Failure, VerificationReport};
pub use spectrum::{InvariantPoint, Region, Spectrum, Z_MAX};
