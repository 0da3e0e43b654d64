//! Construction and verification of U(n)-invariant Hermitian metrics on
//! annuli in C^n whose Riemannian scalar curvature is twice the Chern
//! scalar curvature.

// `!(x > 0.0)` is used on purpose so that NaN fails positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod io;
pub mod klsc;
pub mod quadrature;
pub mod radial;
pub mod suite;

pub use error::{KlscError, Result};
pub use expr::{parse, Expr};
