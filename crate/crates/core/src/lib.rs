//! Exact arithmetic for the rational function field K = F_q(t), twisted
//! polynomial modules acting on the additive group, local completions K_v
//! with tracked precision, the associated exponential/logarithm series, and
//! a search-and-certify pipeline for the coset structure of the intersection
//! of an affine variety with a cyclic orbit module.
//!
//! Layout:
//! - [`algebra`]: F_q, F_q[t], F_q(t).
//! - [`twisted`]: the ring K{tau}, module actions, torsion and heights.
//! - [`places`]: places of K, valuations, the product formula, and fixed
//!   precision completion arithmetic.
//! - [`analytic`]: exp/log series, convergence balls, ratio invariants, and
//!   Newton-polygon zero bounds.
//! - [`mordell`]: orbit enumeration, exact intersections, coset inference,
//!   and analytic verification.

pub mod algebra;
pub mod analytic;
pub mod error;
pub mod mordell;
pub mod places;
pub mod twisted;

pub use error::{Error, Result};
