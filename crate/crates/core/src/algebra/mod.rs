//! Exact arithmetic over F_q, A = F_q[t], and K = F_q(t).

pub mod fq;
pub mod poly;
pub mod ratfunc;

pub use fq::{FqElem, FqField};
pub use poly::{enumerate_polys, factor, irreducible_monics, monic_polys, FqPoly};
pub use ratfunc::RatFunc;
