//! Verification toolkit for k-PN monomials over GF(p), GF(p^2) and GF(p^4).
//!
//! A polynomial `f` is k-PN over GF(q) when its k-th finite difference in
//! every tuple of nonzero directions is a permutation of GF(q). The crate
//! provides the field tower, polynomial and exact integer machinery, the
//! difference operator, permutation tests and classification sweeps, and a
//! bank of verifiers for the special constructions used when ruling out
//! exponents.

pub mod cases;
pub mod combinatorics;
pub mod difference;
pub mod exact;
pub mod field;
pub mod kpn;
pub mod poly;

pub use field::{Elem, FieldDesc, FieldError};
pub use poly::{Poly, PolyError};
