//! Complex polynomial arithmetic, root finding, binary forms and resultants.

mod arith;
mod homog;
mod poly;
mod roots;

pub use arith::{divisors, mobius, nu};
pub use homog::{
    determinant, form_roots, norm2, normalize, resultant, sylvester_matrix, wedge, HomPair, Mat2, C2,
};
pub use poly::{Division, PolyC};
pub use roots::{aberth, circle_guesses, fujiwara_bound, roots, AberthOptions, AberthOutcome, LogDerivative};

use crate::error::Result;

/// Exact-division default (relative remainder tolerance).
pub const DIVISION_TOL: f64 = 1e-9;

/// `num / den`, failing when the remainder exceeds `tol · ‖num‖`.
pub fn divide_exact(num: &PolyC, den: &PolyC, tol: f64) -> Result<Division> {
    num.divide_exact(den, tol)
}
