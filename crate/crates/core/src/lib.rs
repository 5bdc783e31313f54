//! Numerical complex dynamics for holomorphic families of rational maps.
//!
//! The crate computes Green functions of homogeneous lifts and of
//! polynomials, Lyapunov exponents by three independent routes, dynatomic
//! polynomials and cycle multipliers, and discrete bifurcation currents and
//! measures on parameter grids.

pub mod bifurcation;
pub mod cycles;
pub mod error;
pub mod export;
pub mod green;
pub mod lyapunov;
pub mod maps;
pub mod polyalg;
pub mod rng;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
