use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Dense complex polynomial, coefficients in ascending degree.
///
/// Trailing zeros are trimmed on construction; the zero polynomial has no
/// coefficients at all.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolyC {
    coeffs: Vec<C64>,
}

/// Quotient of an exact division plus the norm of the discarded remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct Division {
    pub quotient: PolyC,
    pub remainder_norm: f64,
}

impl PolyC {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    /// `c * z^k`
    pub fn monomial(c: C64, k: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); k + 1];
        v[k] = c;
        Self::new(v)
    }

    /// The polynomial `z`.
    pub fn identity() -> Self {
        Self::monomial(C64::new(1.0, 0.0), 1)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    /// Largest coefficient modulus.
    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative by a single Horner pass.
    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `Σ |a_k| |z|^k`, the natural scale for residuals at `z`.
    pub fn abs_scale(&self, z: C64) -> f64 {
        let r = z.norm();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// `(q, s)` with `q(z) = p(eʳ z) / eˢ` and `‖q‖_∞ = 1`, computed in
    /// logarithms so that large degrees do not overflow.
    pub fn dilate(&self, ln_r: f64) -> (Self, f64) {
        let logs: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm().ln() + k as f64 * ln_r)
            .collect();
        let s = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !s.is_finite() {
            return (self.clone(), 0.0);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&logs)
            .map(|(c, l)| if c.norm() == 0.0 { *c } else { C64::from_polar((l - s).exp(), c.arg()) })
            .collect();
        (Self::new(coeffs), s)
    }

    /// `self ∘ inner`, by Horner's scheme over polynomials.
    pub fn compose(&self, inner: &PolyC) -> Self {
        let mut acc = PolyC::zero();
        for &c in self.coeffs.iter().rev() {
            acc = &(&acc * inner) + &PolyC::constant(c);
        }
        acc
    }

    /// Long division; fails unless the remainder is at most
    /// `tol * ‖num‖_∞`.
    pub fn divide_exact(&self, den: &PolyC, tol: f64) -> Result<Division> {
        let Some(dd) = den.degree() else {
            return Err(Error::InvalidInput("division by the zero polynomial".into()));
        };
        let tolerance = tol * self.norm_inf().max(f64::MIN_POSITIVE);
        let Some(nd) = self.degree() else {
            return Ok(Division {
                quotient: PolyC::zero(),
                remainder_norm: 0.0,
            });
        };
        if nd < dd {
            let remainder = self.norm_inf();
            if remainder > tolerance {
                return Err(Error::NotDivisible { remainder, tolerance });
            }
            return Ok(Division {
                quotient: PolyC::zero(),
                remainder_norm: remainder,
            });
        }
        let lead = den.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![C64::new(0.0, 0.0); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (j, &dc) in den.coeffs.iter().enumerate() {
                rem[k + j] -= q * dc;
            }
            rem[k + dd] = C64::new(0.0, 0.0);
        }
        let remainder = rem[..dd].iter().map(|c| c.norm()).fold(0.0, f64::max);
        if !remainder.is_finite() || remainder > tolerance {
            return Err(Error::NotDivisible { remainder, tolerance });
        }
        Ok(Division {
            quotient: PolyC::new(quot),
            remainder_norm: remainder,
        })
    }
}

impl Add for &PolyC {
    type Output = PolyC;
    fn add(self, rhs: &PolyC) -> PolyC {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let z = C64::new(0.0, 0.0);
        PolyC::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(z) + rhs.coeffs.get(k).copied().unwrap_or(z)
                })
                .collect(),
        )
    }
}

impl Sub for &PolyC {
    type Output = PolyC;
    fn sub(self, rhs: &PolyC) -> PolyC {
        self + &(-rhs)
    }
}

impl Neg for &PolyC {
    type Output = PolyC;
    fn neg(self) -> PolyC {
        PolyC::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

impl Mul for &PolyC {
    type Output = PolyC;
    fn mul(self, rhs: &PolyC) -> PolyC {
        PolyC::new(convolve(&self.coeffs, &rhs.coeffs))
    }
}

/// Plain coefficient convolution; keeps formal lengths (no trimming).
pub(crate) fn convolve(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == C64::new(0.0, 0.0) {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn trims_trailing_zeros() {
        let p = PolyC::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(p.degree(), Some(0));
        assert!(PolyC::new(vec![c(0.0, 0.0)]).is_zero());
        assert_eq!(PolyC::zero().degree(), None);
    }

    #[test]
    fn horner_with_derivative() {
        // 2 + 3z + z^3
        let p = PolyC::from_real(&[2.0, 3.0, 0.0, 1.0]);
        let (v, dv) = p.eval_with_derivative(c(2.0, 0.0));
        assert_eq!(v, c(16.0, 0.0));
        assert_eq!(dv, c(15.0, 0.0));
        assert_eq!(p.derivative(), PolyC::from_real(&[3.0, 0.0, 3.0]));
    }

    #[test]
    fn compose_matches_iteration() {
        let p = PolyC::from_real(&[-1.0, 0.0, 1.0]);
        let p2 = p.compose(&p);
        // (z^2-1)^2-1 = z^4 - 2z^2
        assert_eq!(p2, PolyC::from_real(&[0.0, 0.0, -2.0, 0.0, 1.0]));
    }

    #[test]
    fn divide_cube_minus_identity() {
        // (z^4 - z) / (z^2 - z) = z^2 + z + 1
        let num = PolyC::from_real(&[0.0, -1.0, 0.0, 0.0, 1.0]);
        let den = PolyC::from_real(&[0.0, -1.0, 1.0]);
        let d = num.divide_exact(&den, 1e-9).unwrap();
        assert_eq!(d.quotient, PolyC::from_real(&[1.0, 1.0, 1.0]));
        assert_eq!(d.remainder_norm, 0.0);
    }

    #[test]
    fn divide_by_one_is_identity() {
        let p = PolyC::new(vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.25, 0.0)]);
        let d = p.divide_exact(&PolyC::one(), 1e-9).unwrap();
        assert_eq!(d.quotient, p);
    }

    #[test]
    fn non_divisible_is_reported() {
        let num = PolyC::from_real(&[-1.0, 0.0, 1.0]);
        let den = PolyC::from_real(&[-2.0, 1.0]);
        match num.divide_exact(&den, 1e-9) {
            Err(Error::NotDivisible { remainder, .. }) => assert!((remainder - 3.0).abs() < 1e-12),
            other => panic!("expected NotDivisible, got {other:?}"),
        }
    }
}
