//! Simultaneous root finding (Aberth–Ehrlich).
//!
//! The iteration only needs the logarithmic derivative `p'/p`, which lets the
//! same engine run on explicit coefficient vectors and on polynomials that are
//! only available through a recurrence (iterates of a map, Möbius products of
//! them). The latter never expand coefficients, so degrees in the thousands stay
//! well conditioned.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use super::poly::PolyC;
use crate::error::{Error, Result};

/// Anything whose roots can be chased by Aberth's method.
pub trait LogDerivative {
    /// Number of roots sought.
    fn degree(&self) -> usize;

    /// `p'(z) / p(z)`; `None` if `z` is an exact root.
    fn log_derivative(&self, z: C64) -> Option<C64>;
}

#[derive(Debug, Clone, Copy)]
pub struct AberthOptions {
    pub max_iterations: usize,
    /// A root is frozen once its correction is below `step_tol * (1 + |z|)`.
    pub step_tol: f64,
}

impl Default for AberthOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            step_tol: 1e-14,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AberthOutcome {
    pub roots: Vec<C64>,
    pub iterations: usize,
    pub converged: bool,
    /// Largest relative correction in the final sweep.
    pub last_step: f64,
}

/// `n` starting points on a circle, rotated off the real axis so that real
/// polynomials do not start on their symmetry line.
pub fn circle_guesses(n: usize, center: C64, radius: f64) -> Vec<C64> {
    (0..n)
        .map(|k| {
            let theta = TAU * (k as f64 + 0.25) / n as f64 + 0.4;
            center + C64::from_polar(radius, theta)
        })
        .collect()
}

/// Gauss–Seidel Aberth sweep until every root is frozen or the cap is hit.
pub fn aberth<P: LogDerivative + ?Sized>(
    p: &P,
    mut roots: Vec<C64>,
    opts: AberthOptions,
) -> AberthOutcome {
    let n = roots.len();
    let mut frozen = vec![false; n];
    let mut last_step = f64::INFINITY;
    for iteration in 1..=opts.max_iterations {
        last_step = 0.0;
        let mut all_frozen = true;
        for i in 0..n {
            if frozen[i] {
                continue;
            }
            let zi = roots[i];
            let Some(ld) = p.log_derivative(zi) else {
                frozen[i] = true;
                continue;
            };
            let mut repulsion = C64::new(0.0, 0.0);
            for (j, &zj) in roots.iter().enumerate() {
                if j != i {
                    repulsion += (zi - zj).inv();
                }
            }
            let denom = ld - repulsion;
            let step = if denom.norm() > 0.0 { denom.inv() } else { C64::new(0.0, 0.0) };
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            roots[i] = zi - step;
            let rel = step.norm() / (1.0 + roots[i].norm());
            last_step = last_step.max(rel);
            if rel <= opts.step_tol {
                frozen[i] = true;
            } else {
                all_frozen = false;
            }
        }
        if all_frozen {
            return AberthOutcome {
                roots,
                iterations: iteration,
                converged: true,
                last_step,
            };
        }
    }
    AberthOutcome {
        roots,
        iterations: opts.max_iterations,
        converged: false,
        last_step,
    }
}

/// Coefficient-backed log-derivative; evaluates the reversed polynomial
/// outside the unit disk to avoid overflow.
struct CoeffLogDerivative<'a> {
    p: &'a PolyC,
    rev: PolyC,
    dp: PolyC,
    drev: PolyC,
    n: usize,
}

impl<'a> CoeffLogDerivative<'a> {
    fn new(p: &'a PolyC) -> Self {
        let n = p.degree().unwrap_or(0);
        let rev = PolyC::new(p.coeffs().iter().rev().copied().collect());
        Self {
            p,
            dp: p.derivative(),
            drev: rev.derivative(),
            rev,
            n,
        }
    }
}

impl LogDerivative for CoeffLogDerivative<'_> {
    fn degree(&self) -> usize {
        self.n
    }

    fn log_derivative(&self, z: C64) -> Option<C64> {
        if z.norm() <= 1.0 {
            let v = self.p.eval(z);
            if v.norm() == 0.0 {
                return None;
            }
            Some(self.dp.eval(z) / v)
        } else {
            // p(z) = z^n rev(1/z)  =>  p'/p = n/z - rev'(w)/(z^2 rev(w)),  w = 1/z
            let w = z.inv();
            let v = self.rev.eval(w);
            if v.norm() == 0.0 {
                return None;
            }
            Some(self.n as f64 * w - w * w * self.drev.eval(w) / v)
        }
    }
}

/// Fujiwara's bound on the moduli of the roots.
pub fn fujiwara_bound(p: &PolyC) -> f64 {
    let n = p.degree().unwrap_or(0);
    if n == 0 {
        return 0.0;
    }
    let a = p.coeffs();
    let lead = a[n].norm();
    let mut bound: f64 = 0.0;
    for k in 1..=n {
        let mut ratio = a[n - k].norm() / lead;
        if k == n {
            ratio /= 2.0;
        }
        bound = bound.max(ratio.powf(1.0 / k as f64));
    }
    2.0 * bound
}

/// All roots of `p`, each with `|p(r)| ≤ tol · Σ|a_k| max(1,|r|)^k`.
pub fn roots(p: &PolyC, tol: f64) -> Result<Vec<C64>> {
    let n = match p.degree() {
        Some(n) if n >= 1 => n,
        _ => return Err(Error::InvalidInput("roots of a constant polynomial".into())),
    };
    if p.coeffs().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite("polynomial coefficient"));
    }
    // exact zero roots
    let zeros = p.coeffs().iter().take_while(|c| c.norm() == 0.0).count();
    if zeros > 0 {
        let mut out = vec![C64::new(0.0, 0.0); zeros];
        if zeros < n {
            out.extend(roots(&PolyC::new(p.coeffs()[zeros..].to_vec()), tol)?);
        }
        return Ok(out);
    }
    if n == 1 {
        let a = p.coeffs();
        return Ok(vec![-a[0] / a[1]]);
    }
    if n == 2 {
        let a = p.coeffs();
        let (c, b, a) = (a[0], a[1], a[2]);
        let sq = (b * b - 4.0 * a * c).sqrt();
        // pick the branch without cancellation
        let q = if (b.conj() * sq).re >= 0.0 { -0.5 * (b + sq) } else { -0.5 * (b - sq) };
        if q.norm() > 0.0 {
            return Ok(vec![q / a, c / q]);
        }
        return Ok(vec![C64::new(0.0, 0.0); 2]);
    }
    let radius = fujiwara_bound(p).max(f64::MIN_POSITIVE.sqrt());
    let ld = CoeffLogDerivative::new(p);
    let out = aberth(&ld, circle_guesses(n, C64::new(0.0, 0.0), radius), AberthOptions::default());
    let residual = out
        .roots
        .iter()
        .map(|&r| p.eval(r).norm() / p.abs_scale(C64::new(r.norm().max(1.0), 0.0)))
        .fold(0.0, f64::max);
    if !(residual <= tol) {
        return Err(Error::NoConvergence {
            iterations: out.iterations,
            residual,
        });
    }
    Ok(out.roots)
}
