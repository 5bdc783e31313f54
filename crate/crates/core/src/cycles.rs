//! Dynatomic polynomials, periodic cycles with multipliers, multiplier
//! spectra, centers and `Per_n(w)` curves of the quadratic family.
//!
//! Periodic points are found by Aberth iteration on `Φ*_n` evaluated through
//! the dynamics: the log-derivative `Σ_{k|n} μ(n/k) h_k'/h_k` with
//! `h_k(z) = f^k(z) − z` is computed by iterating the map together with its
//! derivative, so no coefficient vector is ever expanded.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::maps::{Family, RationalMapInstance};
use crate::polyalg::{
    aberth, circle_guesses, divisors, mobius, normalize, nu, AberthOptions, HomPair, LogDerivative, Mat2, PolyC, C2,
    DIVISION_TOL,
};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Relative grouping tolerance: `f(z)` matches a root within `GROUPING_TOL·(1+|z|)`.
pub const GROUPING_TOL: f64 = 1e-7;

/// `|w| ∈ [1 − NEUTRAL_BAND, 1 + NEUTRAL_BAND]` counts as neutral.
pub const NEUTRAL_BAND: f64 = 1e-6;

/// Beyond this modulus iterates are tracked only through their log-derivative.
const BIG: f64 = 1e30;

fn aberth_opts() -> AberthOptions {
    AberthOptions {
        max_iterations: 600,
        step_tol: 1e-14,
    }
}

/// Acceptable final Aberth correction when not every root froze.
const ABERTH_ACCEPT: f64 = 1e-9;

fn mobius_divisors(n: usize) -> Vec<(usize, f64)> {
    divisors(n as u64)
        .into_iter()
        .filter_map(|k| {
            let mu = mobius(n as u64 / k);
            (mu != 0).then_some((k as usize, mu as f64))
        })
        .collect()
}

fn cmp_lex(a: &C64, b: &C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// `Φ*_n` as an explicit coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DynatomicPoly {
    pub n: usize,
    pub poly: PolyC,
    pub nu: usize,
}

/// `Φ_k = P^k(z) − z` for `k = 1..=n`.
fn iterate_minus_identity(p: &PolyC, n: usize) -> Vec<PolyC> {
    let mut out = Vec::with_capacity(n);
    let mut pk = p.clone();
    for k in 1..=n {
        if k > 1 {
            pk = p.compose(&pk);
        }
        out.push(&pk - &PolyC::identity());
    }
    out
}

/// Möbius product `Π_{k|n} Φ_k^{μ(n/k)}` with exact division, for polynomial maps.
pub fn dynatomic(m: &RationalMapInstance, n: usize) -> Result<DynatomicPoly> {
    let p = m
        .polynomial()
        .ok_or_else(|| Error::InvalidInput("dynatomic polynomials need a polynomial family".into()))?;
    dynatomic_of(&p.poly, n)
}

pub fn dynatomic_of(p: &PolyC, n: usize) -> Result<DynatomicPoly> {
    if n == 0 {
        return Err(Error::InvalidInput("period must be >= 1".into()));
    }
    let d = p.degree().unwrap_or(0);
    if d < 2 {
        return Err(Error::InvalidInput("dynatomic polynomials need degree >= 2".into()));
    }
    let expected = nu(d as u64, n as u64) as usize;
    let poly = match interpolate_dynatomic(p, n, expected) {
        Some(poly) => poly,
        None => divide_dynatomic(p, n, expected)?,
    };
    if poly.coeffs().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite("dynatomic coefficient"));
    }
    Ok(DynatomicPoly { n, poly, nu: expected })
}

/// `ln Φ*ₙ(z)` by iterating `p`, switching to logarithms once the orbit is
/// large enough that only the leading term matters.
fn ln_dynatomic_at(p: &PolyC, ks: &[(usize, f64)], z: C64) -> C64 {
    let d = p.coeffs().len() - 1;
    let ln_lead = p.coeffs()[d].ln();
    let mut x = z;
    let mut ln_x: Option<C64> = None;
    let mut out = C64::new(0.0, 0.0);
    let mut at = 0;
    for &(k, mu) in ks {
        while at < k {
            match ln_x {
                Some(l) => ln_x = Some(ln_lead + l * d as f64),
                None => {
                    x = p.eval(x);
                    if x.norm() > 1e40 {
                        ln_x = Some(x.ln());
                    }
                }
            }
            at += 1;
        }
        out += mu * ln_x.unwrap_or_else(|| (x - z).ln());
    }
    out
}

/// `Φ*ₙ` sampled on circles `|z| = ρ` and recovered by inverse DFTs; each
/// coefficient is taken from the radius with the smallest error bound
/// `ε M(ρ) / ρᵏ`. `None` when no radius gives usable samples.
fn interpolate_dynatomic(p: &PolyC, n: usize, expected: usize) -> Option<PolyC> {
    let len = (expected + 1).next_power_of_two().max(2) * 2;
    let offset = 0.5 * TAU / len as f64 * std::f64::consts::FRAC_1_SQRT_2;
    let ks = mobius_divisors(n);
    let ln_top = periodic_radius(p).ln().max(0.0) + 2.0;
    let fft = rustfft::FftPlanner::new().plan_fft_forward(len);
    let mut best = vec![(C64::new(0.0, 0.0), f64::INFINITY); expected + 1];
    let steps = ((ln_top + 1.0) / 0.25).ceil() as usize;
    for i in 0..=steps {
        let ln_rho = -1.0 + (ln_top + 1.0) * i as f64 / steps as f64;
        let logs: Vec<C64> = (0..len)
            .map(|j| ln_dynatomic_at(p, &ks, C64::from_polar(ln_rho.exp(), offset + TAU * j as f64 / len as f64)))
            .collect();
        if logs.iter().any(|l| l.re.is_nan() || l.re == f64::INFINITY || !l.im.is_finite()) {
            continue;
        }
        let shift = logs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        let mut buf: Vec<C64> = logs.iter().map(|l| (l - shift).exp()).collect();
        fft.process(&mut buf);
        let ln_noise = (f64::EPSILON * len as f64).ln() + shift;
        for (k, slot) in best.iter_mut().enumerate() {
            let ln_err = ln_noise - ln_rho * k as f64;
            if ln_err < slot.1 {
                let a = C64::from_polar((shift - ln_rho * k as f64).exp() / len as f64, -offset * k as f64) * buf[k];
                *slot = (a, ln_err);
            }
        }
    }
    let (lead, ln_err) = best[expected];
    if !ln_err.is_finite() || lead.norm().ln() < ln_err + 3.0 * std::f64::consts::LN_10 {
        return None;
    }
    let coeffs: Vec<C64> = best.into_iter().map(|(a, _)| a).collect();
    coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()).then(|| PolyC::new(coeffs))
}

fn divide_dynatomic(p: &PolyC, n: usize, expected: usize) -> Result<PolyC> {
    // divide in the variable w = z/r so that every root of the divisor lies
    // in the unit disk
    let ln_r = periodic_radius(p).ln();
    let phis = iterate_minus_identity(p, n);
    let (mut num, mut den) = (PolyC::one(), PolyC::one());
    let (mut ln_num, mut ln_den) = (0.0, 0.0);
    for (k, mu) in mobius_divisors(n) {
        let (phi, s) = phis[k - 1].dilate(ln_r);
        if mu > 0.0 {
            num = &num * &phi;
            ln_num += s;
        } else {
            den = &den * &phi;
            ln_den += s;
        }
    }
    let q = num.divide_exact(&den, DIVISION_TOL).map_err(|e| Error::DynatomicCollision {
        period: n,
        reason: e.to_string(),
    })?;
    if q.quotient.degree() != Some(expected) {
        return Err(Error::DynatomicCollision {
            period: n,
            reason: format!("degree {:?}, expected {expected}", q.quotient.degree()),
        });
    }
    let (poly, s) = q.quotient.dilate(-ln_r);
    Ok(poly.scale(C64::new((s + ln_num - ln_den).exp(), 0.0)))
}

/// Radius `r` with every periodic point of `p` in `|z| ≤ r`: the positive
/// root of `|a_d| tᵈ − Σ_{2≤k<d} |a_k| tᵏ − (|a₁| + 1) t − |a₀|`, beyond
/// which `|p(z)| > |z|`.
fn periodic_radius(p: &PolyC) -> f64 {
    let c: Vec<f64> = p.coeffs().iter().map(|x| x.norm()).collect();
    let d = c.len() - 1;
    let f = |t: f64| {
        let mut v = c[d] * t.powi(d as i32) - (c[1] + 1.0) * t - c[0];
        for (k, ck) in c.iter().enumerate().take(d).skip(2) {
            v -= ck * t.powi(k as i32);
        }
        v
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi.max(f64::MIN_POSITIVE)
}

/// Log-derivative of `Φ*_n` for a polynomial, by iteration.
struct PolyPeriodic<'a> {
    p: &'a PolyC,
    dp: PolyC,
    d: f64,
    n: usize,
    terms: Vec<(usize, f64)>,
    degree: usize,
}

impl<'a> PolyPeriodic<'a> {
    fn new(p: &'a PolyC, n: usize) -> Self {
        let d = p.degree().unwrap();
        Self {
            p,
            dp: p.derivative(),
            d: d as f64,
            n,
            terms: mobius_divisors(n),
            degree: nu(d as u64, n as u64) as usize,
        }
    }
}

impl LogDerivative for PolyPeriodic<'_> {
    fn degree(&self) -> usize {
        self.degree
    }

    fn log_derivative(&self, z: C64) -> Option<C64> {
        let mut w = z;
        let mut dw = ONE;
        let mut big: Option<C64> = None; // dw / w once |w| is huge
        let mut acc = ZERO;
        let mut t = 0;
        for j in 1..=self.n {
            match big {
                Some(l) => big = Some(l * self.d),
                None => {
                    let (v, dv) = (self.p.eval(w), self.dp.eval(w) * dw);
                    w = v;
                    dw = dv;
                    if w.norm() > BIG {
                        big = Some(dw / w);
                    }
                }
            }
            if t < self.terms.len() && self.terms[t].0 == j {
                let mu = self.terms[t].1;
                t += 1;
                let term = match big {
                    Some(l) => l,
                    None => {
                        let h = w - z;
                        if h.norm() == 0.0 {
                            return None;
                        }
                        (dw - 1.0) / h
                    }
                };
                acc += term * mu;
            }
        }
        Some(acc)
    }
}

/// Log-derivative of `Φ*_n` for a rational map in the affine chart, with
/// `h_k = X_k − z Y_k`, `(X_k, Y_k) = F^k(z, 1)`.
struct LiftPeriodic<'a> {
    f: &'a HomPair,
    n: usize,
    terms: Vec<(usize, f64)>,
    degree: usize,
}

impl<'a> LiftPeriodic<'a> {
    fn new(f: &'a HomPair, n: usize) -> Self {
        let terms = mobius_divisors(n);
        let d = f.degree() as i64;
        let degree = terms.iter().map(|&(k, mu)| mu as i64 * (d.pow(k as u32) + 1)).sum::<i64>() as usize;
        Self { f, n, terms, degree }
    }
}

fn mat_vec(m: Mat2, v: C2) -> C2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

impl LogDerivative for LiftPeriodic<'_> {
    fn degree(&self) -> usize {
        self.degree
    }

    fn log_derivative(&self, z: C64) -> Option<C64> {
        let mut v = [z, ONE];
        let mut dv = [ONE, ZERO];
        let mut acc = ZERO;
        let mut t = 0;
        for j in 1..=self.n {
            let (fv, jac) = self.f.eval_with_jacobian(v);
            let fdv = mat_vec(jac, dv);
            let s = (fv[0].norm_sqr() + fv[1].norm_sqr()).sqrt();
            if !(s > 0.0) || !s.is_finite() {
                return None;
            }
            v = [fv[0] / s, fv[1] / s];
            dv = [fdv[0] / s, fdv[1] / s];
            if t < self.terms.len() && self.terms[t].0 == j {
                let mu = self.terms[t].1;
                t += 1;
                let h = v[0] - z * v[1];
                if h.norm() == 0.0 {
                    return None;
                }
                acc += (dv[0] - v[1] - z * dv[1]) / h * mu;
            }
        }
        Some(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleClass {
    Repelling,
    Attracting,
    Neutral,
}

impl CycleClass {
    pub fn of(w: C64) -> Self {
        let r = w.norm();
        if r > 1.0 + NEUTRAL_BAND {
            CycleClass::Repelling
        } else if r < 1.0 - NEUTRAL_BAND {
            CycleClass::Attracting
        } else {
            CycleClass::Neutral
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CycleClass::Repelling => "repelling",
            CycleClass::Attracting => "attracting",
            CycleClass::Neutral => "neutral",
        }
    }
}

/// One periodic orbit of exact period `period`.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub period: usize,
    /// Representative in the affine chart (meaningless if `at_infinity`).
    pub point: C64,
    pub at_infinity: bool,
    /// Unit lift of the representative.
    pub lift: C2,
    /// The whole orbit as unit lifts, starting at the representative.
    pub orbit: Vec<C2>,
    pub multiplier: C64,
    pub class: CycleClass,
}

fn unitary(theta: f64, phi: f64) -> Mat2 {
    let (c, s) = (theta.cos(), theta.sin());
    let e = C64::from_polar(1.0, phi);
    [[C64::new(c, 0.0), -e * s], [e.conj() * s, C64::new(c, 0.0)]]
}

/// Multiplier of the cycle through the unit lifts `orbit` (in order):
/// `Π det F'(p_j) / (d t_j²)` with `F(p_j) = t_j p_{j+1}`.
pub fn cycle_multiplier(f: &HomPair, orbit: &[C2]) -> C64 {
    let d = f.degree() as f64;
    let n = orbit.len();
    let mut w = ONE;
    for j in 0..n {
        let p = orbit[j];
        let q = orbit[(j + 1) % n];
        let fp = f.eval(p);
        let qq = q[0].norm_sqr() + q[1].norm_sqr();
        let t = (fp[0] * q[0].conj() + fp[1] * q[1].conj()) / qq;
        w *= f.jacobian_det(p) / (d * t * t);
    }
    w
}

/// Periodic points of exact period `n`, grouped into cycles.
///
/// Polynomial families use `Φ*_n` on `C` (the fixed point at ∞ is not
/// included); other maps are conjugated by a unitary rotation that moves ∞
/// off every `n`-periodic orbit and solved in the affine chart.
pub fn periodic_cycles(m: &RationalMapInstance, n: usize, tol: f64) -> Result<Vec<CycleRecord>> {
    if n == 0 {
        return Err(Error::InvalidInput("period must be >= 1".into()));
    }
    if let Some(pm) = m.polynomial() {
        let ld = PolyPeriodic::new(&pm.poly, n);
        let radius = crate::green::PolyGreen::new(&pm.poly)?.escape_radius();
        let roots = solve(&ld, radius)?;
        let p = &pm.poly;
        let images: Vec<C64> = roots.iter().map(|&z| p.eval(z)).collect();
        let lifts: Vec<C2> = roots.iter().map(|&z| normalize([z, ONE])).collect();
        return group(m.lift(), n, tol, &roots, &images, &lifts);
    }
    let f = m.lift();
    let mut last_err = None;
    for &(theta, phi) in &[(0.7, 0.3), (1.1, 0.9), (0.3, 2.1), (1.4, 1.3)] {
        let u = unitary(theta, phi);
        let g = f.conjugate_by(u)?;
        // ∞ must not be periodic with period dividing n
        let mut v: C2 = [ONE, ZERO];
        for _ in 0..n {
            v = normalize(g.eval(v));
        }
        if v[1].norm() < 1e-8 {
            last_err = Some(Error::DynatomicCollision {
                period: n,
                reason: "infinity is periodic in every tried chart".into(),
            });
            continue;
        }
        let ld = LiftPeriodic::new(&g, n);
        let roots = match solve(&ld, 1.0) {
            Ok(r) => r,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let images: Vec<C64> = roots
            .iter()
            .map(|&z| {
                let w = g.eval([z, ONE]);
                w[0] / w[1]
            })
            .collect();
        let lifts: Vec<C2> = roots.iter().map(|&z| normalize(mat_vec(u, [z, ONE]))).collect();
        return group(f, n, tol, &roots, &images, &lifts);
    }
    Err(last_err.unwrap())
}

fn solve<P: LogDerivative>(ld: &P, radius: f64) -> Result<Vec<C64>> {
    let out = aberth(ld, circle_guesses(ld.degree(), ZERO, radius), aberth_opts());
    if !out.converged && !(out.last_step <= ABERTH_ACCEPT) {
        return Err(Error::NoConvergence {
            iterations: out.iterations,
            residual: out.last_step,
        });
    }
    Ok(out.roots)
}

/// Match `images[i]` to the unique root within tolerance and split the
/// resulting permutation into cycles of length `n`.
fn group(f: &HomPair, n: usize, tol: f64, roots: &[C64], images: &[C64], lifts: &[C2]) -> Result<Vec<CycleRecord>> {
    let k = roots.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| roots[a].re.total_cmp(&roots[b].re));
    let sorted_re: Vec<f64> = order.iter().map(|&i| roots[i].re).collect();
    let mut next = vec![usize::MAX; k];
    for i in 0..k {
        let w = images[i];
        let eps = tol * (1.0 + w.norm());
        let lo = sorted_re.partition_point(|&x| x < w.re - eps);
        let mut hit = None;
        for &j in order[lo..].iter().take_while(|&&j| roots[j].re <= w.re + eps) {
            if (roots[j] - w).norm() <= eps {
                if hit.is_some() {
                    return Err(Error::AmbiguousGrouping { period: n });
                }
                hit = Some(j);
            }
        }
        next[i] = hit.ok_or_else(|| Error::DynatomicCollision {
            period: n,
            reason: format!("image of root {} matches no root", roots[i]),
        })?;
    }
    let mut seen = vec![false; k];
    let mut cycles = Vec::with_capacity(k / n);
    for start in 0..k {
        if seen[start] {
            continue;
        }
        let mut idx = vec![start];
        seen[start] = true;
        let mut j = next[start];
        while j != start {
            if seen[j] || idx.len() > n {
                return Err(Error::DynatomicCollision {
                    period: n,
                    reason: "root images do not form a permutation".into(),
                });
            }
            seen[j] = true;
            idx.push(j);
            j = next[j];
        }
        if idx.len() != n {
            return Err(Error::DynatomicCollision {
                period: n,
                reason: format!("found an orbit of length {}", idx.len()),
            });
        }
        // representative: lexicographically smallest affine point
        let orbit_pts: Vec<C2> = idx.iter().map(|&i| lifts[i]).collect();
        let affine = |p: &C2| -> (bool, C64) {
            if p[1].norm() < 1e-14 {
                (true, C64::new(f64::INFINITY, f64::INFINITY))
            } else {
                (false, p[0] / p[1])
            }
        };
        let rep = (0..n)
            .min_by(|&a, &b| {
                let (ia, za) = affine(&orbit_pts[a]);
                let (ib, zb) = affine(&orbit_pts[b]);
                ia.cmp(&ib).then(cmp_lex(&za, &zb))
            })
            .unwrap();
        let mut orbit = orbit_pts[rep..].to_vec();
        orbit.extend_from_slice(&orbit_pts[..rep]);
        let multiplier = cycle_multiplier(f, &orbit);
        let (at_infinity, point) = affine(&orbit[0]);
        cycles.push(CycleRecord {
            period: n,
            point,
            at_infinity,
            lift: orbit[0],
            orbit,
            multiplier,
            class: CycleClass::of(multiplier),
        });
    }
    cycles.sort_by(|a, b| a.at_infinity.cmp(&b.at_infinity).then(cmp_lex(&a.point, &b.point)));
    Ok(cycles)
}

/// Multiplier multiset `{w_{n,j}(λ)}` of the exact-period-`n` cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSpectrum {
    pub params: Vec<C64>,
    pub n: usize,
    /// Sorted lexicographically.
    pub multipliers: Vec<C64>,
}

pub fn multiplier_spectrum(family: Family, params: &[C64], n: usize) -> Result<MultiplierSpectrum> {
    let m = crate::maps::instantiate(family, params)?;
    let cycles = periodic_cycles(&m, n, GROUPING_TOL)?;
    let mut multipliers: Vec<C64> = cycles.iter().map(|c| c.multiplier).collect();
    multipliers.sort_by(cmp_lex);
    Ok(MultiplierSpectrum {
        params: params.to_vec(),
        n,
        multipliers,
    })
}

/// `d⁻ⁿ Σ_{repelling cycles} ln|w|`.
pub fn lyap_spectrum_average(family: Family, params: &[C64], n: usize) -> Result<f64> {
    let s = multiplier_spectrum(family, params, n)?;
    let d = family.degree() as f64;
    Ok(s
        .multipliers
        .iter()
        .filter(|w| CycleClass::of(**w) == CycleClass::Repelling)
        .map(|w| w.norm().ln())
        .sum::<f64>()
        / d.powi(n as i32))
}

/// Log-derivative of `Π_{k|n} (P_c^k(0))^{μ(n/k)}` in `c`.
struct CenterEquation {
    n: usize,
    terms: Vec<(usize, f64)>,
    degree: usize,
}

impl CenterEquation {
    fn new(n: usize) -> Self {
        let terms = mobius_divisors(n);
        let degree = terms.iter().map(|&(k, mu)| mu as i64 * (1i64 << (k - 1))).sum::<i64>() as usize;
        Self { n, terms, degree }
    }
}

impl LogDerivative for CenterEquation {
    fn degree(&self) -> usize {
        self.degree
    }

    fn log_derivative(&self, c: C64) -> Option<C64> {
        let (mut z, mut dz) = (c, ONE);
        let mut big: Option<C64> = None;
        let mut acc = ZERO;
        let mut t = 0;
        for j in 1..=self.n {
            if j > 1 {
                match big {
                    Some(l) => big = Some(l * 2.0),
                    None => {
                        dz = 2.0 * z * dz + 1.0;
                        z = z * z + c;
                        if z.norm() > BIG {
                            big = Some(dz / z);
                        }
                    }
                }
            }
            if t < self.terms.len() && self.terms[t].0 == j {
                let mu = self.terms[t].1;
                t += 1;
                let term = match big {
                    Some(l) => l,
                    None => {
                        if z.norm() == 0.0 {
                            return None;
                        }
                        dz / z
                    }
                };
                acc += term * mu;
            }
        }
        Some(acc)
    }
}

/// `(P_c^n(0), ∂_c P_c^n(0))`
fn center_orbit(c: C64, n: usize) -> (C64, C64) {
    let (mut z, mut dz) = (ZERO, ZERO);
    for _ in 0..n {
        dz = 2.0 * z * dz + 1.0;
        z = z * z + c;
    }
    (z, dz)
}

/// Centers of exact period `n` of the quadratic family, sorted lexicographically.
pub fn per_n_centers(n: usize) -> Result<Vec<C64>> {
    if n == 0 || n > 14 {
        return Err(Error::InvalidInput(format!("center period must be in 1..=14, got {n}")));
    }
    if n == 1 {
        return Ok(vec![ZERO]);
    }
    let eq = CenterEquation::new(n);
    let out = aberth(&eq, circle_guesses(eq.degree, C64::new(-0.5, 0.0), 2.0), aberth_opts());
    if !out.converged && !(out.last_step <= ABERTH_ACCEPT) {
        return Err(Error::NoConvergence {
            iterations: out.iterations,
            residual: out.last_step,
        });
    }
    let mut roots = out.roots;
    for r in roots.iter_mut() {
        // Newton polish on P_c^n(0)
        for _ in 0..3 {
            let (z, dz) = center_orbit(*r, n);
            if dz.norm() == 0.0 {
                break;
            }
            let step = z / dz;
            *r -= step;
            if step.norm() < 1e-16 * (1.0 + r.norm()) {
                break;
            }
        }
    }
    roots.sort_by(cmp_lex);
    check_distinct(&roots, n)?;
    Ok(roots)
}

fn check_distinct(roots: &[C64], n: usize) -> Result<()> {
    // roots sorted by re
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if roots[j].re - roots[i].re > 1e-10 {
                break;
            }
            if (roots[j] - roots[i]).norm() <= 1e-10 {
                return Err(Error::DynatomicCollision {
                    period: n,
                    reason: format!("two approximations converged to {}", roots[i]),
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerNSolution {
    pub c: C64,
    /// A point of the cycle.
    pub z: C64,
    /// Recomputed multiplier of the cycle through `z`.
    pub multiplier: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerNResult {
    pub solutions: Vec<PerNSolution>,
    /// Centers whose continuation diverged.
    pub failures: Vec<C64>,
}

pub const CONTINUATION_STEPS: usize = 32;

/// Orbit of `z` under `z² + c` with the derivatives Newton needs:
/// `(zₙ − z, Bₙ, Aₙ, ∂_z Aₙ, ∂_c Aₙ)` where `A = ∂zₙ/∂z`, `B = ∂zₙ/∂c`.
fn per_n_system(z: C64, c: C64, n: usize) -> (C64, C64, C64, C64, C64) {
    let (mut x, mut a, mut b, mut az, mut ac) = (z, ONE, ZERO, ZERO, ZERO);
    for _ in 0..n {
        let (x0, a0, b0) = (x, a, b);
        az = 2.0 * a0 * a0 + 2.0 * x0 * az;
        ac = 2.0 * b0 * a0 + 2.0 * x0 * ac;
        a = 2.0 * x0 * a0;
        b = 2.0 * x0 * b0 + 1.0;
        x = x0 * x0 + c;
    }
    (x - z, b, a, az, ac)
}

/// Multiplier of the orbit of `z` under `z² + c` after `n` steps.
fn quadratic_multiplier(z: C64, c: C64, n: usize) -> C64 {
    let mut x = z;
    let mut w = ONE;
    for _ in 0..n {
        w *= 2.0 * x;
        x = x * x + c;
    }
    w
}

fn exact_period(z: C64, c: C64, n: usize) -> bool {
    let mut x = z;
    for k in 1..n {
        x = x * x + c;
        if n % k == 0 && (x - z).norm() <= GROUPING_TOL * (1.0 + z.norm()) {
            return false;
        }
    }
    true
}

fn newton_2d(mut z: C64, mut c: C64, n: usize, w: C64) -> Option<(C64, C64)> {
    for _ in 0..60 {
        let (f1, b, a, az, ac) = per_n_system(z, c, n);
        let f2 = a - w;
        let (j11, j12, j21, j22) = (a - 1.0, b, az, ac);
        let det = j11 * j22 - j12 * j21;
        if det.norm() == 0.0 || !det.re.is_finite() {
            return None;
        }
        let dz = (j22 * f1 - j12 * f2) / det;
        let dc = (j11 * f2 - j21 * f1) / det;
        z -= dz;
        c -= dc;
        if !z.re.is_finite() || !c.re.is_finite() {
            return None;
        }
        if dz.norm() <= 1e-15 * (1.0 + z.norm()) && dc.norm() <= 1e-15 * (1.0 + c.norm()) {
            break;
        }
    }
    let (f1, _, a, _, _) = per_n_system(z, c, n);
    ((f1.norm() <= 1e-10 * (1.0 + z.norm())) && (a - w).norm() <= 1e-8).then_some((z, c))
}

/// Parameters of `z² + c` with an exact-period-`n` cycle of multiplier `w`,
/// continued from each center along the segment `0 → w`.
pub fn per_n_w(n: usize, w: C64) -> Result<PerNResult> {
    if n == 0 || n > 10 {
        return Err(Error::InvalidInput(format!("Per_n(w) period must be in 1..=10, got {n}")));
    }
    if !w.re.is_finite() || !w.im.is_finite() {
        return Err(Error::InvalidInput("non-finite multiplier".into()));
    }
    let centers = per_n_centers(n)?;
    let mut solutions = Vec::with_capacity(centers.len());
    let mut failures = Vec::new();
    'centers: for c0 in centers {
        let (mut z, mut c) = (ZERO, c0);
        for s in 1..=CONTINUATION_STEPS {
            let ws = w * (s as f64 / CONTINUATION_STEPS as f64);
            match newton_2d(z, c, n, ws) {
                Some((z1, c1)) => {
                    z = z1;
                    c = c1;
                }
                None => {
                    failures.push(c0);
                    continue 'centers;
                }
            }
        }
        if !exact_period(z, c, n) {
            failures.push(c0);
            continue;
        }
        solutions.push(PerNSolution {
            c,
            z,
            multiplier: quadratic_multiplier(z, c, n),
        });
    }
    solutions.sort_by(|a, b| cmp_lex(&a.c, &b.c));
    Ok(PerNResult { solutions, failures })
}
