//! Green functions of lifts and of polynomials, and Green-measure sampling by
//! random backward iteration.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::maps::{self, Family, RationalMapInstance};
use crate::polyalg::{form_roots, norm2, normalize, wedge, PolyC, C2};
use crate::rng::CounterRng;

/// Iteration cap for polynomial Green functions.
pub const DEFAULT_ITER_CAP: usize = 4096;

/// Tolerance used by scans and the Lyapunov formula.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GreenStatus {
    /// Lift Green function, converged to the tail bound.
    Converged,
    /// The orbit left the escape disk.
    Escaped,
    /// Certified bounded: the orbit stayed in the escape disk long enough
    /// that the value is 0 within the error bound.
    Bounded,
    /// Neither escaped nor certified within the cap.
    Undecided { max_modulus: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenValue {
    pub value: f64,
    pub iterations: usize,
    pub error_bound: f64,
    pub status: GreenStatus,
}

impl GreenValue {
    pub fn is_undecided(&self) -> bool {
        matches!(self.status, GreenStatus::Undecided { .. })
    }
}

/// Number of renormalized iterations that bring the tail bound below `tol`.
pub fn lift_iterations(ln_m: f64, d: usize, tol: f64) -> usize {
    let d = d as f64;
    let x = ln_m / (tol * (d - 1.0));
    if x <= 1.0 {
        1
    } else {
        (x.ln() / d.ln()).ceil() as usize + 1
    }
}

/// `G_F(z) = lim d⁻ⁿ ln‖Fⁿ(z)‖`, renormalizing the lift to unit norm each step.
pub fn green_lift(m: &RationalMapInstance, z: C2, tol: f64) -> Result<GreenValue> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let r = norm2(z);
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput("Green function needs a nonzero finite point".into()));
    }
    let d = m.degree();
    let df = d as f64;
    let ln_m = m.distortion().ln();
    let n = lift_iterations(ln_m, d, tol);
    let mut u = [z[0] / r, z[1] / r];
    let mut value = r.ln();
    let mut weight = 1.0;
    for _ in 0..n {
        let w = m.apply(u);
        let s = norm2(w);
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::NonFinite("lift iterate"));
        }
        weight /= df;
        value += weight * s.ln();
        u = [w[0] / s, w[1] / s];
    }
    Ok(GreenValue {
        value,
        iterations: n,
        error_bound: ln_m / (df.powi(n as i32) * (df - 1.0)),
        status: GreenStatus::Converged,
    })
}

/// Precomputed constants for the polynomial Green function of `P`.
#[derive(Debug, Clone)]
pub struct PolyGreen {
    poly: PolyC,
    degree: usize,
    ln_lead: f64,
    /// `Σ_{k<d} |p_k| / |lead|`
    tail: f64,
    radius: f64,
    /// Upper bound for `g` on the escape disk.
    disk_bound: f64,
}

impl PolyGreen {
    pub fn new(poly: &PolyC) -> Result<Self> {
        let d = match poly.degree() {
            Some(d) if d >= 2 => d,
            _ => return Err(Error::InvalidInput("polynomial Green function needs degree >= 2".into())),
        };
        let lead = poly.leading().norm();
        let tail = poly.coeffs()[..d].iter().map(|c| c.norm()).sum::<f64>() / lead;
        // For |z| >= R: |P(z)| >= 2|z| and (lead/2)|z|^d <= |P(z)| <= 2 lead |z|^d.
        let radius = 1f64.max(2.0 * tail).max((4.0 / lead).powf(1.0 / (d - 1) as f64));
        let disk_bound = (radius.ln() + (2.0 * lead).ln() / (d - 1) as f64).max(0.0);
        Ok(Self {
            poly: poly.clone(),
            degree: d,
            ln_lead: lead.ln(),
            tail,
            radius,
            disk_bound,
        })
    }

    pub fn escape_radius(&self) -> f64 {
        self.radius
    }

    /// `g(z) = lim d⁻ⁿ ln⁺|Pⁿ(z)|` within `tol`, or undecided after `cap` steps.
    pub fn eval(&self, z: C64, tol: f64, cap: usize) -> GreenValue {
        let df = self.degree as f64;
        let mut z = z;
        let mut weight = 1.0; // d^{-k}
        let mut max_modulus = z.norm();
        for k in 0..=cap {
            let r = z.norm();
            max_modulus = max_modulus.max(r);
            if !r.is_finite() {
                break;
            }
            if r > self.radius {
                // ln|P(w)| = d ln|w| + ln|lead| + ln|1+ρ(w)|, |ρ(w)| ≤ tail/|w| ≤ 1/2
                let rho = self.tail / r;
                let err = weight * 2.0 * rho / (df - 1.0);
                if err <= tol || r > 1e100 {
                    let value = weight * (r.ln() + self.ln_lead / (df - 1.0));
                    return GreenValue {
                        value: value.max(0.0),
                        iterations: k,
                        error_bound: err,
                        status: GreenStatus::Escaped,
                    };
                }
            } else if weight * self.disk_bound <= tol {
                return GreenValue {
                    value: 0.0,
                    iterations: k,
                    error_bound: weight * self.disk_bound,
                    status: GreenStatus::Bounded,
                };
            }
            if k == cap {
                break;
            }
            z = self.poly.eval(z);
            weight /= df;
        }
        GreenValue {
            value: 0.0,
            iterations: cap,
            error_bound: f64::INFINITY,
            status: GreenStatus::Undecided { max_modulus },
        }
    }
}

/// `g_{C,P}(z)` for the member of a polynomial family at `params`.
pub fn green_poly(family: Family, params: &[C64], z: C64, tol: f64) -> Result<GreenValue> {
    green_poly_capped(family, params, z, tol, DEFAULT_ITER_CAP)
}

pub fn green_poly_capped(family: Family, params: &[C64], z: C64, tol: f64, cap: usize) -> Result<GreenValue> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let p = family.polynomial(params)?;
    Ok(PolyGreen::new(&p.poly)?.eval(z, tol, cap))
}

/// Empirical approximation of the Green measure `μ_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCloud {
    /// Unit lifts, chain-major.
    pub points: Vec<C2>,
    /// Number of points contributed by each chain, in order.
    pub chain_lengths: Vec<usize>,
    /// Samples redrawn because they hit the rejection predicate.
    pub resampled: usize,
}

impl SampleCloud {
    /// Points in the affine chart `z₁/z₂` (infinite for the point at ∞).
    pub fn affine(&self) -> Vec<C64> {
        self.points
            .iter()
            .map(|p| {
                if p[1].norm() == 0.0 {
                    C64::new(f64::INFINITY, f64::INFINITY)
                } else {
                    p[0] / p[1]
                }
            })
            .collect()
    }

    pub fn chains(&self) -> impl Iterator<Item = &[C2]> {
        let mut start = 0;
        self.chain_lengths.iter().map(move |&n| {
            let s = &self.points[start..start + n];
            start += n;
            s
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SampleOptions {
    pub chains: usize,
    /// Backward steps between recorded samples.
    pub stride: usize,
    /// Starting point; defaults to the most repelling fixed point.
    pub start: Option<C2>,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            chains: 64,
            stride: 1,
            start: None,
        }
    }
}

/// The `d` preimages of `a` as unit lifts.
pub fn preimages(m: &RationalMapInstance, a: C2) -> Result<Vec<C2>> {
    let f = m.lift();
    // a ∧ F(z) = a₁ F₂(z) − a₂ F₁(z)
    let coeffs: Vec<C64> = f.a().iter().zip(f.b()).map(|(&ai, &bi)| a[0] * bi - a[1] * ai).collect();
    form_roots(&coeffs, 1e-8)
}

/// The fixed point with the largest multiplier modulus (a point of the Julia set).
pub fn default_start(m: &RationalMapInstance) -> Result<C2> {
    let pts = maps::fixed_points(m.lift())?;
    let best = pts
        .iter()
        .copied()
        .max_by(|&p, &q| {
            let mp = maps::fixed_point_multiplier(m.lift(), p).norm();
            let mq = maps::fixed_point_multiplier(m.lift(), q).norm();
            mp.total_cmp(&mq)
        })
        .ok_or(Error::Exceptional)?;
    Ok(best)
}

fn check_not_exceptional(m: &RationalMapInstance, a: C2) -> Result<()> {
    // totally invariant points have a single preimage (themselves)
    let pre = preimages(m, a)?;
    if pre.iter().all(|&p| wedge(normalize(a), p).norm() < 1e-8) {
        return Err(Error::Exceptional);
    }
    Ok(())
}

/// Random backward orbits: 64 chains by default, uniform preimage choice at
/// every step, `burn_in` steps discarded per chain.
pub fn sample_green_measure(m: &RationalMapInstance, n_samples: usize, burn_in: usize, seed: u64) -> Result<SampleCloud> {
    sample_green_measure_with(m, n_samples, burn_in, seed, SampleOptions::default(), |_| false)
}

/// As [`sample_green_measure`], redrawing (one more backward step) any sample
/// for which `reject` holds.
pub fn sample_green_measure_with<R>(
    m: &RationalMapInstance,
    n_samples: usize,
    burn_in: usize,
    seed: u64,
    opts: SampleOptions,
    reject: R,
) -> Result<SampleCloud>
where
    R: Fn(C2) -> bool + Sync,
{
    if n_samples == 0 || opts.chains == 0 || opts.stride == 0 {
        return Err(Error::InvalidInput("sampling needs n_samples, chains and stride >= 1".into()));
    }
    let start = normalize(match opts.start {
        Some(s) => s,
        None => default_start(m)?,
    });
    check_not_exceptional(m, start)?;
    let chains = opts.chains.min(n_samples);
    let root = CounterRng::new(seed);
    let per_chain: Vec<usize> = (0..chains)
        .map(|c| n_samples / chains + usize::from(c < n_samples % chains))
        .collect();
    let runs: Vec<Result<(Vec<C2>, usize)>> = (0..chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = root.split(c as u64);
            let mut z = start;
            let step = |z: C2, rng: &mut CounterRng| -> Result<C2> {
                let pre = preimages(m, z)?;
                Ok(pre[rng.below(pre.len())])
            };
            for _ in 0..burn_in {
                z = step(z, &mut rng)?;
            }
            let mut out = Vec::with_capacity(per_chain[c]);
            let mut redrawn = 0;
            while out.len() < per_chain[c] {
                for _ in 0..opts.stride {
                    z = step(z, &mut rng)?;
                }
                if reject(z) {
                    redrawn += 1;
                    continue;
                }
                out.push(z);
            }
            Ok((out, redrawn))
        })
        .collect();
    let mut points = Vec::with_capacity(n_samples);
    let mut resampled = 0;
    for r in runs {
        let (pts, k) = r?;
        points.extend(pts);
        resampled += k;
    }
    Ok(SampleCloud {
        points,
        chain_lengths: per_chain,
        resampled,
    })
}
