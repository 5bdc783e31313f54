//! Concrete map models: the quadratic family, the `P_{c,a}` polynomial
//! families, and Milnor's `(σ₁, σ₂)` coordinates on the moduli space of
//! quadratic rational maps.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::polyalg::{self, form_roots, norm2, HomPair, PolyC, C2};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Root tolerance used for the small auxiliary solves in this module.
const AUX_ROOT_TOL: f64 = 1e-10;

/// Which holomorphic family a parameter point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `z² + λ`, one complex parameter.
    Quadratic,
    /// `P_{c,a}` of degree `d ≥ 3`, parameters `(c₁, …, c_{d−2}, a)`.
    PolyCA { degree: usize },
    /// Quadratic rational maps up to conjugacy, parameters `(σ₁, σ₂)`.
    Mod2,
}

impl Family {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::PolyCA { degree } if degree < 3 => Err(Error::InvalidInput(format!(
                "P_(c,a) family needs degree >= 3, got {degree}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn param_dim(&self) -> usize {
        match *self {
            Family::Quadratic => 1,
            Family::PolyCA { degree } => degree - 1,
            Family::Mod2 => 2,
        }
    }

    pub fn degree(&self) -> usize {
        match *self {
            Family::Quadratic | Family::Mod2 => 2,
            Family::PolyCA { degree } => degree,
        }
    }

    pub fn is_polynomial(&self) -> bool {
        !matches!(self, Family::Mod2)
    }

    fn check_params(&self, params: &[C64]) -> Result<()> {
        self.validate()?;
        if params.len() != self.param_dim() {
            return Err(Error::InvalidInput(format!(
                "{self} expects {} complex parameters, got {}",
                self.param_dim(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite parameter".into()));
        }
        Ok(())
    }

    /// The affine polynomial and its marked critical points, for polynomial
    /// families. This skips the lift construction and is what grid scans use.
    pub fn polynomial(&self, params: &[C64]) -> Result<PolynomialMap> {
        self.check_params(params)?;
        match *self {
            Family::Quadratic => Ok(PolynomialMap {
                poly: PolyC::new(vec![params[0], ZERO, ONE]),
                critical: vec![ZERO],
            }),
            Family::PolyCA { degree } => Ok(poly_ca(degree, &params[..degree - 2], params[degree - 2])),
            Family::Mod2 => Err(Error::InvalidInput("Mod2 is not a polynomial family".into())),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Quadratic => write!(f, "quadratic"),
            Family::PolyCA { degree } => write!(f, "polyca:{degree}"),
            Family::Mod2 => write!(f, "mod2"),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(Family::Quadratic),
            "mod2" => Ok(Family::Mod2),
            _ => {
                let d = s
                    .strip_prefix("polyca:")
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| Error::InvalidInput(format!("unknown family '{s}'")))?;
                let fam = Family::PolyCA { degree: d };
                fam.validate()?;
                Ok(fam)
            }
        }
    }
}

/// A polynomial with its marked critical points (with multiplicity, `d−1` of them).
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialMap {
    pub poly: PolyC,
    pub critical: Vec<C64>,
}

impl PolynomialMap {
    pub fn degree(&self) -> usize {
        self.poly.degree().unwrap_or(0)
    }

    /// Lift `(P(z₁,z₂), z₂ᵈ)`.
    pub fn lift(&self) -> HomPair {
        let d = self.degree();
        let mut b = vec![ZERO; d + 1];
        b[0] = ONE;
        HomPair::new(self.poly.coeffs().to_vec(), b).expect("polynomial lift is well formed")
    }
}

/// Elementary symmetric polynomials `σ₀ … σₙ` of the given values.
pub fn elementary_symmetric(values: &[C64]) -> Vec<C64> {
    let mut e = vec![ONE];
    for &v in values {
        let mut next = vec![ZERO; e.len() + 1];
        for (k, &c) in e.iter().enumerate() {
            next[k] += c;
            next[k + 1] += c * v;
        }
        e = next;
    }
    e
}

fn poly_ca(d: usize, c: &[C64], a: C64) -> PolynomialMap {
    let sigma = elementary_symmetric(c);
    let mut coeffs = vec![ZERO; d + 1];
    coeffs[d] = C64::new(1.0 / d as f64, 0.0);
    for j in 2..d {
        let sign = if (d - j) % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[j] = sigma[d - j] * (sign / j as f64);
    }
    coeffs[0] = a.powu(d as u32);
    let mut critical = vec![ZERO];
    critical.extend_from_slice(c);
    PolynomialMap {
        poly: PolyC::new(coeffs),
        critical,
    }
}

/// Representative chosen for a point of `Mod₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mod2Form {
    /// `z (z + μ₀) / (μ∞ z + 1)`: fixed points `0` and `∞` with the given multipliers.
    Generic { mu_zero: C64, mu_infinity: C64 },
    /// `z + 1/z`, the class with a single triple fixed point.
    ZPlusInverse,
}

/// One member of a family, realized by a homogeneous lift.
#[derive(Debug)]
pub struct RationalMapInstance {
    lift: HomPair,
    critical_lifts: Vec<C2>,
    family: Option<Family>,
    params: Vec<C64>,
    polynomial: Option<PolynomialMap>,
    mod2_form: Option<Mod2Form>,
    distortion: OnceLock<f64>,
}

impl Clone for RationalMapInstance {
    fn clone(&self) -> Self {
        Self {
            lift: self.lift.clone(),
            critical_lifts: self.critical_lifts.clone(),
            family: self.family,
            params: self.params.clone(),
            polynomial: self.polynomial.clone(),
            mod2_form: self.mod2_form,
            distortion: self.distortion.clone(),
        }
    }
}

impl RationalMapInstance {
    /// Wrap an arbitrary non-degenerate lift.
    pub fn from_lift(lift: HomPair) -> Result<Self> {
        if polyalg::resultant(&lift).norm() == 0.0 {
            return Err(Error::InvalidInput("degenerate lift (zero resultant)".into()));
        }
        let critical_lifts = critical_factorization(&lift)?;
        Ok(Self {
            lift,
            critical_lifts,
            family: None,
            params: Vec::new(),
            polynomial: None,
            mod2_form: None,
            distortion: OnceLock::new(),
        })
    }

    pub fn lift(&self) -> &HomPair {
        &self.lift
    }

    pub fn degree(&self) -> usize {
        self.lift.degree()
    }

    pub fn critical_lifts(&self) -> &[C2] {
        &self.critical_lifts
    }

    pub fn family(&self) -> Option<Family> {
        self.family
    }

    pub fn params(&self) -> &[C64] {
        &self.params
    }

    /// The affine polynomial, for polynomial families.
    pub fn polynomial(&self) -> Option<&PolynomialMap> {
        self.polynomial.as_ref()
    }

    pub fn mod2_form(&self) -> Option<Mod2Form> {
        self.mod2_form
    }

    /// Constant `M` with `M⁻¹‖z‖ᵈ ≤ ‖F(z)‖ ≤ M‖z‖ᵈ`, estimated on 1024 points
    /// of the unit sphere and inflated by 1.5.
    pub fn distortion(&self) -> f64 {
        *self.distortion.get_or_init(|| distortion_constant(&self.lift))
    }

    pub fn apply(&self, z: C2) -> C2 {
        self.lift.eval(z)
    }
}

fn distortion_constant(f: &HomPair) -> f64 {
    // Hopf coordinates: 16 latitudes (uniform in cos²η) × 8 × 8 phases.
    let mut worst: f64 = 1.0;
    for i in 0..16 {
        let eta = ((i as f64 + 0.5) / 16.0).sqrt().acos().clamp(0.0, FRAC_PI_2);
        for j in 0..8 {
            for k in 0..8 {
                let z = [
                    C64::from_polar(eta.cos(), TAU * j as f64 / 8.0),
                    C64::from_polar(eta.sin(), TAU * (k as f64 + 0.5) / 8.0),
                ];
                let n = norm2(f.eval(z));
                worst = worst.max(n).max(1.0 / n);
            }
        }
    }
    1.5 * worst
}

/// Build the family member at `params`.
pub fn instantiate(family: Family, params: &[C64]) -> Result<RationalMapInstance> {
    family.check_params(params)?;
    let (lift, polynomial, mod2_form) = match family {
        Family::Quadratic | Family::PolyCA { .. } => {
            let p = family.polynomial(params)?;
            (p.lift(), Some(p), None)
        }
        Family::Mod2 => {
            let (lift, form) = mod2_normal_form(params[0], params[1])?;
            (lift, None, Some(form))
        }
    };
    let critical_lifts = critical_factorization(&lift)?;
    Ok(RationalMapInstance {
        lift,
        critical_lifts,
        family: Some(family),
        params: params.to_vec(),
        polynomial,
        mod2_form,
        distortion: OnceLock::new(),
    })
}

/// Fixed-point multipliers for given `(σ₁, σ₂)`: roots of
/// `X³ − σ₁X² + σ₂X − (σ₁ − 2)`, sorted lexicographically.
pub fn mod2_multipliers(s1: C64, s2: C64) -> Result<[C64; 3]> {
    let cubic = PolyC::new(vec![-(s1 - 2.0), s2, -s1, ONE]);
    let mut r = polyalg::roots(&cubic, AUX_ROOT_TOL)?;
    sort_lex(&mut r);
    Ok([r[0], r[1], r[2]])
}

fn mod2_normal_form(s1: C64, s2: C64) -> Result<(HomPair, Mod2Form)> {
    if (s1 - 3.0).norm() < 1e-12 && (s2 - 3.0).norm() < 1e-12 {
        // z + 1/z = (z1² + z2²) / (z1 z2)
        let lift = HomPair::new(vec![ONE, ZERO, ONE], vec![ZERO, ONE, ZERO])?;
        return Ok((lift, Mod2Form::ZPlusInverse));
    }
    let mu = mod2_multipliers(s1, s2)?;
    let mut best = (0, 1);
    let mut best_gap = -1.0;
    for i in 0..3 {
        for j in i + 1..3 {
            let gap = (ONE - mu[i] * mu[j]).norm();
            if gap > best_gap {
                best_gap = gap;
                best = (i, j);
            }
        }
    }
    let (mu_zero, mu_infinity) = (mu[best.0], mu[best.1]);
    // z (z + μ₀) / (μ∞ z + 1)
    let lift = HomPair::new(vec![ZERO, mu_zero, ONE], vec![ONE, mu_infinity, ZERO])?;
    Ok((lift, Mod2Form::Generic { mu_zero, mu_infinity }))
}

pub(crate) fn sort_lex(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Lifted critical points `ĉⱼ` with `det F'(z) = Π ĉⱼ ∧ z`.
///
/// The modulus of the leading constant is spread evenly over the factors;
/// its phase goes to the first one.
pub fn critical_factorization(f: &HomPair) -> Result<Vec<C2>> {
    let e = f.jacobian_det_coeffs();
    let m = e.len() - 1;
    let scale = e.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::InvalidInput("det F' vanishes identically".into()));
    }
    let directions = form_roots(&e, AUX_ROOT_TOL)?;
    // Each unit direction p gives the linear form p₂ z₁ − p₁ z₂ (vanishing at p),
    // i.e. ĉ = −p in `ĉ ∧ z = ĉ₁ z₂ − ĉ₂ z₁`. Fix the constant by comparing at a
    // generic point.
    let probe = [C64::new(0.37, 0.61), C64::new(-0.83, 0.29)];
    let target = e
        .iter()
        .enumerate()
        .map(|(k, &c)| c * probe[0].powu(k as u32) * probe[1].powu((m - k) as u32))
        .sum::<C64>();
    let base: C64 = directions.iter().map(|&p| polyalg::wedge([-p[0], -p[1]], probe)).product();
    let constant = target / base;
    let s = constant.norm().powf(1.0 / m as f64);
    let phase = C64::from_polar(1.0, constant.arg());
    Ok(directions
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let k = if j == 0 { phase * s } else { C64::new(s, 0.0) };
            [-p[0] * k, -p[1] * k]
        })
        .collect())
}

/// Chart-free spherical derivative `|f'|ₛ = ‖z‖² |det F'(z)| / (d ‖F(z)‖²)`.
pub fn spherical_derivative(m: &RationalMapInstance, z: C2) -> f64 {
    let f = m.lift();
    let nz = z[0].norm_sqr() + z[1].norm_sqr();
    let fz = f.eval(z);
    let nf = fz[0].norm_sqr() + fz[1].norm_sqr();
    nz * f.jacobian_det(z).norm() / (f.degree() as f64 * nf)
}

/// Fixed points of the map on the sphere, as unit lifts (with multiplicity).
pub fn fixed_points(f: &HomPair) -> Result<Vec<C2>> {
    let d = f.degree();
    // z₂ F₁ − z₁ F₂, a form of degree d+1
    let mut h = vec![ZERO; d + 2];
    for i in 0..=d {
        h[i] += f.a()[i];
        h[i + 1] -= f.b()[i];
    }
    form_roots(&h, AUX_ROOT_TOL)
}

/// Multiplier of a fixed point `p` of `f`: with `F(p) = t p`, it is
/// `det F'(p) / (d t²)`.
pub fn fixed_point_multiplier(f: &HomPair, p: C2) -> C64 {
    let fp = f.eval(p);
    let t = (fp[0] * p[0].conj() + fp[1] * p[1].conj()) / (p[0].norm_sqr() + p[1].norm_sqr());
    f.jacobian_det(p) / (f.degree() as f64 * t * t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointMultipliers {
    /// Sorted by (re, im).
    pub multipliers: [C64; 3],
    /// Two of the fixed points coincide (multiplier 1 of a multiple fixed point).
    pub multiple: bool,
}

impl FixedPointMultipliers {
    /// `(σ₁, σ₂, σ₃)`
    pub fn symmetric(&self) -> (C64, C64, C64) {
        let [a, b, c] = self.multipliers;
        (a + b + c, a * b + a * c + b * c, a * b * c)
    }
}

/// Multipliers of the three fixed points of a quadratic rational map.
pub fn fixed_point_multipliers(m: &RationalMapInstance) -> Result<FixedPointMultipliers> {
    if m.degree() != 2 {
        return Err(Error::InvalidInput("fixed_point_multipliers needs a degree-2 map".into()));
    }
    let pts = fixed_points(m.lift())?;
    let mut multiple = false;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if polyalg::wedge(pts[i], pts[j]).norm() < 1e-7 {
                multiple = true;
            }
        }
    }
    let mut mu: Vec<C64> = pts.iter().map(|&p| fixed_point_multiplier(m.lift(), p)).collect();
    if multiple {
        // a multiple fixed point has multiplier exactly 1
        for (i, &p) in pts.iter().enumerate() {
            if pts.iter().enumerate().any(|(j, &q)| j != i && polyalg::wedge(p, q).norm() < 1e-7) {
                mu[i] = ONE;
            }
        }
    }
    sort_lex(&mut mu);
    Ok(FixedPointMultipliers {
        multipliers: [mu[0], mu[1], mu[2]],
        multiple,
    })
}

/// Coefficients `(A, B, C)` of the line `Per₁(w): A σ₁ + B σ₂ + C = 0` in `Mod₂`.
pub fn per1_line_mod2(w: C64) -> (C64, C64, C64) {
    (w * w + 1.0, -w, -(w * w * w + 2.0))
}
