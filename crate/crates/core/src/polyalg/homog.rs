use num_complex::Complex64 as C64;

use super::poly::{convolve, PolyC};
use super::roots::roots;
use crate::error::{Error, Result};

/// A point of `C²`.
pub type C2 = [C64; 2];

/// 2x2 complex matrix, row-major.
pub type Mat2 = [[C64; 2]; 2];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub fn norm2(z: C2) -> f64 {
    (z[0].norm_sqr() + z[1].norm_sqr()).sqrt()
}

pub fn normalize(z: C2) -> C2 {
    let n = norm2(z);
    [z[0] / n, z[1] / n]
}

/// `ĉ ∧ z = ĉ₁ z₂ − ĉ₂ z₁`
pub fn wedge(c: C2, z: C2) -> C64 {
    c[0] * z[1] - c[1] * z[0]
}

/// Homogeneous lift `F(z₁,z₂) = (Σ aᵢ z₁ⁱ z₂^{d−i}, Σ bᵢ z₁ⁱ z₂^{d−i})`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomPair {
    a: Vec<C64>,
    b: Vec<C64>,
}

impl HomPair {
    pub fn new(a: Vec<C64>, b: Vec<C64>) -> Result<Self> {
        if a.len() != b.len() || a.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "homogeneous pair needs two coefficient lists of equal length d+1 >= 3, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        if a.iter().chain(b.iter()).any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("lift coefficient"));
        }
        Ok(Self { a, b })
    }

    pub fn degree(&self) -> usize {
        self.a.len() - 1
    }

    pub fn a(&self) -> &[C64] {
        &self.a
    }

    pub fn b(&self) -> &[C64] {
        &self.b
    }

    fn powers(&self, z: C2) -> (Vec<C64>, Vec<C64>) {
        let d = self.degree();
        let mut p1 = Vec::with_capacity(d + 1);
        let mut p2 = Vec::with_capacity(d + 1);
        let (mut x, mut y) = (ONE, ONE);
        for _ in 0..=d {
            p1.push(x);
            p2.push(y);
            x *= z[0];
            y *= z[1];
        }
        (p1, p2)
    }

    pub fn eval(&self, z: C2) -> C2 {
        let d = self.degree();
        let (p1, p2) = self.powers(z);
        let mut out = [ZERO; 2];
        for i in 0..=d {
            let m = p1[i] * p2[d - i];
            out[0] += self.a[i] * m;
            out[1] += self.b[i] * m;
        }
        out
    }

    /// Value and Jacobian `[[∂F₁/∂z₁, ∂F₁/∂z₂], [∂F₂/∂z₁, ∂F₂/∂z₂]]`.
    pub fn eval_with_jacobian(&self, z: C2) -> (C2, Mat2) {
        let d = self.degree();
        let (p1, p2) = self.powers(z);
        let mut v = [ZERO; 2];
        let mut j = [[ZERO; 2]; 2];
        for i in 0..=d {
            let m = p1[i] * p2[d - i];
            v[0] += self.a[i] * m;
            v[1] += self.b[i] * m;
            if i >= 1 {
                let m1 = p1[i - 1] * p2[d - i] * i as f64;
                j[0][0] += self.a[i] * m1;
                j[1][0] += self.b[i] * m1;
            }
            if i < d {
                let m2 = p1[i] * p2[d - i - 1] * (d - i) as f64;
                j[0][1] += self.a[i] * m2;
                j[1][1] += self.b[i] * m2;
            }
        }
        (v, j)
    }

    pub fn jacobian_det(&self, z: C2) -> C64 {
        let (_, j) = self.eval_with_jacobian(z);
        j[0][0] * j[1][1] - j[0][1] * j[1][0]
    }

    /// Coefficients of `det F'` as a form of degree `2d−2`, indexed by the
    /// power of `z₁`.
    pub fn jacobian_det_coeffs(&self) -> Vec<C64> {
        let d = self.degree();
        let dz1 = |c: &[C64]| -> Vec<C64> { (1..=d).map(|i| c[i] * i as f64).collect() };
        let dz2 = |c: &[C64]| -> Vec<C64> { (0..d).map(|i| c[i] * (d - i) as f64).collect() };
        let t1 = convolve(&dz1(&self.a), &dz2(&self.b));
        let t2 = convolve(&dz2(&self.a), &dz1(&self.b));
        t1.iter().zip(&t2).map(|(x, y)| x - y).collect()
    }

    pub fn scaled(&self, s: C64) -> HomPair {
        HomPair {
            a: self.a.iter().map(|&c| c * s).collect(),
            b: self.b.iter().map(|&c| c * s).collect(),
        }
    }

    /// Lift of `u⁻¹ ∘ f ∘ u` for an invertible linear map `u` of `C²`.
    pub fn conjugate_by(&self, u: Mat2) -> Result<HomPair> {
        let d = self.degree();
        let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
        if det.norm() == 0.0 {
            return Err(Error::InvalidInput("singular conjugating matrix".into()));
        }
        // (u z)_1 = u11 z1 + u12 z2, as a form indexed by the power of z1.
        let l1 = [u[0][1], u[0][0]];
        let l2 = [u[1][1], u[1][0]];
        let pow = |l: &[C64; 2], k: usize| -> Vec<C64> {
            (0..k).fold(vec![ONE], |acc, _| convolve(&acc, l))
        };
        let mut fa = vec![ZERO; d + 1];
        let mut fb = vec![ZERO; d + 1];
        for i in 0..=d {
            let m = convolve(&pow(&l1, i), &pow(&l2, d - i));
            for (k, &c) in m.iter().enumerate() {
                fa[k] += self.a[i] * c;
                fb[k] += self.b[i] * c;
            }
        }
        let inv = [[u[1][1] / det, -u[0][1] / det], [-u[1][0] / det, u[0][0] / det]];
        let a = (0..=d).map(|k| inv[0][0] * fa[k] + inv[0][1] * fb[k]).collect();
        let b = (0..=d).map(|k| inv[1][0] * fa[k] + inv[1][1] * fb[k]).collect();
        HomPair::new(a, b)
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(mut m: Vec<Vec<C64>>) -> C64 {
    let n = m.len();
    let mut det = ONE;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))
            .unwrap();
        if m[pivot][col].norm() == 0.0 {
            return ZERO;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col];
        det *= p;
        for row in col + 1..n {
            let f = m[row][col] / p;
            if f == ZERO {
                continue;
            }
            for k in col..n {
                let v = m[col][k];
                m[row][k] -= f * v;
            }
        }
    }
    det
}

/// Sylvester matrix of two forms of formal degree `d`: `d` shifted rows of
/// `a` (highest power first) followed by `d` shifted rows of `b`.
pub fn sylvester_matrix(a: &[C64], b: &[C64]) -> Vec<Vec<C64>> {
    let d = a.len() - 1;
    let mut m = vec![vec![ZERO; 2 * d]; 2 * d];
    for r in 0..d {
        for k in 0..=d {
            m[r][r + k] = a[d - k];
            m[d + r][r + k] = b[d - k];
        }
    }
    m
}

fn anchor_sign(d: usize) -> C64 {
    let mut a = vec![ZERO; d + 1];
    let mut b = vec![ZERO; d + 1];
    a[d] = ONE;
    b[0] = ONE;
    determinant(sylvester_matrix(&a, &b))
}

/// Resultant of the lift, normalized so that `Res(z₁ᵈ, z₂ᵈ) = 1`.
pub fn resultant(f: &HomPair) -> C64 {
    let raw = determinant(sylvester_matrix(f.a(), f.b()));
    // anchor is exactly ±1
    raw * anchor_sign(f.degree())
}

/// Zeros of a binary form (coefficients indexed by the power of `z₁`), as
/// unit-norm lifts, with multiplicity.
pub fn form_roots(coeffs: &[C64], tol: f64) -> Result<Vec<C2>> {
    let m = coeffs.len().saturating_sub(1);
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::InvalidInput("zero binary form".into()));
    }
    let tiny = 1e-14 * scale;
    // Work in the chart whose leading coefficient is the larger end.
    let use_t = coeffs[m].norm() >= coeffs[0].norm();
    let chart: Vec<C64> = if use_t {
        coeffs.to_vec()
    } else {
        coeffs.iter().rev().copied().collect()
    };
    let mut deg = m;
    while deg > 0 && chart[deg].norm() <= tiny {
        deg -= 1;
    }
    let at_pole = m - deg;
    let mut out = Vec::with_capacity(m);
    if deg >= 1 {
        let p = PolyC::new(chart[..=deg].to_vec());
        for r in roots(&p, tol)? {
            out.push(if use_t { normalize([r, ONE]) } else { normalize([ONE, r]) });
        }
    }
    for _ in 0..at_pole {
        out.push(if use_t { [ONE, ZERO] } else { [ZERO, ONE] });
    }
    Ok(out)
}
