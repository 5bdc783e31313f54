//! Three Lyapunov estimators: closed form (Przytycki / DeMarco), cycle
//! averages, and Birkhoff averages over Green-measure samples.

use std::fmt;

use crate::cycles::{periodic_cycles, CycleClass, GROUPING_TOL};
use crate::error::{Error, Result};
use crate::green::{self, PolyGreen, SampleOptions, DEFAULT_ITER_CAP, DEFAULT_TOL};
use crate::maps::{spherical_derivative, RationalMapInstance};
use crate::polyalg::{normalize, resultant, wedge};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LyapMethod {
    Cycle,
    Birkhoff,
    Formula,
}

impl fmt::Display for LyapMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LyapMethod::Cycle => "cycles",
            LyapMethod::Birkhoff => "birkhoff",
            LyapMethod::Formula => "formula",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapEstimate {
    pub value: f64,
    pub method: LyapMethod,
    /// Formula: summed Green error bounds. Cycles: last increment.
    /// Birkhoff: twice the standard error.
    pub error: f64,
    /// Birkhoff standard error (batch means over chains); 0 otherwise.
    pub stderr: f64,
    /// Formula: some Green value undecided. Cycles: fell back below `n_max`.
    pub flagged: bool,
    /// Birkhoff samples redrawn because they hit a critical point.
    pub resampled: usize,
    /// Period used by the cycle estimator.
    pub period: Option<usize>,
}

impl LyapEstimate {
    fn new(value: f64, method: LyapMethod, error: f64) -> Self {
        Self {
            value,
            method,
            error,
            stderr: 0.0,
            flagged: false,
            resampled: 0,
            period: None,
        }
    }
}

/// Przytycki for polynomial families, DeMarco otherwise.
pub fn lyap_formula(m: &RationalMapInstance) -> Result<LyapEstimate> {
    if m.polynomial().is_some() {
        lyap_przytycki(m)
    } else {
        lyap_demarco(m)
    }
}

/// `L = ln d + Σ g(c_j)` over the finite critical points.
pub fn lyap_przytycki(m: &RationalMapInstance) -> Result<LyapEstimate> {
    let pm = m
        .polynomial()
        .ok_or_else(|| Error::InvalidInput("Przytycki's formula needs a polynomial family".into()))?;
    let pg = PolyGreen::new(&pm.poly)?;
    let mut est = LyapEstimate::new((m.degree() as f64).ln(), LyapMethod::Formula, 0.0);
    for &c in &pm.critical {
        let g = pg.eval(c, DEFAULT_TOL, DEFAULT_ITER_CAP);
        est.value += g.value;
        if g.is_undecided() {
            est.flagged = true;
        } else {
            est.error += g.error_bound;
        }
    }
    Ok(est)
}

/// `L = Σ G_F(ĉ_j) − (2/d) ln|Res F| − ln d`.
pub fn lyap_demarco(m: &RationalMapInstance) -> Result<LyapEstimate> {
    let d = m.degree() as f64;
    let res = resultant(m.lift()).norm();
    if !(res > 0.0) {
        return Err(Error::InvalidInput("degenerate lift (zero resultant)".into()));
    }
    let mut est = LyapEstimate::new(-(2.0 / d) * res.ln() - d.ln(), LyapMethod::Formula, 0.0);
    for &c in m.critical_lifts() {
        let g = green::green_lift(m, c, DEFAULT_TOL)?;
        est.value += g.value;
        est.error += g.error_bound;
    }
    Ok(est)
}

/// Average of `(1/n) ln|(fⁿ)'|` over exact-period-`n` points, repelling
/// cycles only, normalized by the number of such points.
pub fn cycle_average(m: &RationalMapInstance, n: usize) -> Result<f64> {
    let cycles = periodic_cycles(m, n, GROUPING_TOL)?;
    if cycles.is_empty() {
        return Err(Error::InvalidInput(format!("no cycles of period {n}")));
    }
    let points = (cycles.len() * n) as f64;
    let sum: f64 = cycles
        .iter()
        .filter(|c| c.class == CycleClass::Repelling)
        .map(|c| c.multiplier.norm().ln())
        .sum();
    Ok(sum / points)
}

/// Cycle estimator at `n_max`; error is the increment from `n_max − 1`.
/// Falls back to the largest period that solves, flagged.
pub fn lyap_cycles(m: &RationalMapInstance, n_max: usize) -> Result<LyapEstimate> {
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be >= 1".into()));
    }
    let mut first_err = None;
    for n in (1..=n_max).rev() {
        match cycle_average(m, n) {
            Ok(v) => {
                let prev = if n > 1 { cycle_average(m, n - 1).ok() } else { None };
                let mut est = LyapEstimate::new(v, LyapMethod::Cycle, prev.map_or(f64::INFINITY, |p| (v - p).abs()));
                est.flagged = n != n_max;
                est.period = Some(n);
                return Ok(est);
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap())
}

/// Batch-means standard error floor (the integrand can be constant on `J`).
pub const STDERR_FLOOR: f64 = 5e-13;

pub const BIRKHOFF_BURN_IN: usize = 64;

/// Monte-Carlo mean of `ln|f'|ₛ` over random backward orbits.
pub fn lyap_birkhoff(m: &RationalMapInstance, n_samples: usize, seed: u64) -> Result<LyapEstimate> {
    if n_samples < 100 {
        return Err(Error::InvalidInput(format!("Birkhoff estimate needs >= 100 samples, got {n_samples}")));
    }
    let crit: Vec<_> = m.critical_lifts().iter().map(|&c| normalize(c)).collect();
    let near_critical = |p| crit.iter().any(|&c| wedge(c, p).norm() < 1e-12);
    let cloud =
        green::sample_green_measure_with(m, n_samples, BIRKHOFF_BURN_IN, seed, SampleOptions::default(), near_critical)?;
    let mut chain_means = Vec::with_capacity(cloud.chain_lengths.len());
    let mut total = 0.0;
    for chain in cloud.chains() {
        let s: f64 = chain.iter().map(|&p| spherical_derivative(m, p).ln()).sum();
        total += s;
        chain_means.push(s / chain.len() as f64);
    }
    let mean = total / cloud.points.len() as f64;
    let k = chain_means.len() as f64;
    let var = if k > 1.0 {
        chain_means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    let stderr = (var / k).sqrt().max(STDERR_FLOOR);
    if !mean.is_finite() {
        return Err(Error::NonFinite("Birkhoff average"));
    }
    let mut est = LyapEstimate::new(mean, LyapMethod::Birkhoff, 2.0 * stderr);
    est.stderr = stderr;
    est.resampled = cloud.resampled;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{instantiate, Family};
    use crate::C64;

    const LN2: f64 = std::f64::consts::LN_2;

    fn quad(re: f64, im: f64) -> RationalMapInstance {
        instantiate(Family::Quadratic, &[C64::new(re, im)]).unwrap()
    }

    #[test]
    fn formula_anchors() {
        assert!((lyap_formula(&quad(0.0, 0.0)).unwrap().value - LN2).abs() < 1e-9);
        assert!((lyap_demarco(&quad(0.0, 0.0)).unwrap().value - LN2).abs() < 1e-9);
        assert!((lyap_formula(&quad(-2.0, 0.0)).unwrap().value - LN2).abs() < 1e-9);
    }

    #[test]
    fn formula_routes_agree() {
        for &(re, im) in &[(1.0, 0.0), (-0.7, 0.3), (0.3, 1.2), (-1.9, -0.1)] {
            let m = quad(re, im);
            let a = lyap_przytycki(&m).unwrap().value;
            let b = lyap_demarco(&m).unwrap().value;
            assert!((a - b).abs() < 1e-8, "c = {re}+{im}i: {a} vs {b}");
        }
    }

    #[test]
    fn cycles_squaring() {
        let e = lyap_cycles(&quad(0.0, 0.0), 6).unwrap();
        assert!((e.value - LN2).abs() < 1e-9);
        assert_eq!(e.period, Some(6));
    }

    #[test]
    fn birkhoff_squaring() {
        let e = lyap_birkhoff(&quad(0.0, 0.0), 2000, 1).unwrap();
        assert!((e.value - LN2).abs() <= 3.0 * e.stderr + 1e-12);
    }

    #[test]
    fn birkhoff_needs_samples() {
        assert!(lyap_birkhoff(&quad(0.0, 0.0), 10, 1).is_err());
    }
}
