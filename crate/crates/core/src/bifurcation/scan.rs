use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::grid::{ParamGrid, ScalarField};
use crate::cycles::multiplier_spectrum;
use crate::error::{Error, Result};
use crate::green::{green_lift, PolyGreen, DEFAULT_ITER_CAP, DEFAULT_TOL};
use crate::lyapunov::{lyap_birkhoff, lyap_cycles, lyap_demarco};
use crate::maps::{instantiate, Family};
use crate::polyalg::C2;

/// How `scan_l` evaluates each cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanMethod {
    Formula,
    Cycles { n_max: usize },
    Birkhoff { samples: usize, seed: u64 },
}

fn check_dim(family: Family, grid: &ParamGrid) -> Result<()> {
    family.validate()?;
    if grid.dim() != family.param_dim() {
        return Err(Error::InvalidInput(format!(
            "{family} has {} complex parameters but the grid has {}",
            family.param_dim(),
            grid.dim()
        )));
    }
    Ok(())
}

/// `(value, flagged)` for one cell of the Lyapunov field.
fn l_cell(family: Family, params: &[C64], method: ScanMethod, cell: usize) -> (f64, bool) {
    match method {
        ScanMethod::Formula if family.is_polynomial() => {
            let Ok(p) = family.polynomial(params) else { return (0.0, true) };
            let Ok(pg) = PolyGreen::new(&p.poly) else { return (0.0, true) };
            let mut v = (family.degree() as f64).ln();
            let mut flag = false;
            for &c in &p.critical {
                let g = pg.eval(c, DEFAULT_TOL, DEFAULT_ITER_CAP);
                flag |= g.is_undecided();
                v += g.value;
            }
            (v, flag)
        }
        _ => {
            let Ok(m) = instantiate(family, params) else { return (0.0, true) };
            let est = match method {
                ScanMethod::Formula => lyap_demarco(&m),
                ScanMethod::Cycles { n_max } => lyap_cycles(&m, n_max),
                ScanMethod::Birkhoff { samples, seed } => {
                    lyap_birkhoff(&m, samples, seed ^ (cell as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
                }
            };
            match est {
                Ok(e) if e.value.is_finite() => (e.value, e.flagged),
                _ => (0.0, true),
            }
        }
    }
}

/// Lyapunov exponent on every cell.
pub fn scan_l(family: Family, grid: &ParamGrid, method: ScanMethod) -> Result<ScalarField> {
    check_dim(family, grid)?;
    let cells: Vec<(f64, bool)> = (0..grid.len())
        .into_par_iter()
        .map(|i| l_cell(family, &grid.point(i), method, i))
        .collect();
    let (values, flagged) = cells.into_iter().unzip();
    Ok(ScalarField::new(grid.clone(), values, flagged, "L"))
}

/// Activity potential `g_λ(c_i(λ))` of the `i`-th marked critical point.
///
/// Polynomial families use the marked critical points `0, c₁, …`; `Mod2`
/// uses `G_F(ĉ_i)` with the critical lifts of the normal form.
pub fn scan_activity(family: Family, grid: &ParamGrid, i: usize) -> Result<ScalarField> {
    check_dim(family, grid)?;
    let count = if family.is_polynomial() { family.degree() - 1 } else { 2 };
    if i >= count {
        return Err(Error::InvalidInput(format!("{family} has {count} marked critical points, index {i}")));
    }
    let cells: Vec<(f64, bool)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let params = grid.point(k);
            if family.is_polynomial() {
                let Ok(p) = family.polynomial(&params) else { return (0.0, true) };
                let Ok(pg) = PolyGreen::new(&p.poly) else { return (0.0, true) };
                let g = pg.eval(p.critical[i], DEFAULT_TOL, DEFAULT_ITER_CAP);
                (g.value, g.is_undecided())
            } else {
                let Ok(m) = instantiate(family, &params) else { return (0.0, true) };
                let mut crit: Vec<C2> = m.critical_lifts().to_vec();
                crit.sort_by(|a, b| {
                    let (za, zb) = (affine(a), affine(b));
                    za.re.total_cmp(&zb.re).then(za.im.total_cmp(&zb.im))
                });
                match green_lift(&m, crit[i], DEFAULT_TOL) {
                    Ok(g) => (g.value, false),
                    Err(_) => (0.0, true),
                }
            }
        })
        .collect();
    let (values, flagged) = cells.into_iter().unzip();
    Ok(ScalarField::new(grid.clone(), values, flagged, format!("g_c{i}")))
}

fn affine(p: &C2) -> C64 {
    if p[1].norm() < 1e-14 {
        C64::new(f64::INFINITY, 0.0)
    } else {
        p[0] / p[1]
    }
}

/// `L_n^r(λ) = d⁻ⁿ Σ_j ln max(|w_{n,j}(λ)|, r)`.
pub fn lnr_value(family: Family, params: &[C64], n: usize, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidInput(format!("r must lie in [0, 1], got {r}")));
    }
    let s = multiplier_spectrum(family, params, n)?;
    let d = family.degree() as f64;
    let v = s.multipliers.iter().map(|w| w.norm().max(r).ln()).sum::<f64>() / d.powi(n as i32);
    if v.is_nan() {
        return Err(Error::NonFinite("L_n^r"));
    }
    Ok(v)
}

/// `L_n^r` on a one-dimensional grid; cells with cycle collisions are flagged.
pub fn scan_lnr(family: Family, grid: &ParamGrid, n: usize, r: f64) -> Result<ScalarField> {
    check_dim(family, grid)?;
    if grid.dim() != 1 {
        return Err(Error::InvalidInput("scan_lnr needs a one-dimensional grid".into()));
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidInput(format!("r must lie in [0, 1], got {r}")));
    }
    let cells: Vec<(f64, bool)> = (0..grid.len())
        .into_par_iter()
        .map(|k| match lnr_value(family, &grid.point(k), n, r) {
            Ok(v) if v.is_finite() => (v, false),
            _ => (0.0, true),
        })
        .collect();
    let (values, flagged) = cells.into_iter().unzip();
    Ok(ScalarField::new(grid.clone(), values, flagged, "L_n_r"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn cardioid_interior_is_ln2() {
        let g = ParamGrid::one(C64::new(-0.1, 0.0), 0.2, 16).unwrap();
        let f = scan_l(Family::Quadratic, &g, ScanMethod::Formula).unwrap();
        for v in &f.values {
            assert!((v - LN2).abs() < 1e-6);
        }
        assert_eq!(f.flagged_count(), 0);
    }

    #[test]
    fn activity_is_l_minus_ln2() {
        let g = ParamGrid::one(C64::new(-0.5, 0.0), 2.0, 16).unwrap();
        let l = scan_l(Family::Quadratic, &g, ScanMethod::Formula).unwrap();
        let a = scan_activity(Family::Quadratic, &g, 0).unwrap();
        for (x, y) in l.values.iter().zip(&a.values) {
            assert!((x - LN2 - y).abs() < 1e-12);
        }
    }

    #[test]
    fn lnr_single_two_cycle() {
        let v = lnr_value(Family::Quadratic, &[C64::new(0.0, 0.0)], 2, 0.0).unwrap();
        assert!((v - 4f64.ln() / 4.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = ParamGrid::one(C64::new(0.0, 0.0), 1.0, 16).unwrap();
        assert!(scan_l(Family::Mod2, &g, ScanMethod::Formula).is_err());
    }
}
