use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::grid::{Axis, ParamGrid, ScalarField};
use super::measure::fs_window_mass;
use crate::error::{Error, Result};

/// `dd^c u ∧ dd^c v = (4/π²)[u₁₁̄v₂₂̄ + u₂₂̄v₁₁̄ − 2Re(u₁₂̄ v̄₁₂̄)] dV` for `dd^c = (i/π)∂∂̄`.
pub const WEDGE_ANALYTIC_CONSTANT: f64 = 4.0 / (PI * PI);

/// A discrete density on a grid, with mass bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub grid: ParamGrid,
    /// Density per unit Lebesgue measure; 0 where invalid.
    pub density: Vec<f64>,
    /// False on the margin and where the stencil touches a flagged cell.
    pub valid: Vec<bool>,
    /// Mass with the calibrated constant.
    pub total_mass: f64,
    /// Mass with the analytic constant (`1/2π` for `dd^c`, `4/π²` for wedges).
    pub raw_mass: f64,
    /// Negative mass over total absolute mass.
    pub negative_mass_fraction: f64,
}

impl DensityField {
    fn build(grid: ParamGrid, density: Vec<f64>, valid: Vec<bool>, raw_ratio: f64) -> Self {
        let vol = grid.cell_volume();
        let (mut total, mut neg, mut abs) = (0.0, 0.0, 0.0);
        for (&x, &ok) in density.iter().zip(&valid) {
            if ok {
                total += x * vol;
                abs += x.abs() * vol;
                if x < 0.0 {
                    neg -= x * vol;
                }
            }
        }
        Self {
            grid,
            density,
            valid,
            total_mass: total,
            raw_mass: total * raw_ratio,
            negative_mass_fraction: if abs > 0.0 { neg / abs } else { 0.0 },
        }
    }

    /// Mass of each valid cell (density times cell volume).
    pub fn cell_masses(&self) -> Vec<f64> {
        let vol = self.grid.cell_volume();
        self.density
            .iter()
            .zip(&self.valid)
            .map(|(&x, &ok)| if ok { x * vol } else { 0.0 })
            .collect()
    }

    pub fn invalid_interior_count(&self) -> usize {
        (0..self.grid.len())
            .filter(|&i| self.grid.is_interior(i, 1) && !self.valid[i])
            .count()
    }
}

/// Sum of the unscaled five-point stencil over the interior cells.
fn five_point_sum(grid: &ParamGrid, values: &[f64]) -> f64 {
    let n = grid.axes()[0].res;
    let mut s = 0.0;
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let k = j * n + i;
            s += values[k + 1] + values[k - 1] + values[k + n] + values[k - n] - 4.0 * values[k];
        }
    }
    s
}

/// Calibration constant of the discrete `dd^c`: the reciprocal of the
/// five-point flux of `ln|λ|` on a 512² reference grid around 0.
pub fn ddc_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let grid = ParamGrid::one(C64::new(0.0, 0.0), 1.0, 512).expect("reference grid");
        let values: Vec<f64> = (0..grid.len()).map(|i| grid.point(i)[0].norm().ln()).collect();
        1.0 / five_point_sum(&grid, &values)
    })
}

/// Discrete `dd^c` of a field on a one-dimensional grid.
pub fn ddc_density(field: &ScalarField) -> Result<DensityField> {
    let grid = &field.grid;
    if grid.dim() != 1 {
        return Err(Error::InvalidInput("ddc_density needs a one-dimensional grid".into()));
    }
    let n = grid.axes()[0].res;
    let h = grid.axes()[0].h();
    let c = ddc_constant();
    let u = &field.values;
    let fl = &field.flagged;
    let out: Vec<(f64, bool)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % n, k / n);
            if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                return (0.0, false);
            }
            let nb = [k, k + 1, k - 1, k + n, k - n];
            if nb.iter().any(|&m| fl[m]) {
                return (0.0, false);
            }
            let lap = u[k + 1] + u[k - 1] + u[k + n] + u[k - n] - 4.0 * u[k];
            (c * lap / (h * h), true)
        })
        .collect();
    let (density, valid) = out.into_iter().unzip();
    Ok(DensityField::build(grid.clone(), density, valid, 1.0 / (2.0 * PI * c)))
}

/// Complex Hessian entries `(u₁₁̄, u₂₂̄, u₁₂̄)` at an interior cell.
fn complex_hessian(u: &[f64], k: usize, st: &[usize], h: &[f64]) -> (f64, f64, C64) {
    let second = |a: usize| (u[k + st[a]] - 2.0 * u[k] + u[k - st[a]]) / (h[a] * h[a]);
    let mixed = |a: usize, b: usize| {
        (u[k + st[a] + st[b]] - u[k + st[a] - st[b]] - u[k - st[a] + st[b]] + u[k - st[a] - st[b]])
            / (4.0 * h[a] * h[b])
    };
    let u11 = 0.25 * (second(0) + second(1));
    let u22 = 0.25 * (second(2) + second(3));
    // ∂_{λ₁}∂_{λ̄₂} = ¼(∂x₁ − i∂y₁)(∂x₂ + i∂y₂)
    let u12 = 0.25 * C64::new(mixed(0, 2) + mixed(1, 3), mixed(0, 3) - mixed(1, 2));
    (u11, u22, u12)
}

fn stencil_offsets(st: &[usize]) -> Vec<isize> {
    let s: Vec<isize> = st.iter().map(|&x| x as isize).collect();
    let mut out = vec![0];
    for a in 0..4 {
        out.push(s[a]);
        out.push(-s[a]);
    }
    for (a, b) in [(0, 2), (1, 3), (0, 3), (1, 2)] {
        for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            out.push(sa * s[a] + sb * s[b]);
        }
    }
    out
}

/// Unscaled wedge density (constant 1) and validity.
fn wedge_raw(u: &ScalarField, v: &ScalarField) -> Result<(Vec<f64>, Vec<bool>)> {
    if u.grid != v.grid {
        return Err(Error::InvalidInput("wedge_density needs two fields on the same grid".into()));
    }
    let grid = &u.grid;
    if grid.dim() != 2 {
        return Err(Error::InvalidInput("wedge_density needs a two-dimensional grid".into()));
    }
    let st = grid.strides();
    let h = grid.steps();
    let offs = stencil_offsets(&st);
    let out: Vec<(f64, bool)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if !grid.is_interior(k, 1) {
                return (0.0, false);
            }
            if offs.iter().any(|&o| u.flagged[(k as isize + o) as usize] || v.flagged[(k as isize + o) as usize]) {
                return (0.0, false);
            }
            let (u11, u22, u12) = complex_hessian(&u.values, k, &st, &h);
            let (v11, v22, v12) = complex_hessian(&v.values, k, &st, &h);
            (u11 * v22 + u22 * v11 - 2.0 * (u12 * v12.conj()).re, true)
        })
        .collect();
    Ok(out.into_iter().unzip())
}

/// Result of calibrating the wedge constant on `u = v = ln(1+|λ₁|²) + ln(1+|λ₂|²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgeCalibration {
    /// Discrete mass with constant 1.
    pub stencil_mass: f64,
    /// `2·m(W)²` with `m(W)` the window mass of `dd^c ln(1+|λ|²)`.
    pub expected_mass: f64,
    pub constant: f64,
}

impl WedgeCalibration {
    pub fn deviation_from_analytic(&self) -> f64 {
        self.constant / WEDGE_ANALYTIC_CONSTANT - 1.0
    }
}

/// Calibrate on a reference grid `[-2,2]²` per axis at 40 cells.
pub fn wedge_calibration() -> WedgeCalibration {
    static CAL: OnceLock<WedgeCalibration> = OnceLock::new();
    *CAL.get_or_init(|| {
        let axis = Axis::new(C64::new(0.0, 0.0), 2.0, 40).expect("reference axis");
        calibrate_on(axis)
    })
}

fn calibrate_on(axis: Axis) -> WedgeCalibration {
    let grid = ParamGrid::two(axis, axis).expect("reference grid");
    let f = ScalarField::from_fn(grid.clone(), "fs", |p| {
        (1.0 + p[0].norm_sqr()).ln() + (1.0 + p[1].norm_sqr()).ln()
    });
    let (raw, valid) = wedge_raw(&f, &f).expect("calibration grid");
    let vol = grid.cell_volume();
    let stencil_mass: f64 = raw.iter().zip(&valid).filter(|(_, &ok)| ok).map(|(x, _)| x * vol).sum();
    // the valid cells cover the square shrunk by one cell
    let m = fs_window_mass(axis.half_width - axis.h());
    let expected_mass = 2.0 * m * m;
    WedgeCalibration {
        stencil_mass,
        expected_mass,
        constant: expected_mass / stencil_mass,
    }
}

pub fn wedge_constant() -> f64 {
    wedge_calibration().constant
}

/// Discrete `dd^c u ∧ dd^c v` on a two-dimensional grid.
pub fn wedge_density(u: &ScalarField, v: &ScalarField) -> Result<DensityField> {
    let (raw, valid) = wedge_raw(u, v)?;
    let c = wedge_constant();
    let density = raw.into_iter().map(|x| c * x).collect();
    Ok(DensityField::build(u.grid.clone(), density, valid, WEDGE_ANALYTIC_CONSTANT / c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_near_inverse_two_pi() {
        assert!((ddc_constant() * 2.0 * PI - 1.0).abs() < 1e-3);
    }

    #[test]
    fn log_mass_on_shifted_grids() {
        for &(cx, cy, hw, res) in &[(0.0, 0.0, 1.0, 512), (0.1, -0.2, 2.0, 256), (0.3, 0.05, 1.5, 128)] {
            let g = ParamGrid::one(C64::new(cx, cy), hw, res).unwrap();
            let f = ScalarField::from_fn(g, "log", |p| p[0].norm().ln());
            let d = ddc_density(&f).unwrap();
            assert!((d.total_mass - 1.0).abs() < 5e-3, "{cx},{cy},{hw},{res}: {}", d.total_mass);
        }
    }

    #[test]
    fn harmonic_field_has_no_mass() {
        let g = ParamGrid::one(C64::new(0.0, 0.0), 1.0, 64).unwrap();
        let f = ScalarField::from_fn(g, "re z2", |p| (p[0] * p[0]).re);
        let d = ddc_density(&f).unwrap();
        assert!(d.total_mass.abs() < 1e-9);
        for x in d.density {
            assert!(x.abs() < 1e-7);
        }
    }

    #[test]
    fn flagged_cells_invalidate_stencils() {
        let g = ParamGrid::one(C64::new(0.0, 0.0), 1.0, 16).unwrap();
        let mut f = ScalarField::from_fn(g, "x", |p| p[0].norm_sqr());
        f.flagged[5 * 16 + 5] = true;
        let d = ddc_density(&f).unwrap();
        assert!(!d.valid[5 * 16 + 5] && !d.valid[5 * 16 + 6] && !d.valid[6 * 16 + 5]);
        assert!(d.valid[8 * 16 + 8]);
        assert_eq!(d.invalid_interior_count(), 5);
    }

    #[test]
    fn quadratic_form_pairs() {
        // u = v = |λ₁|² + |λ₂|²: u₁₁̄ = u₂₂̄ = 1, u₁₂̄ = 0, density 2·C.
        let a = Axis::new(C64::new(0.0, 0.0), 1.0, 16).unwrap();
        let g = ParamGrid::two(a, a).unwrap();
        let f = ScalarField::from_fn(g, "q", |p| p[0].norm_sqr() + p[1].norm_sqr());
        let (raw, valid) = wedge_raw(&f, &f).unwrap();
        for (x, ok) in raw.iter().zip(valid) {
            if ok {
                assert!((x - 2.0).abs() < 1e-9);
            }
        }
        // u = Re(λ₁ λ̄₂): u₁₂̄ = ½, u₁₁̄ = u₂₂̄ = 0, self-wedge −2·¼ = −½.
        let f = ScalarField::from_fn(f.grid.clone(), "m", |p| (p[0] * p[1].conj()).re);
        let (raw, valid) = wedge_raw(&f, &f).unwrap();
        for (x, ok) in raw.iter().zip(valid) {
            if ok {
                assert!((x + 0.5).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pluriharmonic_factor_kills_wedge() {
        let a = Axis::new(C64::new(0.0, 0.0), 1.0, 16).unwrap();
        let g = ParamGrid::two(a, a).unwrap();
        let u = ScalarField::from_fn(g.clone(), "u", |p| (p[0] * p[1]).re + (p[0] * p[0]).im);
        let v = ScalarField::from_fn(g, "v", |p| p[0].norm_sqr() * p[1].norm_sqr());
        let d = wedge_density(&u, &v).unwrap();
        assert!(d.total_mass.abs() < 1e-8);
    }

    #[test]
    fn calibration_close_to_analytic() {
        let cal = wedge_calibration();
        assert!(cal.deviation_from_analytic().abs() < 0.02, "{cal:?}");
    }
}
