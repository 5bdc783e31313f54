use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::density::DensityField;
use super::grid::{ParamGrid, ScalarField};
use crate::error::{Error, Result};

/// Escape-time membership in the Mandelbrot set: 1 inside, 0 outside.
pub fn mandelbrot_mask(grid: &ParamGrid, max_iter: usize) -> Result<ScalarField> {
    if grid.dim() != 1 {
        return Err(Error::InvalidInput("mandelbrot_mask needs a one-dimensional grid".into()));
    }
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let c = grid.point(k)[0];
            let mut z = C64::new(0.0, 0.0);
            for _ in 0..max_iter {
                z = z * z + c;
                if z.norm_sqr() > 4.0 {
                    return 0.0;
                }
            }
            1.0
        })
        .collect();
    let flagged = vec![false; values.len()];
    Ok(ScalarField::new(grid.clone(), values, flagged, "mandelbrot_mask"))
}

/// Escape-time mask thickened by the distance estimate: a cell counts as
/// inside when its orbit stays bounded or when `2|z|ln|z|/|dz/dc|` at escape
/// is at most `2√2 h`. The estimate is at most four times the distance to the
/// Mandelbrot set, so every cell meeting the set is kept, including the hairs
/// that are thinner than a cell.
pub fn mandelbrot_closure_mask(grid: &ParamGrid, max_iter: usize) -> Result<ScalarField> {
    if grid.dim() != 1 {
        return Err(Error::InvalidInput("mandelbrot_closure_mask needs a one-dimensional grid".into()));
    }
    let reach = 2.0 * std::f64::consts::SQRT_2 * grid.axes()[0].h();
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let c = grid.point(k)[0];
            let (mut z, mut dz) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            for _ in 0..max_iter {
                dz = 2.0 * z * dz + 1.0;
                z = z * z + c;
                if z.norm_sqr() > 1e20 {
                    let r = z.norm();
                    let de = 2.0 * r * r.ln() / dz.norm();
                    return if de <= reach { 1.0 } else { 0.0 };
                }
            }
            1.0
        })
        .collect();
    let flagged = vec![false; values.len()];
    Ok(ScalarField::new(grid.clone(), values, flagged, "mandelbrot_closure_mask"))
}

/// Cells of a 0/1 mask with a 4-neighbour of the other kind.
pub fn boundary_cells(mask: &ScalarField) -> Vec<bool> {
    let n = mask.grid.axes()[0].res;
    let m = &mask.values;
    (0..m.len())
        .map(|k| {
            let (i, j) = (k % n, k / n);
            let inside = m[k] > 0.5;
            let differs = |q: usize| (m[q] > 0.5) != inside;
            (i > 0 && differs(k - 1))
                || (i + 1 < n && differs(k + 1))
                || (j > 0 && differs(k - n))
                || (j + 1 < n && differs(k + n))
        })
        .collect()
}

/// Cells whose center lies within `dist` of the center of a marked cell
/// (disk dilation on a one-dimensional grid).
pub fn distance_mask(grid: &ParamGrid, marked: &[bool], dist: f64) -> Vec<bool> {
    let n = grid.axes()[0].res;
    let h = grid.axes()[0].h();
    let r = (dist / h).floor() as isize;
    let r2 = (dist / h) * (dist / h);
    // per-row difference arrays
    let mut diff = vec![0i32; n * (n + 1)];
    for k in (0..marked.len()).filter(|&k| marked[k]) {
        let (i, j) = ((k % n) as isize, (k / n) as isize);
        for dy in -r..=r {
            let y = j + dy;
            if y < 0 || y >= n as isize {
                continue;
            }
            let w = (r2 - (dy * dy) as f64).max(0.0).sqrt().floor() as isize;
            let lo = (i - w).max(0) as usize;
            let hi = ((i + w).min(n as isize - 1) + 1) as usize;
            let row = y as usize * (n + 1);
            diff[row + lo] += 1;
            diff[row + hi] -= 1;
        }
    }
    let mut out = vec![false; n * n];
    for y in 0..n {
        let mut acc = 0;
        for x in 0..n {
            acc += diff[y * (n + 1) + x];
            out[y * n + x] = acc > 0;
        }
    }
    out
}

/// Mass of the valid cells selected by `select`.
pub fn mass_where(density: &DensityField, select: &[bool]) -> f64 {
    density
        .cell_masses()
        .iter()
        .zip(select)
        .filter(|(_, &s)| s)
        .map(|(m, _)| m)
        .sum()
}

/// Mass of `dd^c ln(1+|λ|²)` on the square `[-a, a]²`:
/// `∫∫ 2 / (π (1+x²+y²)²)`, inner integral in closed form, outer by
/// composite Simpson.
pub fn fs_window_mass(a: f64) -> f64 {
    let inner = |x: f64| {
        let b = 1.0 + x * x;
        a / (b * (b + a * a)) + (a / b.sqrt()).atan() / b.powf(1.5)
    };
    let n = 4000;
    let h = 2.0 * a / n as f64;
    let mut s = inner(-a) + inner(a);
    for k in 1..n {
        let x = -a + k as f64 * h;
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * inner(x);
    }
    2.0 / PI * s * h / 3.0
}

/// Total-variation distance between a weighted point set and a density on a
/// one-dimensional grid, after binning both into `block × block` cell blocks.
///
/// Both sides are normalized to probability measures over the window; the
/// density is truncated to its positive part. Points outside the grid are
/// ignored.
pub fn empirical_vs_density(points: &[(C64, f64)], density: &DensityField, block: usize) -> Result<f64> {
    let grid = &density.grid;
    if grid.dim() != 1 {
        return Err(Error::InvalidInput("empirical_vs_density needs a one-dimensional grid".into()));
    }
    if block == 0 {
        return Err(Error::InvalidInput("block size must be >= 1".into()));
    }
    let axis = grid.axes()[0];
    let n = axis.res;
    let nb = n.div_ceil(block);
    let mut p = vec![0.0; nb * nb];
    for &(z, w) in points {
        if let Some((i, j)) = axis.cell_of(z) {
            p[(j / block) * nb + i / block] += w;
        }
    }
    let mut q = vec![0.0; nb * nb];
    for (k, m) in density.cell_masses().into_iter().enumerate() {
        if m > 0.0 {
            q[(k / n / block) * nb + (k % n) / block] += m;
        }
    }
    let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
    if !(sp > 0.0) || !(sq > 0.0) {
        return Err(Error::InvalidInput("empty measure in TV comparison".into()));
    }
    Ok(0.5 * p.iter().zip(&q).map(|(a, b)| (a / sp - b / sq).abs()).sum::<f64>())
}
