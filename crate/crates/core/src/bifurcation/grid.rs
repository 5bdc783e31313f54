use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// One complex axis: a square of `res × res` cells centered at `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub center: C64,
    pub half_width: f64,
    pub res: usize,
}

impl Axis {
    pub fn new(center: C64, half_width: f64, res: usize) -> Result<Self> {
        if res < 16 {
            return Err(Error::InvalidInput(format!("grid resolution must be >= 16, got {res}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() || !center.re.is_finite() || !center.im.is_finite() {
            return Err(Error::InvalidInput("grid needs a finite center and positive half-width".into()));
        }
        Ok(Self {
            center,
            half_width,
            res,
        })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.res as f64
    }

    /// Cell center `(i, j)`: `i` along the real direction, `j` along the imaginary one.
    pub fn node(&self, i: usize, j: usize) -> C64 {
        let h = self.h();
        C64::new(
            self.center.re - self.half_width + (i as f64 + 0.5) * h,
            self.center.im - self.half_width + (j as f64 + 0.5) * h,
        )
    }

    /// Cell containing `z`, if any.
    pub fn cell_of(&self, z: C64) -> Option<(usize, usize)> {
        let h = self.h();
        let fi = (z.re - (self.center.re - self.half_width)) / h;
        let fj = (z.im - (self.center.im - self.half_width)) / h;
        if fi < 0.0 || fj < 0.0 || !fi.is_finite() || !fj.is_finite() {
            return None;
        }
        let (i, j) = (fi as usize, fj as usize);
        (i < self.res && j < self.res).then_some((i, j))
    }
}

/// A grid over one or two complex parameters.
///
/// Cells are stored with the first real direction fastest:
/// `(x₁, y₁)` for one axis, `(x₁, y₁, x₂, y₂)` for two.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    axes: Vec<Axis>,
}

impl ParamGrid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::InvalidInput("grids have one or two complex axes".into()));
        }
        Ok(Self { axes })
    }

    pub fn one(center: C64, half_width: f64, res: usize) -> Result<Self> {
        Self::new(vec![Axis::new(center, half_width, res)?])
    }

    pub fn two(a: Axis, b: Axis) -> Result<Self> {
        Self::new(vec![a, b])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    /// Real shape, fastest direction first.
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().flat_map(|a| [a.res, a.res]).collect()
    }

    /// Cell size along each real direction.
    pub fn steps(&self) -> Vec<f64> {
        self.axes.iter().flat_map(|a| [a.h(), a.h()]).collect()
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lebesgue measure of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.steps().iter().product()
    }

    /// Multi-index of a flat cell index.
    pub fn unflatten(&self, mut idx: usize) -> Vec<usize> {
        self.shape()
            .iter()
            .map(|&n| {
                let k = idx % n;
                idx /= n;
                k
            })
            .collect()
    }

    pub fn flatten(&self, ix: &[usize]) -> usize {
        let shape = self.shape();
        let mut idx = 0;
        for k in (0..shape.len()).rev() {
            idx = idx * shape[k] + ix[k];
        }
        idx
    }

    /// Parameter point at a flat cell index.
    pub fn point(&self, idx: usize) -> Vec<C64> {
        let ix = self.unflatten(idx);
        self.axes
            .iter()
            .enumerate()
            .map(|(k, a)| a.node(ix[2 * k], ix[2 * k + 1]))
            .collect()
    }

    /// Flat strides along each real direction.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = Vec::new();
        let mut acc = 1;
        for n in self.shape() {
            s.push(acc);
            acc *= n;
        }
        s
    }

    /// True when the cell is at least `margin` cells from every face.
    pub fn is_interior(&self, idx: usize, margin: usize) -> bool {
        self.unflatten(idx)
            .iter()
            .zip(self.shape())
            .all(|(&k, n)| k >= margin && k + margin < n)
    }
}

/// A real-valued field on a parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: ParamGrid,
    pub values: Vec<f64>,
    /// Cells whose value could not be decided.
    pub flagged: Vec<bool>,
    pub label: String,
}

impl ScalarField {
    pub fn new(grid: ParamGrid, values: Vec<f64>, flagged: Vec<bool>, label: impl Into<String>) -> Self {
        assert_eq!(values.len(), grid.len());
        assert_eq!(flagged.len(), grid.len());
        Self {
            grid,
            values,
            flagged,
            label: label.into(),
        }
    }

    /// Field from a closure of the parameter point.
    pub fn from_fn(grid: ParamGrid, label: &str, f: impl Fn(&[C64]) -> f64 + Sync) -> Self {
        use rayon::prelude::*;
        let values: Vec<f64> = (0..grid.len()).into_par_iter().map(|i| f(&grid.point(i))).collect();
        let flagged = vec![false; values.len()];
        Self::new(grid, values, flagged, label)
    }

    pub fn flagged_count(&self) -> usize {
        self.flagged.iter().filter(|&&f| f).count()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}
