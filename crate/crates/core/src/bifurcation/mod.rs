//! Parameter-grid scans, discrete `dd^c` and mixed Monge–Ampère densities,
//! and measure comparisons.

mod density;
mod grid;
mod measure;
mod scan;

pub use density::{
    ddc_constant, ddc_density, wedge_calibration, wedge_constant, wedge_density, DensityField, WedgeCalibration,
    WEDGE_ANALYTIC_CONSTANT,
};
pub use grid::{Axis, ParamGrid, ScalarField};
pub use measure::{
    boundary_cells, distance_mask, empirical_vs_density, fs_window_mass, mandelbrot_closure_mask, mandelbrot_mask, mass_where,
};
pub use scan::{lnr_value, scan_activity, scan_l, scan_lnr, ScanMethod};
