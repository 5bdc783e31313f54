//! CSV and 16-bit PGM output.
//!
//! Floats are written with 17 significant digits so that they round-trip.

use std::io::{self, Write};

use crate::bifurcation::{DensityField, ParamGrid, ScalarField};
use crate::cycles::CycleRecord;
use crate::green::SampleCloud;
use crate::C64;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_io(e: csv::Error) -> io::Error {
    io::Error::new(io::ErrorKind::Other, e)
}

fn grid_rows<W: Write>(w: W, grid: &ParamGrid, values: &[f64]) -> io::Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    if grid.dim() == 1 {
        out.write_record(["x", "y", "value"]).map_err(to_io)?;
    } else {
        out.write_record(["x1", "y1", "x2", "y2", "value"]).map_err(to_io)?;
    }
    for (k, &v) in values.iter().enumerate() {
        let mut rec: Vec<String> = grid.point(k).iter().flat_map(|z| [num(z.re), num(z.im)]).collect();
        rec.push(num(v));
        out.write_record(&rec).map_err(to_io)?;
    }
    out.flush()
}

/// `x,y,value` (or `x1,y1,x2,y2,value`), one row per cell.
pub fn write_field_csv<W: Write>(w: W, field: &ScalarField) -> io::Result<()> {
    grid_rows(w, &field.grid, &field.values)
}

/// Density per cell; invalid cells are written as 0.
pub fn write_density_csv<W: Write>(w: W, density: &DensityField) -> io::Result<()> {
    grid_rows(w, &density.grid, &density.density)
}

/// Linear min–max scaling to 16 bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgmScale {
    pub min: f64,
    pub max: f64,
}

impl PgmScale {
    pub fn sidecar(&self) -> String {
        format!("min {}\nmax {}\n", num(self.min), num(self.max))
    }
}

/// Binary PGM (`P5`, 16-bit big-endian). Imaginary part grows upward.
/// Two-dimensional grids are sliced at the center of the second axis.
pub fn write_pgm<W: Write>(mut w: W, grid: &ParamGrid, values: &[f64]) -> io::Result<PgmScale> {
    let n = grid.axes()[0].res;
    let offset = if grid.dim() == 2 {
        let m = grid.axes()[1].res;
        grid.flatten(&[0, 0, m / 2, m / 2])
    } else {
        0
    };
    let slice: Vec<f64> = (0..n * n).map(|k| values[offset + k]).collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in slice.iter().filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 0.0;
    }
    let span = hi - lo;
    write!(w, "P5\n{n} {n}\n65535\n")?;
    let mut buf = Vec::with_capacity(2 * n * n);
    for j in (0..n).rev() {
        for i in 0..n {
            let v = slice[j * n + i];
            let q = if span > 0.0 && v.is_finite() {
                ((v - lo) / span * 65535.0).round().clamp(0.0, 65535.0) as u16
            } else {
                0
            };
            buf.extend_from_slice(&q.to_be_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(PgmScale { min: lo, max: hi })
}

/// `n,re_z,im_z,re_w,im_w,class`
pub fn write_cycles_csv<W: Write>(w: W, cycles: &[CycleRecord]) -> io::Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(["n", "re_z", "im_z", "re_w", "im_w", "class"]).map_err(to_io)?;
    for c in cycles {
        let z = if c.at_infinity { C64::new(f64::INFINITY, 0.0) } else { c.point };
        out.write_record([
            c.period.to_string(),
            num(z.re),
            num(z.im),
            num(c.multiplier.re),
            num(c.multiplier.im),
            c.class.as_str().to_string(),
        ])
        .map_err(to_io)?;
    }
    out.flush()
}

/// `re,im` in the affine chart `z₁/z₂`.
pub fn write_samples_csv<W: Write>(w: W, cloud: &SampleCloud) -> io::Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(["re", "im"]).map_err(to_io)?;
    for z in cloud.affine() {
        out.write_record([num(z.re), num(z.im)]).map_err(to_io)?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_doubles() {
        let g = ParamGrid::one(C64::new(0.1, -0.3), 1.0, 16).unwrap();
        let f = ScalarField::from_fn(g, "t", |p| (p[0].re * 1e-7).exp() / 3.0);
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,y,value"));
        for (line, v) in lines.zip(&f.values) {
            let parsed: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert_eq!(parsed, *v);
        }
        assert!(!text.contains('\r'));
    }

    #[test]
    fn pgm_header_and_size() {
        let g = ParamGrid::one(C64::new(0.0, 0.0), 1.0, 16).unwrap();
        let f = ScalarField::from_fn(g.clone(), "t", |p| p[0].re);
        let mut buf = Vec::new();
        let scale = write_pgm(&mut buf, &g, &f.values).unwrap();
        let header = b"P5\n16 16\n65535\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(buf.len(), header.len() + 2 * 256);
        assert!(scale.min < scale.max);
        // first pixel of the top row is the leftmost cell: value min → 0
        assert_eq!(&buf[header.len()..header.len() + 2], &[0, 0]);
    }
}
