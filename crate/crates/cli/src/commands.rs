use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use clap::Args;
use holodyn::bifurcation::{
    boundary_cells, ddc_density, distance_mask, mandelbrot_closure_mask, mandelbrot_mask, mass_where, scan_activity,
    scan_l, scan_lnr, wedge_density, Axis, DensityField, ParamGrid, ScalarField, ScanMethod,
};
use holodyn::cycles::{per_n_centers, per_n_w};
use holodyn::export::{write_density_csv, write_field_csv, write_pgm};
use holodyn::lyapunov::{lyap_birkhoff, lyap_cycles, lyap_formula, LyapEstimate};
use holodyn::maps::{instantiate, Family};
use holodyn::C64;

use crate::config::{grid_spec, parse_complex, parse_family, parse_grid, Overrides, RunConfig};
use crate::{CliError, Common};

pub fn setup(common: &Common) -> Result<usize, CliError> {
    if common.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(common.workers)
            .build_global()
            .map_err(|e| CliError::Invalid(format!("cannot start worker pool: {e}")))?;
    }
    Ok(rayon::current_num_threads())
}

fn create(path: &str) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = Path::new(path).parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_config(prefix: &str, cfg: &RunConfig) -> Result<(), CliError> {
    let mut f = create(&format!("{prefix}.config.txt"))?;
    write!(f, "{cfg}")?;
    f.flush()?;
    Ok(())
}

fn config(sub: &str, common: &Common, workers: usize, entries: Vec<(&str, String)>) -> Result<RunConfig, CliError> {
    Ok(RunConfig {
        subcommand: sub.into(),
        entries: entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        seed: common.seed,
        workers,
        overrides: Overrides::parse(&common.set)?,
    })
}

fn params_spec(p: &[C64]) -> String {
    p.iter().map(|z| format!("{},{}", z.re, z.im)).collect::<Vec<_>>().join(";")
}

fn parse_params(items: &[String], family: Family) -> Result<Vec<C64>, CliError> {
    let params = items
        .iter()
        .flat_map(|s| s.split(';'))
        .filter(|s| !s.trim().is_empty())
        .map(parse_complex)
        .collect::<Result<Vec<_>, _>>()?;
    if params.len() != family.param_dim() {
        return Err(CliError::Invalid(format!(
            "{family} expects {} complex parameters, got {}",
            family.param_dim(),
            params.len()
        )));
    }
    Ok(params)
}

#[derive(Debug, Args)]
pub struct LyapArgs {
    #[arg(long, default_value = "quadratic")]
    pub family: String,
    /// Complex parameter `re,im`; repeat (or separate with `;`) for several.
    #[arg(long, allow_hyphen_values = true)]
    pub param: Vec<String>,
    /// formula, cycles, birkhoff or all.
    #[arg(long, default_value = "all")]
    pub method: String,
    #[command(flatten)]
    pub common: Common,
}

pub fn lyap(a: LyapArgs) -> Result<(), CliError> {
    let workers = setup(&a.common)?;
    let family = parse_family(&a.family)?;
    let params = if a.param.is_empty() {
        vec![C64::new(0.0, 0.0); family.param_dim()]
    } else {
        parse_params(&a.param, family)?
    };
    let cfg = config(
        "lyap",
        &a.common,
        workers,
        vec![("family", family.to_string()), ("params", params_spec(&params)), ("method", a.method.clone())],
    )?;
    let methods: Vec<&str> = match a.method.as_str() {
        "all" => vec!["formula", "cycles", "birkhoff"],
        m @ ("formula" | "cycles" | "birkhoff") => vec![m],
        m => return Err(CliError::Invalid(format!("unknown method '{m}'"))),
    };
    let n_max: usize = cfg.overrides.get("n_max")?;
    let samples: usize = cfg.overrides.get("samples")?;
    let agree: f64 = cfg.overrides.get("agree")?;
    if let Some(prefix) = &a.common.out {
        write_config(prefix, &cfg)?;
    }
    let m = instantiate(family, &params)?;
    let mut rows: Vec<LyapEstimate> = Vec::new();
    for method in methods {
        rows.push(match method {
            "formula" => lyap_formula(&m)?,
            "cycles" => lyap_cycles(&m, n_max)?,
            _ => lyap_birkhoff(&m, samples, a.common.seed)?,
        });
    }
    println!("{:<10} {:>22} {:>12} {:>8}", "method", "value", "error", "flagged");
    for r in &rows {
        println!("{:<10} {:>22.16} {:>12.3e} {:>8}", r.method.to_string(), r.value, r.error, r.flagged);
    }
    if let Some(prefix) = &a.common.out {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(create(&format!("{prefix}.csv"))?);
        out.write_record(["method", "value", "error", "stderr", "flagged"]).map_err(csv_err)?;
        for r in &rows {
            out.write_record([
                r.method.to_string(),
                fmt(r.value),
                fmt(r.error),
                fmt(r.stderr),
                r.flagged.to_string(),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
    }
    let mut failures = Vec::new();
    for (i, x) in rows.iter().enumerate() {
        for y in &rows[i + 1..] {
            let gap = (x.value - y.value).abs();
            if !(gap <= agree) {
                failures.push(format!("{} vs {} differ by {gap:.3e}", x.method, y.method));
            }
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failures.join("; ")))
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Invalid(format!("csv: {e}"))
}

/// What `scan` and `density` evaluate on each cell.
#[derive(Debug, Clone, Copy, PartialEq)]
enum FieldSpec {
    L,
    Activity(usize),
    Lnr(usize, f64),
    Log,
    Mask,
}

fn parse_field(s: &str) -> Result<FieldSpec, CliError> {
    let bad = || CliError::Invalid(format!("unknown field '{s}' (L, activity:<i>, lnr:<n>:<r>, log, mask)"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["L"] => Ok(FieldSpec::L),
        ["log"] => Ok(FieldSpec::Log),
        ["mask"] => Ok(FieldSpec::Mask),
        ["activity", i] => Ok(FieldSpec::Activity(i.parse().map_err(|_| bad())?)),
        ["lnr", n, r] => Ok(FieldSpec::Lnr(n.parse().map_err(|_| bad())?, r.parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

fn parse_method(s: &str, o: &Overrides, seed: u64) -> Result<ScanMethod, CliError> {
    match s {
        "formula" => Ok(ScanMethod::Formula),
        "cycles" => Ok(ScanMethod::Cycles { n_max: o.get("n_max")? }),
        "birkhoff" => Ok(ScanMethod::Birkhoff {
            samples: o.get("samples")?,
            seed,
        }),
        m => Err(CliError::Invalid(format!("unknown scan method '{m}'"))),
    }
}

fn compute_field(
    family: Family,
    grid: &ParamGrid,
    field: FieldSpec,
    method: ScanMethod,
    o: &Overrides,
) -> Result<ScalarField, CliError> {
    Ok(match field {
        FieldSpec::L => scan_l(family, grid, method)?,
        FieldSpec::Activity(i) => scan_activity(family, grid, i)?,
        FieldSpec::Lnr(n, r) => scan_lnr(family, grid, n, r)?,
        FieldSpec::Log => ScalarField::from_fn(grid.clone(), "log", |p| p.iter().map(|z| z.norm().ln()).sum()),
        FieldSpec::Mask => {
            if family != Family::Quadratic {
                return Err(CliError::Invalid("the mask field is defined for the quadratic family".into()));
            }
            mandelbrot_mask(grid, o.get("max_iter")?)?
        }
    })
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, default_value = "quadratic")]
    pub family: String,
    /// `cx,cy,halfw,res[,cx2,cy2,halfw2,res2]`
    #[arg(long, default_value = "-0.5,0,2,256", allow_hyphen_values = true)]
    pub grid: String,
    /// L, activity:<i>, lnr:<n>:<r>, log or mask.
    #[arg(long, default_value = "L")]
    pub field: String,
    /// formula, cycles or birkhoff (for the L field).
    #[arg(long, default_value = "formula")]
    pub method: String,
    #[command(flatten)]
    pub common: Common,
}

pub fn scan(a: ScanArgs) -> Result<(), CliError> {
    let workers = setup(&a.common)?;
    let family = parse_family(&a.family)?;
    let grid = parse_grid(&a.grid)?;
    let field = parse_field(&a.field)?;
    let prefix = a.common.out.clone().unwrap_or_else(|| "holodyn_scan".into());
    let cfg = config(
        "scan",
        &a.common,
        workers,
        vec![
            ("family", family.to_string()),
            ("grid", grid_spec(&grid)),
            ("field", a.field.clone()),
            ("method", a.method.clone()),
            ("out", prefix.clone()),
        ],
    )?;
    let method = parse_method(&a.method, &cfg.overrides, a.common.seed)?;
    write_config(&prefix, &cfg)?;
    let f = compute_field(family, &grid, field, method, &cfg.overrides)?;
    write_field(&prefix, &f)?;
    println!(
        "{}: {} cells, min {:.16e}, max {:.16e}, flagged {}",
        f.label,
        grid.len(),
        f.min(),
        f.max(),
        f.flagged_count()
    );
    Ok(())
}

fn write_field(prefix: &str, f: &ScalarField) -> Result<(), CliError> {
    let mut w = create(&format!("{prefix}.csv"))?;
    write_field_csv(&mut w, f)?;
    w.flush()?;
    let mut w = create(&format!("{prefix}.pgm"))?;
    let scale = write_pgm(&mut w, &f.grid, &f.values)?;
    w.flush()?;
    std::fs::write(format!("{prefix}.pgm.txt"), scale.sidecar())?;
    Ok(())
}

/// Rebuild a field from a CSV written by `scan`.
fn read_field(path: &str) -> Result<ScalarField, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let cols = r.headers().map_err(csv_err)?.len();
    if cols != 3 && cols != 5 {
        return Err(CliError::Invalid(format!("{path}: expected 3 or 5 columns, found {cols}")));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|x| x.parse::<f64>().map_err(|_| CliError::Invalid(format!("{path}: bad number '{x}'"))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let axes = (0..(cols - 1) / 2)
        .map(|ax| {
            let mut xs: Vec<f64> = rows.iter().map(|r| r[2 * ax]).collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
            let mut ys: Vec<f64> = rows.iter().map(|r| r[2 * ax + 1]).collect();
            ys.sort_by(f64::total_cmp);
            ys.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
            let res = xs.len();
            if res < 2 || ys.len() != res {
                return Err(CliError::Invalid(format!("{path}: cells do not form a square grid")));
            }
            let h = (xs[res - 1] - xs[0]) / (res - 1) as f64;
            let center = C64::new((xs[0] + xs[res - 1]) / 2.0, (ys[0] + ys[res - 1]) / 2.0);
            Axis::new(center, h * res as f64 / 2.0, res).map_err(CliError::from)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let grid = ParamGrid::new(axes)?;
    if grid.len() != rows.len() {
        return Err(CliError::Invalid(format!("{path}: {} rows for a grid of {} cells", rows.len(), grid.len())));
    }
    for (k, row) in rows.iter().enumerate() {
        let p = grid.point(k);
        let scale = grid.steps()[0];
        let ok = p
            .iter()
            .enumerate()
            .all(|(ax, z)| (z.re - row[2 * ax]).abs() < 1e-6 * scale && (z.im - row[2 * ax + 1]).abs() < 1e-6 * scale);
        if !ok {
            return Err(CliError::Invalid(format!("{path}: row {} is out of grid order", k + 1)));
        }
    }
    let values = rows.iter().map(|r| r[cols - 1]).collect();
    Ok(ScalarField::new(grid.clone(), values, vec![false; grid.len()], "input"))
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Field CSV written by `scan`; replaces --family/--grid/--field.
    #[arg(long = "in")]
    pub input: Option<String>,
    #[arg(long, default_value = "quadratic")]
    pub family: String,
    #[arg(long, default_value = "-0.5,0,2,256", allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long, default_value = "L")]
    pub field: String,
    #[arg(long, default_value = "formula")]
    pub method: String,
    /// Two-parameter grids: `i,j` for T_i ∧ T_j, or `self` for the
    /// wedge of the field with itself.
    #[arg(long, default_value = "0,1")]
    pub wedge: String,
    #[command(flatten)]
    pub common: Common,
}

/// Polydisk containing the connectedness locus of `P_{c,a}` in degree 3.
fn cubic_polydisk() -> (f64, f64) {
    let rc = 48f64.cbrt();
    (rc, (4.0 + rc / 2.0).cbrt())
}

pub fn density(a: DensityArgs) -> Result<(), CliError> {
    let workers = setup(&a.common)?;
    let prefix = a.common.out.clone().unwrap_or_else(|| "holodyn_density".into());
    let mut entries = vec![("out", prefix.clone())];
    let (family, grid) = match &a.input {
        Some(path) => {
            entries.push(("in", path.clone()));
            (None, None)
        }
        None => {
            let family = parse_family(&a.family)?;
            let grid = parse_grid(&a.grid)?;
            entries.push(("family", family.to_string()));
            entries.push(("grid", grid_spec(&grid)));
            entries.push(("field", a.field.clone()));
            entries.push(("method", a.method.clone()));
            (Some(family), Some(grid))
        }
    };
    entries.push(("wedge", a.wedge.clone()));
    let cfg = config("density", &a.common, workers, entries)?;
    let method = parse_method(&a.method, &cfg.overrides, a.common.seed)?;
    write_config(&prefix, &cfg)?;

    let mut report: Vec<(String, String)> = Vec::new();
    let d: DensityField = match (&a.input, family, grid) {
        (Some(path), _, _) => {
            let f = read_field(path)?;
            if f.grid.dim() == 1 {
                ddc_density(&f)?
            } else {
                wedge_density(&f, &f)?
            }
        }
        (None, Some(family), Some(grid)) if grid.dim() == 1 => {
            let f = compute_field(family, &grid, parse_field(&a.field)?, method, &cfg.overrides)?;
            report.push(("flagged_cells".into(), f.flagged_count().to_string()));
            let d = ddc_density(&f)?;
            if family == Family::Quadratic && parse_field(&a.field)? == FieldSpec::L {
                let mask = mandelbrot_closure_mask(&grid, cfg.overrides.get("max_iter")?)?;
                let near = distance_mask(&grid, &boundary_cells(&mask), 0.2);
                report.push(("near_boundary_fraction".into(), fmt(mass_where(&d, &near) / d.total_mass)));
            }
            d
        }
        (None, Some(family), Some(grid)) => {
            let (u, v) = if a.wedge == "self" {
                let f = compute_field(family, &grid, parse_field(&a.field)?, method, &cfg.overrides)?;
                (f.clone(), f)
            } else {
                let (i, j) = a
                    .wedge
                    .split_once(',')
                    .and_then(|(i, j)| Some((i.trim().parse().ok()?, j.trim().parse().ok()?)))
                    .ok_or_else(|| CliError::Invalid(format!("--wedge expects i,j or self, got '{}'", a.wedge)))?;
                (scan_activity(family, &grid, i)?, scan_activity(family, &grid, j)?)
            };
            report.push((
                "flagged_cells".into(),
                (0..grid.len()).filter(|&k| u.flagged[k] || v.flagged[k]).count().to_string(),
            ));
            let d = wedge_density(&u, &v)?;
            if family == (Family::PolyCA { degree: 3 }) {
                let (rc, ra) = cubic_polydisk();
                let outside: Vec<bool> = (0..grid.len())
                    .map(|k| {
                        let p = grid.point(k);
                        p[0].norm() > rc || p[1].norm() > ra
                    })
                    .collect();
                report.push(("outside_polydisk_fraction".into(), fmt(mass_where(&d, &outside) / d.total_mass)));
            }
            d
        }
        _ => unreachable!("family and grid are set together"),
    };
    let mut w = create(&format!("{prefix}.density.csv"))?;
    write_density_csv(&mut w, &d)?;
    w.flush()?;
    let mut lines = vec![
        ("total_mass".to_string(), fmt(d.total_mass)),
        ("raw_mass".to_string(), fmt(d.raw_mass)),
        ("negative_mass_fraction".to_string(), fmt(d.negative_mass_fraction)),
        ("invalid_interior_cells".to_string(), d.invalid_interior_count().to_string()),
    ];
    lines.extend(report);
    let text: String = lines.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    std::fs::write(format!("{prefix}.mass.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

#[derive(Debug, Args)]
pub struct CentersArgs {
    /// Period.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Multiplier `re,im`.
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    pub w: String,
    #[command(flatten)]
    pub common: Common,
}

/// Multiplier of the orbit of `z` under `z² + c` after `n` steps.
fn multiplier(c: C64, z: C64, n: usize) -> C64 {
    let mut x = z;
    let mut w = C64::new(1.0, 0.0);
    for _ in 0..n {
        w *= 2.0 * x;
        x = x * x + c;
    }
    w
}

pub fn centers(a: CentersArgs) -> Result<(), CliError> {
    let workers = setup(&a.common)?;
    let w = parse_complex(&a.w)?;
    let prefix = a.common.out.clone().unwrap_or_else(|| "holodyn_centers".into());
    let cfg = config(
        "centers",
        &a.common,
        workers,
        vec![("n", a.n.to_string()), ("w", format!("{},{}", w.re, w.im)), ("out", prefix.clone())],
    )?;
    write_config(&prefix, &cfg)?;
    let (rows, failures): (Vec<(C64, C64)>, usize) = if w == C64::new(0.0, 0.0) {
        (per_n_centers(a.n)?.into_iter().map(|c| (c, C64::new(0.0, 0.0))).collect(), 0)
    } else {
        let r = per_n_w(a.n, w)?;
        (r.solutions.iter().map(|s| (s.c, s.z)).collect(), r.failures.len())
    };
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(&format!("{prefix}.csv"))?);
    out.write_record(["re_c", "im_c", "re_z", "im_z", "re_w", "im_w", "residual"]).map_err(csv_err)?;
    for &(c, z) in &rows {
        let m = multiplier(c, z, a.n);
        out.write_record([fmt(c.re), fmt(c.im), fmt(z.re), fmt(z.im), fmt(m.re), fmt(m.im), fmt((m - w).norm())])
            .map_err(csv_err)?;
    }
    out.flush()?;
    println!("{} parameters with a period-{} cycle of multiplier {w}", rows.len(), a.n);
    if failures > 0 {
        return Err(CliError::Numeric(format!("{failures} continuations from centers did not converge")));
    }
    Ok(())
}
