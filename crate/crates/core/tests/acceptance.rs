//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with `cargo test --test acceptance`. Set `ACCEPTANCE_STRICT=1` to
//! exit nonzero when any criterion fails. `ACCEPTANCE_CUBIC_RES` overrides
//! the per-real-axis resolution of the cubic (four real dimensional) grids.

use std::f64::consts::{LN_2, TAU};
use std::time::Instant;

use holodyn::bifurcation::{
    boundary_cells, ddc_density, distance_mask, empirical_vs_density, lnr_value, mandelbrot_closure_mask, mandelbrot_mask, mass_where, scan_activity,
    scan_l, wedge_density, Axis, DensityField, ParamGrid, ScalarField, ScanMethod,
};
use holodyn::cycles::{dynatomic, per_n_centers};
use holodyn::green::green_lift;
use holodyn::lyapunov::{lyap_birkhoff, lyap_cycles, lyap_demarco, lyap_formula, lyap_przytycki};
use holodyn::maps::{fixed_point_multipliers, instantiate, Family, RationalMapInstance};
use holodyn::polyalg::{resultant, HomPair};
use holodyn::rng::CounterRng;
use holodyn::C64;

struct Report {
    results: Vec<(usize, bool)>,
    invariants: Vec<bool>,
}

impl Report {
    fn line(&mut self, id: usize, title: &str, pass: bool, detail: String) {
        println!("{} [{id:>2}] {title}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.results.push((id, pass));
    }

    /// Supplementary invariant, reported but not counted as a criterion.
    fn invariant(&mut self, title: &str, pass: bool, detail: String) {
        println!("{} [inv] {title}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.invariants.push(pass);
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn quad(cc: C64) -> RationalMapInstance {
    instantiate(Family::Quadratic, &[cc]).unwrap()
}

fn disk_point(rng: &mut CounterRng, radius: f64) -> C64 {
    C64::from_polar(radius * rng.next_f64().sqrt(), TAU * rng.next_f64())
}

fn criterion_1(r: &mut Report) {
    let t = Instant::now();
    let f_sq = lyap_formula(&quad(c(0.0, 0.0))).unwrap();
    let cyc = lyap_cycles(&quad(c(0.0, 0.0)), 10).unwrap();
    let bk = lyap_birkhoff(&quad(c(0.0, 0.0)), 100_000, 2024).unwrap();
    let f_ch = lyap_formula(&quad(c(-2.0, 0.0))).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let e1 = (f_sq.value - LN_2).abs();
    let e2 = (cyc.value - LN_2).abs();
    let e3 = (bk.value - LN_2).abs();
    let e4 = (f_ch.value - LN_2).abs();
    let pass = e1 <= 1e-6 && e2 <= 0.01 && e3 <= 3.0 * bk.stderr && e4 <= 1e-6 && secs < 10.0;
    r.line(
        1,
        "Lyapunov anchors",
        pass,
        format!(
            "|formula(z^2)-ln2|={e1:.2e}<=1e-6, |cycles n=10-ln2|={e2:.2e}<=0.01, \
             |birkhoff 1e5-ln2|={e3:.2e}<=3*stderr={:.2e}, |formula(z^2-2)-ln2|={e4:.2e}<=1e-6, time {secs:.2}s<10s",
            3.0 * bk.stderr
        ),
    );
}

fn criterion_2(r: &mut Report) {
    let mut rng = CounterRng::new(2);
    let mut worst: f64 = 0.0;
    for _ in 0..25 {
        let cc = c(4.0 * rng.next_f64() - 2.0, 4.0 * rng.next_f64() - 2.0);
        let m = quad(cc);
        let a = lyap_demarco(&m).unwrap().value;
        let b = lyap_przytycki(&m).unwrap().value;
        worst = worst.max((a - b).abs());
    }
    r.line(
        2,
        "DeMarco/Przytycki equivalence",
        worst <= 1e-6,
        format!("max |DeMarco - Przytycki| over 25 parameters = {worst:.2e} <= 1e-6"),
    );
}

/// `ν₂(n)` from `2ⁿ = Σ_{k|n} ν₂(k)`.
fn nu_recursion(n: usize) -> usize {
    (1usize << n) - (1..n).filter(|k| n % k == 0).map(nu_recursion).sum::<usize>()
}

fn criterion_3(r: &mut Report) {
    let m = quad(c(0.17, -0.31));
    let degrees: Vec<usize> = (1..=6).map(|n| dynatomic(&m, n).unwrap().poly.degree().unwrap()).collect();
    let recursion: Vec<usize> = (1..=6).map(nu_recursion).collect();
    let counts: Vec<usize> = (1..=6).map(|n| per_n_centers(n).unwrap().len()).collect();
    let pass = degrees == recursion && recursion == vec![2, 2, 6, 12, 30, 54] && counts == vec![1, 1, 3, 6, 15, 27];
    r.line(
        3,
        "Counting laws",
        pass,
        format!("dynatomic degrees {degrees:?}, recursion {recursion:?}, center counts {counts:?} (expected [1, 1, 3, 6, 15, 27])"),
    );
}

fn random_pair(rng: &mut CounterRng, d: usize) -> HomPair {
    let a: Vec<C64> = (0..=d).map(|_| disk_point(rng, 1.0)).collect();
    let b: Vec<C64> = (0..=d).map(|_| disk_point(rng, 1.0)).collect();
    HomPair::new(a, b).unwrap()
}

fn criterion_4(r: &mut Report) {
    let mut anchor: f64 = 0.0;
    for d in 2..=5 {
        let mut a = vec![c(0.0, 0.0); d + 1];
        let mut b = vec![c(0.0, 0.0); d + 1];
        a[d] = c(1.0, 0.0);
        b[0] = c(1.0, 0.0);
        anchor = anchor.max((resultant(&HomPair::new(a, b).unwrap()) - 1.0).norm());
    }
    let mut rng = CounterRng::new(4);
    let mut homog: f64 = 0.0;
    for _ in 0..200 {
        let d = 2 + rng.below(4);
        let f = random_pair(&mut rng, d);
        let s = disk_point(&mut rng, 3.0);
        let lhs = resultant(&f.scaled(s));
        let rhs = s.powu(2 * d as u32) * resultant(&f);
        let scale = s.norm().powi(2 * d as i32) * resultant(&f).norm();
        homog = homog.max((lhs - rhs).norm() / scale);
    }
    r.line(
        4,
        "Resultant anchor",
        anchor <= 1e-12 && homog <= 1e-8,
        format!("max |Res(z1^d,z2^d)-1| (d=2..5) = {anchor:.1e} <= 1e-12, max relative 2d-homogeneity defect = {homog:.2e} <= 1e-8"),
    );
}

fn criterion_5(r: &mut Report) {
    let mut rng = CounterRng::new(5);
    let tol = 1e-9;
    let (mut inv, mut hom): (f64, f64) = (0.0, 0.0);
    let mut maps = 0;
    while maps < 50 {
        let d = 2 + maps % 3;
        let Ok(m) = RationalMapInstance::from_lift(random_pair(&mut rng, d)) else { continue };
        maps += 1;
        for _ in 0..20 {
            let z = [disk_point(&mut rng, 2.0), disk_point(&mut rng, 2.0)];
            let t = disk_point(&mut rng, 5.0);
            let g = green_lift(&m, z, tol).unwrap().value;
            let gf = green_lift(&m, m.apply(z), tol).unwrap().value;
            let gt = green_lift(&m, [z[0] * t, z[1] * t], tol).unwrap().value;
            inv = inv.max((gf - d as f64 * g).abs());
            hom = hom.max((gt - g - t.norm().ln()).abs());
        }
    }
    r.line(
        5,
        "Green laws",
        inv <= 1e-7 && hom <= 1e-7,
        format!("50 maps x 20 points: max |G(F z) - d G(z)| = {inv:.2e}, max |G(tz) - G(z) - ln|t|| = {hom:.2e}, both <= 1e-7"),
    );
}

fn criterion_6(r: &mut Report) {
    let g = ParamGrid::one(c(0.0, 0.0), 1.0, 512).unwrap();
    let log = ddc_density(&ScalarField::from_fn(g.clone(), "log", |p| p[0].norm().ln())).unwrap();
    let log_off = ddc_density(&ScalarField::from_fn(
        ParamGrid::one(c(0.23, -0.11), 1.3, 512).unwrap(),
        "log",
        |p| p[0].norm().ln(),
    ))
    .unwrap();
    let harmonic: Vec<f64> = [
        ScalarField::from_fn(g.clone(), "re z2", |p| (p[0] * p[0]).re),
        ScalarField::from_fn(g.clone(), "im z3 + re z", |p| (p[0] * p[0] * p[0]).im + p[0].re),
        ScalarField::from_fn(g, "ln|z-3|", |p| (p[0] - 3.0).norm().ln()),
    ]
    .iter()
    .map(|f| ddc_density(f).unwrap().total_mass.abs())
    .collect();
    let worst_h = harmonic.iter().copied().fold(0.0, f64::max);
    let pass = (log.total_mass - 1.0).abs() <= 0.005 && (log_off.total_mass - 1.0).abs() <= 0.005 && worst_h <= 1e-3;
    r.line(
        6,
        "dd^c calibration",
        pass,
        format!(
            "mass of ln|l| at 512^2 = {:.6} (shifted grid {:.6}), 1 +- 0.005; pluriharmonic |mass| max = {worst_h:.2e} <= 1e-3",
            log.total_mass, log_off.total_mass
        ),
    );
}

struct QuadraticScan {
    grid: ParamGrid,
    density: DensityField,
}

fn criterion_7(r: &mut Report) -> QuadraticScan {
    let t = Instant::now();
    // square window [-2.5, 1.5] x [-2, 2], containing [-2.5, 1.5] x [-1.5, 1.5]
    let grid = ParamGrid::one(c(-0.5, 0.0), 2.0, 512).unwrap();
    let l = scan_l(Family::Quadratic, &grid, ScanMethod::Formula).unwrap();
    let density = ddc_density(&l).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let plain = mandelbrot_mask(&grid, 2000).unwrap();
    let plain_frac = mass_where(&density, &distance_mask(&grid, &boundary_cells(&plain), 0.2)) / density.total_mass;
    let closure = mandelbrot_closure_mask(&grid, 2000).unwrap();
    let frac = mass_where(&density, &distance_mask(&grid, &boundary_cells(&closure), 0.2)) / density.total_mass;
    let mass = density.total_mass;
    let workers = rayon::current_num_threads();
    let pass = (mass - 1.0).abs() <= 0.05 && frac >= 0.98 && secs < 300.0;
    r.line(
        7,
        "Quadratic bifurcation mass",
        pass,
        format!(
            "total dd^c L mass = {mass:.4} (required 1 +- 0.05), fraction within 0.2 of the escape-time boundary = {:.4} >= 0.98 \
             (distance-estimate mask; plain mask {plain_frac:.4}), \
             undecided cells {}, negative-mass fraction {:.4}, scan+density {secs:.1}s on {workers} worker(s) < 300s",
            frac,
            l.flagged_count(),
            density.negative_mass_fraction
        ),
    );
    r.invariant(
        "Density sign",
        density.negative_mass_fraction <= 0.02,
        format!("negative-mass fraction of dd^c L at 512^2 = {:.4} <= 0.02", density.negative_mass_fraction),
    );
    QuadraticScan { grid, density }
}

fn criterion_8(r: &mut Report, q: &QuadraticScan) {
    let mut dists = Vec::new();
    for n in [6, 8, 10, 12] {
        let centers = per_n_centers(n).unwrap();
        let w = 0.5f64.powi(n as i32);
        let pts: Vec<(C64, f64)> = centers.into_iter().map(|z| (z, w)).collect();
        dists.push(empirical_vs_density(&pts, &q.density, 16).unwrap());
    }
    let decreasing = dists.windows(2).all(|w| w[1] < w[0]);
    let _ = &q.grid;
    r.line(
        8,
        "Center equidistribution proxy",
        decreasing,
        format!("TV distance (16x16-cell blocks) for n = 6, 8, 10, 12: {dists:.4?}, strictly decreasing"),
    );
}

fn cubic_res() -> usize {
    std::env::var("ACCEPTANCE_CUBIC_RES")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(48)
}

/// Polydisk containing the cubic connectedness locus: from
/// `max{g(z), G} ≥ ln|z − δ| − ln 4` with `δ = c/2`, critical values satisfy
/// `|a³ − c/2| ≤ 4` and `|a³ − c³/6 − c/2| ≤ 4` on the locus, hence
/// `|c|³ ≤ 48` and `|a|³ ≤ 4 + |c|/2`.
fn cubic_bounds() -> (f64, f64) {
    let rc = 48f64.cbrt();
    (rc, (4.0 + rc / 2.0).cbrt())
}

fn criteria_9_10(r: &mut Report) {
    let res = cubic_res();
    let t = Instant::now();
    let fam = Family::PolyCA { degree: 3 };
    let grid = ParamGrid::two(
        Axis::new(c(0.0, 0.0), 4.0, res).unwrap(),
        Axis::new(c(0.0, 0.0), 2.2, res).unwrap(),
    )
    .unwrap();
    let g0 = scan_activity(fam, &grid, 0).unwrap();
    let g1 = scan_activity(fam, &grid, 1).unwrap();
    let mixed = wedge_density(&g0, &g1).unwrap();
    let self0 = wedge_density(&g0, &g0).unwrap();
    let self1 = wedge_density(&g1, &g1).unwrap();
    let ratio = self0.total_mass.abs().max(self1.total_mass.abs()) / mixed.total_mass;
    r.line(
        9,
        "Self-wedge vanishing proxy",
        ratio <= 0.02,
        format!(
            "cubic grid {res} per real axis (4-D, {} cells): |T0^T0| = {:.4e}, |T1^T1| = {:.4e}, T0^T1 = {:.4e} \
             (raw {:.4e}), ratio {ratio:.4} <= 0.02",
            grid.len(),
            self0.total_mass,
            self1.total_mass,
            mixed.total_mass,
            mixed.raw_mass
        ),
    );

    // μ_bif = T0 ∧ T1; the top power (dd^c L)²/2 is reported alongside
    let l = ScalarField::new(
        grid.clone(),
        g0.values.iter().zip(&g1.values).map(|(a, b)| 3f64.ln() + a + b).collect(),
        g0.flagged.iter().zip(&g1.flagged).map(|(a, b)| *a || *b).collect(),
        "L",
    );
    let top = wedge_density(&l, &l).unwrap();
    let (rc, ra) = cubic_bounds();
    let inside: Vec<bool> = (0..grid.len())
        .map(|k| {
            let p = grid.point(k);
            p[0].norm() <= rc && p[1].norm() <= ra
        })
        .collect();
    let mu_total = mixed.total_mass;
    let mu_inside = mass_where(&mixed, &inside);
    let top_frac = mass_where(&top, &inside) / top.total_mass;
    let connected_outside = (0..grid.len())
        .filter(|&k| g0.values[k] == 0.0 && g1.values[k] == 0.0 && !g0.flagged[k] && !g1.flagged[k] && !inside[k])
        .count();
    let frac = mu_inside / mu_total;
    let secs = t.elapsed().as_secs_f64();
    r.line(
        10,
        "Connectedness-locus compactness proxy",
        frac >= 0.98 && connected_outside == 0,
        format!(
            "polydisk |c| <= {rc:.4}, |a| <= {ra:.4}: mu_bif = T0^T1 mass inside {mu_inside:.4e} of {mu_total:.4e} = {frac:.4} >= 0.98 \
             ((dd^c L)^2/2 inside fraction {top_frac:.4}); \
             bounded-orbit cells outside = {connected_outside} (must be 0); {secs:.1}s"
        ),
    );
}

fn criterion_11(r: &mut Report) {
    let mut rng = CounterRng::new(11);
    let (mut index, mut third): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let s1 = disk_point(&mut rng, 5.0);
        let s2 = disk_point(&mut rng, 5.0);
        let m = instantiate(Family::Mod2, &[s1, s2]).unwrap();
        let fp = fixed_point_multipliers(&m).unwrap();
        let (t1, _, t3) = fp.symmetric();
        index = index.max((t3 - t1 + 2.0).norm());
        let mu = fp.multipliers;
        for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
            let den = C64::new(1.0, 0.0) - mu[i] * mu[j];
            if den.norm() > 1e-6 {
                third = third.max(((2.0 - mu[i] - mu[j]) / den - mu[k]).norm());
            }
        }
    }
    let m = instantiate(Family::Mod2, &[c(2.0, 0.0), c(0.0, 0.0)]).unwrap();
    let cyc = lyap_cycles(&m, 10).unwrap();
    let e = (cyc.value - LN_2).abs();
    r.line(
        11,
        "Mod2 algebra",
        index <= 1e-9 && third <= 1e-9 && e <= 0.02,
        format!(
            "max |s3 - s1 + 2| = {index:.2e} <= 1e-9, max third-multiplier defect = {third:.2e} <= 1e-9, \
             |L(sigma=(2,0)) cycles n=10 - ln2| = {e:.2e} <= 0.02"
        ),
    );
}

fn criterion_12(r: &mut Report) {
    let params = [c(-0.1, 0.1), c(-0.5, 0.3), c(-1.1, 0.1), c(-0.12, 0.7), c(-1.76, 0.0)];
    let mut all = true;
    let mut rows = Vec::new();
    for &p in &params {
        let l = lyap_formula(&quad(p)).unwrap().value;
        let errs: Vec<f64> = [4, 6, 8, 10]
            .iter()
            .map(|&n| {
                (lnr_value(Family::Quadratic, &[p], n, 0.0).unwrap() - l).abs()
            })
            .collect();
        let ok = errs.windows(2).all(|w| w[1] < w[0]) && errs[3] <= 0.05;
        all &= ok;
        let shown: Vec<String> = errs.iter().map(|e| format!("{e:.2e}")).collect();
        rows.push(format!("c={p}: [{}]", shown.join(", ")));
    }
    r.line(
        12,
        "L_n^0 pointwise convergence proxy",
        all,
        format!("|L_n^0 - L| for n = 4, 6, 8, 10 decreasing and <= 0.05 at n = 10; {}", rows.join("; ")),
    );
}

fn main() {
    let mut r = Report { results: Vec::new(), invariants: Vec::new() };
    let t = Instant::now();
    criterion_1(&mut r);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    let q = criterion_7(&mut r);
    criterion_8(&mut r, &q);
    criteria_9_10(&mut r);
    criterion_11(&mut r);
    criterion_12(&mut r);
    let failed: Vec<usize> = r.results.iter().filter(|(_, p)| !p).map(|(i, _)| *i).collect();
    println!(
        "acceptance: {} of {} criteria passed, failed: {failed:?}; {} of {} invariants passed ({:.1}s)",
        r.results.len() - failed.len(),
        r.results.len(),
        r.invariants.iter().filter(|p| **p).count(),
        r.invariants.len(),
        t.elapsed().as_secs_f64()
    );
    if !failed.is_empty() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
