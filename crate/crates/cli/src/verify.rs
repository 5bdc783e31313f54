use std::f64::consts::{LN_2, TAU};
use std::io::Write;

use clap::Args;
use holodyn::bifurcation::{ddc_density, wedge_calibration, ParamGrid, ScalarField};
use holodyn::cycles::{dynatomic, per_n_centers, per_n_w};
use holodyn::green::{green_lift, green_poly_capped};
use holodyn::lyapunov::{lyap_cycles, lyap_demarco, lyap_formula, lyap_przytycki};
use holodyn::maps::{fixed_point_multipliers, instantiate, Family, RationalMapInstance};
use holodyn::polyalg::{nu, resultant, HomPair};
use holodyn::rng::CounterRng;
use holodyn::C64;

use crate::commands::setup;
use crate::config::{Overrides, RunConfig};
use crate::{CliError, Common};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// quick or full.
    #[arg(long, default_value = "quick")]
    pub suite: String,
    #[command(flatten)]
    pub common: Common,
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn disk(rng: &mut CounterRng, r: f64) -> C64 {
    C64::from_polar(r * rng.next_f64().sqrt(), TAU * rng.next_f64())
}

fn random_map(rng: &mut CounterRng, d: usize) -> Option<RationalMapInstance> {
    let a = (0..=d).map(|_| disk(rng, 1.0)).collect();
    let b = (0..=d).map(|_| disk(rng, 1.0)).collect();
    RationalMapInstance::from_lift(HomPair::new(a, b).ok()?).ok()
}

fn quad(c: C64) -> holodyn::Result<RationalMapInstance> {
    instantiate(Family::Quadratic, &[c])
}

fn checks(full: bool, seed: u64, o: &Overrides) -> Result<Vec<Check>, CliError> {
    let mut rng = CounterRng::new(seed);
    let tol: f64 = o.get("tol")?;
    let cap: usize = o.get("cap")?;
    let res_scale: f64 = o.get("resultant_scale")?;
    let mut out = Vec::new();

    let mut anchor: f64 = 0.0;
    for d in 2..=5 {
        let mut a = vec![C64::new(0.0, 0.0); d + 1];
        let mut b = a.clone();
        a[d] = C64::new(1.0, 0.0);
        b[0] = C64::new(1.0, 0.0);
        anchor = anchor.max((resultant(&HomPair::new(a, b)?) * res_scale - 1.0).norm());
    }
    out.push(Check {
        name: "resultant anchor",
        pass: anchor <= 1e-12,
        detail: format!("max |Res(z1^d, z2^d) - 1| = {anchor:.2e}"),
    });

    let (mut inv, mut hom): (f64, f64) = (0.0, 0.0);
    let maps = if full { 20 } else { 5 };
    let mut made = 0;
    while made < maps {
        let d = 2 + made % 3;
        let Some(m) = random_map(&mut rng, d) else { continue };
        made += 1;
        for _ in 0..10 {
            let z = [disk(&mut rng, 2.0), disk(&mut rng, 2.0)];
            let t = disk(&mut rng, 4.0);
            let g = green_lift(&m, z, tol)?.value;
            inv = inv.max((green_lift(&m, m.apply(z), tol)?.value - d as f64 * g).abs());
            hom = hom.max((green_lift(&m, [z[0] * t, z[1] * t], tol)?.value - g - t.norm().ln()).abs());
        }
    }
    out.push(Check {
        name: "Green laws",
        pass: inv <= 1e-7 && hom <= 1e-7,
        detail: format!("{maps} maps: invariance {inv:.2e}, homogeneity {hom:.2e}"),
    });

    let (mut undecided, mut negative, mut samples) = (0, 0, 0);
    for i in 0..20 {
        for j in 0..20 {
            let c = C64::new(-2.0 + 0.2 * i as f64 + 0.05, -2.0 + 0.2 * j as f64 + 0.05);
            for z in [C64::new(0.0, 0.0), c] {
                let g = green_poly_capped(Family::Quadratic, &[c], z, tol, cap)?;
                samples += 1;
                undecided += g.is_undecided() as usize;
                negative += (g.value < 0.0) as usize;
            }
        }
    }
    out.push(Check {
        name: "polynomial Green certification",
        pass: undecided == 0 && negative == 0,
        detail: format!("{samples} evaluations at cap {cap}: {undecided} undecided, {negative} negative"),
    });

    let e0 = (lyap_formula(&quad(C64::new(0.0, 0.0))?)?.value - LN_2).abs();
    let e2 = (lyap_formula(&quad(C64::new(-2.0, 0.0))?)?.value - LN_2).abs();
    let ec = (lyap_cycles(&quad(C64::new(0.0, 0.0))?, 8)?.value - LN_2).abs();
    out.push(Check {
        name: "Lyapunov anchors",
        pass: e0 <= 1e-6 && e2 <= 1e-6 && ec <= 0.01,
        detail: format!("z^2 formula {e0:.2e}, z^2-2 formula {e2:.2e}, z^2 cycles n=8 {ec:.2e}"),
    });

    let (mut gap, mut below): (f64, f64) = (0.0, 0.0);
    for _ in 0..if full { 25 } else { 8 } {
        let c = C64::new(4.0 * rng.next_f64() - 2.0, 4.0 * rng.next_f64() - 2.0);
        let m = quad(c)?;
        let p = lyap_przytycki(&m)?.value;
        gap = gap.max((lyap_demarco(&m)?.value - p).abs());
        below = below.max(LN_2 - p);
    }
    out.push(Check {
        name: "DeMarco/Przytycki",
        pass: gap <= 1e-6 && below <= 1e-9,
        detail: format!("max gap {gap:.2e}, max shortfall below ln 2 {below:.2e}"),
    });

    let top = if full { 10 } else { 6 };
    let mut bad = Vec::new();
    for n in 1..=top {
        if n <= 8 {
            let deg = dynatomic(&quad(C64::new(0.17, -0.31))?, n)?.poly.degree().unwrap_or(0);
            if deg as u64 != nu(2, n as u64) {
                bad.push(format!("dynatomic degree {deg} at n={n}"));
            }
        }
        let count = per_n_centers(n)?.len() as u64;
        let expected = nu(2, n as u64) / 2;
        if count != expected {
            bad.push(format!("{count} centers at n={n}, expected {expected}"));
        }
    }
    out.push(Check {
        name: "counting laws",
        pass: bad.is_empty(),
        detail: if bad.is_empty() { format!("n = 1..{top}") } else { bad.join("; ") },
    });

    let res = if full { 512 } else { 256 };
    let g = ParamGrid::one(C64::new(0.0, 0.0), 1.0, res)?;
    let log = ddc_density(&ScalarField::from_fn(g.clone(), "log", |p| p[0].norm().ln()))?.total_mass;
    let harm = ddc_density(&ScalarField::from_fn(g, "re z2", |p| (p[0] * p[0]).re))?.total_mass;
    out.push(Check {
        name: "dd^c calibration",
        pass: (log - 1.0).abs() <= 0.005 && harm.abs() <= 1e-3,
        detail: format!("ln|l| mass {log:.6} at {res}^2, harmonic mass {harm:.2e}"),
    });

    let (mut index, mut third): (f64, f64) = (0.0, 0.0);
    for _ in 0..if full { 100 } else { 20 } {
        let m = instantiate(Family::Mod2, &[disk(&mut rng, 5.0), disk(&mut rng, 5.0)])?;
        let fp = fixed_point_multipliers(&m)?;
        let (s1, _, s3) = fp.symmetric();
        index = index.max((s3 - s1 + 2.0).norm());
        let mu = fp.multipliers;
        let den = 1.0 - mu[0] * mu[1];
        if den.norm() > 1e-6 {
            third = third.max(((2.0 - mu[0] - mu[1]) / den - mu[2]).norm());
        }
    }
    out.push(Check {
        name: "Mod2 algebra",
        pass: index <= 1e-9 && third <= 1e-9,
        detail: format!("index formula {index:.2e}, third multiplier {third:.2e}"),
    });

    if full {
        let r = per_n_w(3, C64::new(0.5, 0.0))?;
        out.push(Check {
            name: "Per_3(1/2) continuation",
            pass: r.failures.is_empty()
                && r.solutions.len() == 3
                && r.solutions.iter().all(|s| (s.multiplier - 0.5).norm() <= 1e-8),
            detail: format!("{} solutions, {} failures", r.solutions.len(), r.failures.len()),
        });
        let cal = wedge_calibration();
        out.push(Check {
            name: "wedge calibration",
            pass: cal.deviation_from_analytic().abs() <= 0.05,
            detail: format!("constant {:.6}, deviation from 4/pi^2 {:.4}", cal.constant, cal.deviation_from_analytic()),
        });
    }
    Ok(out)
}

pub fn run(a: VerifyArgs) -> Result<(), CliError> {
    let workers = setup(&a.common)?;
    let full = match a.suite.as_str() {
        "quick" => false,
        "full" => true,
        s => return Err(CliError::Invalid(format!("unknown suite '{s}' (quick, full)"))),
    };
    let cfg = RunConfig {
        subcommand: "verify".into(),
        entries: vec![("suite".into(), a.suite.clone())],
        seed: a.common.seed,
        workers,
        overrides: Overrides::parse(&a.common.set)?,
    };
    let results = checks(full, a.common.seed, &cfg.overrides)?;
    let text: String = results
        .iter()
        .map(|c| format!("{} {}: {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail))
        .collect();
    print!("{text}");
    if let Some(prefix) = &a.common.out {
        std::fs::write(format!("{prefix}.config.txt"), cfg.to_string())?;
        let mut f = std::fs::File::create(format!("{prefix}.txt"))?;
        f.write_all(text.as_bytes())?;
    }
    let failed: Vec<&str> = results.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}
