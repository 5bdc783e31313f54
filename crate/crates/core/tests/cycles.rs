use holodyn::cycles::{dynatomic, multiplier_spectrum, per_n_centers, per_n_w, periodic_cycles};
use holodyn::maps::{instantiate, Family};
use holodyn::polyalg::{nu, PolyC};
use holodyn::C64;
use proptest::prelude::*;

const GROUP: f64 = 1e-6;

fn disk(r: f64) -> impl Strategy<Value = C64> {
    (0.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(move |(s, t)| C64::from_polar(r * s.sqrt(), t))
}

fn orbit(p: &PolyC, z: C64, n: usize) -> C64 {
    (0..n).fold(z, |x, _| p.eval(x))
}

/// Distinct solutions of `Pⁿ(z) = z` from Newton on a grid of starts, with
/// exact period `n`.
fn newton_periodic_points(p: &PolyC, n: usize) -> Vec<C64> {
    let mut found: Vec<C64> = Vec::new();
    let k = 60;
    for i in 0..k {
        for j in 0..k {
            let mut z = C64::new(-2.2 + 4.4 * i as f64 / k as f64, -2.2 + 4.4 * j as f64 / k as f64);
            for _ in 0..200 {
                let (mut x, mut dx) = (z, C64::new(1.0, 0.0));
                for _ in 0..n {
                    let (v, dv) = p.eval_with_derivative(x);
                    dx *= dv;
                    x = v;
                }
                let step = (x - z) / (dx - 1.0);
                if !step.re.is_finite() || !step.im.is_finite() {
                    break;
                }
                z -= step;
                if step.norm() < 1e-15 {
                    break;
                }
            }
            let exact = (orbit(p, z, n) - z).norm() < 1e-10
                && (1..n).filter(|k| n % k == 0).all(|k| (orbit(p, z, k) - z).norm() > 1e-6);
            if exact && found.iter().all(|w| (w - z).norm() > 1e-7) {
                found.push(z);
            }
        }
    }
    found
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cycles_have_exact_period_and_count(c in disk(2.0), n in 1usize..=7) {
        let m = instantiate(Family::Quadratic, &[c]).unwrap();
        let p = Family::Quadratic.polynomial(&[c]).unwrap().poly;
        let cycles = periodic_cycles(&m, n, GROUP).unwrap();
        prop_assert_eq!(cycles.iter().map(|cy| cy.orbit.len()).sum::<usize>() as u64, nu(2, n as u64));
        for cy in &cycles {
            prop_assert_eq!(cy.period, n);
            let z = cy.point;
            prop_assert!((orbit(&p, z, n) - z).norm() <= 1e-8 * (1.0 + z.norm()));
            for k in (1..n).filter(|k| n % k == 0) {
                prop_assert!((orbit(&p, z, k) - z).norm() > 1e-8);
            }
        }
    }

    #[test]
    fn spectrum_degree_law_quadratic(c in disk(2.0), n in 1usize..=8) {
        let s = multiplier_spectrum(Family::Quadratic, &[c], n).unwrap();
        prop_assert_eq!(s.multipliers.len() as u64 * n as u64, nu(2, n as u64));
    }

    #[test]
    fn spectrum_degree_law_cubic(c in disk(1.5), a in disk(1.0), n in 1usize..=5) {
        let s = multiplier_spectrum(Family::PolyCA { degree: 3 }, &[c, a], n).unwrap();
        prop_assert_eq!(s.multipliers.len() as u64 * n as u64, nu(3, n as u64));
    }

    /// Multiplier of a cycle equals the product of `P'` along the orbit.
    #[test]
    fn multipliers_are_orbit_derivatives(c in disk(2.0), n in 1usize..=6) {
        let m = instantiate(Family::Quadratic, &[c]).unwrap();
        for cy in periodic_cycles(&m, n, GROUP).unwrap() {
            let mut x = cy.point;
            let mut w = C64::new(1.0, 0.0);
            for _ in 0..n {
                w *= 2.0 * x;
                x = x * x + c;
            }
            prop_assert!((w - cy.multiplier).norm() <= 1e-7 * (1.0 + w.norm()));
        }
    }

    #[test]
    fn per_n_residuals(n in 1usize..=5, w in disk(0.95)) {
        let r = per_n_w(n, w).unwrap();
        prop_assert!(r.failures.is_empty());
        prop_assert_eq!(r.solutions.len() as u64, (nu(2, n as u64) / 2).max(1));
        for s in &r.solutions {
            prop_assert!((s.multiplier - w).norm() <= 1e-8);
            let mut x = s.z;
            for _ in 0..n {
                x = x * x + s.c;
            }
            prop_assert!((x - s.z).norm() <= 1e-8);
        }
    }
}

#[test]
fn newton_oracle_matches_periodic_points() {
    for c in [C64::new(0.21, -0.37), C64::new(-1.3, 0.05), C64::new(-0.12, 0.74)] {
        let m = instantiate(Family::Quadratic, &[c]).unwrap();
        let p = Family::Quadratic.polynomial(&[c]).unwrap().poly;
        for n in 1..=4 {
            let oracle = newton_periodic_points(&p, n);
            let points: Vec<C64> = periodic_cycles(&m, n, GROUP)
                .unwrap()
                .iter()
                .flat_map(|cy| {
                    let mut x = cy.point;
                    (0..n).map(move |_| {
                        let y = x;
                        x = x * x + c;
                        y
                    })
                })
                .collect();
            assert_eq!(oracle.len(), points.len(), "c={c} n={n}");
            for z in &oracle {
                let best = points.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
                assert!(best < 1e-8, "c={c} n={n}: {z} missing ({best:.2e})");
            }
        }
    }
}

#[test]
fn dynatomic_roots_are_the_periodic_points() {
    let c = C64::new(-0.8176, -0.2563);
    let m = instantiate(Family::Quadratic, &[c]).unwrap();
    for n in [5, 8] {
        let d = dynatomic(&m, n).unwrap();
        assert_eq!(d.poly.degree(), Some(nu(2, n as u64) as usize));
        for cy in periodic_cycles(&m, n, GROUP).unwrap() {
            let z = cy.point;
            assert!(d.poly.eval(z).norm() <= 1e-6 * d.poly.abs_scale(z), "n={n} at {z}");
        }
    }
}

#[test]
fn center_counts() {
    for n in 1..=8 {
        let centers = per_n_centers(n).unwrap();
        assert_eq!(centers.len() as u64, (nu(2, n as u64) / 2).max(1), "n={n}");
        for c in centers {
            let mut x = C64::new(0.0, 0.0);
            for _ in 0..n {
                x = x * x + c;
            }
            assert!(x.norm() < 1e-8, "n={n} c={c}");
        }
    }
}
