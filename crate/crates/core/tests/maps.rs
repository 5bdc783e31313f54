use holodyn::maps::{fixed_point_multipliers, instantiate, mod2_multipliers, Family};
use holodyn::C64;
use proptest::prelude::*;

fn disk(r: f64) -> impl Strategy<Value = C64> {
    (0.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(move |(s, t)| C64::from_polar(r * s.sqrt(), t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// (σ₁, σ₂) → normal form → fixed-point multipliers → (σ₁, σ₂).
    #[test]
    fn mod2_round_trip(s1 in disk(5.0), s2 in disk(5.0)) {
        let m = instantiate(Family::Mod2, &[s1, s2]).unwrap();
        let (t1, t2, t3) = fixed_point_multipliers(&m).unwrap().symmetric();
        prop_assert!((t1 - s1).norm() <= 1e-8 * (1.0 + s1.norm()));
        prop_assert!((t2 - s2).norm() <= 1e-8 * (1.0 + s2.norm()));
        // holomorphic index formula σ₃ = σ₁ − 2
        prop_assert!((t3 - s1 + 2.0).norm() <= 1e-8 * (1.0 + s1.norm()));
        let mu = mod2_multipliers(s1, s2).unwrap();
        let (e1, e2) = (mu[0] + mu[1] + mu[2], mu[0] * mu[1] + mu[1] * mu[2] + mu[0] * mu[2]);
        prop_assert!((e1 - s1).norm() <= 1e-9 * (1.0 + s1.norm()));
        prop_assert!((e2 - s2).norm() <= 1e-9 * (1.0 + s2.norm()));
    }

    #[test]
    fn polyca_critical_points_and_value_at_zero(d in 3usize..=5, cs in prop::collection::vec(disk(2.0), 3), a in disk(2.0)) {
        let fam = Family::PolyCA { degree: d };
        let mut params = cs[..d - 2].to_vec();
        params.push(a);
        let p = fam.polynomial(&params).unwrap();
        prop_assert_eq!(p.degree(), d);
        prop_assert!((p.poly.leading() - 1.0 / d as f64).norm() < 1e-15);
        prop_assert!((p.poly.eval(C64::new(0.0, 0.0)) - a.powu(d as u32)).norm() <= 1e-12 * (1.0 + a.norm().powi(d as i32)));
        // P'(z) = z Π (z − c_j)
        prop_assert_eq!(p.critical.len(), d - 1);
        let dp = p.poly.derivative();
        for &c in &p.critical {
            prop_assert!(dp.eval(c).norm() <= 1e-10 * (1.0 + c.norm()).powi(d as i32));
        }
        let z = C64::new(0.3, -0.7);
        let direct: C64 = p.critical.iter().map(|&c| z - c).product();
        prop_assert!((dp.eval(z) - direct).norm() <= 1e-10 * (1.0 + direct.norm()));
    }

    #[test]
    fn polynomial_lift_agrees_with_the_polynomial(c in disk(2.0), z in disk(3.0), t in disk(2.0)) {
        let t = t + 0.1;
        let m = instantiate(Family::Quadratic, &[c]).unwrap();
        let w = m.apply([z * t, t]);
        prop_assert!((w[0] / w[1] - (z * z + c)).norm() <= 1e-10 * (1.0 + z.norm_sqr()));
        prop_assert!((w[1] - t * t).norm() <= 1e-12 * (1.0 + t.norm_sqr()));
    }
}

#[test]
fn z_plus_inverse_class() {
    let m = instantiate(Family::Mod2, &[C64::new(3.0, 0.0), C64::new(3.0, 0.0)]).unwrap();
    let mu = fixed_point_multipliers(&m).unwrap().multipliers;
    for w in mu {
        assert!((w - 1.0).norm() < 1e-5, "{w}");
    }
}

#[test]
fn family_parsing() {
    assert_eq!("quadratic".parse::<Family>().unwrap(), Family::Quadratic);
    assert_eq!("polyca:4".parse::<Family>().unwrap(), Family::PolyCA { degree: 4 });
    assert!("polyca:2".parse::<Family>().is_err());
    assert!(instantiate(Family::Quadratic, &[]).is_err());
}
