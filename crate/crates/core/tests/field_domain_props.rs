use harmonicity::field_domain::{pullback_field, pushforward_field, rescale_to_half_ball, sup_norm};
use harmonicity::sphere_mean::{make_rule, spherical_mean};
use harmonicity::{Domain, ScalarField, Smoothness};
use proptest::prelude::*;

fn domains() -> Vec<Domain> {
    vec![
        Domain::unit_ball(2).unwrap(),
        Domain::ball(&[5.0, 5.0], 0.1).unwrap(),
        Domain::cuboid(&[0.0, 0.0], &[1.0, 2.0]).unwrap(),
        Domain::ball(&[0.0, 1.0, -1.0], 2.0).unwrap(),
        Domain::general(&[-1.0, -1.0], &[1.0, 1.0], |x| x[0].abs() + x[1].abs() < 1.0, |x| {
            (1.0 - x[0].abs() - x[1].abs()) / 2f64.sqrt()
        })
        .unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sup_norm_is_subadditive(a in -2.0f64..2.0, b in -2.0f64..2.0, density in 0.02f64..0.2) {
        let d = Domain::unit_ball(2).unwrap();
        let f = ScalarField::new(2, Smoothness::CInf, move |x| (a * x[0]).sin() + x[1]);
        let g = ScalarField::new(2, Smoothness::CInf, move |x| b * x[0] * x[1] - 0.3);
        let lhs = sup_norm(&f.add(&g), &d, density).unwrap();
        let rhs = sup_norm(&f, &d, density).unwrap() + sup_norm(&g, &d, density).unwrap();
        prop_assert!(lhs <= rhs + 1e-15);
    }

    #[test]
    fn sup_norm_grows_as_density_falls(k in 1u32..5) {
        let d = Domain::cuboid(&[0.0, 0.0], &[1.0, 0.7]).unwrap();
        let f = ScalarField::new(2, Smoothness::CInf, |x| (7.0 * x[0]).sin() * (5.0 * x[1]).cos());
        let coarse = sup_norm(&f, &d, 0.5f64.powi(k as i32)).unwrap();
        let fine = sup_norm(&f, &d, 0.5f64.powi(k as i32 + 1)).unwrap();
        prop_assert!(fine >= coarse);
    }

    #[test]
    fn shrink_is_monotone(m1 in 0.01f64..0.4, dm in 0.01f64..0.3) {
        for d in domains().iter().take(3) {
            let m2 = m1 + dm;
            let inr = d.inradius();
            if m2 >= inr {
                continue;
            }
            let (d1, d2) = (d.shrink(m1 * 0.99).unwrap(), d.shrink(m2 * 0.99).unwrap());
            for x in d.samples(d.extent() / 32.0).unwrap().chunks(d.dim()) {
                if d2.contains(x) {
                    prop_assert!(d1.contains(x));
                    prop_assert!(d.boundary_distance(x) >= m2 * 0.99 - 1e-12);
                }
            }
        }
    }
}

#[test]
fn rescaled_domains_lie_in_the_half_ball() {
    for d in domains() {
        let (r, _) = rescale_to_half_ball(&d).unwrap();
        let pts = r.samples(r.extent() / 64.0).unwrap();
        for y in pts.chunks(d.dim()) {
            assert!(y.iter().map(|v| v * v).sum::<f64>().sqrt() < 0.5);
        }
    }
}

#[test]
fn pullback_round_trip_and_mean_identity() {
    let f = ScalarField::new(2, Smoothness::CInf, |x| x[0].sin() * (0.5 * x[1]).exp());
    let (_, sim) = rescale_to_half_ball(&Domain::ball(&[1.0, -2.0], 3.0).unwrap()).unwrap();
    let g = pullback_field(&f, sim.scale, &sim.shift).unwrap();
    let back = pushforward_field(&g, sim.scale, &sim.shift).unwrap();
    for i in 0..100 {
        let x = [-2.0 + 0.04 * i as f64, -4.0 + 0.05 * i as f64];
        assert!((back.eval(&x) - f.eval(&x)).abs() < 1e-12);
    }
    // μ₀(G; y, t) = μ₀(f; y/λ + shift, t/λ), by two different rules
    let fine = make_rule(2, 256, None).unwrap();
    let other = make_rule(2, 97, None).unwrap();
    let y = [0.1, -0.2];
    let x = [y[0] / sim.scale + sim.shift[0], y[1] / sim.scale + sim.shift[1]];
    let t = 0.15;
    let lhs = spherical_mean(&g, &y, t, &fine).unwrap();
    let rhs = spherical_mean(&f, &x, t / sim.scale, &other).unwrap();
    assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
}
