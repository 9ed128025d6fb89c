use harmonicity::field_domain::sup_norm;
use harmonicity::modulus::{
    classical_moduli_with_rule, harmonicity_modulus, harmonicity_modulus_refined, harmonicity_modulus_sampled,
    CandidateFamily, CandidateTable, DEFAULT_T_REFINE,
};
use harmonicity::sphere_mean::make_rule;
use harmonicity::{Domain, ScalarField, Smoothness};
use proptest::prelude::*;

fn wave(a: f64, b: f64) -> ScalarField {
    ScalarField::new(2, Smoothness::CInf, move |x| (a * x[0]).sin() * (b * x[1]).cos())
}

fn u_grid() -> Vec<f64> {
    vec![0.05, 0.1, 0.2, 0.3, 0.45]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn monotone_and_bounded(a in 0.5f64..6.0, b in 0.5f64..6.0) {
        let d = Domain::unit_ball(2).unwrap();
        let rule = make_rule(2, 32, None).unwrap();
        let f = wave(a, b);
        let w = harmonicity_modulus(&f, &d, &u_grid(), 0.08, &rule).unwrap();
        for p in w.values.windows(2) {
            prop_assert!(p[0] <= p[1]);
        }
        let norm = sup_norm(&f, &d, 0.02).unwrap();
        prop_assert!(*w.values.last().unwrap() <= 2.0 * norm);
    }

    #[test]
    fn subadditive_on_shared_samples(a in 0.5f64..6.0, b in 0.5f64..6.0, c in -2.0f64..2.0) {
        let d = Domain::cuboid(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let rule = make_rule(2, 24, None).unwrap();
        let f = wave(a, b);
        let g = ScalarField::new(2, Smoothness::CInf, move |x| c * x[0] * x[0] * x[1] + (x[0] - x[1]).exp());
        let m = |h: &ScalarField| harmonicity_modulus(h, &d, &u_grid(), 0.1, &rule).unwrap().values;
        let (wf, wg, ws) = (m(&f), m(&g), m(&f.add(&g)));
        for i in 0..ws.len() {
            prop_assert!(ws[i] <= wf[i] + wg[i] + 1e-14 * (1.0 + ws[i]));
        }
    }

    #[test]
    fn bounded_by_laplacian(a in 0.5f64..4.0, b in 0.5f64..4.0) {
        let d = Domain::unit_ball(2).unwrap();
        let rule = make_rule(2, 64, None).unwrap();
        let f = wave(a, b);
        // |Δ (sin ax cos by)| ≤ a² + b²
        let m = a * a + b * b;
        let w = harmonicity_modulus(&f, &d, &u_grid(), 0.08, &rule).unwrap();
        for (u, v) in w.radii.iter().zip(&w.values) {
            prop_assert!(*v <= m * u * u / 4.0 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn below_both_classical_moduli(a in 0.5f64..6.0, b in 0.5f64..6.0, u in 0.05f64..0.4) {
        let d = Domain::unit_ball(2).unwrap();
        let rule = make_rule(2, 32, None).unwrap();
        for f in [wave(a, b), ScalarField::new(2, Smoothness::C0, move |x| (a * x[0]).abs() + x[1] * b)] {
            let w = harmonicity_modulus_refined(&f, &d, &[u], 0.08, &rule, DEFAULT_T_REFINE).unwrap();
            let (w1, w2) = classical_moduli_with_rule(&f, &d, u, 0.08, &rule, DEFAULT_T_REFINE).unwrap();
            prop_assert!(w.values[0] <= w1.min(w2) + 1e-15);
        }
    }

    #[test]
    fn k_functional_estimator_properties(a in 0.5f64..4.0, lambda in 0.0f64..4.0, s in 0.01f64..0.2, t in 0.01f64..0.2) {
        let outer = Domain::unit_ball(2).unwrap();
        let inner = outer.shrink(0.5).unwrap();
        let rule = make_rule(2, 32, None).unwrap();
        let f = wave(a, a);
        let lap = wave(a, a).scale(-2.0 * a * a);
        let fam = CandidateFamily::new(vec![0.1, 0.25, 0.4], vec![0.5, 1.0], 0.1);
        let table = CandidateTable::build(&f, Some(&lap), &outer, &inner, &fam, &rule).unwrap();
        let k = |x: f64| table.upper(x).0;
        prop_assert!(k(lambda * s) <= (lambda + 1.0).powi(2) * k(s) * (1.0 + 1e-12));
        prop_assert!(k(s + t) <= 2.0 * (k(s) + k(t)) * (1.0 + 1e-12));
    }
}

#[test]
fn vanishes_as_the_radius_shrinks() {
    let d = Domain::unit_ball(2).unwrap();
    let rule = make_rule(2, 32, None).unwrap();
    let cone = ScalarField::new(2, Smoothness::C0, |x| (x[0] * x[0] + x[1] * x[1]).sqrt());
    for f in [wave(3.0, 2.0), cone] {
        let radii = [0.005, 0.01, 0.02, 0.04];
        let w = harmonicity_modulus(&f, &d, &radii, 0.05, &rule).unwrap();
        let (_, w2_big) = classical_moduli_with_rule(&f, &d, 0.04, 0.05, &rule, DEFAULT_T_REFINE).unwrap();
        let (_, w2_small) = classical_moduli_with_rule(&f, &d, 0.005, 0.05, &rule, DEFAULT_T_REFINE).unwrap();
        assert!(w.values[0] <= w2_small + 1e-15);
        assert!(w2_small < w2_big / 2.0);
    }
}

#[test]
fn nested_domains_are_ordered() {
    let outer = Domain::unit_ball(2).unwrap();
    let inner = outer.shrink(0.3).unwrap();
    let rule = make_rule(2, 32, None).unwrap();
    let f = ScalarField::new(2, Smoothness::CInf, |x| (-2.0 * (x[0] * x[0] + x[1] * x[1])).exp() + x[0].powi(3));
    let radii = [0.05, 0.1, 0.2];
    let wo = harmonicity_modulus_sampled(&f, &outer, &outer, &radii, 0.05, &rule, DEFAULT_T_REFINE).unwrap();
    let wi = harmonicity_modulus_sampled(&f, &inner, &outer, &radii, 0.05, &rule, DEFAULT_T_REFINE).unwrap();
    for (a, b) in wi.values.iter().zip(&wo.values) {
        assert!(a <= b);
    }
}

#[test]
fn harmonic_fields_have_zero_modulus() {
    let d = Domain::unit_ball(2).unwrap();
    let rule = make_rule(2, 64, None).unwrap();
    let f = ScalarField::new(2, Smoothness::CInf, |x| x[0] * x[0] - x[1] * x[1] + 3.0 * x[0]);
    let w = harmonicity_modulus(&f, &d, &u_grid(), 0.05, &rule).unwrap();
    assert!(w.values.iter().all(|v| *v < 1e-13));
}
