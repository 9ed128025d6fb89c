use std::f64::consts::PI;

use harmonicity::dirichlet::{build_remainder, solve_dirichlet_detailed, solve_iterated, DirichletSolve};
use harmonicity::field_domain::advance;
use harmonicity::{Domain, ScalarField, Smoothness};

fn exp_cos() -> ScalarField {
    ScalarField::new(2, Smoothness::CInf, |x| x[0].exp() * x[1].cos())
}

fn node_error(s: &DirichletSolve, exact: &ScalarField) -> f64 {
    let g = &s.field;
    let mut idx = vec![0usize; g.dim()];
    let mut x = vec![0.0; g.dim()];
    let mut flat = 0;
    let mut worst = 0.0f64;
    loop {
        if s.interior[flat] {
            g.node(&idx, &mut x);
            worst = worst.max((g.get(&idx) - exact.eval(&x)).abs());
        }
        flat += 1;
        if !advance(&mut idx, g.shape()) {
            break;
        }
    }
    worst
}

#[test]
fn halving_the_spacing_quarters_the_error() {
    let d = Domain::unit_ball(2).unwrap();
    let f = exp_cos();
    let errs: Vec<f64> = [32.0, 64.0, 128.0]
        .iter()
        .map(|m| node_error(&solve_dirichlet_detailed(&f, None, &d, 1.0 / m, 1e-12).unwrap(), &f))
        .collect();
    for w in errs.windows(2) {
        assert!(w[0] / w[1] >= 3.5, "errors {errs:?}");
    }
    assert!(errs[2] <= 5.0 / (128.0 * 128.0));
}

/// Poisson integral of boundary data on the unit circle.
fn poisson(g: impl Fn(f64) -> f64, x: [f64; 2]) -> f64 {
    let m = 8192;
    let r2 = x[0] * x[0] + x[1] * x[1];
    (0..m)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / m as f64;
            let d2 = (x[0] - a.cos()).powi(2) + (x[1] - a.sin()).powi(2);
            (1.0 - r2) / d2 * g(a)
        })
        .sum::<f64>()
        / m as f64
}

#[test]
fn agrees_with_poisson_integral() {
    let d = Domain::unit_ball(2).unwrap();
    // a non-harmonic trace: the solution is unknown in closed form
    let data = ScalarField::new(2, Smoothness::CInf, |x| (3.0 * x[0]).sin() + x[1] * x[1] * x[1]);
    let h = 1.0 / 128.0;
    let s = solve_dirichlet_detailed(&data, None, &d, h, 1e-12).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            // lattice points so no interpolation error enters
            let x = [(-0.5 + 0.25 * i as f64), (-0.5 + 0.25 * j as f64)];
            let oracle = poisson(|a| (3.0 * a.cos()).sin() + a.sin().powi(3), x);
            let u = s.field.interpolate(&x);
            assert!((u - oracle).abs() <= 5.0 * h * h, "{x:?}: {u} vs {oracle}");
        }
    }
}

#[test]
fn discrete_maximum_principle() {
    let data = ScalarField::new(2, Smoothness::C0, |x| (x[0] - 0.3).abs() - x[1].powi(3));
    for d in [Domain::unit_ball(2).unwrap(), Domain::cuboid(&[0.0, -1.0], &[2.0, 0.5]).unwrap()] {
        let s = solve_dirichlet_detailed(&data, None, &d, 1.0 / 64.0, 1e-12).unwrap();
        let slack = 1e-9 * s.boundary_max.abs().max(s.boundary_min.abs());
        for (v, &inside) in s.field.values().iter().zip(&s.interior) {
            if inside {
                assert!(*v >= s.boundary_min - slack && *v <= s.boundary_max + slack);
            }
        }
    }
}

#[test]
fn remainder_is_continuous_across_the_boundary() {
    let d = Domain::unit_ball(2).unwrap();
    let f = ScalarField::new(2, Smoothness::CInf, |x| (2.0 * x[0]).sin() * x[1].exp());
    let h = 1.0 / 64.0;
    let sol = solve_iterated(&[f.clone()], &d, h, 1e-12).unwrap();
    let rem = build_remainder(&f, &sol, &d);
    // Lipschitz constant of f on the disk is below 2·e
    let lip = 2.0 * 1f64.exp();
    let mut worst = 0.0f64;
    for j in 0..720 {
        let a = 2.0 * PI * j as f64 / 720.0;
        for rho in [1.0 - h, 1.0 - 0.5 * h, 1.0, 1.0 + 0.5 * h] {
            worst = worst.max(rem.eval(&[rho * a.cos(), rho * a.sin()]).abs());
        }
    }
    assert!(worst <= h * lip + h * h, "band maximum {worst}");
}

#[test]
fn remainder_levels_vanish_on_the_boundary() {
    let d = Domain::unit_ball(2).unwrap();
    let quartic = ScalarField::new(2, Smoothness::CInf, |x| (x[0] * x[0] + x[1] * x[1]).powi(2));
    let lap = ScalarField::new(2, Smoothness::CInf, |x| 16.0 * (x[0] * x[0] + x[1] * x[1]));
    let sol = solve_iterated(&[quartic.clone(), lap.clone()], &d, 1.0 / 64.0, 1e-12).unwrap();
    let r0 = harmonicity::dirichlet::remainder_field(&quartic, &sol.levels[0], &d);
    let r1 = harmonicity::dirichlet::remainder_field(&lap, &sol.levels[1], &d);
    for j in 0..360 {
        let a = 2.0 * PI * j as f64 / 360.0;
        let p = [a.cos(), a.sin()];
        assert!(r0.eval(&p).abs() < 1e-3 && r1.eval(&p).abs() < 1e-3);
    }
}
