//! Finite-difference Dirichlet and iterated Dirichlet solvers.
//!
//! Interior nodes carry a Shortley–Weller stencil: an arm that leaves the
//! domain is shortened to the boundary crossing found by
//! [`Domain::segment_exit`] and the boundary value is imposed there. The
//! scheme is exact for quadratics and second-order accurate. The
//! nonsymmetric system is solved by BiCGSTAB on the Jacobi-scaled rows.
//! Exterior nodes next to the domain receive extrapolated ghost values so
//! that interpolation is accurate up to the boundary.

use crate::error::{Error, Result};
use crate::field_domain::{Domain, GridField, ScalarField, Smoothness, MAX_DIM};

pub const DEFAULT_SPACING: f64 = 1.0 / 128.0;
pub const DEFAULT_TOL: f64 = 1e-10;
/// Minimum number of cells across the inradius.
pub const MIN_CELLS: f64 = 8.0;
const PAD: usize = 2;
const MAX_ITERATIONS: usize = 50_000;

/// Output of one Dirichlet solve with its diagnostics.
#[derive(Clone, Debug)]
pub struct DirichletSolve {
    pub field: GridField,
    /// Nodes inside the open domain where the discrete equation holds.
    pub interior: Vec<bool>,
    /// Relative residual of the scaled system at exit.
    pub residual: f64,
    pub iterations: usize,
    /// Range of the boundary values imposed on cut stencil arms.
    pub boundary_min: f64,
    pub boundary_max: f64,
}

pub fn solve_dirichlet(
    boundary_data: &ScalarField,
    rhs: Option<&GridField>,
    domain: &Domain,
    spacing: f64,
    tol: f64,
) -> Result<GridField> {
    Ok(solve_dirichlet_detailed(boundary_data, rhs, domain, spacing, tol)?.field)
}

struct Layout {
    origin: Vec<f64>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    h: f64,
}

impl Layout {
    fn new(domain: &Domain, h: f64) -> Self {
        let (lo, hi) = domain.bounding_box();
        let origin: Vec<f64> = lo.iter().map(|v| v - PAD as f64 * h).collect();
        let shape: Vec<usize> = lo
            .iter()
            .zip(hi)
            .map(|(a, b)| ((b - a) / h - 1e-9).ceil() as usize + 1 + 2 * PAD)
            .collect();
        let mut strides = vec![1; shape.len()];
        for a in (0..shape.len() - 1).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }
        Self {
            origin,
            shape,
            strides,
            h,
        }
    }

    fn len(&self) -> usize {
        self.shape.iter().product()
    }

    fn coords(&self, mut flat: usize, x: &mut [f64]) -> [usize; MAX_DIM] {
        let mut idx = [0usize; MAX_DIM];
        for a in 0..self.shape.len() {
            idx[a] = flat / self.strides[a];
            flat %= self.strides[a];
            x[a] = self.origin[a] + self.h * idx[a] as f64;
        }
        idx
    }

    /// Flat index of the neighbour one step along `axis` in direction `up`.
    fn step(&self, flat: usize, idx: &[usize], axis: usize, up: bool) -> Option<usize> {
        if up {
            (idx[axis] + 1 < self.shape[axis]).then(|| flat + self.strides[axis])
        } else {
            (idx[axis] > 0).then(|| flat - self.strides[axis])
        }
    }
}

/// Solve with diagnostics; see [`solve_dirichlet`].
pub fn solve_dirichlet_detailed(
    boundary_data: &ScalarField,
    rhs: Option<&GridField>,
    domain: &Domain,
    spacing: f64,
    tol: f64,
) -> Result<DirichletSolve> {
    let n = domain.dim();
    if boundary_data.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: boundary_data.dim(),
        });
    }
    if let Some(g) = rhs {
        if g.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: g.dim() });
        }
    }
    if !(spacing > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("spacing and tol must be positive, got {spacing}, {tol}")));
    }
    let cells = domain.inradius() / spacing;
    if cells < MIN_CELLS {
        return Err(Error::SpacingTooCoarse {
            spacing,
            cells,
            required: MIN_CELLS,
        });
    }
    let layout = Layout::new(domain, spacing);
    let total = layout.len();
    let mut x = [0.0; MAX_DIM];
    let mut unknown = vec![usize::MAX; total];
    let mut nodes = Vec::new();
    for flat in 0..total {
        layout.coords(flat, &mut x[..n]);
        if domain.contains(&x[..n]) {
            unknown[flat] = nodes.len();
            nodes.push(flat);
        }
    }
    if nodes.is_empty() {
        return Err(Error::EmptySample("no grid node inside the domain".into()));
    }

    // rows scaled to unit diagonal; each has up to 2n neighbour entries
    let width = 2 * n;
    let m = nodes.len();
    let mut cols = vec![usize::MAX; m * width];
    let mut vals = vec![0.0; m * width];
    let mut b = vec![0.0; m];
    let mut bmin = f64::INFINITY;
    let mut bmax = f64::NEG_INFINITY;
    let mut y = [0.0; MAX_DIM];
    let h = spacing;
    for (row, &flat) in nodes.iter().enumerate() {
        let idx = layout.coords(flat, &mut x[..n]);
        let mut diag = 0.0;
        let mut rhs_row = match rhs {
            Some(g) => {
                let v = g.interpolate(&x[..n]);
                if !v.is_finite() {
                    return Err(Error::NonFinite { point: x[..n].to_vec() });
                }
                -v
            }
            None => 0.0,
        };
        let mut on_boundary = None;
        for axis in 0..n {
            // arm lengths and either a neighbour unknown or a boundary value
            let mut arms = [(1.0, usize::MAX, 0.0); 2];
            for (side, up) in [(0, false), (1, true)] {
                let nb = layout.step(flat, &idx[..n], axis, up).expect("padding keeps neighbours on the grid");
                if unknown[nb] != usize::MAX {
                    arms[side] = (1.0, unknown[nb], 0.0);
                    continue;
                }
                y[..n].copy_from_slice(&x[..n]);
                y[axis] += if up { h } else { -h };
                let theta = domain.segment_exit(&x[..n], &y[..n]);
                let mut p = x;
                p[axis] += if up { theta * h } else { -theta * h };
                let g = boundary_data.eval(&p[..n]);
                if !g.is_finite() {
                    return Err(Error::NonFinite { point: p[..n].to_vec() });
                }
                bmin = bmin.min(g);
                bmax = bmax.max(g);
                if theta < 1e-12 {
                    on_boundary = Some(g);
                }
                arms[side] = (theta, usize::MAX, g);
            }
            let (hm, hp) = (arms[0].0 * h, arms[1].0 * h);
            diag += 2.0 / (hm * hp);
            for (side, len) in [(0, hm), (1, hp)] {
                let c = 2.0 / (len * (hm + hp));
                let (_, col, g) = arms[side];
                if col == usize::MAX {
                    rhs_row += c * g;
                } else {
                    cols[row * width + 2 * axis + side] = col;
                    vals[row * width + 2 * axis + side] = -c;
                }
            }
        }
        if let Some(g) = on_boundary {
            for e in 0..width {
                cols[row * width + e] = usize::MAX;
                vals[row * width + e] = 0.0;
            }
            b[row] = g;
            continue;
        }
        for e in 0..width {
            vals[row * width + e] /= diag;
        }
        b[row] = rhs_row / diag;
    }
    if nodes.len() == 0 || !bmin.is_finite() {
        bmin = 0.0;
        bmax = 0.0;
    }

    let matvec = |u: &[f64], out: &mut [f64]| {
        for row in 0..m {
            let mut acc = u[row];
            for e in 0..width {
                let c = cols[row * width + e];
                if c != usize::MAX {
                    acc += vals[row * width + e] * u[c];
                }
            }
            out[row] = acc;
        }
    };
    let (sol, iterations, residual) = bicgstab(&matvec, &b, tol)?;

    let mut values = vec![f64::NAN; total];
    let mut interior = vec![false; total];
    for (row, &flat) in nodes.iter().enumerate() {
        values[flat] = sol[row];
        interior[flat] = true;
    }
    extend_ghosts(&layout, domain, boundary_data, &unknown, &mut values);
    let field = GridField::new(layout.origin.clone(), h, layout.shape.clone(), values)?;
    Ok(DirichletSolve {
        field,
        interior,
        residual,
        iterations,
        boundary_min: bmin,
        boundary_max: bmax,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BiCGSTAB from a zero initial guess. Returns the solution, the iteration
/// count and the final relative residual.
fn bicgstab<F: Fn(&[f64], &mut [f64])>(a: &F, b: &[f64], tol: f64) -> Result<(Vec<f64>, usize, f64)> {
    let m = b.len();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; m];
    if bnorm == 0.0 {
        return Ok((x, 0, 0.0));
    }
    let mut r = b.to_vec();
    let mut r_hat = r.clone();
    let mut p = vec![0.0; m];
    let mut v = vec![0.0; m];
    let mut s = vec![0.0; m];
    let mut t = vec![0.0; m];
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut res = 1.0;
    for it in 1..=MAX_ITERATIONS {
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < 1e-300 || omega == 0.0 {
            // breakdown: restart the shadow residual from the current one
            a(&x, &mut t);
            for i in 0..m {
                r[i] = b[i] - t[i];
            }
            r_hat.copy_from_slice(&r);
            p.iter_mut().for_each(|v| *v = 0.0);
            v.iter_mut().for_each(|v| *v = 0.0);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..m {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        a(&p, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for i in 0..m {
            s[i] = r[i] - alpha * v[i];
        }
        let snorm = dot(&s, &s).sqrt() / bnorm;
        if snorm <= tol {
            for i in 0..m {
                x[i] += alpha * p[i];
            }
            let res = true_residual(a, &x, b, bnorm);
            return Ok((x, it, res));
        }
        a(&s, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for i in 0..m {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        res = dot(&r, &r).sqrt() / bnorm;
        if res <= tol {
            let true_res = true_residual(a, &x, b, bnorm);
            if true_res <= 10.0 * tol {
                return Ok((x, it, true_res));
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        residual: res,
    })
}

fn true_residual<F: Fn(&[f64], &mut [f64])>(a: &F, x: &[f64], b: &[f64], bnorm: f64) -> f64 {
    let mut ax = vec![0.0; x.len()];
    a(x, &mut ax);
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (q - p) * (q - p)).sum();
    r.sqrt() / bnorm
}

/// Fills exterior nodes near the domain with extrapolated values, exact for
/// quadratics wherever enough nodes are available. The first layer uses the
/// boundary crossing of the cut arm together with interior nodes; further
/// layers extrapolate along grid lines. Candidates from different
/// directions are averaged.
fn extend_ghosts(layout: &Layout, domain: &Domain, g: &ScalarField, unknown: &[usize], values: &mut [f64]) {
    let n = layout.shape.len();
    let total = layout.len();
    let mut x = [0.0; MAX_DIM];
    let mut xi = [0.0; MAX_DIM];
    let mut p = [0.0; MAX_DIM];
    let interior = |f: usize| unknown[f] != usize::MAX;
    let mut first = Vec::new();
    for flat in 0..total {
        if interior(flat) {
            continue;
        }
        let idx = layout.coords(flat, &mut x[..n]);
        let mut exact = Candidates::default();
        let mut rough = Candidates::default();
        for axis in 0..n {
            for up in [false, true] {
                let Some(i) = layout.step(flat, &idx[..n], axis, up).filter(|&i| interior(i)) else { continue };
                // i1, i2: further nodes on the line, away from this one
                let i_idx = layout.coords(i, &mut xi[..n]);
                let i1 = layout.step(i, &i_idx[..n], axis, up).filter(|&f| interior(f));
                let i2 = i1.and_then(|f| {
                    let mut tmp = [0.0; MAX_DIM];
                    let f_idx = layout.coords(f, &mut tmp[..n]);
                    layout.step(f, &f_idx[..n], axis, up).filter(|&f| interior(f))
                });
                let theta = domain.segment_exit(&xi[..n], &x[..n]);
                for a in 0..n {
                    p[a] = xi[a] + theta * (x[a] - xi[a]);
                }
                let ub = g.eval(&p[..n]);
                let ui = values[i];
                match (i1, i2) {
                    (Some(f1), _) if theta >= 0.1 => {
                        // quadratic through positions −1, 0, θ evaluated at 1
                        let u1 = values[f1];
                        exact.push(
                            (1.0 - theta) / (1.0 + theta) * u1 - 2.0 * (1.0 - theta) / theta * ui
                                + 2.0 / (theta * (1.0 + theta)) * ub,
                        );
                    }
                    (Some(f1), Some(f2)) => exact.push(3.0 * ui - 3.0 * values[f1] + values[f2]),
                    (Some(f1), None) => rough.push(2.0 * ui - values[f1]),
                    (None, _) => rough.push(ui + (ub - ui) / theta.max(0.1)),
                }
            }
        }
        if let Some(v) = exact.mean().or_else(|| rough.mean()) {
            first.push((flat, v));
        }
    }
    let mut assigned: Vec<bool> = unknown.iter().map(|&u| u != usize::MAX).collect();
    for &(flat, v) in &first {
        values[flat] = v;
        assigned[flat] = true;
    }
    // cubic stencils reach up to 2n axis steps from an interior node
    for _layer in 1..2 * n {
        let mut next = Vec::new();
        for flat in 0..total {
            if assigned[flat] {
                continue;
            }
            let mut exact = Candidates::default();
            let mut rough = Candidates::default();
            for axis in 0..n {
                for up in [false, true] {
                    let mut line = [usize::MAX; 3];
                    let mut cur = flat;
                    for slot in line.iter_mut() {
                        let mut tmp = [0.0; MAX_DIM];
                        let c_idx = layout.coords(cur, &mut tmp[..n]);
                        match layout.step(cur, &c_idx[..n], axis, up) {
                            Some(nx) if assigned[nx] => {
                                *slot = nx;
                                cur = nx;
                            }
                            _ => break,
                        }
                    }
                    match line {
                        [a, b, c] if c != usize::MAX => exact.push(3.0 * values[a] - 3.0 * values[b] + values[c]),
                        [a, b, _] if b != usize::MAX => rough.push(2.0 * values[a] - values[b]),
                        _ => {}
                    }
                }
            }
            if let Some(v) = exact.mean().or_else(|| rough.mean()) {
                next.push((flat, v));
            }
        }
        for (flat, v) in next {
            values[flat] = v;
            assigned[flat] = true;
        }
    }
}

#[derive(Default)]
struct Candidates {
    sum: f64,
    count: usize,
}

impl Candidates {
    fn push(&mut self, v: f64) {
        if v.is_finite() {
            self.sum += v;
            self.count += 1;
        }
    }

    fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }
}

/// Levels `u_j ≈ Δ^j h_f` of an iterated Dirichlet solve; `levels[0]` is
/// `h_f` and `levels[r]` is harmonic.
#[derive(Clone, Debug)]
pub struct BvpSolution {
    pub r: usize,
    pub levels: Vec<GridField>,
    pub domain: Domain,
    pub grid_spacing: f64,
    /// Indexed like `levels`.
    pub residual_norms: Vec<f64>,
}

impl BvpSolution {
    pub fn h_f(&self) -> &GridField {
        &self.levels[0]
    }
}

/// `laplacians[j] = Δ^j f` for `j = 0..=r`, in closed form.
pub fn solve_iterated(laplacians: &[ScalarField], domain: &Domain, spacing: f64, tol: f64) -> Result<BvpSolution> {
    if laplacians.is_empty() {
        return Err(Error::InvalidArgument("need at least the field itself".into()));
    }
    let r = laplacians.len() - 1;
    let mut levels: Vec<Option<GridField>> = vec![None; r + 1];
    let mut residuals = vec![0.0; r + 1];
    for j in (0..=r).rev() {
        let rhs = levels.get(j + 1).and_then(|l| l.as_ref());
        let s = solve_dirichlet_detailed(&laplacians[j], rhs, domain, spacing, tol)
            .map_err(|e| Error::Stage { stage: j, source: Box::new(e) })?;
        residuals[j] = s.residual;
        levels[j] = Some(s.field);
    }
    Ok(BvpSolution {
        r,
        levels: levels.into_iter().map(|l| l.expect("every level solved")).collect(),
        domain: domain.clone(),
        grid_spacing: spacing,
        residual_norms: residuals,
    })
}

/// `g − level` on the closure of `domain` and exactly `0` outside.
pub fn remainder_field(g: &ScalarField, level: &GridField, domain: &Domain) -> ScalarField {
    let (g, level, domain) = (g.clone(), level.clone(), domain.clone());
    ScalarField::new(g.dim(), Smoothness::C0, move |x| {
        if domain.contains_closure(x) {
            g.eval(x) - level.interpolate(x)
        } else {
            0.0
        }
    })
}

/// `F_r = f − h_f` on the closure of the domain, `0` outside.
pub fn build_remainder(f: &ScalarField, sol: &BvpSolution, domain: &Domain) -> ScalarField {
    remainder_field(f, sol.h_f(), domain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> ScalarField {
        ScalarField::new(2, Smoothness::CInf, |x| x[0] * x[0] + x[1] * x[1])
    }

    fn max_error(field: &GridField, interior: &[bool], exact: impl Fn(&[f64]) -> f64) -> f64 {
        let n = field.dim();
        let mut worst = 0.0f64;
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        let mut flat = 0;
        loop {
            if interior[flat] {
                field.node(&idx, &mut x);
                worst = worst.max((field.get(&idx) - exact(&x)).abs());
            }
            flat += 1;
            if !crate::field_domain::advance(&mut idx, field.shape()) {
                break;
            }
        }
        worst
    }

    #[test]
    fn harmonic_quadratic_is_reproduced() {
        let d = Domain::unit_ball(2).unwrap();
        let f = ScalarField::new(2, Smoothness::CInf, |x| x[0] * x[0] - x[1] * x[1]);
        let s = solve_dirichlet_detailed(&f, None, &d, 1.0 / 32.0, 1e-12).unwrap();
        assert!(max_error(&s.field, &s.interior, |x| f.eval(x)) < 1e-9);
        // ghost values keep interpolation accurate up to the boundary
        let p = [0.999f64.sqrt() * 0.6, 0.999f64.sqrt() * 0.8];
        assert!((s.field.interpolate(&p) - f.eval(&p)).abs() < 2e-3);
    }

    #[test]
    fn constant_trace_gives_constant() {
        let d = Domain::unit_ball(2).unwrap();
        let u = solve_dirichlet(&sq(), None, &d, 1.0 / 32.0, 1e-12).unwrap();
        assert!((u.interpolate(&[0.1, -0.3]) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn biharmonic_closed_form() {
        let d = Domain::unit_ball(2).unwrap();
        let quartic = ScalarField::new(2, Smoothness::CInf, |x| (x[0] * x[0] + x[1] * x[1]).powi(2));
        let lap = ScalarField::new(2, Smoothness::CInf, |x| 16.0 * (x[0] * x[0] + x[1] * x[1]));
        let sol = solve_iterated(&[quartic, lap], &d, 1.0 / 32.0, 1e-12).unwrap();
        assert_eq!(sol.levels.len(), 2);
        let x = [0.25, 0.3125];
        assert!((sol.levels[1].interpolate(&x) - 16.0).abs() < 1e-8);
        let s = x[0] * x[0] + x[1] * x[1];
        assert!((sol.h_f().interpolate(&x) - (4.0 * s - 3.0)).abs() < 1e-8);
    }

    #[test]
    fn remainder_vanishes_outside() {
        let d = Domain::unit_ball(2).unwrap();
        let sol = solve_iterated(&[sq()], &d, 1.0 / 32.0, 1e-12).unwrap();
        let rem = build_remainder(&sq(), &sol, &d);
        assert_eq!(rem.eval(&[1.2, 0.0]), 0.0);
        assert!((rem.eval(&[0.3, 0.4]) - (0.25 - 1.0)).abs() < 1e-9);
        assert!(rem.eval(&[1.0, 0.0]).abs() < 1e-9);
    }

    #[test]
    fn box_and_ball_in_three_dimensions() {
        let f = ScalarField::new(3, Smoothness::CInf, |x| x[0] * x[1] + x[2] * x[2] - x[0] * x[0]);
        let b = Domain::cuboid(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]).unwrap();
        let u = solve_dirichlet(&f, None, &b, 1.0 / 16.0, 1e-12).unwrap();
        assert!((u.interpolate(&[0.5, 0.25, 0.75]) - f.eval(&[0.5, 0.25, 0.75])).abs() < 1e-9);
        let ball = Domain::unit_ball(3).unwrap();
        let u = solve_dirichlet(&f, None, &ball, 1.0 / 16.0, 1e-12).unwrap();
        let x = [0.125, 0.25, -0.3125];
        assert!((u.interpolate(&x) - f.eval(&x)).abs() < 1e-9);
    }

    #[test]
    fn rejects_coarse_spacing() {
        let d = Domain::unit_ball(2).unwrap();
        assert!(matches!(solve_dirichlet(&sq(), None, &d, 0.2, 1e-10), Err(Error::SpacingTooCoarse { .. })));
    }
}
