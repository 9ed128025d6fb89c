//! Convolution with the polyharmonic Jackson kernel and the recursive
//! polyharmonic approximant.
//!
//! All work happens in the frame where the domain lies in `B(0; 1/2)`.
//! Convolutions are lattice sums on `h·Zⁿ` with weights `hⁿ q(h²|j|²)` for
//! `h|j| < 1`, so a grid of stage values can be fed into the next stage
//! without interpolation.

use crate::dirichlet::{remainder_field, solve_iterated, BvpSolution, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::field_domain::{
    advance, pullback_field, rescale_to_half_ball, Domain, GridField, Interp, ScalarField, Similarity, Smoothness, MAX_DIM,
};
use crate::jackson_kernels::{polyharmonic_kernel, KernelParams, RadialKernel};
use crate::modulus::{classical_moduli_with_rule, harmonicity_modulus_refined, DEFAULT_T_REFINE};
use crate::sphere_mean::{make_rule, SphereRule};

/// Lattice quadrature of `∫_{B(0;1)} K(u) φ(x − u) du`.
#[derive(Clone, Debug)]
pub struct ConvolutionStencil {
    dim: usize,
    spacing: f64,
    offsets: Vec<i32>,
    weights: Vec<f64>,
    reach: usize,
}

impl ConvolutionStencil {
    pub fn new(kernel: &RadialKernel, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing < 0.5) {
            return Err(Error::InvalidArgument(format!("convolution spacing must lie in (0, 0.5), got {spacing}")));
        }
        let n = kernel.dim();
        let reach = (1.0 / spacing).ceil() as usize;
        let side = 2 * reach + 1;
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        let mut idx = vec![0usize; n];
        let shape = vec![side; n];
        let cell = spacing.powi(n as i32);
        loop {
            let mut s = 0.0;
            for &i in &idx {
                let j = i as f64 - reach as f64;
                s += j * j;
            }
            let s = s * spacing * spacing;
            if s < 1.0 {
                offsets.extend(idx.iter().map(|&i| i as i32 - reach as i32));
                weights.push(cell * kernel.eval_s(s));
            }
            if !advance(&mut idx, &shape) {
                break;
            }
        }
        Ok(Self {
            dim: n,
            spacing,
            offsets,
            weights,
            reach,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `Σ w_j`, ideally `1`.
    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn offset(&self, j: usize) -> &[i32] {
        &self.offsets[j * self.dim..(j + 1) * self.dim]
    }

    /// `Σ_j w_j φ(x − h j)`.
    pub fn apply(&self, f: &ScalarField, x: &[f64]) -> f64 {
        let n = self.dim;
        let mut y = [0.0; MAX_DIM];
        let mut acc = 0.0;
        for (j, w) in self.weights.iter().enumerate() {
            let o = self.offset(j);
            for i in 0..n {
                y[i] = x[i] - self.spacing * o[i] as f64;
            }
            acc += w * f.eval(&y[..n]);
        }
        acc
    }
}

/// `T_K[f](x)` by the lattice rule of spacing `conv_grid` centred at `x`.
pub fn convolve(kernel: &RadialKernel, f: &ScalarField, x: &[f64], conv_grid: f64) -> Result<f64> {
    let s = ConvolutionStencil::new(kernel, conv_grid)?;
    Ok(s.apply(f, x))
}

/// `T_prev + T_K[F − T_prev]` as a lazily evaluated field.
pub fn jackson_stage(kernel: &RadialKernel, f: &ScalarField, t_prev: &ScalarField, conv_grid: f64) -> Result<ScalarField> {
    let stencil = ConvolutionStencil::new(kernel, conv_grid)?;
    let diff = f.sub(t_prev);
    let prev = t_prev.clone();
    Ok(ScalarField::new(f.dim(), Smoothness::CInf, move |x| prev.eval(x) + stencil.apply(&diff, x)))
}

#[derive(Clone, Debug)]
pub struct ApproximantConfig {
    /// Target polyharmonic order.
    pub p: usize,
    /// Smoothness class of the input.
    pub r: usize,
    /// Kernel exponent, with `2k − n ≥ 3`.
    pub k: usize,
    /// Convolution lattice spacing in the rescaled frame.
    pub conv_grid: f64,
    /// Evaluation spacing, a whole multiple of `conv_grid`.
    pub eval_grid: f64,
    pub bvp_spacing: f64,
    pub bvp_tol: f64,
    /// Centre density for the moduli of the top remainder.
    pub modulus_density: f64,
    pub sphere_budget: usize,
    pub seed: u64,
}

impl ApproximantConfig {
    pub fn new(p: usize, r: usize, k: usize) -> Self {
        Self {
            p,
            r,
            k,
            conv_grid: 1.0 / 100.0,
            eval_grid: 1.0 / 50.0,
            bvp_spacing: 1.0 / 128.0,
            bvp_tol: DEFAULT_TOL,
            modulus_density: 1.0 / 64.0,
            sphere_budget: 64,
            seed: 0,
        }
    }

    fn eval_stride(&self) -> Result<usize> {
        let ratio = self.eval_grid / self.conv_grid;
        let stride = ratio.round();
        if !(stride >= 1.0) || (ratio - stride).abs() > 1e-9 * ratio {
            return Err(Error::InvalidArgument(format!(
                "eval grid {} must be a whole multiple of the convolution grid {}",
                self.eval_grid, self.conv_grid
            )));
        }
        Ok(stride as usize)
    }

    pub fn kernel_params(&self, dim: usize) -> Result<KernelParams> {
        KernelParams::for_order(self.p, self.k, dim)
    }

    pub fn validate(&self, dim: usize) -> Result<KernelParams> {
        if self.p < self.r + 1 {
            return Err(Error::InvalidArgument(format!("need p >= r + 1, got p={}, r={}", self.p, self.r)));
        }
        if 2 * self.k < dim + 3 {
            return Err(Error::InvalidArgument(format!(
                "kernel exponent k={} too small for dimension {dim}: need 2k - n >= 3",
                self.k
            )));
        }
        for (name, v) in [
            ("conv_grid", self.conv_grid),
            ("eval_grid", self.eval_grid),
            ("bvp_spacing", self.bvp_spacing),
            ("bvp_tol", self.bvp_tol),
            ("modulus_density", self.modulus_density),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        self.eval_stride()?;
        let params = self.kernel_params(dim)?;
        debug_assert!(params.order() <= self.p);
        Ok(params)
    }
}

#[derive(Clone, Debug)]
pub struct ApproximantResult {
    /// The approximant in original coordinates.
    pub t_p: ScalarField,
    /// Samples of the approximant on the evaluation lattice of the rescaled
    /// frame; `NaN` away from the domain.
    pub grid: GridField,
    pub similarity: Similarity,
    pub kernel: KernelParams,
    /// Kernel order equals `p` instead of staying below it.
    pub order_meets_target: bool,
    pub sup_error: f64,
    /// `sup |F_r − T(m)|` over the domain after stage `m`.
    pub per_stage_errors: Vec<f64>,
    /// `ω^h(Δ^r F_r; 1/p)` on a ball enclosing the support.
    pub modulus_factor: f64,
    /// `ω^h(Δ^r F_r; 1/p) · p^{−2r}`.
    pub rate_budget: f64,
    /// `sup_error / rate_budget`, absent when the budget vanishes.
    pub implied_constant: Option<f64>,
    /// Error that the discretisation alone can explain.
    pub error_floor: f64,
    pub weight_sum: f64,
    pub boundary_mismatch: f64,
    pub eval_points: usize,
    /// `Δ^r F_r` in the rescaled frame.
    pub top_remainder: ScalarField,
    pub enclosing_ball: Domain,
    pub sphere_rule: SphereRule,
    pub modulus_density: f64,
    pub bvp: BvpSolution,
}

/// Dense array on the integer box `lo..lo+shape` of the lattice `h·Zⁿ`.
struct LatticeBox {
    lo: Vec<i64>,
    shape: Vec<usize>,
    strides: Vec<usize>,
}

impl LatticeBox {
    fn new(lo: Vec<i64>, hi: Vec<i64>) -> Self {
        let shape: Vec<usize> = lo.iter().zip(&hi).map(|(a, b)| (b - a + 1) as usize).collect();
        let mut strides = vec![1; shape.len()];
        for a in (0..shape.len() - 1).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }
        Self { lo, shape, strides }
    }

    fn grow(&self, by: usize) -> Self {
        let lo = self.lo.iter().map(|v| v - by as i64).collect();
        let hi = self
            .lo
            .iter()
            .zip(&self.shape)
            .map(|(v, s)| v + *s as i64 - 1 + by as i64)
            .collect();
        Self::new(lo, hi)
    }

    fn len(&self) -> usize {
        self.shape.iter().product()
    }

    /// Flat index of integer point `p`, if inside.
    #[inline]
    fn index(&self, p: &[i64]) -> Option<usize> {
        let mut flat = 0;
        for a in 0..p.len() {
            let i = p[a] - self.lo[a];
            if i < 0 || i as usize >= self.shape[a] {
                return None;
            }
            flat += i as usize * self.strides[a];
        }
        Some(flat)
    }

    fn point(&self, mut flat: usize, p: &mut [i64]) {
        for a in 0..self.shape.len() {
            p[a] = self.lo[a] + (flat / self.strides[a]) as i64;
            flat %= self.strides[a];
        }
    }

    /// Flat offsets of the stencil in this layout.
    fn deltas(&self, stencil: &ConvolutionStencil) -> Vec<isize> {
        (0..stencil.len())
            .map(|j| {
                stencil
                    .offset(j)
                    .iter()
                    .zip(&self.strides)
                    .map(|(&o, &s)| o as isize * s as isize)
                    .sum()
            })
            .collect()
    }

    /// True when `p ± reach` stays in the box on every axis.
    fn contains_with_margin(&self, p: &[i64], reach: usize) -> bool {
        (0..p.len()).all(|a| {
            let i = p[a] - self.lo[a];
            i >= reach as i64 && ((i + reach as i64) as usize) < self.shape[a]
        })
    }
}

/// `Σ_j w_j φ(y − hj)` for lattice point `p` from values of `φ` on `src`
/// (zero outside it).
fn gather(stencil: &ConvolutionStencil, src: &LatticeBox, deltas: &[isize], phi: &[f64], p: &[i64]) -> f64 {
    let n = p.len();
    if src.contains_with_margin(p, stencil.reach) {
        let base = src.index(p).expect("inside") as isize;
        let mut acc = 0.0;
        for (w, d) in stencil.weights.iter().zip(deltas) {
            acc += w * phi[(base - d) as usize];
        }
        return acc;
    }
    let mut q = [0i64; MAX_DIM];
    let mut acc = 0.0;
    for (j, w) in stencil.weights.iter().enumerate() {
        let o = stencil.offset(j);
        for a in 0..n {
            q[a] = p[a] - o[a] as i64;
        }
        if let Some(i) = src.index(&q[..n]) {
            acc += w * phi[i];
        }
    }
    acc
}

/// Runs the full construction: rescale, iterated Dirichlet solve,
/// remainder, `r + 1` convolution stages, and error measurement.
/// `laplacians[j]` is `Δ^j f` for `j = 0..=r`.
pub fn build_approximant(laplacians: &[ScalarField], domain: &Domain, cfg: &ApproximantConfig) -> Result<ApproximantResult> {
    let n = domain.dim();
    let params = cfg.validate(n)?;
    if laplacians.len() < cfg.r + 1 {
        return Err(Error::InvalidArgument(format!(
            "smoothness class r={} needs {} closed-form Laplacians, got {}",
            cfg.r,
            cfg.r + 1,
            laplacians.len()
        )));
    }
    for l in laplacians {
        if l.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: l.dim() });
        }
    }
    let r = cfg.r;
    let (dom, sim) = rescale_to_half_ball(domain)?;
    // Δ_y G = λ⁻² (Δ_x f) for G(y) = f(y/λ + shift)
    let pulled: Vec<ScalarField> = laplacians[..=r]
        .iter()
        .enumerate()
        .map(|(j, l)| pullback_field(l, sim.scale, &sim.shift).map(|g| g.scale(sim.scale.powi(-2 * j as i32))))
        .collect::<Result<_>>()?;
    let mut bvp = solve_iterated(&pulled, &dom, cfg.bvp_spacing, cfg.bvp_tol).map_err(|e| stage_err(0, e))?;
    for level in bvp.levels.iter_mut() {
        *level = level.clone().with_interp(Interp::Cubic);
    }
    let remainder = remainder_field(&pulled[0], bvp.h_f(), &dom);
    let top_remainder = remainder_field(&pulled[r], &bvp.levels[r], &dom);

    let kernel = polyharmonic_kernel(params)?;
    let stencil = ConvolutionStencil::new(&kernel, cfg.conv_grid).map_err(|e| stage_err(1, e))?;
    let h = cfg.conv_grid;
    let stride = cfg.eval_stride()?;

    // lattice box of the remainder support
    let (lo, hi) = dom.bounding_box();
    let f_box = LatticeBox::new(
        lo.iter().map(|v| (v / h).floor() as i64 - 1).collect(),
        hi.iter().map(|v| (v / h).ceil() as i64 + 1).collect(),
    );
    let mut p = [0i64; MAX_DIM];
    let mut y = [0.0; MAX_DIM];
    let mut f_vals = vec![0.0; f_box.len()];
    for (i, v) in f_vals.iter_mut().enumerate() {
        f_box.point(i, &mut p[..n]);
        for a in 0..n {
            y[a] = p[a] as f64 * h;
        }
        *v = remainder.eval(&y[..n]);
        if !v.is_finite() {
            return Err(stage_err(1, Error::NonFinite { point: y[..n].to_vec() }));
        }
    }

    // evaluation nodes: multiples of the stride near the closure
    let eval_box = {
        let s = stride as i64;
        LatticeBox::new(
            f_box.lo.iter().map(|v| v.div_euclid(s)).collect(),
            f_box
                .lo
                .iter()
                .zip(&f_box.shape)
                .map(|(v, sh)| (v + *sh as i64 - 1).div_euclid(s) + 1)
                .collect(),
        )
    };
    let near = 2.0 * cfg.eval_grid;
    let mut eval_pts: Vec<(usize, Vec<i64>, bool)> = Vec::new();
    for i in 0..eval_box.len() {
        eval_box.point(i, &mut p[..n]);
        let q: Vec<i64> = p[..n].iter().map(|v| v * stride as i64).collect();
        for a in 0..n {
            y[a] = q[a] as f64 * h;
        }
        let bd = dom.boundary_distance(&y[..n]);
        if bd >= -near {
            eval_pts.push((i, q, dom.contains_closure(&y[..n])));
        }
    }

    // stage values: T(m) on boxes grown by (r − m) stencil reaches
    let reach = stencil.reach;
    let mut stage_at_eval: Vec<Vec<f64>> = Vec::with_capacity(r + 1);
    let mut prev: Option<(LatticeBox, Vec<f64>)> = None;
    for m in 0..=r {
        if m == r {
            let vals: Vec<f64> = match &prev {
                None => {
                    let d = f_box.deltas(&stencil);
                    eval_pts.iter().map(|(_, q, _)| gather(&stencil, &f_box, &d, &f_vals, q)).collect()
                }
                Some((bx, t)) => {
                    let phi = difference_on(bx, t, &f_box, &f_vals, n);
                    let d = bx.deltas(&stencil);
                    eval_pts
                        .iter()
                        .map(|(_, q, _)| t[bx.index(q).expect("eval node inside stage box")] + gather(&stencil, bx, &d, &phi, q))
                        .collect()
                }
            };
            stage_at_eval.push(vals);
            break;
        }
        let target = f_box.grow((r - m) * reach);
        let t: Vec<f64> = match &prev {
            None => scatter(&stencil, &f_box, &f_vals, &target, n),
            Some((bx, t_prev)) => {
                let phi = difference_on(bx, t_prev, &f_box, &f_vals, n);
                let d = bx.deltas(&stencil);
                let mut out = vec![0.0; target.len()];
                let mut q = [0i64; MAX_DIM];
                for (i, o) in out.iter_mut().enumerate() {
                    target.point(i, &mut q[..n]);
                    let base = bx.index(&q[..n]).map_or(0.0, |k| t_prev[k]);
                    *o = base + gather(&stencil, bx, &d, &phi, &q[..n]);
                }
                out
            }
        };
        stage_at_eval.push(
            eval_pts
                .iter()
                .map(|(_, q, _)| t[target.index(q).expect("eval node inside stage box")])
                .collect(),
        );
        prev = Some((target, t));
    }

    // F at evaluation nodes and errors per stage
    let f_at: Vec<f64> = eval_pts
        .iter()
        .map(|(_, q, _)| f_box.index(q).map_or(0.0, |i| f_vals[i]))
        .collect();
    let mut per_stage_errors = Vec::with_capacity(r + 1);
    for vals in &stage_at_eval {
        let e = eval_pts
            .iter()
            .zip(vals.iter().zip(&f_at))
            .filter(|((_, _, inside), _)| *inside)
            .map(|(_, (t, f))| (f - t).abs())
            .fold(0.0, f64::max);
        per_stage_errors.push(e);
    }
    let final_vals = stage_at_eval.last().expect("at least one stage");

    // approximant grid: h_f + T(r)
    let eval_h = h * stride as f64;
    let mut grid_vals = vec![f64::NAN; eval_box.len()];
    let mut sup_error = 0.0f64;
    let mut count = 0;
    for ((i, q, inside), t) in eval_pts.iter().zip(final_vals) {
        for a in 0..n {
            y[a] = q[a] as f64 * h;
        }
        let v = bvp.h_f().interpolate(&y[..n]) + t;
        grid_vals[*i] = v;
        if *inside {
            let e = (pulled[0].eval(&y[..n]) - v).abs();
            if !e.is_finite() {
                return Err(stage_err(r + 1, Error::NonFinite { point: y[..n].to_vec() }));
            }
            sup_error = sup_error.max(e);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptySample("no evaluation node in the domain".into()));
    }
    let origin: Vec<f64> = eval_box.lo.iter().map(|v| *v as f64 * eval_h).collect();
    let grid = GridField::new(origin, eval_h, eval_box.shape.clone(), grid_vals)?;

    let rule = make_rule(n, cfg.sphere_budget, Some(cfg.seed))?;
    let u = 1.0 / cfg.p as f64;
    let enclosing_ball = Domain::ball(&vec![0.0; n], 0.5 + 2.0 * u)?;
    let modulus_factor =
        harmonicity_modulus_refined(&top_remainder, &enclosing_ball, &[u], cfg.modulus_density, &rule, DEFAULT_T_REFINE)
            .map_err(|e| stage_err(r + 2, e))?
            .values[0];
    let rate_budget = modulus_factor * (cfg.p as f64).powi(-2 * r as i32);
    let f_norm = f_vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let weight_sum = stencil.weight_sum();
    let boundary_mismatch = trace_mismatch(&dom, &pulled[0], bvp.h_f(), eval_h);
    let error_floor = (r + 1) as f64 * (weight_sum - 1.0).abs() * f_norm + boundary_mismatch;

    let t_p = {
        let g = grid.clone();
        let s = sim.clone();
        ScalarField::new(n, Smoothness::C0, move |x| {
            let mut yy = [0.0; MAX_DIM];
            s.forward(x, &mut yy[..n]);
            g.interpolate(&yy[..n])
        })
    };
    Ok(ApproximantResult {
        t_p,
        grid,
        similarity: sim,
        kernel: params,
        order_meets_target: params.order_meets_target(),
        sup_error,
        per_stage_errors,
        modulus_factor,
        rate_budget,
        implied_constant: (rate_budget > 0.0).then(|| sup_error / rate_budget),
        error_floor,
        weight_sum,
        boundary_mismatch,
        eval_points: count,
        top_remainder,
        enclosing_ball,
        sphere_rule: rule,
        modulus_density: cfg.modulus_density,
        bvp,
    })
}

fn stage_err(stage: usize, e: Error) -> Error {
    match e {
        Error::Stage { .. } => e,
        other => Error::Stage {
            stage,
            source: Box::new(other),
        },
    }
}

/// `F − T` on the layout of `bx`, with `F` taken as zero outside its box.
fn difference_on(bx: &LatticeBox, t: &[f64], f_box: &LatticeBox, f_vals: &[f64], n: usize) -> Vec<f64> {
    let mut q = [0i64; MAX_DIM];
    (0..bx.len())
        .map(|i| {
            bx.point(i, &mut q[..n]);
            f_box.index(&q[..n]).map_or(0.0, |k| f_vals[k]) - t[i]
        })
        .collect()
}

/// `T_K[F]` on `target` by scattering the nonzero samples of `F`.
fn scatter(stencil: &ConvolutionStencil, src: &LatticeBox, vals: &[f64], target: &LatticeBox, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; target.len()];
    let deltas = target.deltas(stencil);
    let mut p = [0i64; MAX_DIM];
    for (i, &v) in vals.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        src.point(i, &mut p[..n]);
        let base = target.index(&p[..n]).expect("source box inside target") as isize;
        for (w, d) in stencil.weights.iter().zip(&deltas) {
            out[(base + d) as usize] += w * v;
        }
    }
    out
}

/// `max |G − h_f|` at boundary crossings of lattice segments of spacing `h`.
fn trace_mismatch(dom: &Domain, g: &ScalarField, h_f: &GridField, h: f64) -> f64 {
    let n = dom.dim();
    let mut worst = 0.0f64;
    let mut e = [0.0; MAX_DIM];
    let mut b = [0.0; MAX_DIM];
    let _ = dom.for_each_sample(h, |x| {
        if !dom.contains(x) || dom.boundary_distance(x) > h {
            return;
        }
        for axis in 0..n {
            for sign in [-1.0, 1.0] {
                e[..n].copy_from_slice(x);
                e[axis] += sign * h;
                if dom.contains(&e[..n]) {
                    continue;
                }
                let theta = dom.segment_exit(x, &e[..n]);
                for a in 0..n {
                    b[a] = x[a] + theta * (e[a] - x[a]);
                }
                let d = (g.eval(&b[..n]) - h_f.interpolate(&b[..n])).abs();
                if d.is_finite() {
                    worst = worst.max(d);
                }
            }
        }
    });
    worst
}

/// `ω₁` and `ω₂` of the top remainder at `1/p`, and the error constants
/// they imply.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorollaryBounds {
    pub omega1: f64,
    pub omega2: f64,
    pub constant_omega1: Option<f64>,
    pub constant_omega2: Option<f64>,
}

pub fn corollary_bounds(result: &ApproximantResult, p: usize) -> Result<CorollaryBounds> {
    let u = 1.0 / p as f64;
    let (omega1, omega2) = classical_moduli_with_rule(
        &result.top_remainder,
        &result.enclosing_ball,
        u,
        result.modulus_density,
        &result.sphere_rule,
        DEFAULT_T_REFINE,
    )?;
    let r = result.per_stage_errors.len() - 1;
    let decay = (p as f64).powi(-2 * r as i32);
    let implied = |w: f64| (w > 0.0).then(|| result.sup_error / (w * decay));
    Ok(CorollaryBounds {
        omega1,
        omega2,
        constant_omega1: implied(omega1),
        constant_omega2: implied(omega2),
    })
}
