//! The radial integral operator `J₀`, the Pizzetti constants and the
//! smoothing family `g_{R,t}` built from spherical means.
//!
//! `J₀[φ; R] = ∫₀^R (r − r^{n−1} R^{2−n}) φ(r) dr` for `n ≥ 3` and
//! `∫₀^R r log(R/r) φ(r) dr` for `n = 2`. Quadrature is Gauss–Legendre after
//! the substitution `r = R u²`, which turns both weights into smooth
//! functions of `u` apart from a `u³ log u` factor in the plane.

use crate::error::{Error, Result};
use crate::field_domain::{check_same_dim, Domain, ScalarField, Smoothness, MAX_DIM};
use crate::quadrature::gauss_legendre_on;
use crate::sphere_mean::{difference_unchecked, mean_unchecked, SphereRule};

pub const DEFAULT_J0_POINTS: usize = 64;
const MIN_J0_POINTS: usize = 16;

/// Dimension constants of the first-order Pizzetti formula.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PizzettiConstants {
    pub dim: usize,
    /// `l₂ = 1`, `lₙ = 1/(n−2)`.
    pub l_n: f64,
    /// `J₀[1; R] = cₙ R²`.
    pub c_n: f64,
    /// `dₙ = cₙ lₙ = 1/(2n)`.
    pub d_n: f64,
}

impl PizzettiConstants {
    pub fn new(dim: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidArgument(format!("unsupported dimension {dim}")));
        }
        let n = dim as f64;
        let (l_n, c_n) = if dim == 2 {
            (1.0, 0.25)
        } else {
            (1.0 / (n - 2.0), (n - 2.0) / (2.0 * n))
        };
        Ok(Self {
            dim,
            l_n,
            c_n,
            d_n: 1.0 / (2.0 * n),
        })
    }

    /// `1/v(t) = J₀[1; t]`.
    pub fn v_inv(&self, t: f64) -> f64 {
        if self.dim == 2 {
            t * t / 4.0
        } else {
            t * t * (0.5 - 1.0 / self.dim as f64)
        }
    }

    pub fn v(&self, t: f64) -> f64 {
        1.0 / self.v_inv(t)
    }
}

/// Precomputed `J₀` rule: `J₀[φ; R] = R² Σₖ gₖ φ(R uₖ²)`.
#[derive(Clone, Debug)]
pub struct J0Rule {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl J0Rule {
    pub fn new(dim: usize, quad_points: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidArgument(format!("unsupported dimension {dim}")));
        }
        if quad_points < MIN_J0_POINTS {
            return Err(Error::InvalidArgument(format!(
                "J0 quadrature needs at least {MIN_J0_POINTS} points, got {quad_points}"
            )));
        }
        let (u, w) = gauss_legendre_on(quad_points, 0.0, 1.0);
        let weights = u
            .iter()
            .zip(&w)
            .map(|(&u, &w)| {
                let radial = if dim == 2 {
                    -2.0 * u.ln()
                } else {
                    1.0 - u.powi(2 * (dim as i32 - 2))
                };
                // dr = 2R u du, weight(R u²) = R u² · radial(u)
                w * 2.0 * u * u * u * radial
            })
            .collect();
        let nodes = u.iter().map(|u| u * u).collect();
        Ok(Self { dim, nodes, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Relative radii `uₖ²` in `(0, 1)` at which `φ` is sampled.
    pub fn relative_nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn apply<F: FnMut(f64) -> f64>(&self, mut phi: F, radius: f64) -> f64 {
        let mut acc = 0.0;
        for (s, g) in self.nodes.iter().zip(&self.weights) {
            acc += g * phi(radius * s);
        }
        radius * radius * acc
    }
}

/// `J₀[φ; R]` by Gauss–Legendre with `quad_points` nodes.
pub fn j0_apply<F: FnMut(f64) -> f64>(phi: F, radius: f64, dim: usize, quad_points: usize) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("J0 radius must be positive, got {radius}")));
    }
    let rule = J0Rule::new(dim, quad_points)?;
    let v = rule.apply(phi, radius);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { point: vec![radius] })
    }
}

/// Both sides of the scaling identity
/// `J₀,ₛ[φ(s·); R] = s⁻² J₀[φ; sR]`, each by its own quadrature.
pub fn j0_scaling_check<F: Fn(f64) -> f64>(
    phi: F,
    s: f64,
    radius: f64,
    dim: usize,
    quad_points: usize,
) -> Result<(f64, f64)> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("scale must be positive, got {s}")));
    }
    let lhs = j0_apply(|r| phi(s * r), radius, dim, quad_points)?;
    let rhs = j0_apply(&phi, s * radius, dim, quad_points)? / (s * s);
    Ok((lhs, rhs))
}

/// `μ₀(f; x, R) − f(x) − lₙ J₀[r ↦ μ₀(Δf; x, r); R]`.
pub fn pizzetti_residual(
    f: &ScalarField,
    laplacian: &ScalarField,
    x: &[f64],
    radius: f64,
    rule: &SphereRule,
    j0: &J0Rule,
) -> Result<f64> {
    let consts = PizzettiConstants::new(rule.dim())?;
    let diff = crate::sphere_mean::harmonicity_difference(f, x, radius, rule)?;
    let inner = j0.apply(|r| mean_unchecked(laplacian, x, r, rule), radius);
    let v = diff - consts.l_n * inner;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { point: x.to_vec() })
    }
}

/// Smoothed approximant `g_{R,t}(x) = v(t) R⁻² J₀[r ↦ μ₀(f; x, r); tR]`
/// with its Laplacian `v(t)/(lₙR²)·(μ₀(f; x, Rt) − f(x))`.
///
/// `domain` is the region where `f` may be evaluated; `g_{R,t}(x)` is only
/// admissible when the ball `B(x; Rt)` stays in its closure.
#[derive(Clone, Debug)]
pub struct Smoothing {
    f: ScalarField,
    domain: Domain,
    radius: f64,
    t: f64,
    rule: SphereRule,
    j0: J0Rule,
    consts: PizzettiConstants,
    cache: bool,
}

pub fn smoothing_field(
    f: &ScalarField,
    domain: &Domain,
    radius: f64,
    t: f64,
    rule: &SphereRule,
) -> Result<Smoothing> {
    Smoothing::new(f, domain, radius, t, rule, DEFAULT_J0_POINTS)
}

impl Smoothing {
    pub fn new(
        f: &ScalarField,
        domain: &Domain,
        radius: f64,
        t: f64,
        rule: &SphereRule,
        quad_points: usize,
    ) -> Result<Self> {
        check_same_dim(f, domain)?;
        if rule.dim() != f.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                found: rule.dim(),
            });
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("smoothing radius must be positive, got {radius}")));
        }
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidArgument(format!("smoothing parameter t must lie in (0, 1], got {t}")));
        }
        Ok(Self {
            f: f.clone(),
            domain: domain.clone(),
            radius,
            t,
            rule: rule.clone(),
            j0: J0Rule::new(f.dim(), quad_points)?,
            consts: PizzettiConstants::new(f.dim())?,
            cache: false,
        })
    }

    /// Samples `μ₀(f; x, ·)` once per point on a Chebyshev table instead of
    /// at every `J₀` node.
    pub fn with_radial_cache(mut self, enabled: bool) -> Self {
        self.cache = enabled;
        self
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    fn admissible(&self, x: &[f64]) -> Result<()> {
        let reach = self.radius * self.t;
        let d = self.domain.boundary_distance(x);
        if d < reach * (1.0 - 1e-12) {
            return Err(Error::BallNotContained {
                center: x.to_vec(),
                radius: reach,
                distance: d,
            });
        }
        Ok(())
    }

    /// `g_{R,t}(x)`, accumulated as `f(x) + v(t) R⁻² J₀[μ₀ − f(x); tR]`.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.admissible(x)?;
        let reach = self.radius * self.t;
        let correction = if self.cache {
            let table = RadialMeanTable::new(&self.f, x, reach, &self.rule);
            let fx = self.f.eval(x);
            self.j0.apply(|r| table.eval(r) - fx, reach)
        } else {
            self.j0.apply(|r| difference_unchecked(&self.f, x, r, &self.rule), reach)
        };
        let v = self.f.eval(x) + self.consts.v(self.t) / (self.radius * self.radius) * correction;
        finite(v, x)
    }

    /// `Δg_{R,t}(x)` in closed form, without numerical differentiation.
    pub fn laplacian(&self, x: &[f64]) -> Result<f64> {
        self.admissible(x)?;
        let reach = self.radius * self.t;
        let diff = difference_unchecked(&self.f, x, reach, &self.rule);
        let v = self.consts.v(self.t) / (self.consts.l_n * self.radius * self.radius) * diff;
        finite(v, x)
    }

    /// `g_{R,t}` as a field; inadmissible points evaluate to `NaN`.
    pub fn value_field(&self) -> ScalarField {
        let s = self.clone();
        ScalarField::new(self.f.dim(), Smoothness::C2, move |x| s.value(x).unwrap_or(f64::NAN))
    }

    pub fn laplacian_field(&self) -> ScalarField {
        let s = self.clone();
        ScalarField::new(self.f.dim(), Smoothness::C0, move |x| s.laplacian(x).unwrap_or(f64::NAN))
    }
}

fn finite(v: f64, x: &[f64]) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { point: x.to_vec() })
    }
}

/// Number of Chebyshev nodes in a [`RadialMeanTable`].
pub const RADIAL_TABLE_NODES: usize = 64;

/// `r ↦ μ₀(f; x, r)` on `[0, r_max]` through its values at Chebyshev points,
/// evaluated by barycentric interpolation.
#[derive(Clone, Debug)]
pub struct RadialMeanTable {
    r_max: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
    bary: Vec<f64>,
}

impl RadialMeanTable {
    pub fn new(f: &ScalarField, x: &[f64], r_max: f64, rule: &SphereRule) -> Self {
        let m = RADIAL_TABLE_NODES;
        let mut nodes = Vec::with_capacity(m);
        let mut values = Vec::with_capacity(m);
        let mut bary = Vec::with_capacity(m);
        for j in 0..m {
            // Chebyshev points of the first kind mapped to [0, r_max]
            let theta = std::f64::consts::PI * (2 * j + 1) as f64 / (2 * m) as f64;
            let r = 0.5 * r_max * (1.0 - theta.cos());
            nodes.push(r);
            values.push(mean_unchecked(f, x, r, rule));
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            bary.push(sign * theta.sin());
        }
        Self {
            r_max,
            nodes,
            values,
            bary,
        }
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn eval(&self, r: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &vj), &wj) in self.nodes.iter().zip(&self.values).zip(&self.bary) {
            let d = r - xj;
            if d == 0.0 {
                return vj;
            }
            let c = wj / d;
            num += c * vj;
            den += c;
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere_mean::make_rule;

    #[test]
    fn constants() {
        let c2 = PizzettiConstants::new(2).unwrap();
        assert_eq!((c2.l_n, c2.c_n, c2.d_n), (1.0, 0.25, 0.25));
        let c3 = PizzettiConstants::new(3).unwrap();
        assert_eq!(c3.l_n, 1.0);
        assert!((c3.c_n - 1.0 / 6.0).abs() < 1e-16);
        assert!((c3.d_n - 1.0 / 6.0).abs() < 1e-16);
        for n in 3..=6 {
            let c = PizzettiConstants::new(n).unwrap();
            assert!((c.c_n * c.l_n - c.d_n).abs() < 1e-16);
        }
    }

    #[test]
    fn j0_of_one_matches_c_n() {
        for (dim, c) in [(2, 0.25), (3, 1.0 / 6.0)] {
            for r in [0.3, 1.0, 2.5] {
                let v = j0_apply(|_| 1.0, r, dim, DEFAULT_J0_POINTS).unwrap();
                assert!((v / (c * r * r) - 1.0).abs() < 1e-12, "dim {dim} R {r}: {v}");
            }
        }
    }

    #[test]
    fn j0_of_r_squared_in_the_plane() {
        // ∫₀¹ r³ log(1/r) dr = 1/16
        let v = j0_apply(|r| r * r, 1.0, 2, DEFAULT_J0_POINTS).unwrap();
        assert!((v - 1.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn j0_rejects_bad_input() {
        assert!(j0_apply(|_| 1.0, 0.0, 2, 32).is_err());
        assert!(j0_apply(|_| 1.0, 1.0, 2, 8).is_err());
        assert!(matches!(j0_apply(|_| f64::NAN, 1.0, 3, 32), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn scaling_identity_examples() {
        let (l, r) = j0_scaling_check(|_| 1.0, 3.0, 0.7, 3, 64).unwrap();
        assert!((l - r).abs() < 1e-14 && (l - 0.7f64.powi(2) / 6.0).abs() < 1e-14);
        let (l, r) = j0_scaling_check(|t| t, 2.0, 1.0, 3, 64).unwrap();
        assert!((l - r).abs() < 1e-12);
        let (l, r) = j0_scaling_check(|t| t.sin(), 1.0, 0.9, 2, 64).unwrap();
        assert_eq!(l, r);
    }

    #[test]
    fn v_inverts_j0_of_one() {
        for dim in [2, 3, 4] {
            let c = PizzettiConstants::new(dim).unwrap();
            for t in [0.1, 0.5, 1.0] {
                let j = j0_apply(|_| 1.0, t, dim, DEFAULT_J0_POINTS).unwrap();
                assert!((c.v(t) * j - 1.0).abs() < 1e-12);
            }
        }
    }

    fn disk() -> Domain {
        Domain::unit_ball(2).unwrap()
    }

    #[test]
    fn smoothing_of_harmonic_is_identity() {
        let rule = make_rule(2, 128, None).unwrap();
        let f = ScalarField::new(2, Smoothness::CInf, |x| x[0] * x[0] - x[1] * x[1] + 0.3 * x[1]);
        let s = smoothing_field(&f, &disk(), 0.3, 0.8, &rule).unwrap();
        for x in [[0.1, 0.2], [-0.5, 0.3], [0.0, -0.7]] {
            assert!((s.value(&x).unwrap() - f.eval(&x)).abs() < 1e-11);
            assert!(s.laplacian(&x).unwrap().abs() < 1e-11);
        }
    }

    #[test]
    fn smoothing_of_radial_square() {
        let rule = make_rule(2, 128, None).unwrap();
        let f = ScalarField::new(2, Smoothness::CInf, |x| x[0] * x[0] + x[1] * x[1]);
        for (r, t) in [(0.2, 1.0), (0.4, 0.5), (0.1, 0.25)] {
            let s = smoothing_field(&f, &disk(), r, t, &rule).unwrap();
            let x = [0.3, -0.2];
            let g = s.value(&x).unwrap();
            assert!((g - f.eval(&x) - r * r * t * t / 4.0).abs() < 1e-10);
            assert!((s.laplacian(&x).unwrap() - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn smoothing_reports_violated_ball() {
        let rule = make_rule(2, 32, None).unwrap();
        let f = ScalarField::constant(2, 1.0);
        let s = smoothing_field(&f, &disk(), 0.5, 1.0, &rule).unwrap();
        assert!(matches!(s.value(&[0.8, 0.0]), Err(Error::BallNotContained { .. })));
        assert!(s.laplacian(&[0.4, 0.0]).is_ok());
        assert!(s.value_field().eval(&[0.9, 0.0]).is_nan());
        assert!(smoothing_field(&f, &disk(), 0.5, 1.5, &rule).is_err());
        assert!(smoothing_field(&f, &disk(), 0.0, 0.5, &rule).is_err());
    }

    #[test]
    fn radial_cache_agrees_with_lazy_evaluation() {
        let rule = make_rule(2, 128, None).unwrap();
        let f = ScalarField::new(2, Smoothness::CInf, |x| (2.0 * x[0]).sin() * x[1].exp());
        let lazy = smoothing_field(&f, &disk(), 0.3, 1.0, &rule).unwrap();
        let cached = lazy.clone().with_radial_cache(true);
        let x = [0.2, 0.1];
        assert!((lazy.value(&x).unwrap() - cached.value(&x).unwrap()).abs() < 1e-12);
        let table = RadialMeanTable::new(&f, &x, 0.3, &rule);
        let r = 0.123;
        assert!((table.eval(r) - mean_unchecked(&f, &x, r, &rule)).abs() < 1e-13);
    }
}
