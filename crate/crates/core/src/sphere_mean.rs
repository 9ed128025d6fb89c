//! Quadrature on the unit sphere and the spherical mean
//! `μ₀(f; x, h)`, the average of `f` over the sphere of radius `h` about `x`.
//!
//! Rule weights sum to one, so the surface-area normalisation is built into
//! the rule and never appears explicitly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::field_domain::{ScalarField, MAX_DIM};
use crate::quadrature::gauss_legendre;

/// Default node budget for the circle.
pub const DEFAULT_BUDGET_2D: usize = 128;
/// Default polar × azimuthal split for the 2-sphere.
pub const DEFAULT_POLAR_3D: usize = 24;
pub const DEFAULT_BUDGET_HIGH_DIM: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SphereScheme {
    /// Equally spaced angles on the circle.
    Trapezoid,
    /// Gauss–Legendre in the polar cosine times uniform azimuth.
    ProductGauss { polar: usize, azimuth: usize },
    /// Antithetic pairs `±ξ` of uniformly distributed directions.
    MonteCarlo { seed: u64 },
}

/// Quadrature rule on the unit sphere of ℝⁿ with weights summing to one.
#[derive(Clone, Debug)]
pub struct SphereRule {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    scheme: SphereScheme,
}

impl SphereRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn scheme(&self) -> SphereScheme {
        self.scheme
    }

    #[inline]
    pub fn node(&self, j: usize) -> &[f64] {
        &self.nodes[j * self.dim..(j + 1) * self.dim]
    }

    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Default rule for the dimension.
    pub fn default_for(dim: usize) -> Result<Self> {
        match dim {
            2 => make_rule(2, DEFAULT_BUDGET_2D, None),
            3 => make_product_rule(DEFAULT_POLAR_3D, 2 * DEFAULT_POLAR_3D),
            _ => make_rule(dim, DEFAULT_BUDGET_HIGH_DIM, None),
        }
    }

    /// Short description for reports.
    pub fn describe(&self) -> String {
        match self.scheme {
            SphereScheme::Trapezoid => format!("trapezoid({})", self.len()),
            SphereScheme::ProductGauss { polar, azimuth } => format!("gauss({polar}x{azimuth})"),
            SphereScheme::MonteCarlo { seed } => format!("montecarlo({},seed={seed})", self.len()),
        }
    }
}

/// Builds the standard rule for `dim` with about `node_budget` nodes.
///
/// Circle: `node_budget` equally spaced angles. 2-sphere: `m` Gauss–Legendre
/// polar nodes times `2m` azimuthal nodes with `2m² ≤ node_budget`. Higher
/// dimension: `node_budget/2` antithetic pairs drawn with `seed`.
pub fn make_rule(dim: usize, node_budget: usize, seed: Option<u64>) -> Result<SphereRule> {
    if !(2..=MAX_DIM).contains(&dim) {
        return Err(Error::InvalidArgument(format!(
            "sphere rule dimension must be in 2..={MAX_DIM}, got {dim}"
        )));
    }
    if node_budget < 4 {
        return Err(Error::InvalidArgument(format!(
            "node budget {node_budget} too small, need at least 4"
        )));
    }
    match dim {
        2 => {
            let n = node_budget;
            let mut nodes = Vec::with_capacity(2 * n);
            for j in 0..n {
                let a = TAU * j as f64 / n as f64;
                nodes.push(a.cos());
                nodes.push(a.sin());
            }
            Ok(SphereRule {
                dim,
                nodes,
                weights: vec![1.0 / n as f64; n],
                scheme: SphereScheme::Trapezoid,
            })
        }
        3 => {
            let m = ((node_budget / 2) as f64).sqrt().floor() as usize;
            if m < 2 {
                return Err(Error::InvalidArgument(format!(
                    "node budget {node_budget} too small for a product rule on the sphere, need at least 8"
                )));
            }
            make_product_rule(m, 2 * m)
        }
        _ => {
            let seed = seed.unwrap_or(0);
            let pairs = node_budget / 2;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut nodes = vec![0.0; 2 * pairs * dim];
            for p in 0..pairs {
                let mut v = [0.0; MAX_DIM];
                let mut r2: f64 = 0.0;
                while r2 < 1e-20 {
                    r2 = 0.0;
                    for vi in v.iter_mut().take(dim) {
                        *vi = StandardNormal.sample(&mut rng);
                        r2 += *vi * *vi;
                    }
                }
                let r = r2.sqrt();
                for i in 0..dim {
                    nodes[2 * p * dim + i] = v[i] / r;
                    nodes[(2 * p + 1) * dim + i] = -v[i] / r;
                }
            }
            Ok(SphereRule {
                dim,
                nodes,
                weights: vec![1.0 / (2 * pairs) as f64; 2 * pairs],
                scheme: SphereScheme::MonteCarlo { seed },
            })
        }
    }
}

/// Product rule on the 2-sphere: Gauss–Legendre in `cos θ`, trapezoid in `φ`.
pub fn make_product_rule(polar: usize, azimuth: usize) -> Result<SphereRule> {
    if polar < 2 || azimuth < 4 || azimuth % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "product rule needs polar >= 2 and even azimuth >= 4, got {polar}x{azimuth}"
        )));
    }
    let (z, wz) = gauss_legendre(polar);
    let mut nodes = Vec::with_capacity(3 * polar * azimuth);
    let mut weights = Vec::with_capacity(polar * azimuth);
    for (zi, wi) in z.iter().zip(&wz) {
        let s = (1.0 - zi * zi).max(0.0).sqrt();
        for j in 0..azimuth {
            let a = TAU * j as f64 / azimuth as f64;
            nodes.push(s * a.cos());
            nodes.push(s * a.sin());
            nodes.push(*zi);
            weights.push(0.5 * wi / azimuth as f64);
        }
    }
    Ok(SphereRule {
        dim: 3,
        nodes,
        weights,
        scheme: SphereScheme::ProductGauss { polar, azimuth },
    })
}

fn check_args(f: &ScalarField, x: &[f64], h: f64, rule: &SphereRule) -> Result<()> {
    if f.dim() != rule.dim() {
        return Err(Error::DimensionMismatch {
            expected: rule.dim(),
            found: f.dim(),
        });
    }
    if x.len() != rule.dim() {
        return Err(Error::DimensionMismatch {
            expected: rule.dim(),
            found: x.len(),
        });
    }
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("sphere radius must be positive, got {h}")));
    }
    Ok(())
}

/// `Σⱼ wⱼ f(x + h ξⱼ)`.
pub fn spherical_mean(f: &ScalarField, x: &[f64], h: f64, rule: &SphereRule) -> Result<f64> {
    check_args(f, x, h, rule)?;
    let v = mean_unchecked(f, x, h, rule);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { point: x.to_vec() })
    }
}

#[inline]
pub(crate) fn mean_unchecked(f: &ScalarField, x: &[f64], h: f64, rule: &SphereRule) -> f64 {
    let n = rule.dim;
    let mut y = [0.0; MAX_DIM];
    let mut acc = 0.0;
    for j in 0..rule.len() {
        let xi = rule.node(j);
        for i in 0..n {
            y[i] = x[i] + h * xi[i];
        }
        acc += rule.weights[j] * f.eval(&y[..n]);
    }
    acc
}

/// `μ₀(f; x, h) − f(x)`, accumulated as `Σⱼ wⱼ (f(x + hξⱼ) − f(x))`.
pub fn harmonicity_difference(f: &ScalarField, x: &[f64], h: f64, rule: &SphereRule) -> Result<f64> {
    check_args(f, x, h, rule)?;
    let v = difference_unchecked(f, x, h, rule);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { point: x.to_vec() })
    }
}

#[inline]
pub(crate) fn difference_unchecked(f: &ScalarField, x: &[f64], h: f64, rule: &SphereRule) -> f64 {
    let n = rule.dim;
    let fx = f.eval(x);
    let mut y = [0.0; MAX_DIM];
    let mut acc = 0.0;
    for j in 0..rule.len() {
        let xi = rule.node(j);
        for i in 0..n {
            y[i] = x[i] + h * xi[i];
        }
        acc += rule.weights[j] * (f.eval(&y[..n]) - fx);
    }
    acc
}

/// Symmetrised form `½ Σⱼ wⱼ (f(x + hξⱼ) − 2f(x) + f(x − hξⱼ))`, equal to the
/// harmonicity difference for rules symmetric under `ξ ↦ −ξ`.
pub fn symmetric_difference(f: &ScalarField, x: &[f64], h: f64, rule: &SphereRule) -> Result<f64> {
    check_args(f, x, h, rule)?;
    let n = rule.dim;
    let fx = f.eval(x);
    let mut yp = [0.0; MAX_DIM];
    let mut ym = [0.0; MAX_DIM];
    let mut acc = 0.0;
    for j in 0..rule.len() {
        let xi = rule.node(j);
        for i in 0..n {
            yp[i] = x[i] + h * xi[i];
            ym[i] = x[i] - h * xi[i];
        }
        acc += rule.weights[j] * (f.eval(&yp[..n]) - 2.0 * fx + f.eval(&ym[..n]));
    }
    let v = 0.5 * acc;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { point: x.to_vec() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_domain::{norm, Smoothness};

    fn sq() -> ScalarField {
        ScalarField::new(2, Smoothness::CInf, |x| x.iter().map(|v| v * v).sum())
    }

    #[test]
    fn circle_rule_layout() {
        let r = make_rule(2, 64, None).unwrap();
        assert_eq!(r.len(), 64);
        for j in 0..64 {
            assert_eq!(r.weight(j), 1.0 / 64.0);
            let a = TAU * j as f64 / 64.0;
            assert!((r.node(j)[0] - a.cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn rule_invariants() {
        for rule in [
            make_rule(2, 128, None).unwrap(),
            make_rule(3, 32 * 64 * 2, None).unwrap(),
            make_product_rule(32, 64).unwrap(),
            make_rule(5, 400, Some(7)).unwrap(),
        ] {
            // compensated sum, so the check sees the weights rather than rounding
            let (mut s, mut c) = (0.0f64, 0.0f64);
            for w in rule.weights() {
                let t = s + w;
                c += if s.abs() >= w.abs() { (s - t) + w } else { (w - t) + s };
                s = t;
            }
            assert!((s + c - 1.0).abs() < 1e-14, "{}", rule.describe());
            for j in 0..rule.len() {
                assert!((norm(rule.node(j)) - 1.0).abs() < 1e-14);
            }
            for axis in 0..rule.dim() {
                let m: f64 = (0..rule.len()).map(|j| rule.weight(j) * rule.node(j)[axis]).sum();
                assert!(m.abs() < 1e-13, "{} axis {axis}: {m}", rule.describe());
            }
        }
    }

    #[test]
    fn budget_errors() {
        assert!(make_rule(2, 3, None).is_err());
        assert!(make_rule(3, 7, None).is_err());
        assert!(make_rule(1, 16, None).is_err());
        assert!(make_product_rule(1, 8).is_err());
    }

    #[test]
    fn circle_average_of_xi1_squared() {
        let r = make_rule(2, 64, None).unwrap();
        let v: f64 = (0..r.len()).map(|j| r.weight(j) * r.node(j)[0].powi(2)).sum();
        assert!((v - 0.5).abs() < 1e-14);
        // dense oracle: midpoint rule on 20000 angles
        let m = 20000;
        let o: f64 = (0..m).map(|j| (TAU * (j as f64 + 0.5) / m as f64).cos().powi(2)).sum::<f64>() / m as f64;
        assert!((v - o).abs() < 1e-12);
    }

    #[test]
    fn spherical_mean_examples() {
        let rule = make_rule(2, 128, None).unwrap();
        let c = ScalarField::constant(2, 2.5);
        assert!((spherical_mean(&c, &[0.1, 0.2], 0.3, &rule).unwrap() - 2.5).abs() < 1e-15);
        let v = spherical_mean(&sq(), &[0.0, 0.0], 0.3, &rule).unwrap();
        assert!((v - 0.09).abs() < 1e-14);
        let saddle = ScalarField::new(2, Smoothness::CInf, |x| x[0] * x[0] - x[1] * x[1]);
        for (x, h) in [([0.2, -0.1], 0.5), ([0.7, 0.3], 0.2), ([-1.0, 2.0], 1.5)] {
            let v = spherical_mean(&saddle, &x, h, &rule).unwrap();
            assert!((v - saddle.eval(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn harmonicity_difference_examples() {
        let rule = make_rule(2, 128, None).unwrap();
        let re_z3 = ScalarField::new(2, Smoothness::CInf, |x| x[0].powi(3) - 3.0 * x[0] * x[1] * x[1]);
        assert!(harmonicity_difference(&re_z3, &[0.3, 0.4], 0.4, &rule).unwrap().abs() < 1e-12);
        let h = 0.37;
        assert!((harmonicity_difference(&sq(), &[0.0, 0.0], h, &rule).unwrap() - h * h).abs() < 1e-14);
        for x in [[0.5, -0.25], [1.3, 0.8], [-0.6, -0.9]] {
            let d = harmonicity_difference(&sq(), &x, h, &rule).unwrap();
            assert!((d - h * h).abs() < 1e-12);
        }
        assert!(harmonicity_difference(&sq(), &[0.0, 0.0], 0.0, &rule).is_err());
        assert!(harmonicity_difference(&sq(), &[0.0, 0.0, 0.0], 0.1, &rule).is_err());
    }

    #[test]
    fn non_finite_values_propagate() {
        let rule = make_rule(2, 16, None).unwrap();
        let bad = ScalarField::new(2, Smoothness::C0, |x| if x[0] > 0.9 { f64::NAN } else { 1.0 });
        assert!(matches!(spherical_mean(&bad, &[0.5, 0.0], 0.5, &rule), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn monte_carlo_rule_is_seeded_and_antithetic() {
        let a = make_rule(4, 64, Some(3)).unwrap();
        let b = make_rule(4, 64, Some(3)).unwrap();
        assert_eq!(a.nodes, b.nodes);
        let c = make_rule(4, 64, Some(4)).unwrap();
        assert_ne!(a.nodes, c.nodes);
        let lin = ScalarField::new(4, Smoothness::CInf, |x| 1.0 + x[0] - 2.0 * x[3]);
        let v = harmonicity_difference(&lin, &[0.1, 0.2, 0.3, 0.4], 0.5, &a).unwrap();
        assert!(v.abs() < 1e-14);
    }
}
