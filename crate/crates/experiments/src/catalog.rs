//! Named test fields with closed-form iterated Laplacians.

use harmonicity::{ScalarField, Smoothness};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ExperimentError;

/// Iterated Laplacians are tabulated up to this order where they exist.
pub const MAX_LAPLACIAN_ORDER: usize = 3;

const FD_STEP: f64 = 1e-3;
const FD_TOL: f64 = 1e-4;
const FD_POINTS: usize = 20;
const FD_SEED: u64 = 0x5eed;

#[derive(Clone, Debug)]
pub struct TestField {
    pub id: &'static str,
    pub dim: usize,
    /// `laplacians[j] = Δʲ f`; `laplacians[0]` is the field itself.
    pub laplacians: Vec<ScalarField>,
    pub smoothness: Smoothness,
    pub harmonic: bool,
    pub notes: &'static str,
}

impl TestField {
    pub fn field(&self) -> &ScalarField {
        &self.laplacians[0]
    }

    pub fn laplacian(&self) -> Option<&ScalarField> {
        self.laplacians.get(1)
    }

    /// Highest `r` for which `Δʳ f` is available.
    pub fn max_order(&self) -> usize {
        self.laplacians.len() - 1
    }

    /// `Δ^j f` is constant for every `j ≥ 1`.
    pub fn constant_laplacian(&self) -> Option<f64> {
        match self.id {
            "radial_sq" => Some(2.0 * self.dim as f64),
            _ if self.harmonic => Some(0.0),
            _ => None,
        }
    }
}

pub const FIELD_IDS: [&str; 10] = [
    "const",
    "linear",
    "harmonic_saddle",
    "harmonic_re_z3",
    "radial_sq",
    "radial_quartic",
    "gauss_bump",
    "sine_product",
    "sine_x1",
    "cone",
];

fn sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `P(s) e^{−a s}` with `s = |x|²`, stored by the coefficients of `P`.
#[derive(Clone, Debug)]
struct RadialExp {
    poly: Vec<f64>,
    a: f64,
}

impl RadialExp {
    fn eval(&self, s: f64) -> f64 {
        self.poly.iter().rev().fold(0.0, |acc, c| acc * s + c) * (-self.a * s).exp()
    }

    /// `(P' − aP) e^{−as}`.
    fn derivative(&self) -> RadialExp {
        let mut poly: Vec<f64> = self.poly.iter().map(|c| -self.a * c).collect();
        for (i, c) in self.poly.iter().enumerate().skip(1) {
            poly[i - 1] += i as f64 * c;
        }
        RadialExp { poly, a: self.a }
    }

    /// `Δ φ(|x|²) = 4 s φ''(s) + 2n φ'(s)`.
    fn laplacian(&self, n: usize) -> RadialExp {
        let d1 = self.derivative();
        let d2 = d1.derivative();
        let len = self.poly.len().max(d2.poly.len() + 1).max(1);
        let mut poly = vec![0.0; len];
        for (i, c) in d2.poly.iter().enumerate() {
            poly[i + 1] += 4.0 * c;
        }
        for (i, c) in d1.poly.iter().enumerate() {
            poly[i] += 2.0 * n as f64 * c;
        }
        while poly.len() > 1 && *poly.last().unwrap() == 0.0 {
            poly.pop();
        }
        RadialExp { poly, a: self.a }
    }

    fn to_field(&self, n: usize) -> ScalarField {
        let g = self.clone();
        ScalarField::new(n, Smoothness::CInf, move |x| g.eval(sq(x)))
    }
}

fn radial_laplacians(poly: Vec<f64>, a: f64, n: usize) -> Vec<ScalarField> {
    let mut g = RadialExp { poly, a };
    let mut out = Vec::with_capacity(MAX_LAPLACIAN_ORDER + 1);
    for _ in 0..=MAX_LAPLACIAN_ORDER {
        out.push(g.to_field(n));
        g = g.laplacian(n);
    }
    out
}

fn harmonic(f: ScalarField) -> Vec<ScalarField> {
    let n = f.dim();
    let mut out = vec![f];
    out.extend((0..MAX_LAPLACIAN_ORDER).map(|_| ScalarField::zero(n)));
    out
}

fn build(id: &str, n: usize) -> Option<TestField> {
    let cinf = Smoothness::CInf;
    let (laplacians, smoothness, is_harmonic, notes): (Vec<ScalarField>, Smoothness, bool, &'static str) = match id {
        "const" => (harmonic(ScalarField::constant(n, 1.0)), cinf, true, "f = 1"),
        "linear" => (
            harmonic(ScalarField::new(n, cinf, |x| {
                1.0 + x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * v * if i % 2 == 0 { 1.0 } else { -1.0 }).sum::<f64>()
            })),
            cinf,
            true,
            "f = 1 + x1 - 2 x2 + 3 x3",
        ),
        "harmonic_saddle" => (
            harmonic(ScalarField::new(n, cinf, |x| x[0] * x[0] - x[1] * x[1])),
            cinf,
            true,
            "f = x1^2 - x2^2",
        ),
        "harmonic_re_z3" if n == 2 => (
            harmonic(ScalarField::new(n, cinf, |x| x[0].powi(3) - 3.0 * x[0] * x[1] * x[1])),
            cinf,
            true,
            "f = Re (x1 + i x2)^3",
        ),
        "harmonic_re_z3" => return None,
        "radial_sq" => (radial_laplacians(vec![0.0, 1.0], 0.0, n), cinf, false, "f = |x|^2"),
        "radial_quartic" => (radial_laplacians(vec![0.0, 0.0, 1.0], 0.0, n), cinf, false, "f = |x|^4"),
        "gauss_bump" => (radial_laplacians(vec![1.0], 2.0, n), cinf, false, "f = exp(-2 |x|^2)"),
        "sine_product" => {
            let f = ScalarField::new(n, cinf, |x| x.iter().map(|v| v.sin()).product());
            let ls = (0..=MAX_LAPLACIAN_ORDER).map(|j| f.scale((-(n as f64)).powi(j as i32))).collect();
            (ls, cinf, false, "f = prod sin(xi)")
        }
        "sine_x1" => {
            let f = ScalarField::new(n, cinf, |x| x[0].sin());
            let ls = (0..=MAX_LAPLACIAN_ORDER).map(|j| f.scale((-1f64).powi(j as i32))).collect();
            (ls, cinf, false, "f = sin(x1)")
        }
        "cone" => (
            vec![ScalarField::new(n, Smoothness::C0, |x| sq(x).sqrt())],
            Smoothness::C0,
            false,
            "f = |x|, continuous only",
        ),
        _ => return None,
    };
    Some(TestField {
        id: FIELD_IDS.iter().copied().find(|s| *s == id)?,
        dim: n,
        laplacians,
        smoothness,
        harmonic: is_harmonic,
        notes,
    })
}

/// Catalog entry `id` in dimension `dim`, with its Laplacians checked
/// against central differences.
pub fn lookup(id: &str, dim: usize) -> Result<TestField, ExperimentError> {
    if !(2..=3).contains(&dim) {
        return Err(ExperimentError::Config(format!("test fields are defined for dims 2 and 3, got {dim}")));
    }
    let f = build(id, dim).ok_or_else(|| {
        ExperimentError::Config(format!("unknown test field '{id}' in dimension {dim}; known: {}", FIELD_IDS.join(", ")))
    })?;
    validate(&f)?;
    Ok(f)
}

/// All catalog entries defined in `dim`.
pub fn catalog(dim: usize) -> Result<Vec<TestField>, ExperimentError> {
    FIELD_IDS
        .iter()
        .filter_map(|id| build(id, dim))
        .map(|f| validate(&f).map(|_| f))
        .collect()
}

fn fd_laplacian(f: &ScalarField, x: &[f64], h: f64) -> f64 {
    let mut y = x.to_vec();
    let mut acc = -2.0 * x.len() as f64 * f.eval(x);
    for i in 0..x.len() {
        for s in [h, -h] {
            y[i] = x[i] + s;
            acc += f.eval(&y);
        }
        y[i] = x[i];
    }
    acc / (h * h)
}

/// Checks every tabulated `Δʲ⁺¹ f` against the difference quotient of `Δʲ f`.
pub fn validate(field: &TestField) -> Result<(), ExperimentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(FD_SEED);
    let n = field.dim;
    let points: Vec<Vec<f64>> = (0..FD_POINTS).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    for j in 0..field.max_order() {
        for x in &points {
            let fd = fd_laplacian(&field.laplacians[j], x, FD_STEP);
            let exact = field.laplacians[j + 1].eval(x);
            // absolute floor for entries that vanish at a point
            let scale = exact.abs().max(1.0);
            if (fd - exact).abs() > FD_TOL * scale {
                return Err(ExperimentError::Config(format!(
                    "catalog field '{}': Laplacian of order {} disagrees with finite differences at {x:?}: {exact} vs {fd}",
                    field.id,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_loads() {
        assert_eq!(catalog(2).unwrap().len(), 10);
        assert_eq!(catalog(3).unwrap().len(), 9);
    }

    #[test]
    fn quartic_laplacians() {
        let f = lookup("radial_quartic", 2).unwrap();
        let x = [0.3, -0.4];
        assert!((f.laplacians[1].eval(&x) - 16.0 * 0.25).abs() < 1e-14);
        assert_eq!(f.laplacians[2].eval(&x), 64.0);
        assert_eq!(f.laplacians[3].eval(&x), 0.0);
    }

    #[test]
    fn wrong_laplacian_is_rejected() {
        let mut f = lookup("sine_x1", 2).unwrap();
        f.laplacians[1] = f.laplacians[0].clone();
        assert!(validate(&f).is_err());
    }

    #[test]
    fn unknown_and_undefined_entries() {
        assert!(lookup("nope", 2).is_err());
        assert!(lookup("harmonic_re_z3", 3).is_err());
        assert!(lookup("radial_sq", 4).is_err());
    }
}
