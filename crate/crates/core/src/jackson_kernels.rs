//! Jackson kernels `[sin(νt/2)/sin(t/2)]^{2k}` in their periodic,
//! nonperiodic and radial polyharmonic forms.
//!
//! The trigonometric expansion `Σ_{|j|≤D} c_j e^{ijt}`, `D = k(ν−1)`, is
//! computed exactly as the `k`-fold self-convolution of the Fejér sequence
//! `ν − |j|`. Under `s = |x|² = 4 sin²(t/2)` one has `cos(jt) = T_j(1 − s/2)`,
//! so the radial kernel is a polynomial of degree `D` in `s`. It is
//! evaluated in Chebyshev form; exact integer monomial coefficients are kept
//! for symbolic work.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field_domain::MAX_DIM;
use crate::quadrature::gauss_legendre_on;

/// Largest degree for which floating monomial coefficients are produced.
pub const MONOMIAL_DEGREE_CAP: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KernelParams {
    pub k: usize,
    pub nu: usize,
    pub dim: usize,
    /// Target polyharmonic order the exponent `ν` was derived from.
    pub p_target: Option<usize>,
}

impl KernelParams {
    pub fn new(k: usize, nu: usize, dim: usize) -> Result<Self> {
        if k == 0 || nu == 0 {
            return Err(Error::InvalidArgument(format!("kernel needs k >= 1 and nu >= 1, got k={k}, nu={nu}")));
        }
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidArgument(format!("unsupported dimension {dim}")));
        }
        Ok(Self {
            k,
            nu,
            dim,
            p_target: None,
        })
    }

    /// `ν = ⌊(p−1)/k⌋ + 1`, the largest `ν` with `k(ν−1)+1 ≤ p`.
    pub fn for_order(p: usize, k: usize, dim: usize) -> Result<Self> {
        if p == 0 || k == 0 {
            return Err(Error::InvalidArgument(format!("need p >= 1 and k >= 1, got p={p}, k={k}")));
        }
        let mut params = Self::new(k, (p - 1) / k + 1, dim)?;
        params.p_target = Some(p);
        Ok(params)
    }

    /// Polynomial degree in `s = |x|²`.
    pub fn degree(&self) -> usize {
        self.k * (self.nu - 1)
    }

    /// Polyharmonic order `k(ν−1) + 1`.
    pub fn order(&self) -> usize {
        self.degree() + 1
    }

    /// True when the kernel order equals the target `p` rather than being
    /// strictly below it.
    pub fn order_meets_target(&self) -> bool {
        self.p_target == Some(self.order())
    }
}

/// Exact coefficients `c_0, …, c_D` of `[sin(νt/2)/sin(t/2)]^{2k} = Σ c_{|j|} e^{ijt}`.
pub fn trig_coefficients(k: usize, nu: usize) -> Vec<BigInt> {
    let fejer: Vec<BigInt> = (0..2 * nu - 1)
        .map(|i| BigInt::from(nu as i64 - (i as i64 - (nu as i64 - 1)).abs()))
        .collect();
    let mut acc = vec![BigInt::from(1)];
    for _ in 0..k {
        let mut next = vec![BigInt::zero(); acc.len() + fejer.len() - 1];
        for (i, a) in acc.iter().enumerate() {
            for (j, b) in fejer.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        acc = next;
    }
    let d = k * (nu - 1);
    acc[d..].to_vec()
}

/// Periodic kernel `J_{k,ν}(t) = γ⁻¹ [sin(νt/2)/sin(t/2)]^{2k}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicKernel {
    pub k: usize,
    pub nu: usize,
    /// `γ = (1/π) ∫_{−π}^{π} [sin(νt/2)/sin(t/2)]^{2k} dt`.
    pub gamma: f64,
}

/// `[sin(νt/2)/sin(t/2)]^{2k}` with the removable singularity at `t = 0`.
pub fn jackson_ratio_power(k: usize, nu: usize, t: f64) -> f64 {
    let den = (0.5 * t).sin();
    let ratio = if den == 0.0 {
        nu as f64
    } else {
        (0.5 * nu as f64 * t).sin() / den
    };
    ratio.powi(2 * k as i32)
}

impl PeriodicKernel {
    pub fn eval(&self, t: f64) -> f64 {
        jackson_ratio_power(self.k, self.nu, t) / self.gamma
    }
}

/// The trapezoid rule with more nodes than twice the trigonometric degree
/// integrates the kernel exactly.
pub fn periodic_kernel(k: usize, nu: usize) -> Result<PeriodicKernel> {
    if k == 0 || nu == 0 {
        return Err(Error::InvalidArgument(format!("kernel needs k >= 1 and nu >= 1, got k={k}, nu={nu}")));
    }
    let nodes = 2 * k * (nu - 1) + 2;
    let sum: f64 = (0..nodes)
        .map(|j| jackson_ratio_power(k, nu, -PI + 2.0 * PI * j as f64 / nodes as f64))
        .sum();
    Ok(PeriodicKernel {
        k,
        nu,
        gamma: 2.0 * sum / nodes as f64,
    })
}

/// Exact monomial coefficients of `q₀(s) = c_0 + Σ_{j≥1} c_j·2cos(jt)`,
/// ascending in `s`. Uses `2cos(jt) = D_j(2 − s)` with the Dickson
/// recurrence `D_{j+1} = (2 − s) D_j − D_{j−1}`.
pub fn exact_radial_coefficients(k: usize, nu: usize) -> Vec<BigInt> {
    let c = trig_coefficients(k, nu);
    let d = c.len() - 1;
    let mut out = vec![BigInt::zero(); d + 1];
    out[0] += &c[0];
    let mut prev = vec![BigInt::from(2)];
    let mut cur = vec![BigInt::from(2), BigInt::from(-1)];
    for (j, cj) in c.iter().enumerate().skip(1) {
        for (m, v) in cur.iter().enumerate() {
            out[m] += cj * v;
        }
        if j == d {
            break;
        }
        let mut next = vec![BigInt::zero(); cur.len() + 1];
        for (m, v) in cur.iter().enumerate() {
            next[m] += 2 * v;
            next[m + 1] -= v;
        }
        for (m, v) in prev.iter().enumerate() {
            next[m] -= v;
        }
        prev = cur;
        cur = next;
    }
    out
}

/// Monomial coefficients of `q₀`, ascending in `s`, of degree `k(ν−1)`.
pub fn radial_polynomial(k: usize, nu: usize) -> Result<Vec<f64>> {
    if k == 0 || nu == 0 {
        return Err(Error::InvalidArgument(format!("kernel needs k >= 1 and nu >= 1, got k={k}, nu={nu}")));
    }
    let degree = k * (nu - 1);
    if degree > MONOMIAL_DEGREE_CAP {
        return Err(Error::DegreeCap {
            degree,
            cap: MONOMIAL_DEGREE_CAP,
        });
    }
    Ok(exact_radial_coefficients(k, nu).iter().map(big_to_f64).collect())
}

fn big_to_f64(v: &BigInt) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// `Δ` of a radial polynomial `Σ a_m |x|^{2m}` in dimension `n`, using
/// `Δ|x|^{2m} = 2m(2m+n−2)|x|^{2m−2}`.
pub fn radial_laplacian(coeffs: &[BigInt], dim: usize) -> Vec<BigInt> {
    if coeffs.len() <= 1 {
        return vec![BigInt::zero()];
    }
    (1..coeffs.len())
        .map(|m| &coeffs[m] * BigInt::from(2 * m * (2 * m + dim - 2)))
        .collect()
}

fn sphere_area(dim: usize) -> f64 {
    let (mut area, start) = if dim % 2 == 0 { (2.0 * PI, 2) } else { (4.0 * PI, 3) };
    let mut n = start;
    while n < dim {
        area *= 2.0 * PI / n as f64;
        n += 2;
    }
    area
}

/// `Σ a_j T_j(y)` by Clenshaw's recurrence.
fn clenshaw(a: &[f64], y: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &aj in a.iter().skip(1).rev() {
        let b0 = 2.0 * y * b1 - b2 + aj;
        b2 = b1;
        b1 = b0;
    }
    y * b1 - b2 + a[0]
}

/// Polyharmonic Jackson kernel `J̃(x) = q(|x|²)` normalised to unit mass on
/// the unit ball.
#[derive(Clone, Debug)]
pub struct RadialKernel {
    pub params: KernelParams,
    /// Chebyshev coefficients of `q` in `y = 1 − s/2`.
    cheb: Vec<f64>,
    /// Exact integer monomial coefficients of the unnormalised `q₀`.
    exact_s: Vec<BigInt>,
    /// Monomial coefficients of `q` when the degree is within the cap.
    pub poly_s: Option<Vec<f64>>,
    pub gamma: f64,
    /// `γ̄ = ∫_{−1}^{1} q₀(x²) dx`.
    pub gamma_bar: f64,
    /// `∫₀¹ r^{n−1} q₀(r²) dr`, which omits the sphere area.
    pub gamma_tilde: f64,
    /// `Z = ωₙ γ̃`, so that `q = q₀/Z` has unit mass.
    pub norm_const: f64,
}

pub fn polyharmonic_kernel(params: KernelParams) -> Result<RadialKernel> {
    let KernelParams { k, nu, dim, .. } = params;
    let c = trig_coefficients(k, nu);
    let d = c.len() - 1;
    let mut raw: Vec<f64> = c.iter().map(big_to_f64).collect();
    for v in raw.iter_mut().skip(1) {
        *v *= 2.0;
    }
    let q0 = |s: f64| clenshaw(&raw, 1.0 - 0.5 * s);
    // integrands are polynomials of degree 2D + n − 1 in r
    let (r, w) = gauss_legendre_on(d + dim + 2, 0.0, 1.0);
    let gamma_tilde: f64 = r.iter().zip(&w).map(|(&r, &w)| w * r.powi(dim as i32 - 1) * q0(r * r)).sum();
    let gamma_bar: f64 = 2.0 * r.iter().zip(&w).map(|(&r, &w)| w * q0(r * r)).sum::<f64>();
    let norm_const = sphere_area(dim) * gamma_tilde;
    assert!(norm_const > 0.0, "kernel normalisation must be positive");
    let exact_s = exact_radial_coefficients(k, nu);
    let poly_s = (d <= MONOMIAL_DEGREE_CAP).then(|| exact_s.iter().map(|v| big_to_f64(v) / norm_const).collect());
    let cheb = raw.iter().map(|v| v / norm_const).collect();
    Ok(RadialKernel {
        params,
        cheb,
        exact_s,
        poly_s,
        gamma: periodic_kernel(k, nu)?.gamma,
        gamma_bar,
        gamma_tilde,
        norm_const,
    })
}

impl RadialKernel {
    pub fn dim(&self) -> usize {
        self.params.dim
    }

    pub fn degree(&self) -> usize {
        self.params.degree()
    }

    /// `q(s)`, meaningful for `s ∈ [0, 4]`.
    #[inline]
    pub fn eval_s(&self, s: f64) -> f64 {
        clenshaw(&self.cheb, 1.0 - 0.5 * s)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_s(x.iter().map(|v| v * v).sum())
    }

    pub fn exact_coefficients(&self) -> &[BigInt] {
        &self.exact_s
    }

    /// Monomial coefficients of the normalised `q`, ascending in `s`, from
    /// the exact integers. Above the degree cap they are exact to rounding
    /// but useless for evaluation.
    pub fn monomial_coefficients(&self) -> Vec<f64> {
        self.exact_s.iter().map(|v| big_to_f64(v) / self.norm_const).collect()
    }

    /// `γ̄ J̄(x)` evaluated through `arccos(1 − x²/2)`, i.e. `q₀(x²)`.
    pub fn trig_form(&self, x: f64) -> f64 {
        let t = (1.0 - 0.5 * x * x).clamp(-1.0, 1.0).acos();
        jackson_ratio_power(self.params.k, self.params.nu, t)
    }

    /// `I_i = ∫₀¹ t^{i+n−1} q(t²) dt`, exact by Gauss–Legendre.
    pub fn moment(&self, i: usize) -> f64 {
        let n = self.dim();
        let points = (i + n + 2 * self.degree()) / 2 + 2;
        let (t, w) = gauss_legendre_on(points, 0.0, 1.0);
        t.iter()
            .zip(&w)
            .map(|(&t, &w)| w * t.powi((i + n - 1) as i32) * self.eval_s(t * t))
            .sum()
    }

    /// Writes `j,coeff,order` rows after a `# k=…, nu=…` header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let order = polyharmonic_order_check(self);
        writeln!(
            w,
            "# k={}, nu={}, n={}, order={}, I0={:e}",
            self.params.k,
            self.params.nu,
            self.dim(),
            order,
            self.moment(0)
        )?;
        writeln!(w, "j,coeff,order")?;
        for (j, c) in self.monomial_coefficients().iter().enumerate() {
            writeln!(w, "{j},{c:e},{order}")?;
        }
        Ok(())
    }
}

pub fn moment(params: KernelParams, i: usize) -> Result<f64> {
    Ok(polyharmonic_kernel(params)?.moment(i))
}

/// One plus the degree of the exact coefficient list after trimming
/// vanishing leading terms.
pub fn polyharmonic_order_check(kernel: &RadialKernel) -> usize {
    let deg = kernel
        .exact_s
        .iter()
        .rposition(|c| !c.is_zero())
        .unwrap_or(0);
    deg + 1
}
