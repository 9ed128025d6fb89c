//! Harmonicity modulus, classical first and second moduli, and a
//! K-functional estimator built from the smoothing family.
//!
//! Suprema are replaced by maxima over deterministic samples: the dyadic
//! lattice of the domain for centres and, for every requested radius `u`,
//! the radii `u·j/T` for `j = 1..=T`.

use crate::error::{Error, Result};
use crate::field_domain::{check_same_dim, Domain, ScalarField, MAX_DIM};
use crate::pizzetti::{J0Rule, PizzettiConstants, RadialMeanTable, DEFAULT_J0_POINTS};
use crate::sphere_mean::{difference_unchecked, make_rule, SphereRule};

pub const DEFAULT_T_REFINE: usize = 16;

/// Constant relating the harmonicity modulus on a subdomain to the
/// K-functional there: `ω^h(f; t) ≤ 2 K^h(f; t)`.
pub const LOWER_EQUIVALENCE_CONSTANT: f64 = 2.0;

/// Relative size below which a modulus counts as zero in ratio tables.
pub const DEGENERATE_TOL: f64 = 1e-10;

/// `max{1, v(1)/lₙ}`, the constant in `K^h(f; t)_{D₁} ≤ C ω^h(f; t)_D`.
pub fn upper_equivalence_constant(dim: usize) -> Result<f64> {
    let c = PizzettiConstants::new(dim)?;
    Ok((c.v(1.0) / c.l_n).max(1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModulusSampling {
    pub x_density: f64,
    pub x_samples: usize,
    pub t_values: Vec<f64>,
    pub rule: String,
}

/// `u ↦ ω^h(f; u)` on a grid of radii.
#[derive(Clone, Debug, PartialEq)]
pub struct ModulusCurve {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Radii beyond the inradius; their values use the admissible part only.
    pub beyond_inradius: Vec<bool>,
    pub domain_tag: String,
    pub sampling: ModulusSampling,
}

impl ModulusCurve {
    pub fn value_at(&self, u: f64) -> Option<f64> {
        self.radii.iter().position(|&r| r == u).map(|i| self.values[i])
    }
}

fn check_radii(u_grid: &[f64]) -> Result<()> {
    if u_grid.is_empty() {
        return Err(Error::InvalidArgument("empty radius grid".into()));
    }
    for w in u_grid.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!("radius grid must be strictly increasing: {u_grid:?}")));
        }
    }
    if !(u_grid[0] > 0.0) || !u_grid.iter().all(|u| u.is_finite()) {
        return Err(Error::InvalidArgument(format!("radii must be positive and finite: {u_grid:?}")));
    }
    Ok(())
}

/// Sorted union of `u·j/T` over the grid.
fn refinement(u_grid: &[f64], t_refine: usize) -> Vec<f64> {
    let mut t: Vec<f64> = u_grid
        .iter()
        .flat_map(|&u| (1..=t_refine).map(move |j| u * j as f64 / t_refine as f64))
        .collect();
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

pub fn harmonicity_modulus(
    f: &ScalarField,
    domain: &Domain,
    u_grid: &[f64],
    x_density: f64,
    rule: &SphereRule,
) -> Result<ModulusCurve> {
    harmonicity_modulus_refined(f, domain, u_grid, x_density, rule, DEFAULT_T_REFINE)
}

pub fn harmonicity_modulus_refined(
    f: &ScalarField,
    domain: &Domain,
    u_grid: &[f64],
    x_density: f64,
    rule: &SphereRule,
    t_refine: usize,
) -> Result<ModulusCurve> {
    harmonicity_modulus_sampled(f, domain, domain, u_grid, x_density, rule, t_refine)
}

/// Modulus on `domain` with centres drawn from the lattice of `lattice`
/// (a superset such as the domain a subdomain was shrunk from), so that
/// moduli of nested domains are compared on identical sample pairs.
pub fn harmonicity_modulus_sampled(
    f: &ScalarField,
    domain: &Domain,
    lattice: &Domain,
    u_grid: &[f64],
    x_density: f64,
    rule: &SphereRule,
    t_refine: usize,
) -> Result<ModulusCurve> {
    check_same_dim(f, domain)?;
    check_same_dim(f, lattice)?;
    check_radii(u_grid)?;
    if rule.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: rule.dim(),
        });
    }
    if t_refine == 0 {
        return Err(Error::InvalidArgument("t refinement must be at least 1".into()));
    }
    let t_values = refinement(u_grid, t_refine);
    let per_t = per_radius_maxima(f, domain, lattice, &t_values, x_density, rule)?;
    let (x_samples, per_t) = per_t;

    let mut running = 0.0f64;
    let mut values = Vec::with_capacity(u_grid.len());
    let mut j = 0;
    for &u in u_grid {
        while j < t_values.len() && t_values[j] <= u {
            running = running.max(per_t[j]);
            j += 1;
        }
        values.push(running);
    }
    let inradius = domain.inradius();
    Ok(ModulusCurve {
        radii: u_grid.to_vec(),
        values,
        beyond_inradius: u_grid.iter().map(|&u| u > inradius).collect(),
        domain_tag: domain.describe(),
        sampling: ModulusSampling {
            x_density,
            x_samples,
            t_values,
            rule: rule.describe(),
        },
    })
}

/// `max_x |Δ_t(f; x)|` over lattice centres with `B(x; t)` inside the domain.
fn per_radius_maxima(
    f: &ScalarField,
    domain: &Domain,
    lattice: &Domain,
    t_values: &[f64],
    x_density: f64,
    rule: &SphereRule,
) -> Result<(usize, Vec<f64>)> {
    let n = f.dim();
    let mut best = vec![0.0f64; t_values.len()];
    let mut bad: Option<Vec<f64>> = None;
    let mut y = [0.0; MAX_DIM];
    let mut count = 0;
    lattice.for_each_sample(x_density, |x| {
        if bad.is_some() || !domain.contains_closure(x) {
            return;
        }
        count += 1;
        let reach = domain.boundary_distance(x) * (1.0 + 1e-12);
        let fx = f.eval(x);
        for (j, &t) in t_values.iter().enumerate() {
            if t > reach {
                break;
            }
            let mut acc = 0.0;
            for q in 0..rule.len() {
                let xi = rule.node(q);
                for i in 0..n {
                    y[i] = x[i] + t * xi[i];
                }
                acc += rule.weight(q) * (f.eval(&y[..n]) - fx);
            }
            if !acc.is_finite() {
                bad = Some(x.to_vec());
                return;
            }
            best[j] = best[j].max(acc.abs());
        }
    })?;
    if let Some(point) = bad {
        return Err(Error::NonFinite { point });
    }
    if count == 0 {
        return Err(Error::EmptySample(format!("no centre of spacing <= {x_density} in the domain")));
    }
    Ok((count, best))
}

/// `(ω₁(f; u), ω₂(f; u))` with directions from a sphere rule of
/// `dir_samples` nodes.
pub fn classical_moduli(
    f: &ScalarField,
    domain: &Domain,
    u: f64,
    x_density: f64,
    dir_samples: usize,
) -> Result<(f64, f64)> {
    let rule = make_rule(f.dim(), dir_samples, Some(0))?;
    classical_moduli_with_rule(f, domain, u, x_density, &rule, DEFAULT_T_REFINE)
}

/// Classical moduli on the same centres, steps `u·j/T` and directions that
/// [`harmonicity_modulus_refined`] uses for `u_grid = [u]`, so the sampled
/// harmonicity modulus never exceeds either of them.
pub fn classical_moduli_with_rule(
    f: &ScalarField,
    domain: &Domain,
    u: f64,
    x_density: f64,
    rule: &SphereRule,
    t_refine: usize,
) -> Result<(f64, f64)> {
    check_same_dim(f, domain)?;
    check_radii(&[u])?;
    if t_refine == 0 {
        return Err(Error::InvalidArgument("t refinement must be at least 1".into()));
    }
    let n = f.dim();
    let steps = refinement(&[u], t_refine);
    let mut w1 = 0.0f64;
    let mut w2 = 0.0f64;
    let mut bad: Option<Vec<f64>> = None;
    let mut yp = [0.0; MAX_DIM];
    let mut ym = [0.0; MAX_DIM];
    domain.for_each_sample(x_density, |x| {
        let fx = f.eval(x);
        for &h in &steps {
            for q in 0..rule.len() {
                let xi = rule.node(q);
                for i in 0..n {
                    yp[i] = x[i] + h * xi[i];
                    ym[i] = x[i] - h * xi[i];
                }
                if !domain.contains_closure(&yp[..n]) {
                    continue;
                }
                let fp = f.eval(&yp[..n]);
                let d1 = (fp - fx).abs();
                if !d1.is_finite() {
                    bad.get_or_insert_with(|| x.to_vec());
                    continue;
                }
                w1 = w1.max(d1);
                if domain.contains_closure(&ym[..n]) {
                    let d2 = (fp - 2.0 * fx + f.eval(&ym[..n])).abs();
                    if d2.is_finite() {
                        w2 = w2.max(d2);
                    } else {
                        bad.get_or_insert_with(|| x.to_vec());
                    }
                }
            }
        }
    })?;
    if let Some(point) = bad {
        return Err(Error::NonFinite { point });
    }
    Ok((w1, w2))
}

/// A member of the K-functional candidate family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Candidate {
    /// `g_{R,t'}` from the smoothing family.
    Smoothing { radius: f64, t_inner: f64 },
    /// `g = f`, available when `Δf` is known in closed form.
    Identity,
    /// `g = 0`.
    Zero,
}

impl std::fmt::Display for Candidate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Candidate::Smoothing { radius, t_inner } => write!(f, "smoothing(R={radius}, t={t_inner})"),
            Candidate::Identity => write!(f, "identity"),
            Candidate::Zero => write!(f, "zero"),
        }
    }
}

/// `‖f − g‖` and `‖Δg‖` for one candidate on the subdomain samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CandidateScore {
    pub candidate: Candidate,
    pub distance: f64,
    pub laplacian_norm: f64,
}

impl CandidateScore {
    pub fn cost(&self, t: f64) -> f64 {
        self.distance + t * t * self.laplacian_norm
    }
}

#[derive(Clone, Debug)]
pub struct CandidateFamily {
    pub radii: Vec<f64>,
    pub inner_t: Vec<f64>,
    pub x_density: f64,
    pub quad_points: usize,
    /// Interpolate spherical means from a per-centre Chebyshev table.
    pub radial_cache: bool,
}

impl CandidateFamily {
    pub fn new(radii: Vec<f64>, inner_t: Vec<f64>, x_density: f64) -> Self {
        Self {
            radii,
            inner_t,
            x_density,
            quad_points: DEFAULT_J0_POINTS,
            radial_cache: false,
        }
    }
}

/// Scores of every candidate; `K̂(t) = min_g ‖f − g‖ + t²‖Δg‖` for any `t`.
#[derive(Clone, Debug)]
pub struct CandidateTable {
    pub scores: Vec<CandidateScore>,
    pub x_density: f64,
    pub x_samples: usize,
}

impl CandidateTable {
    /// `outer` is where `f` may be evaluated and `inner` the subdomain on
    /// which norms are taken.
    pub fn build(
        f: &ScalarField,
        laplacian: Option<&ScalarField>,
        outer: &Domain,
        inner: &Domain,
        family: &CandidateFamily,
        rule: &SphereRule,
    ) -> Result<Self> {
        check_same_dim(f, outer)?;
        check_same_dim(f, inner)?;
        if let Some(l) = laplacian {
            check_same_dim(l, inner)?;
        }
        if family.radii.is_empty() || family.inner_t.is_empty() {
            return Err(Error::InvalidArgument("empty candidate grid".into()));
        }
        if family.radii.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::InvalidArgument(format!("candidate radii must be positive: {:?}", family.radii)));
        }
        if family.inner_t.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
            return Err(Error::InvalidArgument(format!(
                "candidate t values must lie in (0, 1]: {:?}",
                family.inner_t
            )));
        }
        let consts = PizzettiConstants::new(f.dim())?;
        let j0 = J0Rule::new(f.dim(), family.quad_points)?;
        let pairs: Vec<(f64, f64)> = family
            .radii
            .iter()
            .flat_map(|&r| family.inner_t.iter().map(move |&t| (r, t)))
            .collect();
        let max_reach = pairs.iter().map(|(r, t)| r * t).fold(0.0, f64::max);
        let mut dist = vec![0.0f64; pairs.len()];
        let mut lap = vec![0.0f64; pairs.len()];
        let mut f_norm = 0.0f64;
        let mut lap_norm = 0.0f64;
        let mut failure: Option<Error> = None;
        let count = inner.for_each_sample(family.x_density, |x| {
            if failure.is_some() {
                return;
            }
            let room = outer.boundary_distance(x);
            if room < max_reach * (1.0 - 1e-12) {
                failure = Some(Error::BallNotContained {
                    center: x.to_vec(),
                    radius: max_reach,
                    distance: room,
                });
                return;
            }
            let fx = f.eval(x);
            let table = family
                .radial_cache
                .then(|| RadialMeanTable::new(f, x, max_reach, rule));
            for (c, &(r, t)) in pairs.iter().enumerate() {
                let reach = r * t;
                let corr = match &table {
                    Some(tab) => j0.apply(|s| tab.eval(s) - fx, reach),
                    None => j0.apply(|s| difference_unchecked(f, x, s, rule), reach),
                };
                let scale = consts.v(t) / (r * r);
                dist[c] = dist[c].max((scale * corr).abs());
                let d = difference_unchecked(f, x, reach, rule);
                lap[c] = lap[c].max((scale / consts.l_n * d).abs());
            }
            f_norm = f_norm.max(fx.abs());
            if let Some(l) = laplacian {
                lap_norm = lap_norm.max(l.eval(x).abs());
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        if count == 0 {
            return Err(Error::EmptySample("no sample point in the subdomain".into()));
        }
        let all = dist.iter().chain(&lap).chain([&f_norm, &lap_norm]);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { point: Vec::new() });
        }
        let mut scores: Vec<CandidateScore> = pairs
            .iter()
            .zip(dist.iter().zip(&lap))
            .map(|(&(radius, t_inner), (&distance, &laplacian_norm))| CandidateScore {
                candidate: Candidate::Smoothing { radius, t_inner },
                distance,
                laplacian_norm,
            })
            .collect();
        if laplacian.is_some() {
            scores.push(CandidateScore {
                candidate: Candidate::Identity,
                distance: 0.0,
                laplacian_norm: lap_norm,
            });
        }
        scores.push(CandidateScore {
            candidate: Candidate::Zero,
            distance: f_norm,
            laplacian_norm: 0.0,
        });
        Ok(Self {
            scores,
            x_density: family.x_density,
            x_samples: count,
        })
    }

    /// Best candidate cost at `t`.
    pub fn upper(&self, t: f64) -> (f64, Candidate) {
        let mut best = (f64::INFINITY, Candidate::Zero);
        for s in &self.scores {
            let c = s.cost(t);
            if c < best.0 {
                best = (c, s.candidate);
            }
        }
        best
    }

    /// `‖f‖` on the subdomain samples, the cost of the zero candidate.
    pub fn sup_norm(&self) -> f64 {
        self.scores
            .iter()
            .find(|s| s.candidate == Candidate::Zero)
            .map_or(0.0, |s| s.distance)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KFunctionalEstimate {
    pub t: f64,
    pub upper: f64,
    pub best_candidate: Candidate,
    /// `ω^h(f; t)/2` on the subdomain.
    pub lower: f64,
}

/// Estimate of `K^h(f; t)` on `inner` from the candidate family.
pub fn k_functional(
    f: &ScalarField,
    laplacian: Option<&ScalarField>,
    outer: &Domain,
    inner: &Domain,
    t: f64,
    family: &CandidateFamily,
    rule: &SphereRule,
) -> Result<KFunctionalEstimate> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
    }
    let table = CandidateTable::build(f, laplacian, outer, inner, family, rule)?;
    let (upper, best_candidate) = table.upper(t);
    let omega = harmonicity_modulus(f, inner, &[t], family.x_density, rule)?;
    Ok(KFunctionalEstimate {
        t,
        upper,
        best_candidate,
        lower: omega.values[0] / LOWER_EQUIVALENCE_CONSTANT,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceRow {
    pub t: f64,
    pub omega_outer: f64,
    pub omega_inner: f64,
    pub k_upper: f64,
    pub best_candidate: Candidate,
    /// `ω^h(f; t)_{inner} / K̂(t)`, bounded by 2.
    pub ratio_lower: Option<f64>,
    /// `K̂(t) / ω^h(f; t)_{outer}`, bounded by the upper constant.
    pub ratio_upper: Option<f64>,
    pub degenerate: bool,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub rows: Vec<EquivalenceRow>,
    pub lower_constant: f64,
    pub upper_constant: f64,
    /// Sampled distance between the subdomain and the outer boundary.
    pub separation: f64,
}

/// Slack allowed in the upper comparison.
pub const UPPER_SLACK: f64 = 1e-9;

/// Compares modulus and K-functional estimate for each `t`. The candidate
/// radii are extended by `t_grid` itself, paired with `t' = 1` among others.
pub fn equivalence_report(
    f: &ScalarField,
    laplacian: Option<&ScalarField>,
    outer: &Domain,
    inner: &Domain,
    t_grid: &[f64],
    family: &CandidateFamily,
    rule: &SphereRule,
) -> Result<EquivalenceReport> {
    check_radii(t_grid)?;
    let mut separation = f64::INFINITY;
    inner.for_each_sample(family.x_density, |x| {
        separation = separation.min(outer.boundary_distance(x));
    })?;
    let t_max = *t_grid.last().unwrap();
    if t_max >= separation {
        return Err(Error::InvalidArgument(format!(
            "t = {t_max} not below the subdomain separation {separation}"
        )));
    }
    let mut fam = family.clone();
    for &t in t_grid {
        if !fam.radii.contains(&t) {
            fam.radii.push(t);
        }
    }
    fam.radii.sort_by(f64::total_cmp);
    if !fam.inner_t.contains(&1.0) {
        fam.inner_t.push(1.0);
    }
    let table = CandidateTable::build(f, laplacian, outer, inner, &fam, rule)?;
    let w_outer = harmonicity_modulus(f, outer, t_grid, family.x_density, rule)?;
    let w_inner =
        harmonicity_modulus_sampled(f, inner, outer, t_grid, family.x_density, rule, DEFAULT_T_REFINE)?;
    let upper_constant = upper_equivalence_constant(f.dim())?;
    let scale = table.sup_norm().max(1.0);
    let rows = t_grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let (k_upper, best_candidate) = table.upper(t);
            let (wo, wi) = (w_outer.values[i], w_inner.values[i]);
            let degenerate = wo <= DEGENERATE_TOL * scale;
            EquivalenceRow {
                t,
                omega_outer: wo,
                omega_inner: wi,
                k_upper,
                best_candidate,
                ratio_lower: (k_upper > DEGENERATE_TOL * scale).then(|| wi / k_upper),
                ratio_upper: (!degenerate).then(|| k_upper / wo),
                degenerate,
                lower_holds: wi <= LOWER_EQUIVALENCE_CONSTANT * k_upper + 1e-12 * scale,
                upper_holds: degenerate || k_upper <= upper_constant * wo + UPPER_SLACK,
            }
        })
        .collect();
    Ok(EquivalenceReport {
        rows,
        lower_constant: LOWER_EQUIVALENCE_CONSTANT,
        upper_constant,
        separation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_domain::Smoothness;

    fn disk() -> Domain {
        Domain::unit_ball(2).unwrap()
    }

    fn rule2() -> SphereRule {
        make_rule(2, 64, None).unwrap()
    }

    #[test]
    fn harmonic_field_has_zero_modulus() {
        let f = ScalarField::new(2, Smoothness::CInf, |x| x[0] * x[0] - x[1] * x[1]);
        let c = harmonicity_modulus(&f, &disk(), &[0.1, 0.3, 0.6], 0.1, &rule2()).unwrap();
        assert!(c.values.iter().all(|&v| v < 1e-12));
    }

    #[test]
    fn radial_square_modulus_is_u_squared() {
        let f = ScalarField::new(2, Smoothness::CInf, |x| x[0] * x[0] + x[1] * x[1]);
        let c = harmonicity_modulus(&f, &disk(), &[0.25], 0.05, &rule2()).unwrap();
        assert!((c.values[0] - 0.0625).abs() < 1e-6);
        assert_eq!(c.value_at(0.25), Some(c.values[0]));
    }

    #[test]
    fn flags_radii_beyond_inradius() {
        let f = ScalarField::new(2, Smoothness::CInf, |x| x[0] * x[0]);
        let c = harmonicity_modulus(&f, &disk(), &[0.5, 1.5], 0.1, &rule2()).unwrap();
        assert_eq!(c.beyond_inradius, vec![false, true]);
        assert!(c.values[1] >= c.values[0]);
        assert!(harmonicity_modulus(&f, &disk(), &[0.5, 0.2], 0.1, &rule2()).is_err());
        assert!(harmonicity_modulus(&f, &disk(), &[], 0.1, &rule2()).is_err());
    }

    #[test]
    fn classical_moduli_basics() {
        let c = ScalarField::constant(2, 2.0);
        assert_eq!(classical_moduli(&c, &disk(), 0.2, 0.1, 32).unwrap(), (0.0, 0.0));
        let l = ScalarField::new(2, Smoothness::CInf, |x| 3.0 * x[0] - x[1] + 1.0);
        let (w1, w2) = classical_moduli(&l, &disk(), 0.2, 0.1, 32).unwrap();
        assert!(w2 < 1e-12);
        assert!((w1 - 0.2 * 10f64.sqrt()).abs() < 0.05);
    }

    #[test]
    fn k_functional_simple_cases() {
        let d1 = disk().shrink(0.3).unwrap();
        let fam = CandidateFamily::new(vec![0.1, 0.2], vec![0.5, 1.0], 0.1);
        let h = ScalarField::new(2, Smoothness::CInf, |x| x[0] * x[1]);
        let zero = ScalarField::zero(2);
        let k = k_functional(&h, Some(&zero), &disk(), &d1, 0.2, &fam, &rule2()).unwrap();
        assert_eq!(k.upper, 0.0);
        assert_eq!(k.best_candidate, Candidate::Identity);
        let cone = ScalarField::new(2, Smoothness::C0, |x| (x[0] * x[0] + x[1] * x[1]).sqrt());
        let k = k_functional(&cone, None, &disk(), &d1, 0.5, &fam, &rule2()).unwrap();
        assert!(k.upper <= 0.7 + 1e-12);
        assert!(k.lower <= k.upper);
        let empty = CandidateFamily::new(vec![], vec![1.0], 0.1);
        assert!(k_functional(&cone, None, &disk(), &d1, 0.5, &empty, &rule2()).is_err());
        let wide = CandidateFamily::new(vec![0.5], vec![1.0], 0.1);
        assert!(matches!(
            k_functional(&cone, None, &disk(), &d1, 0.5, &wide, &rule2()),
            Err(Error::BallNotContained { .. })
        ));
    }

    #[test]
    fn radial_square_equivalence() {
        let f = ScalarField::new(2, Smoothness::CInf, |x| x[0] * x[0] + x[1] * x[1]);
        let lap = ScalarField::constant(2, 4.0);
        let d1 = disk().shrink(0.3).unwrap();
        let fam = CandidateFamily::new(vec![0.1], vec![0.5, 1.0], 0.1);
        let rep = equivalence_report(&f, Some(&lap), &disk(), &d1, &[0.05, 0.1, 0.2], &fam, &rule2()).unwrap();
        assert_eq!(rep.upper_constant, 4.0);
        for row in &rep.rows {
            assert!(row.lower_holds && row.upper_holds, "{row:?}");
            assert!(row.ratio_upper.unwrap() <= 4.0 + 1e-9);
            assert!(row.omega_inner <= row.omega_outer);
        }
        assert!(equivalence_report(&f, Some(&lap), &disk(), &d1, &[0.5], &fam, &rule2()).is_err());
    }

    #[test]
    fn harmonic_equivalence_is_degenerate() {
        let f = ScalarField::new(2, Smoothness::CInf, |x| x[0] * x[0] - x[1] * x[1]);
        let d1 = disk().shrink(0.3).unwrap();
        let fam = CandidateFamily::new(vec![0.1], vec![1.0], 0.1);
        let rep = equivalence_report(&f, Some(&ScalarField::zero(2)), &disk(), &d1, &[0.1, 0.2], &fam, &rule2()).unwrap();
        for row in &rep.rows {
            assert!(row.degenerate && row.ratio_upper.is_none() && row.ratio_lower.is_none());
        }
    }

    #[test]
    fn upper_constants() {
        assert_eq!(upper_equivalence_constant(2).unwrap(), 4.0);
        assert!((upper_equivalence_constant(3).unwrap() - 6.0).abs() < 1e-12);
    }
}
