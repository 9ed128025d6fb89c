use std::fmt;
use std::sync::Arc;

use super::field::{dist, norm, ScalarField, MAX_DIM};
use crate::error::{Error, Result};

type Indicator = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;
type Distance = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Factor applied to the maximal similarity scale in [`rescale_to_half_ball`].
pub const HALF_BALL_SAFETY: f64 = 0.99;

/// Shape of a bounded open domain.
#[derive(Clone)]
pub enum DomainKind {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Caller-described domain. `distance` must be positive exactly where
    /// `indicator` holds, and must not overestimate the distance to the
    /// boundary.
    General {
        indicator: Indicator,
        distance: Distance,
    },
}

impl fmt::Debug for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainKind::Ball { center, radius } => f
                .debug_struct("Ball")
                .field("center", center)
                .field("radius", radius)
                .finish(),
            DomainKind::Box { lo, hi } => {
                f.debug_struct("Box").field("lo", lo).field("hi", hi).finish()
            }
            DomainKind::General { .. } => f.write_str("General"),
        }
    }
}

/// A bounded open set in ℝⁿ together with a bounding box of its closure.
#[derive(Clone, Debug)]
pub struct Domain {
    dim: usize,
    kind: DomainKind,
    bbox_lo: Vec<f64>,
    bbox_hi: Vec<f64>,
    inradius: f64,
}

impl Domain {
    pub fn ball(center: &[f64], radius: f64) -> Result<Self> {
        let dim = center.len();
        check_dim(dim)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            dim,
            kind: DomainKind::Ball {
                center: center.to_vec(),
                radius,
            },
            bbox_lo: center.iter().map(|c| c - radius).collect(),
            bbox_hi: center.iter().map(|c| c + radius).collect(),
            inradius: radius,
        })
    }

    /// Unit ball centred at the origin.
    pub fn unit_ball(dim: usize) -> Result<Self> {
        Self::ball(&vec![0.0; dim], 1.0)
    }

    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let dim = lo.len();
        check_dim(dim)?;
        if hi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: hi.len(),
            });
        }
        if lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
            return Err(Error::InvalidArgument(format!(
                "box corners must satisfy lo < hi, got {lo:?} / {hi:?}"
            )));
        }
        let inradius = lo
            .iter()
            .zip(hi)
            .map(|(a, b)| 0.5 * (b - a))
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            dim,
            kind: DomainKind::Box {
                lo: lo.to_vec(),
                hi: hi.to_vec(),
            },
            bbox_lo: lo.to_vec(),
            bbox_hi: hi.to_vec(),
            inradius,
        })
    }

    /// Domain described by an indicator and a boundary-distance function.
    /// Connectivity is the caller's responsibility. The inradius is estimated
    /// by sampling `distance` on a lattice over the bounding box.
    pub fn general<I, D>(bbox_lo: &[f64], bbox_hi: &[f64], indicator: I, distance: D) -> Result<Self>
    where
        I: Fn(&[f64]) -> bool + Send + Sync + 'static,
        D: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let dim = bbox_lo.len();
        check_dim(dim)?;
        if bbox_hi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bbox_hi.len(),
            });
        }
        let indicator: Indicator = Arc::new(indicator);
        let distance: Distance = Arc::new(distance);
        let per_axis = if dim == 2 { 96 } else { 32 };
        let mut inradius = 0.0f64;
        let mut x = vec![0.0; dim];
        lattice_walk(bbox_lo, bbox_hi, per_axis, &mut x, &mut |p| {
            if indicator(p) {
                inradius = inradius.max(distance(p));
            }
        });
        if inradius <= 0.0 {
            return Err(Error::EmptySample(
                "general domain has no interior lattice point".into(),
            ));
        }
        Ok(Self {
            dim,
            kind: DomainKind::General {
                indicator,
                distance,
            },
            bbox_lo: bbox_lo.to_vec(),
            bbox_hi: bbox_hi.to_vec(),
            inradius,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn bounding_box(&self) -> (&[f64], &[f64]) {
        (&self.bbox_lo, &self.bbox_hi)
    }

    /// Short human-readable tag, e.g. `ball(c=[0, 0], r=1)`.
    pub fn describe(&self) -> String {
        match &self.kind {
            DomainKind::Ball { center, radius } => format!("ball(c={center:?}, r={radius})"),
            DomainKind::Box { lo, hi } => format!("box(lo={lo:?}, hi={hi:?})"),
            DomainKind::General { .. } => format!(
                "general(bbox={:?}..{:?})",
                self.bbox_lo, self.bbox_hi
            ),
        }
    }

    pub fn inradius(&self) -> f64 {
        self.inradius
    }

    /// Distance to the boundary for interior points; nonpositive outside.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match &self.kind {
            DomainKind::Ball { center, radius } => radius - dist(x, center),
            DomainKind::Box { lo, hi } => {
                let mut d = f64::INFINITY;
                for i in 0..self.dim {
                    d = d.min(x[i] - lo[i]).min(hi[i] - x[i]);
                }
                d
            }
            DomainKind::General {
                indicator,
                distance,
            } => {
                if indicator(x) {
                    distance(x)
                } else {
                    -1.0
                }
            }
        }
    }

    /// Membership in the open set.
    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.kind {
            DomainKind::General { indicator, .. } => indicator(x),
            _ => self.boundary_distance(x) > 0.0,
        }
    }

    /// Membership in the closure, up to a rounding tolerance relative to the
    /// bounding-box size.
    pub fn contains_closure(&self, x: &[f64]) -> bool {
        match &self.kind {
            DomainKind::General { .. } => {
                self.contains(x) || self.boundary_distance(x) >= 0.0
            }
            _ => self.boundary_distance(x) >= -1e-12 * self.extent(),
        }
    }

    /// Largest side of the bounding box.
    pub fn extent(&self) -> f64 {
        self.bbox_lo
            .iter()
            .zip(&self.bbox_hi)
            .map(|(a, b)| b - a)
            .fold(0.0, f64::max)
    }

    /// Subdomain at distance at least `margin` from the boundary.
    pub fn shrink(&self, margin: f64) -> Result<Domain> {
        if !(margin > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "shrink margin must be positive, got {margin}"
            )));
        }
        if margin >= self.inradius {
            return Err(Error::EmptySubdomain {
                margin,
                inradius: self.inradius,
            });
        }
        match &self.kind {
            DomainKind::Ball { center, radius } => Domain::ball(center, radius - margin),
            DomainKind::Box { lo, hi } => {
                let lo: Vec<f64> = lo.iter().map(|v| v + margin).collect();
                let hi: Vec<f64> = hi.iter().map(|v| v - margin).collect();
                Domain::cuboid(&lo, &hi)
            }
            DomainKind::General {
                indicator,
                distance,
            } => {
                let (ind, d) = (indicator.clone(), distance.clone());
                let d2 = distance.clone();
                let lo: Vec<f64> = self.bbox_lo.iter().map(|v| v + margin).collect();
                let hi: Vec<f64> = self.bbox_hi.iter().map(|v| v - margin).collect();
                Domain::general(
                    &lo,
                    &hi,
                    move |x| ind(x) && d(x) > margin,
                    move |x| d2(x) - margin,
                )
            }
        }
    }

    /// Fraction θ ∈ (0, 1] along the segment `inside → outside` at which the
    /// boundary is crossed. `inside` must lie in the open domain.
    pub fn segment_exit(&self, inside: &[f64], outside: &[f64]) -> f64 {
        let n = self.dim;
        match &self.kind {
            DomainKind::Ball { center, radius } => {
                // |a + θ d|² = ρ² with a = inside − c, d = outside − inside
                let mut aa = 0.0;
                let mut ad = 0.0;
                let mut dd = 0.0;
                for i in 0..n {
                    let a = inside[i] - center[i];
                    let d = outside[i] - inside[i];
                    aa += a * a;
                    ad += a * d;
                    dd += d * d;
                }
                let c = aa - radius * radius;
                let disc = (ad * ad - dd * c).max(0.0);
                // c < 0, so the positive root is (−ad + √disc)/dd; the
                // alternative form avoids cancellation when ad > 0.
                let theta = if ad > 0.0 {
                    -c / (ad + disc.sqrt())
                } else {
                    (-ad + disc.sqrt()) / dd
                };
                theta.clamp(0.0, 1.0)
            }
            DomainKind::Box { lo, hi } => {
                let mut theta = 1.0f64;
                for i in 0..n {
                    let d = outside[i] - inside[i];
                    if d > 0.0 && outside[i] > hi[i] {
                        theta = theta.min((hi[i] - inside[i]) / d);
                    } else if d < 0.0 && outside[i] < lo[i] {
                        theta = theta.min((lo[i] - inside[i]) / d);
                    }
                }
                theta.clamp(0.0, 1.0)
            }
            DomainKind::General { indicator, .. } => {
                let mut a = 0.0;
                let mut b = 1.0;
                let mut p = [0.0; MAX_DIM];
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    for i in 0..n {
                        p[i] = inside[i] + m * (outside[i] - inside[i]);
                    }
                    if indicator(&p[..n]) {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                0.5 * (a + b)
            }
        }
    }

    /// Visits a deterministic dyadic lattice of the closure with spacing at
    /// most `density`. Lattices for smaller densities contain those for larger
    /// ones. Returns the number of visited points.
    pub fn for_each_sample<F: FnMut(&[f64])>(&self, density: f64, mut visit: F) -> Result<usize> {
        if !(density > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sample density must be positive, got {density}"
            )));
        }
        let extent = self.extent();
        let mut cells: usize = 1;
        while extent / cells as f64 > density {
            cells *= 2;
        }
        let mut count = 0;
        let mut x = vec![0.0; self.dim];
        let spacing = extent / cells as f64;
        let shape: Vec<usize> = self
            .bbox_lo
            .iter()
            .zip(&self.bbox_hi)
            .map(|(a, b)| ((b - a) / spacing + 1e-9).floor() as usize + 1)
            .collect();
        let mut idx = vec![0usize; self.dim];
        loop {
            for i in 0..self.dim {
                x[i] = self.bbox_lo[i] + idx[i] as f64 * spacing;
            }
            if self.contains_closure(&x) {
                visit(&x);
                count += 1;
            }
            if !advance(&mut idx, &shape) {
                break;
            }
        }
        Ok(count)
    }

    /// Collects the samples of [`Domain::for_each_sample`] as a flat array.
    pub fn samples(&self, density: f64) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        self.for_each_sample(density, |x| out.extend_from_slice(x))?;
        Ok(out)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if !(2..=MAX_DIM).contains(&dim) {
        return Err(Error::InvalidArgument(format!(
            "dimension must be in 2..={MAX_DIM}, got {dim}"
        )));
    }
    Ok(())
}

/// Odometer increment of a multi-index, last axis fastest.
pub fn advance(idx: &mut [usize], shape: &[usize]) -> bool {
    for a in (0..idx.len()).rev() {
        idx[a] += 1;
        if idx[a] < shape[a] {
            return true;
        }
        idx[a] = 0;
    }
    false
}

fn lattice_walk<F: FnMut(&[f64])>(lo: &[f64], hi: &[f64], per_axis: usize, x: &mut [f64], visit: &mut F) {
    let shape = vec![per_axis + 1; lo.len()];
    let mut idx = vec![0usize; lo.len()];
    loop {
        for i in 0..lo.len() {
            x[i] = lo[i] + (hi[i] - lo[i]) * idx[i] as f64 / per_axis as f64;
        }
        visit(x);
        if !advance(&mut idx, &shape) {
            break;
        }
    }
}

/// Maximum of `|f|` over the sample lattice of the closure of `domain`.
pub fn sup_norm(f: &ScalarField, domain: &Domain, grid_density: f64) -> Result<f64> {
    check_same_dim(f, domain)?;
    let mut best = 0.0f64;
    let mut bad: Option<Vec<f64>> = None;
    let count = domain.for_each_sample(grid_density, |x| {
        let v = f.eval(x);
        if !v.is_finite() {
            bad.get_or_insert_with(|| x.to_vec());
        } else {
            best = best.max(v.abs());
        }
    })?;
    if let Some(point) = bad {
        return Err(Error::NonFinite { point });
    }
    if count == 0 {
        return Err(Error::EmptySample(format!(
            "no lattice point of spacing <= {grid_density} in the domain"
        )));
    }
    Ok(best)
}

pub(crate) fn check_same_dim(f: &ScalarField, domain: &Domain) -> Result<()> {
    if f.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            found: f.dim(),
        });
    }
    Ok(())
}

/// Affine similarity `y = (x − shift)·scale`.
#[derive(Clone, Debug, PartialEq)]
pub struct Similarity {
    pub scale: f64,
    pub shift: Vec<f64>,
}

impl Similarity {
    pub fn forward(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..x.len() {
            y[i] = (x[i] - self.shift[i]) * self.scale;
        }
    }

    pub fn inverse(&self, y: &[f64], x: &mut [f64]) {
        for i in 0..y.len() {
            x[i] = y[i] / self.scale + self.shift[i];
        }
    }
}

/// Maps `domain` by a similarity into the ball `B(0; 1/2)`, with the scale
/// reduced by [`HALF_BALL_SAFETY`] from the largest admissible value.
pub fn rescale_to_half_ball(domain: &Domain) -> Result<(Domain, Similarity)> {
    let target = 0.5 * HALF_BALL_SAFETY;
    match domain.kind() {
        DomainKind::Ball { center, radius } => {
            let sim = Similarity {
                scale: target / radius,
                shift: center.clone(),
            };
            Ok((Domain::ball(&vec![0.0; domain.dim()], target)?, sim))
        }
        DomainKind::Box { lo, hi } => {
            let center: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
            let half_diag = 0.5 * dist(lo, hi);
            let scale = target / half_diag;
            let nlo: Vec<f64> = lo.iter().zip(&center).map(|(a, c)| (a - c) * scale).collect();
            let nhi: Vec<f64> = hi.iter().zip(&center).map(|(a, c)| (a - c) * scale).collect();
            Ok((
                Domain::cuboid(&nlo, &nhi)?,
                Similarity {
                    scale,
                    shift: center,
                },
            ))
        }
        DomainKind::General {
            indicator,
            distance,
        } => {
            let (lo, hi) = domain.bounding_box();
            let center: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
            let half_diag = 0.5 * dist(lo, hi);
            let scale = target / half_diag;
            let sim = Similarity {
                scale,
                shift: center.clone(),
            };
            let nlo: Vec<f64> = lo.iter().zip(&center).map(|(a, c)| (a - c) * scale).collect();
            let nhi: Vec<f64> = hi.iter().zip(&center).map(|(a, c)| (a - c) * scale).collect();
            let (ind, d) = (indicator.clone(), distance.clone());
            let (s1, s2) = (sim.clone(), sim.clone());
            let n = domain.dim();
            Domain::general(
                &nlo,
                &nhi,
                move |y| {
                    let mut x = [0.0; MAX_DIM];
                    s1.inverse(y, &mut x[..n]);
                    ind(&x[..n])
                },
                move |y| {
                    let mut x = [0.0; MAX_DIM];
                    s2.inverse(y, &mut x[..n]);
                    scale * d(&x[..n])
                },
            )
            .map(|dom| (dom, sim))
        }
    }
}

/// `G(y) = f(y/scale + shift)`: the field `f` seen in rescaled coordinates.
pub fn pullback_field(f: &ScalarField, scale: f64, shift: &[f64]) -> Result<ScalarField> {
    if !(scale > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "similarity scale must be positive, got {scale}"
        )));
    }
    let sim = Similarity {
        scale,
        shift: shift.to_vec(),
    };
    let g = f.clone();
    let n = f.dim();
    Ok(ScalarField::new(n, f.smoothness(), move |y| {
        let mut x = [0.0; MAX_DIM];
        sim.inverse(y, &mut x[..n]);
        g.eval(&x[..n])
    }))
}

/// Inverse of [`pullback_field`]: `f(x) = G((x − shift)·scale)`.
pub fn pushforward_field(g: &ScalarField, scale: f64, shift: &[f64]) -> Result<ScalarField> {
    if !(scale > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "similarity scale must be positive, got {scale}"
        )));
    }
    let sim = Similarity {
        scale,
        shift: shift.to_vec(),
    };
    let g = g.clone();
    let n = g.dim();
    Ok(ScalarField::new(n, g.smoothness(), move |x| {
        let mut y = [0.0; MAX_DIM];
        sim.forward(x, &mut y[..n]);
        g.eval(&y[..n])
    }))
}

/// Radius of the smallest origin-centred ball containing the domain's
/// bounding box.
pub fn bounding_radius(domain: &Domain) -> f64 {
    let (lo, hi) = domain.bounding_box();
    let corner: Vec<f64> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| a.abs().max(b.abs()))
        .collect();
    norm(&corner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_domain::Smoothness;

    #[test]
    fn shrink_examples() {
        let d = Domain::unit_ball(2).unwrap().shrink(0.25).unwrap();
        match d.kind() {
            DomainKind::Ball { radius, .. } => assert_eq!(*radius, 0.75),
            _ => panic!(),
        }
        let b = Domain::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap().shrink(0.1).unwrap();
        let (lo, hi) = b.bounding_box();
        assert!((lo[0] - 0.1).abs() < 1e-15 && (hi[1] - 0.9).abs() < 1e-15);
        assert!(matches!(
            Domain::unit_ball(2).unwrap().shrink(1.5),
            Err(Error::EmptySubdomain { .. })
        ));
    }

    #[test]
    fn sup_norm_examples() {
        let d = Domain::unit_ball(2).unwrap();
        let c = ScalarField::constant(2, 3.0);
        assert_eq!(sup_norm(&c, &d, 0.1).unwrap(), 3.0);
        let x1 = ScalarField::new(2, Smoothness::CInf, |x| x[0]);
        let v = sup_norm(&x1, &d, 1e-3).unwrap();
        assert!((v - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn sup_norm_saddle_against_dense_oracle() {
        let d = Domain::unit_ball(2).unwrap();
        let f = ScalarField::new(2, Smoothness::CInf, |x| x[0] * x[0] - x[1] * x[1]);
        let v = sup_norm(&f, &d, 1e-2).unwrap();
        // oracle: dense polar sampling at ten times the density
        let mut oracle = 0.0f64;
        let m = 2000;
        for i in 0..=m / 10 {
            let r = i as f64 / (m / 10) as f64;
            for j in 0..m {
                let a = std::f64::consts::TAU * j as f64 / m as f64;
                let (x, y) = (r * a.cos(), r * a.sin());
                oracle = oracle.max((x * x - y * y).abs());
            }
        }
        assert!((v - oracle).abs() <= 2e-3, "{v} vs {oracle}");
        assert!((v - 1.0).abs() <= 2e-3);
    }

    #[test]
    fn sup_norm_errors() {
        let d = Domain::unit_ball(2).unwrap();
        let nan = ScalarField::new(2, Smoothness::C0, |x| if x[0] > 0.5 { f64::NAN } else { 0.0 });
        assert!(matches!(sup_norm(&nan, &d, 0.1), Err(Error::NonFinite { .. })));
        assert!(sup_norm(&nan, &d, 0.0).is_err());
        // degenerate general domain: no lattice point in the closure
        let thin = Domain::general(&[0.0, 0.0], &[1.0, 1.0], |x| x[0] > 0.5 && x[0] < 0.52, |x| (x[0] - 0.5).min(0.52 - x[0]).max(0.0));
        assert!(thin.is_ok());
        let thin = thin.unwrap();
        let z = ScalarField::zero(2);
        assert!(matches!(sup_norm(&z, &thin, 0.3), Err(Error::EmptySample(_))));
    }

    #[test]
    fn rescale_examples() {
        let (d, s) = rescale_to_half_ball(&Domain::ball(&[0.0, 0.0], 2.0).unwrap()).unwrap();
        assert!((s.scale - 0.2475).abs() < 1e-15);
        assert!(matches!(d.kind(), DomainKind::Ball { radius, .. } if (*radius - 0.495).abs() < 1e-15));
        let (d, s) = rescale_to_half_ball(&Domain::ball(&[5.0, 5.0], 0.1).unwrap()).unwrap();
        assert_eq!(s.shift, vec![5.0, 5.0]);
        assert!(matches!(d.kind(), DomainKind::Ball { radius, .. } if (*radius - 0.495).abs() < 1e-12));
        let (b, _) = rescale_to_half_ball(&Domain::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap()).unwrap();
        let (lo, hi) = b.bounding_box();
        assert!(0.5 * dist(lo, hi) <= 0.495 + 1e-15);
        assert!((lo[0] + hi[0]).abs() < 1e-15);
    }

    #[test]
    fn rescaled_general_domain_inside_half_ball() {
        let annulus_like = Domain::general(
            &[1.0, -1.0],
            &[4.0, 1.0],
            |x| x[0] > 1.0 && x[0] < 4.0 && x[1].abs() < 1.0,
            |x| (x[0] - 1.0).min(4.0 - x[0]).min(1.0 - x[1].abs()),
        )
        .unwrap();
        let (d, _) = rescale_to_half_ball(&annulus_like).unwrap();
        d.for_each_sample(0.01, |y| assert!(norm(y) < 0.5)).unwrap();
    }

    #[test]
    fn pullback_examples() {
        let id = ScalarField::new(2, Smoothness::CInf, |x| x[0]);
        let g = pullback_field(&id, 2.0, &[0.0, 0.0]).unwrap();
        assert_eq!(g.eval(&[1.0, 0.0]), 0.5);
        assert!(pullback_field(&id, 0.0, &[0.0, 0.0]).is_err());
        assert!(pushforward_field(&id, -1.0, &[0.0, 0.0]).is_err());

        let f = ScalarField::new(2, Smoothness::CInf, |x| x[0].sin());
        let (s, shift) = (0.37, [1.5, -2.0]);
        let back = pushforward_field(&pullback_field(&f, s, &shift).unwrap(), s, &shift).unwrap();
        let mut worst = 0.0f64;
        for i in 0..100 {
            let x = [(i as f64 * 0.37).sin() * 3.0, (i as f64 * 0.11).cos() * 2.0];
            worst = worst.max((back.eval(&x) - f.eval(&x)).abs());
        }
        assert!(worst < 1e-12);
    }

    #[test]
    fn segment_exit_ball_and_box() {
        let d = Domain::unit_ball(2).unwrap();
        let th = d.segment_exit(&[0.5, 0.0], &[1.5, 0.0]);
        assert!((th - 0.5).abs() < 1e-15);
        let b = Domain::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let th = b.segment_exit(&[0.9, 0.5], &[1.3, 0.5]);
        assert!((th - 0.25).abs() < 1e-14);
        let g = Domain::general(&[-1.0, -1.0], &[1.0, 1.0], |x| norm(x) < 1.0, |x| 1.0 - norm(x)).unwrap();
        let th = g.segment_exit(&[0.5, 0.0], &[1.5, 0.0]);
        assert!((th - 0.5).abs() < 1e-12);
    }

    #[test]
    fn general_domain_inradius_estimate() {
        let g = Domain::general(&[-1.0, -1.0], &[1.0, 1.0], |x| norm(x) < 1.0, |x| 1.0 - norm(x)).unwrap();
        assert!((g.inradius() - 1.0).abs() < 1e-12);
        let s = g.shrink(0.25).unwrap();
        assert!(!s.contains(&[0.8, 0.0]) && s.contains(&[0.7, 0.0]));
    }
}
