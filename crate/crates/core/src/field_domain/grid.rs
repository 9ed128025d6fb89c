use std::io::{self, Write};

use super::domain::advance;
use super::field::{ScalarField, Smoothness, MAX_DIM};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Interp {
    #[default]
    Linear,
    Cubic,
}

/// Samples of a field on a regular grid `origin + spacing·i`, stored
/// row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    origin: Vec<f64>,
    spacing: f64,
    shape: Vec<usize>,
    values: Vec<f64>,
    interp: Interp,
}

impl GridField {
    pub fn new(origin: Vec<f64>, spacing: f64, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid spacing must be positive, got {spacing}"
            )));
        }
        if origin.len() != shape.len() {
            return Err(Error::DimensionMismatch {
                expected: origin.len(),
                found: shape.len(),
            });
        }
        if !(2..=MAX_DIM).contains(&origin.len()) || shape.iter().any(|&s| s < 2) {
            return Err(Error::InvalidArgument(format!(
                "grid needs 2..={MAX_DIM} axes of at least two nodes, got shape {shape:?}"
            )));
        }
        let len: usize = shape.iter().product();
        if values.len() != len {
            return Err(Error::InvalidArgument(format!(
                "grid of shape {shape:?} needs {len} values, got {}",
                values.len()
            )));
        }
        Ok(Self {
            origin,
            spacing,
            shape,
            values,
            interp: Interp::Linear,
        })
    }

    /// Grid over the box `[lo, hi]` (extended to a whole number of cells),
    /// filled with `f` at every node.
    pub fn from_fn<F: FnMut(&[f64]) -> f64>(lo: &[f64], hi: &[f64], spacing: f64, mut f: F) -> Result<Self> {
        let shape: Vec<usize> = lo
            .iter()
            .zip(hi)
            .map(|(a, b)| ((b - a) / spacing - 1e-9).ceil().max(1.0) as usize + 1)
            .collect();
        let len: usize = shape.iter().product();
        let mut values = Vec::with_capacity(len);
        let mut idx = vec![0usize; lo.len()];
        let mut x = vec![0.0; lo.len()];
        loop {
            for a in 0..lo.len() {
                x[a] = lo[a] + spacing * idx[a] as f64;
            }
            values.push(f(&x));
            if !advance(&mut idx, &shape) {
                break;
            }
        }
        Self::new(lo.to_vec(), spacing, shape, values)
    }

    pub fn with_interp(mut self, interp: Interp) -> Self {
        self.interp = interp;
        self
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn interp(&self) -> Interp {
        self.interp
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Upper corner of the covered box.
    pub fn upper(&self) -> Vec<f64> {
        self.origin
            .iter()
            .zip(&self.shape)
            .map(|(o, s)| o + self.spacing * (*s - 1) as f64)
            .collect()
    }

    #[inline]
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut k = 0;
        for a in 0..idx.len() {
            k = k * self.shape[a] + idx[a];
        }
        k
    }

    pub fn node(&self, idx: &[usize], out: &mut [f64]) {
        for a in 0..idx.len() {
            out[a] = self.origin[a] + self.spacing * idx[a] as f64;
        }
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.flat_index(idx)]
    }

    /// Interpolated value at `x`; `NaN` outside the covered box.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        match self.interp {
            Interp::Linear => self.linear(x),
            Interp::Cubic => match self.cubic(x) {
                Some(v) if !v.is_nan() => v,
                _ => self.linear(x),
            },
        }
    }

    /// Cell index and fractional position along one axis, snapping positions
    /// within rounding distance of a node onto it.
    #[inline]
    fn locate(&self, a: usize, xa: f64) -> Option<(usize, f64)> {
        let mut t = (xa - self.origin[a]) / self.spacing;
        let r = t.round();
        if (t - r).abs() < 1e-9 {
            t = r;
        }
        let last = (self.shape[a] - 1) as f64;
        if !(t >= 0.0 && t <= last) {
            return None;
        }
        let mut i = t.floor();
        if i >= last {
            i = last - 1.0;
        }
        Some((i as usize, t - i))
    }

    fn linear(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut base = [0usize; MAX_DIM];
        let mut frac = [0.0; MAX_DIM];
        for a in 0..n {
            match self.locate(a, x[a]) {
                Some((i, f)) => {
                    base[a] = i;
                    frac[a] = f;
                }
                None => return f64::NAN,
            }
        }
        let mut acc = 0.0;
        let mut idx = [0usize; MAX_DIM];
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            for a in 0..n {
                let up = (corner >> (n - 1 - a)) & 1 == 1;
                idx[a] = base[a] + up as usize;
                w *= if up { frac[a] } else { 1.0 - frac[a] };
            }
            // zero-weight corners may hold NaN padding
            if w != 0.0 {
                acc += w * self.get(&idx[..n]);
            }
        }
        acc
    }

    /// Tensor cubic Lagrange interpolation on the 4ⁿ surrounding nodes;
    /// `None` when the stencil leaves the grid.
    fn cubic(&self, x: &[f64]) -> Option<f64> {
        let n = self.dim();
        let mut base = [0usize; MAX_DIM];
        let mut wts = [[0.0; 4]; MAX_DIM];
        for a in 0..n {
            let (i, f) = self.locate(a, x[a])?;
            if i == 0 || i + 2 >= self.shape[a] {
                return None;
            }
            base[a] = i - 1;
            // nodes at −1, 0, 1, 2 relative to the cell start
            wts[a] = [
                -f * (f - 1.0) * (f - 2.0) / 6.0,
                (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
                -(f + 1.0) * f * (f - 2.0) / 2.0,
                (f + 1.0) * f * (f - 1.0) / 6.0,
            ];
        }
        let mut acc = 0.0;
        let mut idx = [0usize; MAX_DIM];
        let mut off = [0usize; MAX_DIM];
        loop {
            let mut w = 1.0;
            for a in 0..n {
                idx[a] = base[a] + off[a];
                w *= wts[a][off[a]];
            }
            if w != 0.0 {
                acc += w * self.get(&idx[..n]);
            }
            if !advance(&mut off[..n], &[4; MAX_DIM][..n]) {
                break;
            }
        }
        Some(acc)
    }

    /// The interpolant as a [`ScalarField`].
    pub fn to_field(&self) -> ScalarField {
        let g = self.clone();
        let smooth = match self.interp {
            Interp::Linear => Smoothness::C0,
            Interp::Cubic => Smoothness::C0,
        };
        ScalarField::new(self.dim(), smooth, move |x| g.interpolate(x))
    }

    /// Writes the grid as CSV: a `# origin=…, spacing=…, dims=…` header and
    /// one line per run of the last axis.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
        let dims = self.shape.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("x");
        writeln!(
            w,
            "# origin={}, spacing={:e}, dims={}",
            join(&self.origin),
            self.spacing,
            dims
        )?;
        let row = *self.shape.last().unwrap();
        for chunk in self.values.chunks(row) {
            let line = chunk.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",");
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}
