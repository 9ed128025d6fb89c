use std::fmt;
use std::sync::Arc;

/// Largest dimension supported by the stack buffers used in the hot loops.
pub const MAX_DIM: usize = 8;

/// Advisory smoothness class of a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Smoothness {
    C0,
    C2,
    CInf,
}

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A real-valued function on ℝⁿ.
///
/// Evaluation is pure. Fields backed by samples return `NaN` outside the
/// region they cover; callers that reduce over field values turn a non-finite
/// result into [`crate::Error::NonFinite`].
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    smoothness: Smoothness,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("smoothness", &self.smoothness)
            .finish_non_exhaustive()
    }
}

impl ScalarField {
    pub fn new<F>(dim: usize, smoothness: Smoothness, eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        assert!(
            (2..=MAX_DIM).contains(&dim),
            "field dimension {dim} outside 2..={MAX_DIM}"
        );
        Self {
            dim,
            smoothness,
            eval: Arc::new(eval),
        }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        Self::new(dim, Smoothness::CInf, move |_| value)
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(dim, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }

    fn weaker(a: Smoothness, b: Smoothness) -> Smoothness {
        use Smoothness::*;
        match (a, b) {
            (C0, _) | (_, C0) => C0,
            (C2, _) | (_, C2) => C2,
            _ => CInf,
        }
    }

    /// Pointwise combination `op(self(x), other(x))`.
    pub fn combine<F>(&self, other: &ScalarField, op: F) -> ScalarField
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        assert_eq!(self.dim, other.dim, "combining fields of different dimension");
        let (a, b) = (self.clone(), other.clone());
        ScalarField::new(
            self.dim,
            Self::weaker(self.smoothness, other.smoothness),
            move |x| op(a.eval(x), b.eval(x)),
        )
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        self.combine(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        let a = self.clone();
        ScalarField::new(self.dim, self.smoothness, move |x| c * a.eval(x))
    }

    /// Same values, different advisory smoothness tag.
    pub fn with_smoothness(&self, smoothness: Smoothness) -> ScalarField {
        ScalarField {
            dim: self.dim,
            smoothness,
            eval: self.eval.clone(),
        }
    }
}

/// Euclidean norm.
#[inline]
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[inline]
pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}
