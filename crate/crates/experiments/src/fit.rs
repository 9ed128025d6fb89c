//! Least-squares rate fits in log-log coordinates.

use serde::Serialize;

use crate::error::ExperimentError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the log residuals.
    pub residual: f64,
    /// Indices of input pairs left out because `err ≤ 0`.
    pub excluded: Vec<usize>,
}

/// Fits `log err ≈ intercept + slope · log p`.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit, ExperimentError> {
    let mut excluded = Vec::new();
    let mut pts = Vec::with_capacity(pairs.len());
    for (i, &(p, e)) in pairs.iter().enumerate() {
        if !(p > 0.0) || !p.is_finite() {
            return Err(ExperimentError::Config(format!("rate fit needs positive abscissae, got {p}")));
        }
        if e > 0.0 && e.is_finite() {
            pts.push((p.ln(), e.ln()));
        } else {
            excluded.push(i);
        }
    }
    if pts.len() < 3 {
        return Err(ExperimentError::Config(format!(
            "rate fit needs at least 3 positive errors, got {}",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / m, b + y / m));
    let (sxx, sxy) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (x - mx), b + (x - mx) * (y - my)));
    if sxx == 0.0 {
        return Err(ExperimentError::Config("rate fit needs at least two distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(RateFit {
        slope,
        intercept,
        residual: (ss / m).sqrt(),
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let pairs: Vec<_> = [4.0, 8.0, 16.0, 32.0].iter().map(|&p: &f64| (p, p.powi(-2))).collect();
        let fit = fit_rate(&pairs).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
    }

    #[test]
    fn constant_error_has_zero_slope() {
        let fit = fit_rate(&[(2.0, 0.3), (4.0, 0.3), (8.0, 0.3)]).unwrap();
        assert!(fit.slope.abs() < 1e-15);
    }

    #[test]
    fn nonpositive_errors_are_excluded() {
        let fit = fit_rate(&[(2.0, 0.5), (3.0, 0.0), (4.0, 0.25), (8.0, 0.125), (9.0, -1.0)]).unwrap();
        assert_eq!(fit.excluded, vec![1, 4]);
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!(fit_rate(&[(2.0, 0.5), (3.0, 0.0), (4.0, 0.25)]).is_err());
    }

    proptest! {
        #[test]
        fn recovers_any_power_law(a in -5.0f64..5.0, c in 0.01f64..100.0) {
            let pairs: Vec<_> = [3.0, 5.0, 11.0, 40.0].iter().map(|&p: &f64| (p, c * p.powf(a))).collect();
            let fit = fit_rate(&pairs).unwrap();
            prop_assert!((fit.slope - a).abs() < 1e-10);
            prop_assert!(fit.residual < 1e-10);
        }
    }
}
