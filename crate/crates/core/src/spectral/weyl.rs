//! Power-law fits of eigenvalue growth and the two-resolution trust window.

use std::ops::RangeInclusive;

use super::EigenDecomposition;
use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::grid::OperatorSpec;

/// Smallest admissible lower end of a fit range.
pub const MIN_FIT_START: usize = 10;
/// Minimum number of indices in a fit range.
pub const MIN_FIT_LENGTH: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct WeylFit {
    pub j_lo: usize,
    pub j_hi: usize,
    /// Slope of `log λ_j` against `log j`.
    pub slope_plain: f64,
    /// Slope of `log λ_j` against `log(j / log j)`.
    pub slope_logcorrected: f64,
    /// Residual RMS of the regression matching the operator's expected law.
    pub residual_rms: f64,
    pub residual_rms_plain: f64,
    pub residual_rms_logcorrected: f64,
    pub intercept_plain: f64,
    pub intercept_logcorrected: f64,
    pub predicted_exponent: f64,
}

impl WeylFit {
    /// Fitted value at `j`, from the log-corrected law when `logcorrected`.
    pub fn fitted(&self, j: usize, logcorrected: bool) -> f64 {
        let lj = (j as f64).ln();
        if logcorrected {
            (self.intercept_logcorrected + self.slope_logcorrected * (lj - lj.ln())).exp()
        } else {
            (self.intercept_plain + self.slope_plain * lj).exp()
        }
    }
}

/// Fits a measured spectrum over `j_range` (1-based, inclusive).
pub fn weyl_fit(eig: &EigenDecomposition, spec: OperatorSpec, j_range: RangeInclusive<usize>) -> Result<WeylFit> {
    if *j_range.end() > eig.trusted_count() {
        return Err(Error::Range(format!(
            "fit range ends at {} beyond the {} trusted eigenpairs",
            j_range.end(),
            eig.trusted_count()
        )));
    }
    let mut fit = weyl_fit_sequence(eig.eigenvalues(), j_range, spec.weyl_exponent())?;
    fit.residual_rms = if spec.m() == spec.mu() {
        fit.residual_rms_logcorrected
    } else {
        fit.residual_rms_plain
    };
    Ok(fit)
}

/// Fits an arbitrary positive sequence `lambdas[j-1]`.
pub fn weyl_fit_sequence(lambdas: &[f64], j_range: RangeInclusive<usize>, predicted_exponent: f64) -> Result<WeylFit> {
    let (lo, hi) = (*j_range.start(), *j_range.end());
    if lo < MIN_FIT_START || hi < lo || hi - lo + 1 < MIN_FIT_LENGTH {
        return Err(Error::Range(format!(
            "fit range [{lo}, {hi}] must start at ≥ {MIN_FIT_START} and span ≥ {MIN_FIT_LENGTH} indices"
        )));
    }
    if hi > lambdas.len() {
        return Err(Error::Range(format!("fit range ends at {hi} beyond {} values", lambdas.len())));
    }
    let y: Vec<f64> = lambdas[lo - 1..hi]
        .iter()
        .map(|&l| {
            if l > 0.0 {
                Ok(l.ln())
            } else {
                Err(Error::Range(format!("non-positive value {l} in fit range")))
            }
        })
        .collect::<Result<_>>()?;
    let plain_x: Vec<f64> = (lo..=hi).map(|j| (j as f64).ln()).collect();
    let corrected_x: Vec<f64> = (lo..=hi).map(|j| (j as f64 / (j as f64).ln()).ln()).collect();
    let plain = fit_line(&plain_x, &y)?;
    let corrected = fit_line(&corrected_x, &y)?;
    Ok(WeylFit {
        j_lo: lo,
        j_hi: hi,
        slope_plain: plain.slope,
        slope_logcorrected: corrected.slope,
        residual_rms: plain.residual_rms,
        residual_rms_plain: plain.residual_rms,
        residual_rms_logcorrected: corrected.residual_rms,
        intercept_plain: plain.intercept,
        intercept_logcorrected: corrected.intercept,
        predicted_exponent,
    })
}

/// Reference resolution for the agreement check: the domain widened by 20%
/// and the spacing refined by 10%. The point count is odd.
pub fn reference_resolution(half_width: f64, points: usize) -> (f64, usize) {
    let h = 2.0 * half_width / (points - 1) as f64;
    let wide = 1.2 * half_width;
    let intervals = (2.0 * wide / (0.9 * h)).round() as usize;
    let intervals = intervals + intervals % 2;
    (wide, intervals + 1)
}

/// Number of leading eigenvalues that are trusted and agree with `reference`
/// to relative tolerance `rel_tol`.
pub fn two_resolution_window(primary: &EigenDecomposition, reference: &[f64], rel_tol: f64) -> usize {
    primary
        .trusted_eigenvalues()
        .iter()
        .zip(reference)
        .take_while(|(a, b)| ((*a - *b) / *b).abs() <= rel_tol)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let lambdas: Vec<f64> = (1..=500).map(|j| (j as f64).powi(2)).collect();
        let fit = weyl_fit_sequence(&lambdas, 10..=500, 2.0).unwrap();
        assert!((fit.slope_plain - 2.0).abs() < 1e-6);
        assert!((fit.fitted(100, false) / 1e4 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exact_log_corrected_law() {
        let lambdas: Vec<f64> = (1..=500)
            .map(|j| {
                let j = j as f64;
                (j / j.ln()).powi(2)
            })
            .collect();
        let fit = weyl_fit_sequence(&lambdas, 10..=500, 2.0).unwrap();
        assert!((fit.slope_logcorrected - 2.0).abs() < 1e-6);
        assert!(fit.residual_rms_logcorrected < 1e-9);
    }

    #[test]
    fn range_preconditions() {
        let lambdas: Vec<f64> = (1..=100).map(|j| j as f64).collect();
        assert!(weyl_fit_sequence(&lambdas, 5..=50, 1.0).is_err());
        assert!(weyl_fit_sequence(&lambdas, 10..=20, 1.0).is_err());
        assert!(weyl_fit_sequence(&lambdas, 10..=101, 1.0).is_err());
        let eig = EigenDecomposition::synthetic(lambdas, 1.0).with_trusted_count(40);
        let spec = OperatorSpec::new(2, 2).unwrap();
        assert!(matches!(weyl_fit(&eig, spec, 10..=60), Err(Error::Range(_))));
        assert!(weyl_fit(&eig, spec, 10..=40).is_ok());
    }

    #[test]
    fn reference_resolution_values() {
        assert_eq!(reference_resolution(40.0, 1201), (48.0, 1601));
        let (l, n) = reference_resolution(12.0, 801);
        assert!((l - 14.4).abs() < 1e-12);
        assert_eq!(n % 2, 1);
    }

    #[test]
    fn window_stops_at_first_disagreement() {
        let eig = EigenDecomposition::synthetic(vec![1.0, 2.0, 3.0, 4.0], 1.0);
        assert_eq!(two_resolution_window(&eig, &[1.0, 2.001, 3.5, 4.0], 0.01), 2);
        let eig = eig.with_trusted_count(1);
        assert_eq!(two_resolution_window(&eig, &[1.0, 2.0, 3.0, 4.0], 0.01), 1);
    }
}
