//! Finite-range decay and growth diagnostics of coefficient fields.
//!
//! All fits run on `log sup_t |∂_t^γ f_j|` against `log λ_j`, so sparse fields
//! with astronomically small or large amplitudes are handled without
//! materializing them.

use num_complex::Complex64;

use super::counterexample::SparseField;
use super::{CoefficientField, TimeGrid, Transformer};
use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::spectral::{MIN_USABLE_MODES, NEGLIGIBLE_COEFFICIENT};

/// Default decay order required for membership.
pub const DEFAULT_M_MAX: f64 = 3.0;
/// Slopes at or above this value mean no decay.
pub const NOT_IN_F_SLOPE: f64 = -0.5;
/// Highest derivative order accepted by the Gevrey proxy and the samplers.
pub const MAX_DERIVATIVE_ORDER: u32 = 40;

/// `sup_t |∂_t^γ u|` of a frequency track on the grid.
fn derivative_sup(tr: &Transformer, grid: TimeGrid, fhat: &[Complex64], gamma: u32) -> f64 {
    let scaled: Vec<Complex64> = grid
        .frequencies()
        .zip(fhat)
        .map(|(k, &f)| f * Complex64::new(0.0, k as f64).powu(gamma))
        .collect();
    tr.inverse(&scaled).iter().fold(0.0f64, |m, v| m.max(v.norm()))
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// `max_{γ ≤ γ_max} η^{−γ} (γ!)^{−σ} sup_t |∂_t^γ u|`, evaluated in logarithms.
pub fn gevrey_norm_proxy(fhat: &[Complex64], grid: TimeGrid, sigma: f64, eta: f64, gamma_max: u32) -> Result<f64> {
    if fhat.len() != grid.points() {
        return Err(Error::LengthMismatch {
            expected: grid.points(),
            actual: fhat.len(),
        });
    }
    if !(sigma > 1.0) {
        return Err(Error::param("sigma", format!("must exceed 1, got {sigma}")));
    }
    if !(eta > 0.0) {
        return Err(Error::param("eta", format!("must be positive, got {eta}")));
    }
    if gamma_max > MAX_DERIVATIVE_ORDER {
        return Err(Error::param(
            "gamma_max",
            format!("must not exceed {MAX_DERIVATIVE_ORDER}, got {gamma_max}"),
        ));
    }
    let tr = Transformer::new(grid);
    let best = (0..=gamma_max)
        .map(|g| {
            let sup = derivative_sup(&tr, grid, fhat, g);
            sup.ln() - g as f64 * eta.ln() - sigma * ln_factorial(g)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(best.exp())
}

/// `log λ_j` and `log sup_t |∂_t^γ f_j|` per requested `γ`; vanishing
/// entries are `−∞` and excluded from fits.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySamples {
    pub ln_lambda: Vec<f64>,
    pub gammas: Vec<u32>,
    /// `ln_sup[g][j]` for `gammas[g]` and mode `j + 1`.
    pub ln_sup: Vec<Vec<f64>>,
}

impl DecaySamples {
    /// Samples a dense field; `lambdas` supplies `λ_1..λ_J`.
    pub fn from_field(field: &CoefficientField, lambdas: &[f64], gammas: &[u32]) -> Result<Self> {
        if lambdas.len() < field.modes() {
            return Err(Error::LengthMismatch {
                expected: field.modes(),
                actual: lambdas.len(),
            });
        }
        check_orders(gammas)?;
        let freq = field.to_frequency();
        let grid = field.grid();
        let tr = Transformer::new(grid);
        let ln_sup = gammas
            .iter()
            .map(|&g| {
                (0..field.modes())
                    .map(|j| {
                        let sup = derivative_sup(&tr, grid, freq.row(j), g);
                        if sup > NEGLIGIBLE_COEFFICIENT {
                            sup.ln()
                        } else {
                            f64::NEG_INFINITY
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            ln_lambda: lambdas[..field.modes()].iter().map(|l| l.ln()).collect(),
            gammas: gammas.to_vec(),
            ln_sup,
        })
    }

    /// Samples a sparse single-frequency field exactly:
    /// `sup_t |∂_t^γ A e^{−iτt}| = |A| |τ|^γ`.
    pub fn from_sparse(field: &SparseField, gammas: &[u32]) -> Result<Self> {
        check_orders(gammas)?;
        let ln_sup = gammas
            .iter()
            .map(|&g| {
                field
                    .tracks
                    .iter()
                    .map(|t| {
                        if g == 0 {
                            t.ln_modulus
                        } else {
                            t.ln_modulus + g as f64 * super::counterexample::ln_abs(&t.tau)
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            ln_lambda: field.tracks.iter().map(|t| t.ln_lambda).collect(),
            gammas: gammas.to_vec(),
            ln_sup,
        })
    }

    fn usable(&self, row: usize) -> (Vec<f64>, Vec<f64>) {
        self.ln_lambda
            .iter()
            .zip(&self.ln_sup[row])
            .filter(|(_, s)| s.is_finite())
            .map(|(l, s)| (*l, *s))
            .unzip()
    }
}

fn check_orders(gammas: &[u32]) -> Result<()> {
    if gammas.is_empty() {
        return Err(Error::param("gamma_list", "must not be empty"));
    }
    if let Some(g) = gammas.iter().find(|&&g| g > MAX_DERIVATIVE_ORDER) {
        return Err(Error::param(
            "gamma_list",
            format!("order {g} exceeds {MAX_DERIVATIVE_ORDER}"),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierSettings {
    /// Decay order every slope must reach for membership.
    pub m_max: f64,
    pub min_modes: usize,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        Self {
            m_max: DEFAULT_M_MAX,
            min_modes: MIN_USABLE_MODES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FVerdict {
    InF,
    NotInF,
    Inconclusive,
}

impl FVerdict {
    pub fn label(self) -> &'static str {
        match self {
            FVerdict::InF => "in-F",
            FVerdict::NotInF => "not-in-F",
            FVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSlope {
    pub gamma: u32,
    pub slope: f64,
    /// Two-standard-error band of the slope.
    pub ci_low: f64,
    pub ci_high: f64,
    pub usable: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub slopes: Vec<GammaSlope>,
    pub m_max: f64,
    pub verdict: FVerdict,
}

pub fn decay_classify(samples: &DecaySamples, m_max: f64) -> Result<DecayReport> {
    decay_classify_with(
        samples,
        ClassifierSettings {
            m_max,
            ..ClassifierSettings::default()
        },
    )
}

/// Verdict from the point slopes: membership when every slope is at most
/// `−m_max`, non-membership when any slope is at least `NOT_IN_F_SLOPE`.
pub fn decay_classify_with(samples: &DecaySamples, settings: ClassifierSettings) -> Result<DecayReport> {
    let slopes = samples
        .gammas
        .iter()
        .enumerate()
        .map(|(row, &gamma)| {
            let (x, y) = samples.usable(row);
            if x.len() < settings.min_modes {
                return Err(Error::InsufficientData {
                    usable: x.len(),
                    required: settings.min_modes,
                });
            }
            let fit = fit_line(&x, &y)?;
            let (ci_low, ci_high) = fit.slope_interval();
            Ok(GammaSlope {
                gamma,
                slope: fit.slope,
                ci_low,
                ci_high,
                usable: x.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = if slopes.iter().any(|s| s.slope >= NOT_IN_F_SLOPE) {
        FVerdict::NotInF
    } else if slopes.iter().all(|s| s.slope <= -settings.m_max) {
        FVerdict::InF
    } else {
        FVerdict::Inconclusive
    };
    Ok(DecayReport {
        slopes,
        m_max: settings.m_max,
        verdict,
    })
}

/// Polynomial growth fit `sup_t |f_j| ≈ B λ_j^M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthReport {
    pub exponent: f64,
    pub ln_constant: f64,
    pub residual_rms: f64,
    /// Chord slopes strictly increase and the last exceeds the first by
    /// more than one: no single power fits.
    pub super_polynomial: bool,
    pub in_fprime: bool,
    pub usable: usize,
}

pub fn fprime_membership(samples: &DecaySamples, min_modes: usize) -> Result<GrowthReport> {
    let row = samples
        .gammas
        .iter()
        .position(|&g| g == 0)
        .ok_or_else(|| Error::param("gamma_list", "growth fit needs γ = 0"))?;
    let (x, y) = samples.usable(row);
    if x.len() < min_modes.max(2) {
        return Err(Error::InsufficientData {
            usable: x.len(),
            required: min_modes.max(2),
        });
    }
    let fit = fit_line(&x, &y)?;
    let chords: Vec<f64> = x
        .windows(2)
        .zip(y.windows(2))
        .filter(|(xs, _)| xs[1] != xs[0])
        .map(|(xs, ys)| (ys[1] - ys[0]) / (xs[1] - xs[0]))
        .collect();
    let super_polynomial = chords.len() >= 2
        && chords.windows(2).all(|w| w[1] > w[0])
        && chords[chords.len() - 1] - chords[0] > 1.0;
    Ok(GrowthReport {
        exponent: fit.slope,
        ln_constant: fit.intercept,
        residual_rms: fit.residual_rms,
        super_polynomial,
        in_fprime: !super_polynomial,
        usable: x.len(),
    })
}
