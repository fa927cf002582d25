//! Small-divisor tables `Θ_j = |1 − e^{−2πiλ_jω}|⁻¹`, `Γ_j = |e^{2πiλ_jω} − 1|⁻¹`
//! and the lower bound `|1 − e^{2πiβ}| ≥ 4 dist(β, ℤ)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::ModelSequence;
use crate::error::{Error, Result};

/// Divisors below this value are reported as infinite entries.
pub const DIVISOR_FLOOR: f64 = 1e-30;

/// `|1 − e^{2πiβ}|` against its lower bound `4|β + l|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpBound {
    pub lower: f64,
    pub actual: f64,
    /// `l = −(nearest integer to β)`, ties to even.
    pub shift: i64,
}

pub fn one_minus_exp_bound(beta: f64) -> ExpBound {
    let nearest = beta.round_ties_even();
    let reduced = beta - nearest;
    ExpBound {
        lower: 4.0 * reduced.abs(),
        actual: 2.0 * (PI * reduced).sin().abs(),
        shift: -(nearest as i64),
    }
}

/// Reciprocal divisors; `None` marks an entry whose divisor fell below
/// [`DIVISOR_FLOOR`].
#[derive(Debug, Clone, PartialEq)]
pub struct SmallDivisorTable {
    pub omega: Complex64,
    pub theta: Vec<Option<f64>>,
    pub gamma: Vec<Option<f64>>,
}

impl SmallDivisorTable {
    /// Largest finite `|Θ_j − 1|` over `j ≥ from` (1-based).
    pub fn max_theta_deviation(&self, from: usize) -> f64 {
        self.theta
            .iter()
            .skip(from.saturating_sub(1))
            .flatten()
            .fold(0.0f64, |m, t| m.max((t - 1.0).abs()))
    }

    pub fn infinite_count(&self) -> usize {
        self.theta.iter().filter(|t| t.is_none()).count()
    }
}

pub fn small_divisors(omega: Complex64, seq: &ModelSequence, j_max: u64) -> Result<SmallDivisorTable> {
    if !(omega.re.is_finite() && omega.im.is_finite()) {
        return Err(Error::param("omega", "must be finite"));
    }
    seq.validate(j_max)?;
    let mut theta = Vec::with_capacity(j_max as usize);
    let mut gamma = Vec::with_capacity(j_max as usize);
    for j in 1..=j_max {
        let lambda = seq.value(j);
        // e^{−2πiλω} has modulus e^{2πλβ}; e^{2πiλω} has the reciprocal one.
        let (_, phase_gap) = super::product_gap(omega.re, lambda);
        let sine = (PI * phase_gap).sin();
        let log_modulus = 2.0 * PI * lambda * omega.im;
        theta.push(reciprocal_divisor(log_modulus, sine));
        gamma.push(reciprocal_divisor(-log_modulus, sine));
    }
    Ok(SmallDivisorTable { omega, theta, gamma })
}

/// `|1 − ρ e^{iθ}|⁻¹` with `ρ = e^{log_modulus}` and `sine = sin(θ/2)`.
fn reciprocal_divisor(log_modulus: f64, sine: f64) -> Option<f64> {
    // |1 − ρe^{iθ}|² = (1 − ρ)² + 4ρ sin²(θ/2); factor out ρ when ρ > 1.
    let r = (-log_modulus.abs()).exp();
    let reduced = ((1.0 - r).powi(2) + 4.0 * r * sine * sine).sqrt();
    if log_modulus > 0.0 {
        // Divisor is reduced / r ≥ reduced; never below the floor unless reduced is.
        if reduced < DIVISOR_FLOOR * r {
            None
        } else {
            Some(r / reduced)
        }
    } else if reduced < DIVISOR_FLOOR {
        None
    } else {
        Some(1.0 / reduced)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear() -> ModelSequence {
        ModelSequence::Power { a: 1.0, rho: 1.0 }
    }

    #[test]
    fn bound_examples() {
        assert_eq!(
            one_minus_exp_bound(0.0),
            ExpBound {
                lower: 0.0,
                actual: 0.0,
                shift: 0
            }
        );
        let half = one_minus_exp_bound(0.5);
        assert_eq!((half.lower, half.shift), (2.0, 0));
        assert!((half.actual - 2.0).abs() < 1e-15);
        let quarter = one_minus_exp_bound(0.25);
        assert_eq!(quarter.lower, 1.0);
        assert!((quarter.actual - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(one_minus_exp_bound(-2.3).shift, 2);
    }

    #[test]
    fn negative_imaginary_omega() {
        let t = small_divisors(Complex64::new(0.0, -1.0), &linear(), 50).unwrap();
        let expected = 1.0 / (1.0 - (-2.0 * PI).exp());
        assert!((t.theta[0].unwrap() - expected).abs() < 1e-15);
        // First-order value 1 + e^{−2π} ≈ 1.0018674; the exact one is 1.0018709.
        assert!((t.theta[0].unwrap() - 1.0018674).abs() < 1e-5);
        // Γ_j = |e^{2πiλω} − 1|⁻¹ with a growing exponential: tends to zero.
        assert!(t.gamma[49].unwrap() < 1e-100);
    }

    #[test]
    fn half_omega_resonances() {
        let t = small_divisors(Complex64::new(0.5, 0.0), &linear(), 20).unwrap();
        for j in 1..=20usize {
            if j % 2 == 1 {
                assert!((t.theta[j - 1].unwrap() - 0.5).abs() < 1e-15);
            } else {
                assert_eq!(t.theta[j - 1], None);
                assert_eq!(t.gamma[j - 1], None);
            }
        }
        assert_eq!(t.infinite_count(), 10);
    }

    #[test]
    fn huge_exponent_does_not_overflow() {
        let t = small_divisors(Complex64::new(0.3, 200.0), &linear(), 3).unwrap();
        assert!(t.theta[2].unwrap() == 0.0 || t.theta[2].unwrap() < 1e-300);
        assert!((t.gamma[2].unwrap() - 1.0).abs() < 1e-15);
    }
}
