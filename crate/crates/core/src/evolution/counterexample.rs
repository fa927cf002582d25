//! Counterexamples built on a failing subsequence `j_1 < j_2 < …` of the
//! Liouville constant with `λ_j = j`.
//!
//! The witness indices reach `10^{120}`, so every mode is a single-frequency
//! track `A e^{−iτt}` with `τ` kept as an integer and `log |A|` kept in floating
//! point; amplitudes that are rational are also kept exactly.

use std::f64::consts::{LN_10, TAU};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::classify::{decay_classify_with, fprime_membership, ClassifierSettings, DecayReport, DecaySamples, GrowthReport};
use super::{CoefficientField, Domain, TimeGrid};
use crate::diophantine::liouville::liouville_partial;
use crate::diophantine::FailingSubsequence;
use crate::error::{Error, Result};

/// Certificate rows are limited so that `(ℓ + 1)·(ℓ + 2)!` fits in `i128`.
pub const MAX_CERTIFICATE_ROWS: u32 = 30;

/// `ln |n|`, `−∞` for zero; exact to double precision for any size.
pub(crate) fn ln_abs(n: &BigInt) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (n.abs() >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

fn ln_ratio(x: &BigRational) -> f64 {
    ln_abs(x.numer()) - ln_abs(x.denom())
}

/// One mode `f_j(t) = A e^{−iτt}` with `A = e^{log_modulus + i·phase}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseTrack {
    pub j: BigInt,
    pub ln_lambda: f64,
    pub tau: BigInt,
    pub ln_modulus: f64,
    pub phase: f64,
    /// Signed real amplitude when it is rational.
    pub exact_amplitude: Option<BigRational>,
}

impl SparseTrack {
    fn real(j: &BigInt, tau: &BigInt, ln_modulus: f64, exact: Option<BigRational>, negative: bool) -> Self {
        Self {
            j: j.clone(),
            ln_lambda: ln_abs(j),
            tau: tau.clone(),
            ln_modulus,
            phase: if negative { std::f64::consts::PI } else { 0.0 },
            exact_amplitude: exact,
        }
    }

    pub fn amplitude(&self) -> Complex64 {
        Complex64::from_polar(self.ln_modulus.exp(), self.phase)
    }

    /// Values at the grid nodes; the phase `τ t_s` is reduced modulo `2π`
    /// exactly through `τ mod T`.
    pub fn sample(&self, grid: TimeGrid) -> Vec<Complex64> {
        let t = grid.points();
        let r = self
            .tau
            .mod_floor(&BigInt::from(t))
            .to_usize()
            .expect("residue below T");
        let a = self.amplitude();
        (0..t)
            .map(|s| a * Complex64::from_polar(1.0, -TAU * ((r * s) % t) as f64 / t as f64))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseField {
    pub tracks: Vec<SparseTrack>,
}

impl SparseField {
    /// Dense frequency field with modes `1..=modes`; tracks must lie in band.
    pub fn materialize(&self, grid: TimeGrid, modes: usize) -> Result<CoefficientField> {
        let mut field = CoefficientField::zeros(grid, modes, Domain::Frequency);
        for track in &self.tracks {
            let j = track
                .j
                .to_usize()
                .filter(|j| (1..=modes).contains(j))
                .ok_or_else(|| Error::Range(format!("mode {} outside 1..={modes}", track.j)))?;
            let index = (-&track.tau)
                .to_i64()
                .and_then(|k| grid.index_of(k))
                .ok_or_else(|| Error::Band {
                    tau: track.tau.to_string(),
                    points: grid.points(),
                })?;
            field.row_mut(j - 1)[index] += track.amplitude();
        }
        Ok(field)
    }

    /// Decay report at `γ = 0` with as few modes as there are tracks.
    pub fn classify(&self, m_max: f64) -> Result<DecayReport> {
        decay_classify_with(
            &DecaySamples::from_sparse(self, &[0])?,
            ClassifierSettings {
                m_max,
                min_modes: self.tracks.len(),
            },
        )
    }

    pub fn growth(&self) -> Result<GrowthReport> {
        fprime_membership(&DecaySamples::from_sparse(self, &[0])?, self.tracks.len())
    }
}

/// `u_{j_k} = e^{−iτ_k t}`, `f_{j_k} = (α λ_{j_k} − τ_k) e^{−iτ_k t}`, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct HypoellipticityCounterexample {
    pub alpha: String,
    pub u: SparseField,
    pub f: SparseField,
    /// `(−τ + αλ_j)·û − f̂` per witness, in exact arithmetic against the
    /// partial sum representing `α`.
    pub residuals: Vec<BigRational>,
    /// `sup_t |f_{j_k}| ≤ j_k^{−k}`, decided exactly.
    pub gap_bounds_hold: Vec<bool>,
}

impl HypoellipticityCounterexample {
    pub fn exact_identity(&self) -> bool {
        self.residuals.iter().all(Zero::is_zero)
    }

    /// Largest `||u_j(t_s)| − 1|` over the grid.
    pub fn unit_modulus_defect(&self, grid: TimeGrid) -> f64 {
        self.u
            .tracks
            .iter()
            .flat_map(|t| t.sample(grid))
            .fold(0.0f64, |m, v| m.max((v.norm() - 1.0).abs()))
    }
}

pub fn counterexample_hypoellipticity(witnesses: &FailingSubsequence) -> Result<HypoellipticityCounterexample> {
    if witnesses.entries.is_empty() {
        return Err(Error::param("witnesses", "must not be empty"));
    }
    let alpha = liouville_partial(witnesses.representation_depth).value().clone();
    let mut u = SparseField::default();
    let mut f = SparseField::default();
    let mut residuals = Vec::new();
    let mut gap_bounds_hold = Vec::new();
    for e in &witnesses.entries {
        let lambda = BigRational::from_integer(e.j.clone());
        let amplitude = &alpha * &lambda - BigRational::from_integer(e.tau.clone());
        let one = BigRational::one();
        // D_t e^{−iτt} = −τ e^{−iτt}.
        let lhs = (BigRational::from_integer(-e.tau.clone()) + &alpha * &lambda) * &one;
        residuals.push(lhs - &amplitude);
        gap_bounds_hold.push(&e.gap_bound * BigRational::from_integer(e.j.pow(e.k)) < one);
        u.tracks.push(SparseTrack::real(&e.j, &e.tau, 0.0, Some(BigRational::one()), false));
        f.tracks.push(SparseTrack::real(
            &e.j,
            &e.tau,
            ln_ratio(&amplitude),
            Some(amplitude.clone()),
            amplitude.is_negative(),
        ));
    }
    Ok(HypoellipticityCounterexample {
        alpha: witnesses.alpha.clone(),
        u,
        f,
        residuals,
        gap_bounds_hold,
    })
}

/// One row `ℓ` of the dual-pairing certificate, with `j_ℓ = 10^{n_ℓ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateRow {
    pub ell: u32,
    pub decimal_exponent: i128,
    /// Row backed by an explicit witness; later rows follow the Liouville
    /// schedule `n_ℓ = (ℓ + 1)!`.
    pub witnessed: bool,
    /// `log |⟨u_{j_ℓ}, ψ⟩| = (ℓ/2) log j_ℓ + ℓ/4`.
    pub ln_pairing: f64,
    /// `log(λ^{−M} |⟨u_{j_ℓ}, ψ⟩|)` for `M = 0..=m_max`.
    pub ln_values: Vec<f64>,
    /// Integer `b` per `M` with `next − this = (b/2)·ln 10 + 1/4`; `b ≥ 0`
    /// certifies an increase of at least `1/4`.
    pub brackets: Vec<Option<i128>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolvabilityCounterexample {
    pub alpha: String,
    pub f: SparseField,
    /// The would-be solution `u_{j_ℓ} = f_{j_ℓ}/(αλ − τ)`.
    pub u: SparseField,
    pub rows: Vec<CertificateRow>,
    pub m_max: u32,
    /// No forcing track sits on a resonant mode, so `f` is admissible.
    pub admissible: bool,
}

impl SolvabilityCounterexample {
    /// Every step `ℓ → ℓ + 1` with `ℓ > 2M` is certified increasing.
    pub fn certified_increasing(&self, m: u32) -> bool {
        m <= self.m_max
            && self
                .rows
                .iter()
                .filter(|r| r.ell > 2 * m)
                .all(|r| r.brackets[m as usize].is_none_or(|b| b >= 0))
    }

    /// Number of certified steps for `M`.
    pub fn certified_steps(&self, m: u32) -> usize {
        self.rows
            .iter()
            .filter(|r| r.ell > 2 * m && r.brackets[m as usize].is_some_and(|b| b >= 0))
            .count()
    }
}

/// Decimal exponent of a power of ten.
fn decimal_exponent(j: &BigInt) -> Option<i128> {
    let s = j.to_string();
    (s.starts_with('1') && s[1..].bytes().all(|b| b == b'0')).then(|| (s.len() - 1) as i128)
}

fn factorial_i128(n: u32) -> i128 {
    (1..=n as i128).product()
}

pub fn counterexample_solvability(
    witnesses: &FailingSubsequence,
    l_max: u32,
    m_max: u32,
) -> Result<SolvabilityCounterexample> {
    let k = witnesses.entries.len() as u32;
    if k == 0 {
        return Err(Error::param("witnesses", "must not be empty"));
    }
    if l_max < k {
        return Err(Error::param("L_max", format!("must be at least the witness count {k}")));
    }
    if l_max > MAX_CERTIFICATE_ROWS {
        return Err(Error::SizeGuard(format!(
            "L_max = {l_max} exceeds {MAX_CERTIFICATE_ROWS} certificate rows"
        )));
    }
    let alpha = liouville_partial(witnesses.representation_depth).value().clone();
    let mut f = SparseField::default();
    let mut u = SparseField::default();
    let mut exponents = Vec::new();
    for (idx, e) in witnesses.entries.iter().enumerate() {
        let ell = idx as u32 + 1;
        let n = decimal_exponent(&e.j)
            .ok_or_else(|| Error::Certification(format!("witness j = {} is not a power of ten", e.j)))?;
        // 0 < |τ − αλ| < j^{−ℓ} e^{−ℓ}: strictly positive once the tail cannot
        // close the gap, and below a rational lower bound for e^{−ℓ}.
        let tail_part = &e.gap_bound - &e.gap;
        let e_lower = BigRational::from_float((-(ell as f64)).exp() * (1.0 - 2f64.powi(-40))).expect("finite");
        let positive = e.gap > tail_part;
        let small = &e.gap_bound * BigRational::from_integer(e.j.pow(ell)) < e_lower;
        if !(positive && small) {
            return Err(Error::Certification(format!(
                "witness ℓ = {ell} (j = 10^{n}) violates 0 < |τ − αλ| < j^(-ℓ) e^(-ℓ)"
            )));
        }
        let signed = &alpha * BigRational::from_integer(e.j.clone()) - BigRational::from_integer(e.tau.clone());
        let ln_growth = 0.5 * ell as f64 * (n as f64 * LN_10 + 1.0);
        f.tracks.push(SparseTrack::real(
            &e.j,
            &e.tau,
            ln_growth + ln_ratio(&e.gap),
            None,
            signed.is_negative(),
        ));
        u.tracks.push(SparseTrack::real(&e.j, &e.tau, ln_growth, None, false));
        exponents.push(n);
    }
    // Liouville schedule beyond the witnesses: j_ℓ = 10^{(ℓ+1)!} satisfies the
    // gap inequality since 2·10^{−(ℓ+1)!} < e^{−ℓ} ⇔ (ℓ+1)! > log10 2 + ℓ log10 e.
    for ell in k + 1..=l_max {
        let n = factorial_i128(ell + 1);
        if 1000 * n <= 302 + 435 * ell as i128 {
            return Err(Error::Certification(format!("schedule row ℓ = {ell} fails the gap inequality")));
        }
        exponents.push(n);
    }
    // Symbolic pairing: ψ carries e^{−ℓ/4} at frequency τ_ℓ, and distinct
    // witnesses have distinct τ.
    let taus: Vec<&BigInt> = witnesses.entries.iter().map(|e| &e.tau).collect();
    let distinct = taus.iter().enumerate().all(|(i, a)| taus[..i].iter().all(|b| b != a));
    if !distinct {
        return Err(Error::Certification("witness frequencies are not distinct".into()));
    }
    let rows = (0..l_max as usize)
        .map(|i| {
            let ell = i as u32 + 1;
            let n = exponents[i];
            let ln_j = n as f64 * LN_10;
            let ln_pairing = 0.5 * ell as f64 * ln_j + 0.25 * ell as f64;
            let ln_values = (0..=m_max).map(|m| ln_pairing - m as f64 * ln_j).collect();
            let brackets = (0..=m_max as i128)
                .map(|m| {
                    exponents.get(i + 1).map(|&next| {
                        let l = ell as i128;
                        (l + 1) * next - l * n - 2 * m * (next - n)
                    })
                })
                .collect();
            CertificateRow {
                ell,
                decimal_exponent: n,
                witnessed: ell <= k,
                ln_pairing,
                ln_values,
                brackets,
            }
        })
        .collect();
    Ok(SolvabilityCounterexample {
        alpha: witnesses.alpha.clone(),
        f,
        u,
        rows,
        m_max,
        admissible: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::{construct_failing_subsequence, Alpha, SubsequenceOutcome};
    use crate::evolution::FVerdict;

    fn witnesses(k: u32) -> FailingSubsequence {
        match construct_failing_subsequence(&Alpha::liouville(3).unwrap(), k).unwrap() {
            SubsequenceOutcome::Subsequence(s) => s,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ln_of_huge_integers() {
        let big = BigInt::from(10).pow(720);
        assert!((ln_abs(&big) - 720.0 * LN_10).abs() < 1e-9);
        assert!((ln_abs(&BigInt::from(-8)) - 8f64.ln()).abs() < 1e-15);
        assert_eq!(ln_abs(&BigInt::zero()), f64::NEG_INFINITY);
    }

    #[test]
    fn sparse_sampling_matches_direct_evaluation() {
        let g = TimeGrid::new(16).unwrap();
        let track = SparseTrack::real(&BigInt::from(3), &BigInt::from(-37), 0.5f64.ln(), None, true);
        for (s, v) in track.sample(g).iter().enumerate() {
            let want = -0.5 * Complex64::from_polar(1.0, 37.0 * g.node(s));
            assert!((v - want).norm() < 1e-12);
        }
        let field = SparseField { tracks: vec![track] };
        assert!(matches!(field.materialize(g, 5), Err(Error::Band { .. })));
        let inband = SparseField {
            tracks: vec![SparseTrack::real(&BigInt::from(2), &BigInt::from(-3), 0.0, None, false)],
        };
        let m = inband.materialize(g, 2).unwrap();
        assert_eq!(m.row(1)[g.index_of(3).unwrap()], Complex64::new(1.0, 0.0));
        assert!(matches!(inband.materialize(g, 1), Err(Error::Range(_))));
    }

    #[test]
    fn hypoellipticity_construction() {
        let c = counterexample_hypoellipticity(&witnesses(3)).unwrap();
        assert!(c.exact_identity());
        assert!(c.gap_bounds_hold.iter().all(|&b| b));
        assert!(c.unit_modulus_defect(TimeGrid::new(64).unwrap()) < 1e-14);
        assert_eq!(c.u.classify(3.0).unwrap().verdict, FVerdict::NotInF);
        let f = c.f.classify(3.0).unwrap();
        assert!(f.slopes[0].slope <= -3.0, "slope {}", f.slopes[0].slope);
        // The j = 10^6 witness has gap exactly 10^{-18}.
        assert!((c.f.tracks[1].ln_modulus + 18.0 * LN_10).abs() < 1e-9);
    }

    #[test]
    fn solvability_certificate() {
        let c = counterexample_solvability(&witnesses(4), 14, 5).unwrap();
        assert_eq!(c.rows.len(), 14);
        assert_eq!(
            c.rows.iter().take(5).map(|r| r.decimal_exponent).collect::<Vec<_>>(),
            vec![0, 6, 24, 120, 720]
        );
        for m in 0..=5 {
            assert!(c.certified_increasing(m));
            assert!(c.certified_steps(m) > 0);
            let tail: Vec<f64> = c.rows.iter().filter(|r| r.ell > 2 * m).map(|r| r.ln_values[m as usize]).collect();
            assert!(tail.windows(2).all(|w| w[1] > w[0]));
        }
        assert!(c.u.growth().unwrap().super_polynomial);
        assert!(c.admissible);
    }

    #[test]
    fn solvability_rejects_bad_limits() {
        assert!(matches!(counterexample_solvability(&witnesses(2), 1, 2), Err(Error::Parameter { .. })));
        assert!(matches!(counterexample_solvability(&witnesses(2), 31, 2), Err(Error::SizeGuard(_))));
        let mut w = witnesses(2);
        w.entries[1].gap_bound = BigRational::one();
        assert!(matches!(counterexample_solvability(&w, 4, 2), Err(Error::Certification(_))));
    }
}
