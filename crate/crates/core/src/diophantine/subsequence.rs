//! Diagonal construction of indices `j_1 < j_2 < …` with
//! `|τ_k − αj_k| < C_k j_k^{−k}` for `λ_j = j`.
//!
//! The constants follow `C_1 = 1/e` and
//! `C_{k+1} = e^{−1} min{C_k, min_{i ≤ j_k} dist(αi, ℤ) i^{k+1}}`, which rules out
//! every `i ≤ j_k` at step `k + 1`. The smallest admissible `j` is then a
//! continued-fraction denominator of `α` (every admissible gap is below
//! `1/(2j)`), and the inner minimum is attained at one, so the search only
//! visits convergents.
//!
//! The Liouville constant is represented by its partial sum at depth `K + 2`;
//! the certified gap adds `j` times the tail bound to the exact gap of the
//! partial sum, and the strict inequality is decided in exact arithmetic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::liouville::{liouville_partial, LiouvilleNumber};
use super::{Alpha, GOLDEN_RATIO};
use crate::error::{Error, Result};

/// Longest subsequence built in exact arithmetic (`j_4 = 10^{120}`).
pub const MAX_SUBSEQUENCE_LENGTH: u32 = 4;
/// Fibonacci denominators beyond this are not examined for the golden ratio.
const GOLDEN_SEARCH_LIMIT: f64 = 1e15;

#[derive(Debug, Clone, PartialEq)]
pub struct SubsequenceEntry {
    pub k: u32,
    pub j: BigInt,
    pub tau: BigInt,
    /// `C_k`, exactly representable.
    pub constant: f64,
    /// `|τ_k − α_D j_k|` for the depth-`D` partial sum `α_D`.
    pub gap: BigRational,
    /// `gap + j_k · tail_D`, an upper bound for the gap of the full constant.
    pub gap_bound: BigRational,
}

impl SubsequenceEntry {
    /// Exact check of `gap_bound · j^k < C_k`.
    pub fn certified(&self) -> bool {
        let lhs = &self.gap_bound * BigRational::from_integer(self.j.pow(self.k));
        lhs < exact_f64(self.constant)
    }

    /// `log10` of the certified gap bound.
    pub fn log10_gap_bound(&self) -> f64 {
        log10_ratio(&self.gap_bound)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailingSubsequence {
    pub alpha: String,
    /// Depth of the partial sum used as the exact representation.
    pub representation_depth: u32,
    pub entries: Vec<SubsequenceEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SubsequenceOutcome {
    Subsequence(FailingSubsequence),
    /// Rational `α = p/q`: every multiple of `q` is resonant.
    ResonanceDominated { period: BigInt },
}

pub fn construct_failing_subsequence(alpha: &Alpha, length: u32) -> Result<SubsequenceOutcome> {
    if length == 0 {
        return Err(Error::param("K", "must be at least 1"));
    }
    if length > MAX_SUBSEQUENCE_LENGTH {
        return Err(Error::SizeGuard(format!(
            "subsequence length {length} exceeds {MAX_SUBSEQUENCE_LENGTH} (exact denominators grow like 10^((K+2)!))"
        )));
    }
    match alpha {
        Alpha::Rational(r) => Ok(SubsequenceOutcome::ResonanceDominated {
            period: r.denom().clone(),
        }),
        Alpha::Liouville(_) => {
            let depth = length + 2;
            let repr = liouville_partial(depth);
            let entries = build(&repr, length)?;
            Ok(SubsequenceOutcome::Subsequence(FailingSubsequence {
                alpha: alpha.describe(),
                representation_depth: depth,
                entries,
            }))
        }
        Alpha::Golden => Err(golden_failure()),
        Alpha::Real(x) => Err(Error::Certification(format!(
            "α = {x:e} has no exact representation; the construction needs exact arithmetic"
        ))),
    }
}

/// Continued-fraction convergents `(p_n, q_n)` of a rational number.
pub(crate) fn convergents(x: &BigRational) -> Vec<(BigInt, BigInt)> {
    let (mut num, mut den) = (x.numer().clone(), x.denom().clone());
    let (mut p_prev, mut p) = (BigInt::zero(), BigInt::one());
    let (mut q_prev, mut q) = (BigInt::one(), BigInt::zero());
    let mut out = Vec::new();
    while !den.is_zero() {
        let (a, r) = num.div_mod_floor(&den);
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        out.push((p_next.clone(), q_next.clone()));
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        num = std::mem::replace(&mut den, r);
    }
    out
}

fn build(repr: &LiouvilleNumber, length: u32) -> Result<Vec<SubsequenceEntry>> {
    let alpha = repr.value();
    let tail = repr.tail_bound();
    let conv: Vec<(BigInt, BigInt, BigRational)> = convergents(alpha)
        .into_iter()
        .map(|(p, q)| {
            let gap = (alpha * BigRational::from_integer(q.clone()) - BigRational::from_integer(p.clone())).abs();
            (p, q, gap)
        })
        .collect();
    let mut constant = (-1.0f64).exp();
    let mut previous = BigInt::zero();
    let mut entries: Vec<SubsequenceEntry> = Vec::new();
    for k in 1..=length {
        if let Some(last) = entries.last() {
            let inner = conv
                .iter()
                .filter(|(_, q, _)| *q <= last.j)
                .map(|(_, q, gap)| (gap * BigRational::from_integer(q.pow(k))).to_f64().unwrap_or(f64::INFINITY))
                .fold(f64::INFINITY, f64::min);
            constant = constant.min(inner) / std::f64::consts::E;
        }
        let bound = exact_f64(constant);
        let found = conv.iter().find(|(_, q, gap)| {
            *q > previous && {
                let upper = gap + tail * BigRational::from_integer(q.clone());
                upper * BigRational::from_integer(q.pow(k)) < bound
            }
        });
        let Some((p, q, gap)) = found else {
            return Err(Error::Certification(format!(
                "no convergent of the depth-{} partial sum satisfies the step-{k} inequality",
                repr.depth()
            )));
        };
        let gap_bound = gap + tail * BigRational::from_integer(q.clone());
        previous = q.clone();
        entries.push(SubsequenceEntry {
            k,
            j: q.clone(),
            tau: p.clone(),
            constant,
            gap: gap.clone(),
            gap_bound,
        });
    }
    Ok(entries)
}

/// `q‖qφ‖` over Fibonacci denominators stays near `1/√5 > 1/e`, so the
/// first step already fails.
fn golden_failure() -> Error {
    let (mut q, mut n) = (1.0f64, 1i32);
    let (mut a, mut b) = (1.0f64, 1.0f64);
    let mut best = f64::INFINITY;
    while q <= GOLDEN_SEARCH_LIMIT {
        // |F_n φ − F_{n+1}| = φ^{−n}.
        best = best.min(q * GOLDEN_RATIO.powi(-n));
        (a, b) = (b, a + b);
        q = a;
        n += 1;
    }
    Error::Certification(format!(
        "golden ratio: min q·dist(qα, ℤ) over convergents q ≤ {GOLDEN_SEARCH_LIMIT:e} is {best:.6}, never below C_1 = 1/e"
    ))
}

fn exact_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite constant")
}

fn log10_ratio(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let digits = |n: &BigInt| {
        let s = n.abs().to_string();
        let lead: f64 = s[..s.len().min(17)].parse().unwrap_or(1.0);
        lead.log10() + (s.len() - s.len().min(17)) as f64
    };
    digits(x.numer()) - digits(x.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn liouville_entries(k: u32) -> Vec<SubsequenceEntry> {
        match construct_failing_subsequence(&Alpha::liouville(3).unwrap(), k).unwrap() {
            SubsequenceOutcome::Subsequence(s) => s.entries,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn convergents_of_small_rational() {
        // 43/30 = [1; 2, 3, 4]
        let x = BigRational::new(43.into(), 30.into());
        let c: Vec<(i64, i64)> = convergents(&x)
            .into_iter()
            .map(|(p, q)| (p.try_into().unwrap(), q.try_into().unwrap()))
            .collect();
        assert_eq!(c, vec![(1, 1), (3, 2), (10, 7), (43, 30)]);
    }

    #[test]
    fn liouville_schedule() {
        let entries = liouville_entries(4);
        let js: Vec<BigInt> = entries.iter().map(|e| e.j.clone()).collect();
        let ten = BigInt::from(10);
        assert_eq!(js, vec![BigInt::one(), ten.pow(6), ten.pow(24), ten.pow(120)]);
        assert_eq!(entries[0].tau, BigInt::zero());
        assert_eq!(entries[1].tau, BigInt::from(110_001));
        assert!(entries.iter().all(SubsequenceEntry::certified));
        assert!(entries.windows(2).all(|w| w[1].constant < w[0].constant && w[1].j > w[0].j));
        assert!(entries.iter().all(|e| e.constant > 0.0 && e.constant < 1.0));
        assert!((entries[0].constant - (-1.0f64).exp()).abs() < 1e-16);
        assert!(entries[1].log10_gap_bound() < -17.9);
    }

    #[test]
    fn rational_and_golden() {
        let r = construct_failing_subsequence(&Alpha::rational(3, 7).unwrap(), 3).unwrap();
        assert_eq!(r, SubsequenceOutcome::ResonanceDominated { period: 7.into() });
        assert!(matches!(
            construct_failing_subsequence(&Alpha::Golden, 2),
            Err(Error::Certification(_))
        ));
        assert!(matches!(
            construct_failing_subsequence(&Alpha::liouville(3).unwrap(), 5),
            Err(Error::SizeGuard(_))
        ));
    }

    #[test]
    fn log10_of_ratio() {
        let x = BigRational::new(BigInt::from(3), BigInt::from(10).pow(40));
        assert!((log10_ratio(&x) - (3f64.log10() - 40.0)).abs() < 1e-12);
    }
}
