//! Diophantine lower bounds `|τ − αλ_j| ≥ C j^{−ε}` on finite ranges.
//!
//! Two scanning paths exist. The exact path runs whenever `α` is an exact
//! rational and `λ_j = a·j^ρ` has integer `a` and `ρ`; gaps are then exact
//! rationals and resonance means a zero gap. Otherwise gaps are evaluated in
//! double precision through an error-free product, and gaps at or below
//! [`RESONANCE_TOLERANCE`] count as resonances.

pub(crate) mod liouville;
mod small_divisors;
mod subsequence;

pub use liouville::{liouville_number, LiouvilleNumber, MAX_PUBLIC_DEPTH};
pub use small_divisors::{one_minus_exp_bound, small_divisors, ExpBound, SmallDivisorTable, DIVISOR_FLOOR};
pub use subsequence::{
    construct_failing_subsequence, FailingSubsequence, SubsequenceEntry, SubsequenceOutcome, MAX_SUBSEQUENCE_LENGTH,
};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::spectral::EigenDecomposition;

/// Float-path gaps at or below this value are treated as resonances.
pub const RESONANCE_TOLERANCE: f64 = 1e-12;
/// A constant `C(ε)` below this value is reported as a failure.
pub const FAILURE_THRESHOLD: f64 = 1e-12;
/// First index of the asymptotic constants; smaller indices only shift `C`.
pub const ASYMPTOTIC_START: u64 = 10;
/// Smallest admissible scan length.
pub const MIN_SCAN: u64 = 10;
/// Resonant pairs listed explicitly in a report; the count is always exact.
pub const RESONANCE_LIST_LIMIT: usize = 1000;

/// The golden ratio `(1 + √5)/2` rounded to double precision.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

/// The real parameter `α` multiplying the eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub enum Alpha {
    /// Exact rational `p/q`.
    Rational(BigRational),
    /// `(1 + √5)/2`; scanned in floating point, convergents known exactly.
    Golden,
    /// The Liouville constant, represented exactly by a partial sum.
    Liouville(LiouvilleNumber),
    /// Any other real, floating path only.
    Real(f64),
}

impl Alpha {
    pub fn rational(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::param("alpha.q", "denominator must be nonzero"));
        }
        Ok(Alpha::Rational(BigRational::new(p.into(), q.into())))
    }

    /// Liouville constant represented at `schedule_depth + 1`, so that every
    /// `j ≤ 10^{schedule_depth!}` is non-resonant and the witness at
    /// `j = 10^{schedule_depth!}` is visible.
    pub fn liouville(schedule_depth: u32) -> Result<Self> {
        if !(1..MAX_PUBLIC_DEPTH).contains(&schedule_depth) {
            return Err(Error::SizeGuard(format!(
                "Liouville schedule depth {schedule_depth} must lie in [1, {}]",
                MAX_PUBLIC_DEPTH - 1
            )));
        }
        Ok(Alpha::Liouville(liouville_number(schedule_depth + 1)?))
    }

    pub fn value(&self) -> f64 {
        match self {
            Alpha::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Alpha::Golden => GOLDEN_RATIO,
            Alpha::Liouville(l) => l.value().to_f64().unwrap_or(f64::NAN),
            Alpha::Real(x) => *x,
        }
    }

    /// Exact value used by the exact path, if any.
    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Alpha::Rational(r) => Some(r),
            Alpha::Liouville(l) => Some(l.value()),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Alpha::Rational(r) => format!("rational {r}"),
            Alpha::Golden => "golden ratio".to_string(),
            Alpha::Liouville(l) => format!("Liouville constant (partial sum of depth {})", l.depth()),
            Alpha::Real(x) => format!("real {x:e}"),
        }
    }
}

/// Eigenvalue sequences used in the scans.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSequence {
    /// `λ_j = a·j^ρ`.
    Power { a: f64, rho: f64 },
    /// `λ_j = a·(j / log(j + 1))^ρ`.
    LogPower { a: f64, rho: f64 },
    /// Measured eigenvalues `λ_1, λ_2, …`.
    Measured(Vec<f64>),
}

impl ModelSequence {
    pub fn measured(eig: &EigenDecomposition) -> Self {
        ModelSequence::Measured(eig.trusted_eigenvalues().to_vec())
    }

    /// `λ_j` for 1-based `j`.
    pub fn value(&self, j: u64) -> f64 {
        let x = j as f64;
        match self {
            ModelSequence::Power { a, rho } => a * x.powf(*rho),
            ModelSequence::LogPower { a, rho } => a * (x / (x + 1.0).ln()).powf(*rho),
            ModelSequence::Measured(v) => v[(j - 1) as usize],
        }
    }

    pub fn is_measured(&self) -> bool {
        matches!(self, ModelSequence::Measured(_))
    }

    /// `(a, ρ)` when every term is an exact integer.
    fn integer_power(&self) -> Option<(BigInt, u32)> {
        match self {
            ModelSequence::Power { a, rho }
                if *a > 0.0 && a.fract() == 0.0 && *rho >= 0.0 && rho.fract() == 0.0 && *rho <= 16.0 =>
            {
                Some((BigInt::from_f64(*a)?, *rho as u32))
            }
            _ => None,
        }
    }

    fn validate(&self, j_max: u64) -> Result<()> {
        match self {
            ModelSequence::Power { a, rho } | ModelSequence::LogPower { a, rho } => {
                if !(a.is_finite() && *a > 0.0) {
                    return Err(Error::param("sequence.a", format!("must be positive, got {a}")));
                }
                if !rho.is_finite() {
                    return Err(Error::param("sequence.rho", "must be finite"));
                }
                Ok(())
            }
            ModelSequence::Measured(v) => {
                if (v.len() as u64) < j_max {
                    return Err(Error::Range(format!(
                        "scan up to j = {j_max} needs that many measured eigenvalues, have {}",
                        v.len()
                    )));
                }
                if v.iter().any(|&l| !(l > 0.0)) {
                    return Err(Error::param("sequence", "measured eigenvalues must be positive"));
                }
                Ok(())
            }
        }
    }
}

/// Nearest integer with ties resolved to the even neighbour, and the
/// distance to it. `|x|` must be below `2^63`.
pub fn nearest_integer_gap(x: f64) -> (i64, f64) {
    let tau = x.round_ties_even();
    (tau as i64, (x - tau).abs())
}

/// Exact nearest integer (ties to even) and distance.
pub fn nearest_integer_gap_exact(x: &BigRational) -> (BigInt, BigRational) {
    let floor = x.floor().to_integer();
    let frac = x - BigRational::from_integer(floor.clone());
    let twice = &frac + &frac;
    let one = BigRational::one();
    let tau = match twice.cmp(&one) {
        std::cmp::Ordering::Less => floor,
        std::cmp::Ordering::Greater => floor + 1,
        std::cmp::Ordering::Equal if floor.is_even() => floor,
        std::cmp::Ordering::Equal => floor + 1,
    };
    let gap = (x - BigRational::from_integer(tau.clone())).abs();
    (tau, gap)
}

/// `(τ, |αλ − τ|)` with the product evaluated exactly to first order.
fn product_gap(alpha: f64, lambda: f64) -> (f64, f64) {
    let p = alpha * lambda;
    let err = alpha.mul_add(lambda, -p);
    let tau = p.round_ties_even();
    let signed = (p - tau) + err;
    (tau, signed.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// Resonances dominate the verdict.
    A,
    /// Resonant integers are excluded: the gap at a resonance is the
    /// distance to the nearest other integer.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    HoldsOnRange,
    FailsWithWitnesses,
    ResonanceDominated,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::HoldsOnRange => "holds-on-range",
            Verdict::FailsWithWitnesses => "fails-with-witnesses",
            Verdict::ResonanceDominated => "resonance-dominated",
        }
    }
}

/// A pair `(j, τ)` with its gap `|τ − αλ_j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub j: u64,
    pub tau: BigInt,
    pub gap: f64,
    /// Exact gap on the exact path.
    pub exact_gap: Option<BigRational>,
}

/// Minimum of `gap_j · j^ε` over the scan, with every record-setting pair.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSummary {
    pub epsilon: f64,
    /// Infimum over `1 ≤ j ≤ j_max`.
    pub constant: f64,
    /// Infimum over `ASYMPTOTIC_START ≤ j ≤ j_max`.
    pub asymptotic_constant: f64,
    /// Successive minima: each entry lowered the running constant.
    pub trail: Vec<(Witness, f64)>,
}

impl EpsilonSummary {
    pub fn worst(&self) -> Option<&Witness> {
        self.trail.last().map(|(w, _)| w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiophantineReport {
    pub alpha: String,
    pub condition: Condition,
    pub j_max: u64,
    /// Whether gaps were computed in exact rational arithmetic.
    pub exact: bool,
    /// Measured sequences only give indicative verdicts.
    pub indicative: bool,
    pub epsilons: Vec<EpsilonSummary>,
    /// First resonant pairs `(j, τ)` with `τ = αλ_j`.
    pub resonances: Vec<(u64, BigInt)>,
    pub resonance_count: u64,
    pub verdict: Verdict,
}

impl DiophantineReport {
    pub fn constant(&self, epsilon: f64) -> Option<f64> {
        self.epsilons.iter().find(|e| e.epsilon == epsilon).map(|e| e.constant)
    }
}

pub fn check_condition_a(alpha: &Alpha, seq: &ModelSequence, j_max: u64, epsilons: &[f64]) -> Result<DiophantineReport> {
    scan(alpha, seq, j_max, epsilons, Condition::A)
}

pub fn check_condition_b(alpha: &Alpha, seq: &ModelSequence, j_max: u64, epsilons: &[f64]) -> Result<DiophantineReport> {
    scan(alpha, seq, j_max, epsilons, Condition::B)
}

/// One scanned index.
struct Sample {
    gap: f64,
    resonant: bool,
}

trait GapSource {
    fn sample(&mut self, j: u64) -> Sample;
    /// Nearest integer `τ` of the last sample and its exact gap.
    fn nearest(&self) -> (BigInt, Option<BigRational>);
}

struct FloatSource<'a> {
    alpha: f64,
    seq: &'a ModelSequence,
    tau: f64,
}

impl GapSource for FloatSource<'_> {
    fn sample(&mut self, j: u64) -> Sample {
        let (tau, gap) = product_gap(self.alpha, self.seq.value(j));
        self.tau = tau;
        Sample {
            gap,
            resonant: gap <= RESONANCE_TOLERANCE,
        }
    }

    fn nearest(&self) -> (BigInt, Option<BigRational>) {
        (BigInt::from_f64(self.tau).unwrap_or_default(), None)
    }
}

/// `αλ_j = (λ_j p)/q` tracked as `floor + rem/q`.
struct ExactSource {
    p: BigInt,
    q: BigInt,
    a: BigInt,
    rho: u32,
    /// Increment `a·p = step_quot·q + step_rem` for the linear case.
    step_quot: BigInt,
    step_rem: BigInt,
    floor: BigInt,
    rem: BigInt,
    q_f64: f64,
}

impl ExactSource {
    fn new(alpha: &BigRational, a: BigInt, rho: u32) -> Self {
        let p = alpha.numer().clone();
        let q = alpha.denom().clone();
        let (step_quot, step_rem) = (&a * &p).div_mod_floor(&q);
        let q_f64 = q.to_f64().unwrap_or(f64::INFINITY);
        Self {
            p,
            q,
            a,
            rho,
            step_quot,
            step_rem,
            floor: BigInt::zero(),
            rem: BigInt::zero(),
            q_f64,
        }
    }

    fn ratio(&self, n: &BigInt) -> f64 {
        if self.q_f64.is_finite() {
            n.to_f64().unwrap_or(f64::INFINITY) / self.q_f64
        } else {
            BigRational::new(n.clone(), self.q.clone()).to_f64().unwrap_or(0.0)
        }
    }
}

impl GapSource for ExactSource {
    fn sample(&mut self, j: u64) -> Sample {
        if self.rho == 1 {
            // Successive indices differ by a·p in the numerator.
            self.floor += &self.step_quot;
            self.rem += &self.step_rem;
            if self.rem >= self.q {
                self.rem -= &self.q;
                self.floor += 1;
            }
        } else {
            let lambda = &self.a * BigInt::from(j).pow(self.rho);
            let (f, r) = (lambda * &self.p).div_mod_floor(&self.q);
            self.floor = f;
            self.rem = r;
        }
        let other = &self.q - &self.rem;
        let gap = if self.rem <= other {
            self.ratio(&self.rem)
        } else {
            self.ratio(&other)
        };
        Sample {
            gap,
            resonant: self.rem.is_zero(),
        }
    }

    fn nearest(&self) -> (BigInt, Option<BigRational>) {
        let twice = &self.rem + &self.rem;
        let up = match twice.cmp(&self.q) {
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Equal => self.floor.is_odd(),
        };
        let (tau, num) = if up {
            (&self.floor + 1, &self.q - &self.rem)
        } else {
            (self.floor.clone(), self.rem.clone())
        };
        (tau, Some(BigRational::new(num, self.q.clone())))
    }
}

fn scan(alpha: &Alpha, seq: &ModelSequence, j_max: u64, epsilons: &[f64], condition: Condition) -> Result<DiophantineReport> {
    if j_max < MIN_SCAN {
        return Err(Error::param("j_max", format!("must be at least {MIN_SCAN}, got {j_max}")));
    }
    if epsilons.iter().any(|e| !e.is_finite()) {
        return Err(Error::param("epsilons", "must be finite"));
    }
    seq.validate(j_max)?;
    let exact_inputs = alpha.exact().zip(seq.integer_power());
    let exact = exact_inputs.is_some();
    let mut source: Box<dyn GapSource + '_> = match exact_inputs {
        Some((value, (a, rho))) => Box::new(ExactSource::new(value, a, rho)),
        None => {
            let value = alpha.value();
            if !value.is_finite() {
                return Err(Error::param("alpha", "value is not finite"));
            }
            Box::new(FloatSource {
                alpha: value,
                seq,
                tau: 0.0,
            })
        }
    };
    let mut summaries: Vec<EpsilonSummary> = epsilons
        .iter()
        .map(|&epsilon| EpsilonSummary {
            epsilon,
            constant: f64::INFINITY,
            asymptotic_constant: f64::INFINITY,
            trail: Vec::new(),
        })
        .collect();
    let mut resonances = Vec::new();
    let mut resonance_count = 0u64;
    for j in 1..=j_max {
        let s = source.sample(j);
        let gap = if s.resonant {
            resonance_count += 1;
            if resonances.len() < RESONANCE_LIST_LIMIT {
                resonances.push((j, source.nearest().0));
            }
            match condition {
                Condition::A => s.gap,
                Condition::B => 1.0 - s.gap,
            }
        } else {
            s.gap
        };
        let ln_j = (j as f64).ln();
        for summary in summaries.iter_mut() {
            let value = gap * (summary.epsilon * ln_j).exp();
            if j >= ASYMPTOTIC_START && value < summary.asymptotic_constant {
                summary.asymptotic_constant = value;
            }
            if value < summary.constant {
                summary.constant = value;
                let witness = if s.resonant && condition == Condition::B {
                    resonant_neighbour(j, source.as_ref(), gap)
                } else {
                    let (tau, exact_gap) = source.nearest();
                    Witness { j, tau, gap, exact_gap }
                };
                summary.trail.push((witness, value));
            }
        }
    }
    let failing = summaries.iter().any(|s| s.constant < FAILURE_THRESHOLD);
    let verdict = if condition == Condition::A && resonance_count > 0 {
        Verdict::ResonanceDominated
    } else if failing {
        Verdict::FailsWithWitnesses
    } else {
        Verdict::HoldsOnRange
    };
    Ok(DiophantineReport {
        alpha: alpha.describe(),
        condition,
        j_max,
        exact,
        indicative: seq.is_measured(),
        epsilons: summaries,
        resonances,
        resonance_count,
        verdict,
    })
}

/// Nearest integer other than the resonant one.
fn resonant_neighbour(j: u64, source: &dyn GapSource, gap: f64) -> Witness {
    let (tau, exact) = source.nearest();
    // The excluded integer sits within the tolerance; step one unit away.
    let tau = tau + 1;
    let exact_gap = exact.map(|g| BigRational::one() - g);
    Witness { j, tau, gap, exact_gap }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear() -> ModelSequence {
        ModelSequence::Power { a: 1.0, rho: 1.0 }
    }

    #[test]
    fn nearest_integer_examples() {
        assert_eq!(nearest_integer_gap(0.3), (0, 0.3));
        assert_eq!(nearest_integer_gap(2.5), (2, 0.5));
        assert_eq!(nearest_integer_gap(3.5), (4, 0.5));
        assert_eq!(nearest_integer_gap(-0.75), (-1, 0.25));
        let x = BigRational::new(11.into(), 100.into());
        assert_eq!(nearest_integer_gap_exact(&x), (BigInt::zero(), x.clone()));
        let half = BigRational::new(5.into(), 2.into());
        assert_eq!(nearest_integer_gap_exact(&half).0, BigInt::from(2));
        let neg = BigRational::new((-7).into(), 2.into());
        assert_eq!(nearest_integer_gap_exact(&neg).0, BigInt::from(-4));
    }

    #[test]
    fn integer_alpha() {
        let alpha = Alpha::rational(1, 1).unwrap();
        let a = check_condition_a(&alpha, &linear(), 100, &[0.0, 1.0]).unwrap();
        assert_eq!(a.verdict, Verdict::ResonanceDominated);
        assert_eq!(a.resonance_count, 100);
        assert_eq!(a.constant(0.0), Some(0.0));
        let b = check_condition_b(&alpha, &linear(), 100, &[0.0]).unwrap();
        assert_eq!(b.verdict, Verdict::HoldsOnRange);
        assert_eq!(b.constant(0.0), Some(1.0));
    }

    #[test]
    fn half_alpha() {
        let alpha = Alpha::rational(1, 2).unwrap();
        let a = check_condition_a(&alpha, &linear(), 101, &[0.0]).unwrap();
        assert_eq!(a.verdict, Verdict::ResonanceDominated);
        assert_eq!(a.resonance_count, 50);
        assert!(a.resonances.iter().all(|(j, tau)| j % 2 == 0 && *tau == BigInt::from(j / 2)));
        let b = check_condition_b(&alpha, &linear(), 101, &[0.0]).unwrap();
        assert_eq!(b.constant(0.0), Some(0.5));
        assert_eq!(b.verdict, Verdict::HoldsOnRange);
    }

    #[test]
    fn resonance_count_for_rationals() {
        for (p, q) in [(1, 3), (2, 7), (5, 4), (3, 10)] {
            let alpha = Alpha::rational(p, q).unwrap();
            let r = check_condition_a(&alpha, &linear(), 1000, &[1.0]).unwrap();
            assert_eq!(r.resonance_count, 1000 / q as u64);
        }
    }

    #[test]
    fn golden_ratio_constants() {
        let r = check_condition_a(&Alpha::Golden, &linear(), 100_000, &[1.0]).unwrap();
        assert!(!r.exact);
        assert_eq!(r.verdict, Verdict::HoldsOnRange);
        let e = &r.epsilons[0];
        // j = 1 dominates the full range: ‖φ‖ = 2 − φ.
        assert!((e.constant - (2.0 - GOLDEN_RATIO)).abs() < 1e-15);
        assert!(e.asymptotic_constant >= 0.44 && e.asymptotic_constant < 1.0 / 5f64.sqrt());
    }

    #[test]
    fn liouville_witness() {
        let alpha = Alpha::liouville(3).unwrap();
        let r = check_condition_b(&alpha, &linear(), 1_000_000, &[0.0]).unwrap();
        assert!(r.exact);
        assert_eq!(r.verdict, Verdict::FailsWithWitnesses);
        let w = r.epsilons[0].worst().unwrap();
        assert_eq!(w.j, 1_000_000);
        assert_eq!(w.tau, BigInt::from(110_001));
        let expected = BigRational::new(BigInt::one(), BigInt::from(10).pow(18));
        assert_eq!(w.exact_gap.as_ref().unwrap(), &expected);
    }

    #[test]
    fn exact_and_float_paths_agree_on_dyadic_alpha() {
        for (p, q) in [(3i64, 8i64), (5, 1024), (-7, 16)] {
            let exact = check_condition_b(&Alpha::rational(p, q).unwrap(), &linear(), 500, &[0.5]).unwrap();
            let float = check_condition_b(&Alpha::Real(p as f64 / q as f64), &linear(), 500, &[0.5]).unwrap();
            assert!(exact.exact && !float.exact);
            assert_eq!(exact.constant(0.5), float.constant(0.5));
            assert_eq!(exact.resonance_count, float.resonance_count);
        }
    }

    #[test]
    fn squared_sequence_exact_path() {
        let seq = ModelSequence::Power { a: 2.0, rho: 2.0 };
        let r = check_condition_a(&Alpha::rational(1, 3).unwrap(), &seq, 30, &[0.0]).unwrap();
        // 2j²/3 is an integer iff 3 | j.
        assert_eq!(r.resonance_count, 10);
    }

    #[test]
    fn preconditions() {
        assert!(check_condition_a(&Alpha::Golden, &linear(), 5, &[1.0]).is_err());
        let short = ModelSequence::Measured(vec![1.0; 20]);
        assert!(matches!(check_condition_a(&Alpha::Golden, &short, 30, &[1.0]), Err(Error::Range(_))));
        let measured = check_condition_a(&Alpha::Golden, &short, 20, &[1.0]).unwrap();
        assert!(measured.indicative);
        assert!(Alpha::liouville(4).is_err());
    }
}
