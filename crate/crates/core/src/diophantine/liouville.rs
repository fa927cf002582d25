//! Partial sums of the Liouville constant `Σ_k 10^{−k!}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest depth accepted by [`liouville_number`].
pub const MAX_PUBLIC_DEPTH: u32 = 4;
/// Largest depth built internally (denominator `10^{7!}`).
pub(crate) const MAX_INTERNAL_DEPTH: u32 = 7;

/// Exact partial sum `Σ_{k=1..n} 10^{−k!}` together with a bound on the
/// distance to the full series.
#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleNumber {
    depth: u32,
    value: BigRational,
    tail_bound: BigRational,
}

impl LiouvilleNumber {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Exact partial sum; the denominator is `10^{depth!}`.
    pub fn value(&self) -> &BigRational {
        &self.value
    }

    /// `2·10^{−(depth+1)!}`, strictly above the omitted tail.
    pub fn tail_bound(&self) -> &BigRational {
        &self.tail_bound
    }
}

/// Partial sum at `depth ∈ [1, 4]`.
pub fn liouville_number(depth: u32) -> Result<LiouvilleNumber> {
    if depth == 0 {
        return Err(Error::param("depth", "must be at least 1"));
    }
    if depth > MAX_PUBLIC_DEPTH {
        return Err(Error::SizeGuard(format!(
            "Liouville depth {depth} exceeds {MAX_PUBLIC_DEPTH} (denominator 10^{})",
            factorial(depth)
        )));
    }
    Ok(liouville_partial(depth))
}

/// Unguarded construction for internal certification; `depth ≤ 7`.
pub(crate) fn liouville_partial(depth: u32) -> LiouvilleNumber {
    assert!((1..=MAX_INTERNAL_DEPTH).contains(&depth));
    let ten = BigInt::from(10u32);
    let value = (1..=depth).fold(BigRational::zero(), |acc, k| {
        acc + BigRational::new(BigInt::one(), ten.pow(factorial(k)))
    });
    let tail_bound = BigRational::new(BigInt::from(2u32), ten.pow(factorial(depth + 1)));
    LiouvilleNumber {
        depth,
        value,
        tail_bound,
    }
}

pub(crate) fn factorial(n: u32) -> u32 {
    (1..=n).product()
}
