//! Wick expansion of even-order moments of a zero-mean Gaussian state.
//!
//! A moment of `2n` ladder operators (or classical amplitudes) equals the sum
//! over all perfect matchings of the factor list of the product of ordered
//! pair expectations. The pair rules are
//!
//! | left  | right | value                          |
//! |-------|-------|--------------------------------|
//! | `â†_i` | `â_j`  | `N_ij`                         |
//! | `â_i`  | `â_j`  | `M_ij`                         |
//! | `â†_i` | `â†_j` | `conj(M_ij)`                   |
//! | `â_i`  | `â†_j` | `N_ji + c·δ_ij`                |
//!
//! where `c = 1` for quantum and `0` for classical statistics. Pairs keep the
//! order in which their factors appear in the string, which is what makes the
//! expansion valid for arbitrary (not only normal) orderings.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianMoments, ModeIndex};
use crate::real::Real;

pub const DEFAULT_FACTOR_CAP: usize = 16;

/// Matchings are tracked in a `u64` bitmask.
const HARD_FACTOR_LIMIT: usize = 64;

/// A single ladder operator (`dagger = true` for creation, or a conjugated
/// classical amplitude).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OperatorFactor {
    pub mode: ModeIndex,
    pub dagger: bool,
}

impl OperatorFactor {
    pub const fn annihilate(mode: ModeIndex) -> Self {
        Self {
            mode,
            dagger: false,
        }
    }

    pub const fn create(mode: ModeIndex) -> Self {
        Self { mode, dagger: true }
    }

    pub const fn adjoint(self) -> Self {
        Self {
            mode: self.mode,
            dagger: !self.dagger,
        }
    }
}

/// Adjoint of an operator string: reversed order, every factor daggered.
pub fn adjoint_string(factors: &[OperatorFactor]) -> Vec<OperatorFactor> {
    factors.iter().rev().map(|f| f.adjoint()).collect()
}

/// Expectation of the ordered pair `left · right`.
pub fn pair_expectation<R: Real>(
    moments: &GaussianMoments<R>,
    left: OperatorFactor,
    right: OperatorFactor,
) -> Complex<R> {
    let (i, j) = (left.mode.index(), right.mode.index());
    match (left.dagger, right.dagger) {
        (true, false) => moments.normal()[(i, j)],
        (false, false) => moments.anomalous()[(i, j)],
        (true, true) => moments.anomalous()[(i, j)].conj(),
        (false, true) => {
            let mut value = moments.normal()[(j, i)];
            if i == j {
                value.re = value.re + R::real(moments.stat().commutator());
            }
            value
        }
    }
}

/// Sum over perfect matchings of `len` items of the product of
/// `contraction(i, j)` (with `i < j`) over the matched pairs.
///
/// Enumeration pairs the first unmatched item with every later one and
/// recurses; branches whose contraction is exactly zero are cut. With a
/// contraction identically one the result is the number of matchings,
/// `(len − 1)!!`.
pub fn sum_over_matchings<T, F>(len: usize, contraction: F) -> T
where
    T: Copy + Zero + One + std::ops::Mul<Output = T>,
    F: Fn(usize, usize) -> T,
{
    assert!(
        len <= HARD_FACTOR_LIMIT,
        "matching enumeration limited to 64 items"
    );
    if len % 2 == 1 {
        return T::zero();
    }
    let mut table = vec![T::zero(); len * len];
    for i in 0..len {
        for j in (i + 1)..len {
            table[i * len + j] = contraction(i, j);
        }
    }
    let all = if len == 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    };
    recurse(&table, len, all)
}

fn recurse<T>(table: &[T], len: usize, remaining: u64) -> T
where
    T: Copy + Zero + One + std::ops::Mul<Output = T>,
{
    if remaining == 0 {
        return T::one();
    }
    let first = remaining.trailing_zeros() as usize;
    let rest = remaining & !(1u64 << first);
    let mut total = T::zero();
    let mut candidates = rest;
    while candidates != 0 {
        let partner = candidates.trailing_zeros() as usize;
        candidates &= candidates - 1;
        let value = table[first * len + partner];
        if value.is_zero() {
            continue;
        }
        total = total + value * recurse(table, len, rest & !(1u64 << partner));
    }
    total
}

/// Number of perfect matchings actually enumerated for `len` items when no
/// branch is pruned.
pub fn count_matchings(len: usize) -> u64 {
    sum_over_matchings(len, |_, _| 1u64)
}

/// Wick evaluator with a configurable cap on the string length.
#[derive(Clone, Copy, Debug)]
pub struct WickEngine {
    cap: usize,
}

impl Default for WickEngine {
    fn default() -> Self {
        Self {
            cap: DEFAULT_FACTOR_CAP,
        }
    }
}

impl WickEngine {
    pub fn with_cap(cap: usize) -> Result<Self> {
        if cap > HARD_FACTOR_LIMIT {
            return Err(Error::Capacity {
                what: "factor cap",
                size: cap,
                limit: HARD_FACTOR_LIMIT,
            });
        }
        Ok(Self { cap })
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn moment<R: Real>(
        &self,
        moments: &GaussianMoments<R>,
        factors: &[OperatorFactor],
    ) -> Result<Complex<R>> {
        if factors.len() > self.cap {
            return Err(Error::Capacity {
                what: "operator string length",
                size: factors.len(),
                limit: self.cap,
            });
        }
        Ok(sum_over_matchings(factors.len(), |i, j| {
            pair_expectation(moments, factors[i], factors[j])
        }))
    }
}

/// `⟨factors[0] · factors[1] · …⟩` with the default cap of 16 factors.
pub fn wick_moment<R: Real>(
    moments: &GaussianMoments<R>,
    factors: &[OperatorFactor],
) -> Result<Complex<R>> {
    WickEngine::default().moment(moments, factors)
}
