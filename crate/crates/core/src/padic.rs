//! p-adic valuations of integers and factorials.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_integer::Integer;
use num_traits::FromPrimitive;
use serde::{Serialize, Serializer};

use crate::{Error, Rational, Result};

/// An element of `N ∪ {∞}`; `Infinite` is the valuation of zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(u64),
    Infinite,
}

impl Valuation {
    pub fn is_finite(self) -> bool {
        matches!(self, Valuation::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl From<u64> for Valuation {
    fn from(v: u64) -> Self {
        Valuation::Finite(v)
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

/// `∞` absorbs.
impl Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Self) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl Add<u64> for Valuation {
    type Output = Valuation;
    fn add(self, rhs: u64) -> Valuation {
        self + Valuation::Finite(rhs)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

/// Finite values serialize as numbers, `∞` as the string `"inf"`.
impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => s.serialize_u64(*v),
            Valuation::Infinite => s.serialize_str("inf"),
        }
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Largest `e` with `p^e | x`, or `∞` for `x = 0`. The sign of `x` is
/// ignored. Works for any integer type, including big integers, using a
/// squaring ladder so the number of big divisions is logarithmic in the
/// answer.
pub fn vp<I>(x: &I, p: u64) -> Result<Valuation>
where
    I: Integer + Clone + FromPrimitive,
{
    check_prime(p)?;
    if x.is_zero() {
        return Ok(Valuation::Infinite);
    }
    let p = I::from_u64(p).ok_or_else(|| Error::OutOfRange(format!("prime {p} does not fit")))?;
    Ok(Valuation::Finite(valuation_nonzero(x.clone(), &p)))
}

fn valuation_nonzero<I: Integer + Clone>(mut x: I, p: &I) -> u64 {
    // ladder[j] = p^(2^j), grown while it still divides x
    let mut ladder: Vec<I> = Vec::new();
    let mut pw = p.clone();
    if x.is_multiple_of(&pw) {
        loop {
            ladder.push(pw.clone());
            // pw^2 | x guarantees pw^2 fits wherever x does
            if !(x.clone() / pw.clone()).is_multiple_of(&pw) {
                break;
            }
            pw = pw.clone() * pw;
        }
    }
    // v < 2^ladder.len(), so one binary descent finds every bit
    let mut v = 0u64;
    for (j, pw) in ladder.iter().enumerate().rev() {
        let (q, r) = x.div_rem(pw);
        if r.is_zero() {
            x = q;
            v += 1 << j;
        }
    }
    v
}

/// Largest `j` with `p^j <= m`, by repeated division.
pub fn floor_log(m: u64, p: u64) -> u32 {
    assert!(p >= 2 && m >= 1);
    let mut j = 0;
    let mut rest = m;
    while rest >= p {
        rest /= p;
        j += 1;
    }
    j
}

/// Exact `v_p(m!)` by Legendre's sum of `floor(m / p^j)`.
pub fn vp_factorial(m: u64, p: u64) -> Result<Valuation> {
    check_prime(p)?;
    let mut total = 0u64;
    let mut q = m / p;
    while q > 0 {
        total += q;
        q /= p;
    }
    Ok(Valuation::Finite(total))
}

/// Rational sandwich around `v_p(m!)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorialValuationBounds {
    /// `m/(p-1) - floor(log_p m) - 1`
    pub lower: Rational,
    /// `(m-1)/(p-1)`
    pub upper: Rational,
}

impl FactorialValuationBounds {
    pub fn contains(&self, v: u64) -> bool {
        let v = Rational::from_integer(v.into());
        self.lower <= v && v <= self.upper
    }
}

pub fn vp_factorial_bounds(m: u64, p: u64) -> Result<FactorialValuationBounds> {
    check_prime(p)?;
    if m == 0 {
        return Err(Error::OutOfRange("factorial bounds need m >= 1".into()));
    }
    let pm1 = Rational::from_integer((p - 1).into());
    let lower = Rational::from_integer(m.into()) / &pm1
        - Rational::from_integer((floor_log(m, p) as u64 + 1).into());
    let upper = Rational::from_integer((m - 1).into()) / pm1;
    Ok(FactorialValuationBounds { lower, upper })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::BigNat;
    use num_bigint::BigInt;
    use num_traits::Zero;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn valuation_of_zero_is_infinite() {
        assert_eq!(vp(&0i64, 3).unwrap(), Valuation::Infinite);
        assert_eq!(vp(&BigNat::zero(), 3).unwrap(), Valuation::Infinite);
    }

    #[test]
    fn small_values() {
        assert_eq!(vp(&2745u64, 3).unwrap(), Valuation::Finite(2));
        assert_eq!(vp(&-27i64, 3).unwrap(), Valuation::Finite(3));
        assert_eq!(vp(&1i32, 5).unwrap(), Valuation::Finite(0));
        assert_eq!(vp(&(1u64 << 40), 2).unwrap(), Valuation::Finite(40));
        assert_eq!(vp(&BigInt::from(-162), 3).unwrap(), Valuation::Finite(4));
    }

    #[test]
    fn rejects_non_primes() {
        assert_eq!(vp(&9u64, 1), Err(Error::NotPrime(1)));
        assert_eq!(vp(&9u64, 0), Err(Error::NotPrime(0)));
        assert_eq!(vp(&9u64, 9), Err(Error::NotPrime(9)));
        assert!(vp_factorial(10, 4).is_err());
        assert!(vp_factorial_bounds(10, 6).is_err());
    }

    #[test]
    fn factorial_valuations() {
        assert_eq!(vp_factorial(10, 3).unwrap(), Valuation::Finite(4));
        assert_eq!(vp_factorial(0, 3).unwrap(), Valuation::Finite(0));
        // 73 + 24 + 8 + 2
        assert_eq!(vp_factorial(221, 3).unwrap(), Valuation::Finite(107));
        let by_factors: u64 = (1..=221u64)
            .map(|k| vp(&k, 3).unwrap().finite().unwrap())
            .sum();
        assert_eq!(by_factors, 107);
        // 10! = 3628800 = 3^4 * 44800
        assert_eq!(vp(&3_628_800u64, 3).unwrap(), Valuation::Finite(4));
    }

    #[test]
    fn factorial_bounds_examples() {
        let b = vp_factorial_bounds(1, 2).unwrap();
        assert_eq!((b.lower.clone(), b.upper.clone()), (q(0, 1), q(0, 1)));
        assert!(b.contains(0));

        let b = vp_factorial_bounds(10, 3).unwrap();
        assert_eq!(b.lower, q(2, 1));
        assert_eq!(b.upper, q(9, 2));
        assert!(b.contains(4));

        let b = vp_factorial_bounds(221, 3).unwrap();
        assert_eq!(b.lower, q(211, 2));
        assert_eq!(b.upper, q(110, 1));
        assert!(b.contains(107));

        assert!(vp_factorial_bounds(0, 3).is_err());
    }

    #[test]
    fn floor_log_at_power_boundaries() {
        assert_eq!(floor_log(1, 3), 0);
        assert_eq!(floor_log(2, 3), 0);
        assert_eq!(floor_log(3, 3), 1);
        assert_eq!(floor_log(242, 3), 4);
        assert_eq!(floor_log(243, 3), 5);
        assert_eq!(floor_log(1000, 10), 3);
        assert_eq!(floor_log(999, 10), 2);
        assert_eq!(floor_log(u64::MAX, 2), 63);
    }

    #[test]
    fn valuation_order_and_sum() {
        assert!(Valuation::Finite(100) < Valuation::Infinite);
        assert_eq!(
            Valuation::Finite(2) + Valuation::Infinite,
            Valuation::Infinite
        );
        assert_eq!(Valuation::Finite(2) + 3, Valuation::Finite(5));
    }

    proptest! {
        #[test]
        fn multiplicative(x in -1_000_000i64..1_000_000, y in -1_000_000i64..1_000_000,
                          p in prop::sample::select(vec![2u64, 3, 5, 7, 11])) {
            let lhs = vp(&(x as i128 * y as i128), p).unwrap();
            let rhs = vp(&x, p).unwrap() + vp(&y, p).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn ladder_matches_naive(base in 1u64..1000, e in 0u32..60, p in prop::sample::select(vec![2u64, 3, 5])) {
            let x = BigNat::from(base) * num_traits::pow(BigNat::from(p), e as usize);
            let mut naive = 0u64;
            let mut b = base;
            while b % p == 0 { b /= p; naive += 1; }
            prop_assert_eq!(vp(&x, p).unwrap(), Valuation::Finite(naive + e as u64));
        }
    }
}
