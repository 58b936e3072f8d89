//! Closed intervals for certified inequality checks.
//!
//! [`Interval<T>`] works over any [`Bound`] scalar. Exact fields such as
//! [`Rational`] need no rounding in `+ - *`; floating-point endpoints are
//! nudged outward by one ulp after every operation so the enclosure property
//! survives round-to-nearest. Rational endpoints grow without limit under
//! repeated multiplication, so [`Interval::round_outward`] snaps them to a
//! dyadic grid.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{Num, One, Signed, Zero};

use crate::Rational;

/// Endpoint scalar for [`Interval`].
pub trait Bound: Clone + PartialOrd + Num + Neg<Output = Self> + fmt::Debug {
    /// A value `<= self` that absorbs the rounding error of the operation
    /// that produced `self`.
    fn widen_down(self) -> Self;
    fn widen_up(self) -> Self;
}

impl Bound for Rational {
    fn widen_down(self) -> Self {
        self
    }
    fn widen_up(self) -> Self {
        self
    }
}

impl Bound for f64 {
    fn widen_down(self) -> Self {
        self.next_down()
    }
    fn widen_up(self) -> Self {
        self.next_up()
    }
}

impl Bound for f32 {
    fn widen_down(self) -> Self {
        self.next_down()
    }
    fn widen_up(self) -> Self {
        self.next_up()
    }
}

fn min_of<T: Bound>(xs: [T; 4]) -> T {
    xs.into_iter()
        .reduce(|a, b| if b < a { b } else { a })
        .expect("non-empty")
}

fn max_of<T: Bound>(xs: [T; 4]) -> T {
    xs.into_iter()
        .reduce(|a, b| if b > a { b } else { a })
        .expect("non-empty")
}

#[derive(Clone, PartialEq)]
pub struct Interval<T> {
    lo: T,
    hi: T,
}

impl<T: Bound> Interval<T> {
    /// Panics if `lo > hi`.
    pub fn new(lo: T, hi: T) -> Self {
        assert!(lo <= hi, "inverted interval {lo:?} > {hi:?}");
        Self { lo, hi }
    }

    pub fn point(x: T) -> Self {
        Self {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn lo(&self) -> &T {
        &self.lo
    }

    pub fn hi(&self) -> &T {
        &self.hi
    }

    pub fn width(&self) -> T {
        self.hi.clone() - self.lo.clone()
    }

    pub fn contains(&self, x: &T) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Certified comparison against a point: `Some(ordering)` when every
    /// element of the interval compares the same way, `None` otherwise.
    /// Touching endpoints count as `Less`/`Greater` only when strict.
    pub fn cmp_point(&self, x: &T) -> Option<Ordering> {
        if &self.hi < x {
            Some(Ordering::Less)
        } else if &self.lo > x {
            Some(Ordering::Greater)
        } else if &self.lo == x && &self.hi == x {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// `Some(true)` if every element is `<= x`, `Some(false)` if every
    /// element is `> x`, `None` when undecided.
    pub fn le_point(&self, x: &T) -> Option<bool> {
        if &self.hi <= x {
            Some(true)
        } else if &self.lo > x {
            Some(false)
        } else {
            None
        }
    }

    /// `Some(true)` if every element is `>= x`, `Some(false)` if every
    /// element is `< x`.
    pub fn ge_point(&self, x: &T) -> Option<bool> {
        if &self.lo >= x {
            Some(true)
        } else if &self.hi < x {
            Some(false)
        } else {
            None
        }
    }

    pub fn recip(&self) -> Option<Self> {
        if self.contains(&T::zero()) {
            return None;
        }
        Some(Self {
            lo: (T::one() / self.hi.clone()).widen_down(),
            hi: (T::one() / self.lo.clone()).widen_up(),
        })
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        rhs.recip().map(|r| self * &r)
    }

    /// Integer power by binary exponentiation; negative exponents go through
    /// [`Interval::recip`].
    pub fn powi(&self, exp: i64) -> Option<Self> {
        let base = if exp < 0 { self.recip()? } else { self.clone() };
        let mut e = exp.unsigned_abs();
        let mut acc = Self::point(T::one());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = sq.square();
            }
        }
        Some(acc)
    }

    /// Tighter than `self * self` when the interval straddles zero.
    pub fn square(&self) -> Self {
        let z = T::zero();
        if self.lo >= z {
            &self.clone() * self
        } else if self.hi <= z {
            let lo = (self.hi.clone() * self.hi.clone()).widen_down();
            let hi = (self.lo.clone() * self.lo.clone()).widen_up();
            Self { lo, hi }
        } else {
            let a = self.lo.clone() * self.lo.clone();
            let b = self.hi.clone() * self.hi.clone();
            let hi = if a > b { a } else { b };
            Self {
                lo: z,
                hi: hi.widen_up(),
            }
        }
    }
}

impl<T: Bound> Add for &Interval<T> {
    type Output = Interval<T>;
    fn add(self, rhs: Self) -> Interval<T> {
        Interval {
            lo: (self.lo.clone() + rhs.lo.clone()).widen_down(),
            hi: (self.hi.clone() + rhs.hi.clone()).widen_up(),
        }
    }
}

impl<T: Bound> Sub for &Interval<T> {
    type Output = Interval<T>;
    fn sub(self, rhs: Self) -> Interval<T> {
        Interval {
            lo: (self.lo.clone() - rhs.hi.clone()).widen_down(),
            hi: (self.hi.clone() - rhs.lo.clone()).widen_up(),
        }
    }
}

impl<T: Bound> Mul for &Interval<T> {
    type Output = Interval<T>;
    fn mul(self, rhs: Self) -> Interval<T> {
        let p = [
            self.lo.clone() * rhs.lo.clone(),
            self.lo.clone() * rhs.hi.clone(),
            self.hi.clone() * rhs.lo.clone(),
            self.hi.clone() * rhs.hi.clone(),
        ];
        Interval {
            lo: min_of(p.clone()).widen_down(),
            hi: max_of(p).widen_up(),
        }
    }
}

impl<T: Bound> Neg for &Interval<T> {
    type Output = Interval<T>;
    fn neg(self) -> Interval<T> {
        Interval {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }
}

impl<T: Bound + fmt::Display> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl<T: fmt::Debug> fmt::Debug for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

/// Largest multiple of `2^-bits` that is `<= x`.
pub fn dyadic_floor(x: &Rational, bits: u32) -> Rational {
    let q = Integer::div_floor(&(x.numer() << bits), x.denom());
    Rational::new(q, BigInt::one() << bits)
}

/// Smallest multiple of `2^-bits` that is `>= x`.
pub fn dyadic_ceil(x: &Rational, bits: u32) -> Rational {
    let q = Integer::div_ceil(&(x.numer() << bits), x.denom());
    Rational::new(q, BigInt::one() << bits)
}

/// Lossy conversion for display and diagnostics.
pub fn rational_to_f64(x: &Rational) -> f64 {
    // Scale so both parts fit comfortably in f64 range before dividing.
    let n = x.numer();
    let d = x.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000) as usize;
    let nf = bigint_to_f64(&(n >> shift));
    let df = bigint_to_f64(&(d >> shift));
    nf / df
}

fn bigint_to_f64(x: &BigInt) -> f64 {
    let (sign, mag) = x.to_u64_digits();
    let mut acc = 0.0f64;
    for limb in mag.iter().rev() {
        acc = acc * 18446744073709551616.0 + *limb as f64;
    }
    if sign == Sign::Minus {
        -acc
    } else {
        acc
    }
}

impl Interval<Rational> {
    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self::point(Rational::from_integer(n.into()))
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::point(Rational::new(numer.into(), denom.into()))
    }

    /// Snap both endpoints outward to multiples of `2^-bits`.
    pub fn round_outward(&self, bits: u32) -> Self {
        Self {
            lo: dyadic_floor(&self.lo, bits),
            hi: dyadic_ceil(&self.hi, bits),
        }
    }

    pub fn midpoint(&self) -> Rational {
        (self.lo.clone() + self.hi.clone()) / Rational::from_integer(2.into())
    }

    /// Certified enclosure of the natural logarithm, accurate to roughly
    /// `2^-bits` absolute. Returns `None` unless the interval is positive.
    pub fn ln(&self, bits: u32) -> Option<Self> {
        if !self.lo.is_positive() {
            return None;
        }
        let lo = ln_enclosure(&self.lo, bits).lo;
        let hi = ln_enclosure(&self.hi, bits).hi;
        Some(Self { lo, hi })
    }
}

/// Enclosure of `atanh(t)` for `0 <= t <= 1/3` from the odd power series.
/// The tail after the last term taken is bounded by
/// `t^(2N+1) / ((2N+1)(1 - t^2))`.
///
/// Works in integers scaled by `2^grid`, rounding the lower running values
/// down and the upper ones up, so no rational normalisation is needed.
fn atanh_enclosure(t: &Rational, bits: u32) -> Interval<Rational> {
    let grid = bits + 16;
    if t.is_zero() {
        return Interval::point(Rational::zero());
    }
    let (p2, q2) = (t.numer() * t.numer(), t.denom() * t.denom());
    let one_minus = &q2 - &p2;
    let scaled = t.numer() << grid;
    let mut pow_lo = Integer::div_floor(&scaled, t.denom());
    let mut pow_hi = Integer::div_ceil(&scaled, t.denom());
    let mut sum_lo = BigInt::zero();
    let mut sum_hi = BigInt::zero();
    let mut k: u64 = 1;
    loop {
        let kq = BigInt::from(k);
        sum_lo += Integer::div_floor(&pow_lo, &kq);
        sum_hi += Integer::div_ceil(&pow_hi, &kq);
        pow_lo = Integer::div_floor(&(&pow_lo * &p2), &q2);
        pow_hi = Integer::div_ceil(&(&pow_hi * &p2), &q2);
        k += 2;
        // tail in units of 2^-grid, rounded up
        let tail = Integer::div_ceil(&(&pow_hi * &q2), &(BigInt::from(k) * &one_minus));
        if tail <= BigInt::one() {
            sum_hi += tail;
            break;
        }
    }
    let scale = BigInt::one() << grid;
    Interval::new(
        Rational::new(sum_lo, scale.clone()),
        Rational::new(sum_hi, scale),
    )
}

fn ln2_enclosure(bits: u32) -> Interval<Rational> {
    thread_local! {
        static CACHE: RefCell<HashMap<u32, Interval<Rational>>> = RefCell::new(HashMap::new());
    }
    CACHE.with(|c| {
        c.borrow_mut()
            .entry(bits)
            .or_insert_with(|| {
                let two = Interval::from_integer(2);
                &two * &atanh_enclosure(&Rational::new(1.into(), 3.into()), bits)
            })
            .clone()
    })
}

/// Enclosure of `ln(x)` for a positive rational point `x`.
pub fn ln_enclosure(x: &Rational, bits: u32) -> Interval<Rational> {
    assert!(x.is_positive(), "ln of non-positive value");
    // x = 2^k * y with 1 <= y < 2
    let mut k = x.numer().bits() as i64 - x.denom().bits() as i64;
    let pow2 = |e: i64| -> Rational {
        if e >= 0 {
            Rational::from_integer(BigInt::one() << e as u64)
        } else {
            Rational::new(BigInt::one(), BigInt::one() << (-e) as u64)
        }
    };
    let mut y = x / pow2(k);
    let two = Rational::from_integer(2.into());
    while y >= two {
        y /= &two;
        k += 1;
    }
    while y < Rational::one() {
        y *= &two;
        k -= 1;
    }
    let t = (&y - Rational::one()) / (&y + Rational::one());
    let ln_y = &Interval::from_integer(2) * &atanh_enclosure(&t, bits);
    let k_bits = 64 - k.unsigned_abs().leading_zeros();
    let ln_2k = &ln2_enclosure(bits + k_bits) * &Interval::from_integer(k);
    (&ln_y + &ln_2k).round_outward(bits + 8)
}

impl<T: Bound + Ord> Interval<T> {
    pub fn hull(&self, other: &Self) -> Self {
        Self {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }
}

/// Ceil of a rational, as a `BigInt`.
pub fn ceil_int(x: &Rational) -> BigInt {
    x.ceil().to_integer()
}

/// Floor of a rational, as a `BigInt`.
pub fn floor_int(x: &Rational) -> BigInt {
    x.floor().to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn arithmetic_encloses_pointwise_results() {
        let a = Interval::new(q(-1, 2), q(3, 2));
        let b = Interval::new(q(2, 1), q(5, 1));
        let prod = &a * &b;
        assert_eq!(prod.lo(), &q(-5, 2));
        assert_eq!(prod.hi(), &q(15, 2));
        let diff = &a - &b;
        assert_eq!(diff.lo(), &q(-11, 2));
        assert_eq!(diff.hi(), &q(-1, 2));
        assert_eq!(a.square().lo(), &q(0, 1));
        assert_eq!(a.square().hi(), &q(9, 4));
    }

    #[test]
    fn recip_rejects_zero() {
        assert!(Interval::new(q(-1, 1), q(1, 1)).recip().is_none());
        let r = Interval::new(q(2, 1), q(4, 1)).recip().unwrap();
        assert_eq!(r.lo(), &q(1, 4));
        assert_eq!(r.hi(), &q(1, 2));
    }

    #[test]
    fn powi_handles_negative_exponents() {
        let x = Interval::new(q(3, 2), q(2, 1));
        let p = x.powi(-2).unwrap();
        assert_eq!(p.lo(), &q(1, 4));
        assert_eq!(p.hi(), &q(4, 9));
        assert_eq!(x.powi(0).unwrap(), Interval::point(q(1, 1)));
    }

    #[test]
    fn dyadic_rounding_is_outward() {
        let x = Interval::point(q(1, 3)).round_outward(8);
        assert!(x.contains(&q(1, 3)));
        assert!(x.width() <= q(1, 256));
        let neg = Interval::point(q(-1, 3)).round_outward(8);
        assert!(neg.contains(&q(-1, 3)));
    }

    #[test]
    fn ln_matches_float_reference() {
        for (n, d) in [
            (1, 1),
            (2, 1),
            (3, 1),
            (1, 2),
            (221, 2),
            (1417, 1),
            (7, 1000),
        ] {
            let x = q(n, d);
            let enc = ln_enclosure(&x, 64);
            let f = (n as f64 / d as f64).ln();
            assert!(
                rational_to_f64(enc.lo()) <= f + 1e-12 && f - 1e-12 <= rational_to_f64(enc.hi()),
                "ln({n}/{d}) enclosure {enc:?} misses {f}"
            );
            assert!(enc.width() < q(1, 1 << 40));
        }
    }

    #[test]
    fn ln_of_one_contains_zero() {
        let enc = ln_enclosure(&q(1, 1), 32);
        assert!(enc.contains(&q(0, 1)));
    }

    #[test]
    fn float_intervals_widen() {
        let a = FloatIntervalAlias::new(0.1, 0.1);
        let s = &a + &a;
        assert!(s.lo() < &0.2 && s.hi() > &0.2);
    }

    type FloatIntervalAlias = Interval<f64>;

    #[test]
    fn cmp_point_is_certified() {
        let x = Interval::new(q(1, 1), q(2, 1));
        assert_eq!(x.cmp_point(&q(3, 1)), Some(Ordering::Less));
        assert_eq!(x.cmp_point(&q(1, 2)), Some(Ordering::Greater));
        assert_eq!(x.cmp_point(&q(3, 2)), None);
        assert_eq!(x.le_point(&q(2, 1)), Some(true));
        assert_eq!(x.le_point(&q(3, 2)), None);
        assert_eq!(x.ge_point(&q(1, 1)), Some(true));
        assert_eq!(x.ge_point(&q(5, 2)), Some(false));
    }
}
