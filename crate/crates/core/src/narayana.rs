//! Evaluation of the Narayana sequence `a(0) = 0, a(1) = a(2) = 1,
//! a(n) = a(n-1) + a(n-3)`.
//!
//! Three routes give the same numbers:
//!
//! - [`narayana`] iterates the recurrence; it is the reference.
//! - [`narayana_fast`] walks the binary expansion of `n`, doubling the index
//!   with the addition identity
//!   `a(m+n) = a(m-1) a(n+2) + a(m-3) a(n+1) + a(m-2) a(n)` (valid for
//!   `m >= 3`).
//! - [`narayana_mod`] runs the doubling walk in `Z/mZ`.
//!
//! The doubling walk is written once against [`WindowArith`], so exact big
//! integers, fixed-width integers and residues all share it.

use std::marker::PhantomData;
use std::ops::{Add, Mul, Sub};

use num_integer::Integer;
use num_traits::{CheckedAdd, One, Zero};
use serde::Serialize;

use crate::interval::{rational_to_f64, Interval};
use crate::{decimal, BigNat, Error, Rational, RationalInterval, Result};

/// Below this index the doubling walk falls back to plain iteration.
pub const FAST_THRESHOLD: u64 = 32;

/// Arithmetic the window walkers need. `sub` is only ever called with
/// `a >= b` in the exact setting.
pub trait WindowArith {
    type Elem: Clone;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
}

/// Exact arithmetic in `T`.
pub struct Exact<T>(PhantomData<T>);

impl<T> Default for Exact<T> {
    fn default() -> Self {
        Exact(PhantomData)
    }
}

impl<T> WindowArith for Exact<T>
where
    T: Clone + Zero + One,
    for<'a> &'a T: Add<&'a T, Output = T> + Sub<&'a T, Output = T> + Mul<&'a T, Output = T>,
{
    type Elem = T;
    fn zero(&self) -> T {
        T::zero()
    }
    fn one(&self) -> T {
        T::one()
    }
    fn add(&self, a: &T, b: &T) -> T {
        a + b
    }
    fn sub(&self, a: &T, b: &T) -> T {
        a - b
    }
    fn mul(&self, a: &T, b: &T) -> T {
        a * b
    }
}

/// Arithmetic in `Z/mZ` with representatives in `[0, m)`. `I` must hold
/// `m^2` without overflow.
pub struct Modular<I> {
    m: I,
}

impl<I: Integer + Clone> Modular<I> {
    pub fn new(m: I) -> Result<Self> {
        let two = I::one() + I::one();
        if m < two {
            return Err(Error::Modulus("< 2".into()));
        }
        Ok(Self { m })
    }

    pub fn modulus(&self) -> &I {
        &self.m
    }
}

impl<I: Integer + Clone> WindowArith for Modular<I> {
    type Elem = I;
    fn zero(&self) -> I {
        I::zero()
    }
    fn one(&self) -> I {
        I::one()
    }
    fn add(&self, a: &I, b: &I) -> I {
        (a.clone() + b.clone()).mod_floor(&self.m)
    }
    fn sub(&self, a: &I, b: &I) -> I {
        (a.clone() + self.m.clone() - b.clone()).mod_floor(&self.m)
    }
    fn mul(&self, a: &I, b: &I) -> I {
        (a.clone() * b.clone()).mod_floor(&self.m)
    }
}

/// `(a(k), a(k+1), a(k+2))` together with `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound(serialize = "T: std::fmt::Display"))]
pub struct Window<T> {
    pub index: u64,
    #[serde(serialize_with = "decimal::big_seq")]
    pub values: [T; 3],
}

/// Window of exact terms.
pub type NarayanaWindow = Window<BigNat>;

impl<T: Clone> Window<T> {
    pub fn first(&self) -> &T {
        &self.values[0]
    }

    /// Move to `k + 1`.
    pub fn advance_with<A: WindowArith<Elem = T>>(&mut self, arith: &A) {
        let next = arith.add(&self.values[2], &self.values[0]);
        self.values.rotate_left(1);
        self.values[2] = next;
        self.index += 1;
    }
}

impl NarayanaWindow {
    pub fn start() -> Self {
        Window {
            index: 0,
            values: [BigNat::zero(), BigNat::one(), BigNat::one()],
        }
    }

    pub fn advance(&mut self) {
        let next = &self.values[2] + &self.values[0];
        self.values.rotate_left(1);
        self.values[2] = next;
        self.index += 1;
    }
}

fn initial<A: WindowArith>(arith: &A) -> [A::Elem; 3] {
    [arith.zero(), arith.one(), arith.one()]
}

/// Window at `n` by `n` recurrence steps.
pub fn iterate_window<A: WindowArith>(arith: &A, n: u64) -> [A::Elem; 3] {
    let mut w = initial(arith);
    for _ in 0..n {
        let next = arith.add(&w[2], &w[0]);
        w.rotate_left(1);
        w[2] = next;
    }
    w
}

/// Window at `2k` from the window at `k >= 3`.
fn double<A: WindowArith>(arith: &A, w: &[A::Elem; 3]) -> [A::Elem; 3] {
    let [a0, a1, a2] = w;
    let am1 = arith.sub(a2, a1);
    let am2 = arith.sub(a1, a0);
    let am3 = arith.sub(a0, &am1);
    let a3 = arith.add(a2, a0);
    let a4 = arith.add(&a3, a1);
    let ext = [a0, a1, a2, &a3, &a4];
    let combine = |j: usize| {
        let t1 = arith.mul(&am1, ext[j + 2]);
        let t2 = arith.mul(&am3, ext[j + 1]);
        let t3 = arith.mul(&am2, ext[j]);
        arith.add(&arith.add(&t1, &t2), &t3)
    };
    [combine(0), combine(1), combine(2)]
}

/// Window at `n` using index doubling above [`FAST_THRESHOLD`].
pub fn fast_window<A: WindowArith>(arith: &A, n: u64) -> [A::Elem; 3] {
    if n < FAST_THRESHOLD {
        return iterate_window(arith, n);
    }
    let threshold_bits = 64 - FAST_THRESHOLD.leading_zeros();
    let n_bits = 64 - n.leading_zeros();
    let shift = n_bits - threshold_bits;
    let mut w = iterate_window(arith, n >> shift);
    for bit in (0..shift).rev() {
        w = double(arith, &w);
        if (n >> bit) & 1 == 1 {
            let next = arith.add(&w[2], &w[0]);
            w.rotate_left(1);
            w[2] = next;
        }
    }
    w
}

/// `a(n)` by iterating the recurrence.
pub fn narayana(n: u64) -> BigNat {
    let [a, _, _] = iterate_window(&Exact::<BigNat>::default(), n);
    a
}

/// `a(n)` through the addition identity; same value as [`narayana`].
pub fn narayana_fast(n: u64) -> BigNat {
    let [a, _, _] = fast_window(&Exact::<BigNat>::default(), n);
    a
}

pub fn narayana_window(n: u64) -> NarayanaWindow {
    Window {
        index: n,
        values: fast_window(&Exact::<BigNat>::default(), n),
    }
}

/// `a(n)` in a fixed-width type, or `None` on overflow.
pub fn narayana_checked<T: CheckedAdd + Zero + One + Copy>(n: u64) -> Option<T> {
    let mut w = [T::zero(), T::one(), T::one()];
    if n < 3 {
        return Some(w[n as usize]);
    }
    // only ever form a(n) itself, so `None` means a(n) does not fit
    for _ in 2..n {
        let next = w[2].checked_add(&w[0])?;
        w = [w[1], w[2], next];
    }
    Some(w[2])
}

/// `a(n) mod m`.
pub fn narayana_mod(n: u64, m: u64) -> Result<u64> {
    if m < 2 {
        return Err(Error::Modulus(m.to_string()));
    }
    let arith = Modular::new(m as u128)?;
    let [a, _, _] = fast_window(&arith, n);
    Ok(a as u64)
}

/// `a(n) mod m` in any integer type wide enough for `m^2`.
pub fn narayana_mod_in<I: Integer + Clone + std::fmt::Display>(n: u64, m: I) -> Result<I> {
    let label = m.to_string();
    let arith = Modular::new(m).map_err(|_| Error::Modulus(label))?;
    let [a, _, _] = fast_window(&arith, n);
    Ok(a)
}

/// `(a(n), a(n+1), a(n+2)) mod m`, the seed for a modular sweep from `n`.
pub fn narayana_window_mod<I: Integer + Clone + std::fmt::Display>(
    n: u64,
    m: I,
) -> Result<Window<I>> {
    let label = m.to_string();
    let arith = Modular::new(m).map_err(|_| Error::Modulus(label))?;
    Ok(Window {
        index: n,
        values: fast_window(&arith, n),
    })
}

fn char_poly(x: &Rational) -> Rational {
    let x2 = x * x;
    &x2 * x - x2 - Rational::one()
}

/// Bracket of the real root of `x^3 - x^2 - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaInterval {
    interval: RationalInterval,
    precision_bits: u32,
}

impl AlphaInterval {
    pub fn lower(&self) -> &Rational {
        self.interval.lo()
    }

    pub fn upper(&self) -> &Rational {
        self.interval.hi()
    }

    pub fn interval(&self) -> &RationalInterval {
        &self.interval
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    /// Continue bisecting to `bits`; the result is nested in `self`.
    pub fn refine(&self, bits: u32) -> AlphaInterval {
        let mut lo = self.lower().clone();
        let mut hi = self.upper().clone();
        let two = Rational::from_integer(2.into());
        for _ in self.precision_bits..bits {
            let mid = (&lo + &hi) / &two;
            // the root is irrational, so f(mid) is never zero
            if char_poly(&mid).is_positive_rational() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        AlphaInterval {
            interval: Interval::new(lo, hi),
            precision_bits: bits.max(self.precision_bits),
        }
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (rational_to_f64(self.lower()), rational_to_f64(self.upper()))
    }
}

trait PositiveRational {
    fn is_positive_rational(&self) -> bool;
}

impl PositiveRational for Rational {
    fn is_positive_rational(&self) -> bool {
        self > &Rational::zero()
    }
}

pub const MIN_ALPHA_BITS: u32 = 8;

/// Bisection from `[1, 2]` to width `2^-precision_bits`.
pub fn alpha(precision_bits: u32) -> Result<AlphaInterval> {
    if precision_bits < MIN_ALPHA_BITS {
        return Err(Error::OutOfRange(format!(
            "alpha precision must be at least {MIN_ALPHA_BITS} bits"
        )));
    }
    let seed = AlphaInterval {
        interval: Interval::new(Rational::one(), Rational::from_integer(2.into())),
        precision_bits: 0,
    };
    Ok(seed.refine(precision_bits))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthSide {
    /// `alpha^(n-3) <= a(n)` failed.
    Lower,
    /// `a(n) <= alpha^(n-1)` failed.
    Upper,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrowthViolation {
    pub n: u64,
    pub side: GrowthSide,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub n_max: u64,
    /// Largest bracket precision any comparison needed.
    pub precision_bits: u32,
    pub alpha_lower: f64,
    pub alpha_upper: f64,
    pub violations: Vec<GrowthViolation>,
    /// Comparisons still open at [`MAX_GROWTH_BITS`].
    pub undecided: Vec<u64>,
}

pub const START_GROWTH_BITS: u32 = 64;
pub const MAX_GROWTH_BITS: u32 = 4096;

fn alpha_power(alpha: &AlphaInterval, e: i64, grid: u32) -> RationalInterval {
    alpha
        .interval()
        .powi(e)
        .expect("alpha bracket excludes zero")
        .round_outward(grid)
}

/// Decide `alpha^e <= x` (`side = Lower`) or `x <= alpha^e` (`Upper`),
/// refining the bracket while undecided.
fn decide(
    x: &Rational,
    e: i64,
    side: GrowthSide,
    cached: &RationalInterval,
    alpha_seed: &AlphaInterval,
    bits_used: &mut u32,
) -> Option<bool> {
    let test = |p: &RationalInterval| match side {
        GrowthSide::Lower => p.le_point(x),
        GrowthSide::Upper => p.ge_point(x),
    };
    if let Some(ok) = test(cached) {
        return Some(ok);
    }
    let mut bits = alpha_seed.precision_bits() * 2;
    while bits <= MAX_GROWTH_BITS {
        let a = alpha_seed.refine(bits);
        *bits_used = (*bits_used).max(bits);
        if let Some(ok) = test(&alpha_power(&a, e, bits + 16)) {
            return Some(ok);
        }
        bits *= 2;
    }
    None
}

/// Certify `alpha^(n-3) <= a(n) <= alpha^(n-1)` for `1 <= n <= n_max` with
/// rational interval powers of the bracket of alpha.
pub fn check_growth_bounds(n_max: u64) -> Result<GrowthReport> {
    if n_max < 1 {
        return Err(Error::OutOfRange("growth check needs n_max >= 1".into()));
    }
    let a = alpha(START_GROWTH_BITS)?;
    let grid = START_GROWTH_BITS + 16;
    let mut bits_used = START_GROWTH_BITS;

    // powers[e] = alpha^e for 0 <= e < n_max, built by repeated
    // multiplication; alpha^0 stays the exact point 1.
    let mut powers: Vec<RationalInterval> = Vec::with_capacity(n_max as usize);
    powers.push(Interval::point(Rational::one()));
    for e in 1..n_max as usize {
        let next = (&powers[e - 1] * a.interval()).round_outward(grid);
        powers.push(next);
    }
    let power = |e: i64| -> RationalInterval {
        if e >= 0 {
            powers[e as usize].clone()
        } else {
            alpha_power(&a, e, grid)
        }
    };

    let mut violations = Vec::new();
    let mut undecided = Vec::new();
    let mut w = NarayanaWindow::start();
    w.advance();
    for n in 1..=n_max {
        let term = Rational::from_integer(w.first().clone().into());
        for (side, e) in [
            (GrowthSide::Lower, n as i64 - 3),
            (GrowthSide::Upper, n as i64 - 1),
        ] {
            match decide(&term, e, side, &power(e), &a, &mut bits_used) {
                Some(true) => {}
                Some(false) => violations.push(GrowthViolation { n, side }),
                None => undecided.push(n),
            }
        }
        w.advance();
    }
    let (alpha_lower, alpha_upper) = a.to_f64_pair();
    Ok(GrowthReport {
        n_max,
        precision_bits: bits_used,
        alpha_lower,
        alpha_upper,
        violations,
        undecided,
    })
}
