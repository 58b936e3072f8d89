//! `m! + 1 = u^2` with `u` a Narayana number.
//!
//! The argument runs in two halves. [`derive_bounds`] turns the factorial
//! valuation bound and the growth bound into explicit limits `m <= m_max`,
//! `n <= n_max`; the real logarithms involved are evaluated as certified
//! rational intervals. [`search_narayana`] then scans every index up to
//! `n_max` with a running factorial, so no candidate is skipped.

use std::cmp::Ordering;

use num_integer::Integer;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::interval::{rational_to_f64, Interval};
use crate::laws::{chunks, law_eval, LawVariant, Target, ValuationLaw};
use crate::narayana::narayana_window;
use crate::padic::{floor_log, vp, vp_factorial};
use crate::{decimal, BigNat, Error, Rational, RationalInterval, Result, Valuation};

/// `v3(a_n - 1) + v3(a_n + 1) = v3(a_n^2 - 1)` as predicted by the
/// corrected laws.
pub fn combined_v3_upper(n: u64) -> Result<Valuation> {
    if n < 4 {
        return Err(Error::OutOfRange(format!(
            "combined valuation needs n >= 4, got {n}"
        )));
    }
    let minus = ValuationLaw::new(Target::AMinus1, LawVariant::Corrected);
    let plus = ValuationLaw::new(Target::APlus1, LawVariant::Corrected);
    Ok(law_eval(&minus, n)? + law_eval(&plus, n)?)
}

/// How the right-hand side of the final bound inequality is read.
///
/// With `X(m) = 34 + 1.33 m ln(m/2)` (the index bound `n + 30`), the
/// left-hand side is `floor((m/2 - floor(log3 m) - 17) / 9)` in all cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundReading {
    /// `log2(X) / ln 3`. Looser than [`BoundReading::Log3`] and the only
    /// reading that reproduces the published crossover `m = 221`.
    MixedBase,
    /// `log3(X)`, what taking logarithms of `3^lhs <= n + 30` gives.
    Log3,
    /// `X / ln 3`, exactly as typeset. It grows faster than the left side,
    /// so it never produces a crossover.
    AsPrinted,
}

impl BoundReading {
    pub const ALL: [BoundReading; 3] = [
        BoundReading::MixedBase,
        BoundReading::Log3,
        BoundReading::AsPrinted,
    ];
}

pub const PUBLISHED_M_MAX: u64 = 221;
pub const PUBLISHED_N_MAX: u64 = 1386;
/// Every `m` up to here is evaluated when looking for the crossover.
pub const BOUND_SCAN_LIMIT: u64 = 5000;
const START_BITS: u32 = 64;
const MAX_BITS: u32 = 2048;

fn growth_coefficient() -> RationalInterval {
    Interval::from_ratio(133, 100)
}

/// `m/2 - floor(log3 m) - 17` over 9, floored; exact.
pub fn bound_lhs(m: u64) -> i64 {
    let numer = m as i64 - 2 * floor_log(m, 3) as i64 - 34;
    Integer::div_floor(&numer, &18)
}

/// `4 + 1.33 m ln(m/2)`: the index bound implied by `alpha^(2n-6) <= m! + 1`.
pub fn index_bound(m: u64, bits: u32) -> RationalInterval {
    let half = Interval::point(Rational::new(m.into(), 2.into()));
    let ln_half = half.ln(bits).expect("m >= 1");
    let prod = &(&growth_coefficient() * &Interval::from_integer(m)) * &ln_half;
    (&Interval::from_integer(4) + &prod).round_outward(bits + 8)
}

pub fn bound_rhs(reading: BoundReading, m: u64, bits: u32) -> RationalInterval {
    let x = &index_bound(m, bits) + &Interval::from_integer(30);
    let ln3 = Interval::from_integer(3).ln(bits).expect("positive");
    let out = match reading {
        BoundReading::AsPrinted => x.checked_div(&ln3),
        BoundReading::Log3 => x.ln(bits).and_then(|l| l.checked_div(&ln3)),
        BoundReading::MixedBase => {
            let ln2 = Interval::from_integer(2).ln(bits).expect("positive");
            x.ln(bits).and_then(|l| l.checked_div(&(&ln2 * &ln3)))
        }
    };
    out.expect("X(m) > 1 for every m >= 1")
        .round_outward(bits + 8)
}

/// Certified `lhs <= rhs`, refining the logarithms until decided.
fn inequality_holds(reading: BoundReading, m: u64) -> (bool, RationalInterval) {
    let lhs = Rational::from_integer(bound_lhs(m).into());
    let mut bits = START_BITS;
    loop {
        let rhs = bound_rhs(reading, m, bits);
        if let Some(holds) = rhs.ge_point(&lhs) {
            return (holds, rhs);
        }
        // lhs is an integer and rhs irrational, so refinement terminates
        assert!(bits < MAX_BITS, "undecided bound comparison at m = {m}");
        bits *= 2;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub m: u64,
    pub lhs: i64,
    pub rhs_lower: f64,
    pub rhs_upper: f64,
    pub holds: bool,
}

fn bound_row(reading: BoundReading, m: u64) -> BoundRow {
    let (holds, rhs) = inequality_holds(reading, m);
    BoundRow {
        m,
        lhs: bound_lhs(m),
        rhs_lower: rational_to_f64(rhs.lo()),
        rhs_upper: rational_to_f64(rhs.hi()),
        holds,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReadingOutcome {
    pub reading: BoundReading,
    /// Largest `m <= BOUND_SCAN_LIMIT` satisfying the inequality, if it
    /// fails for every larger `m` in the scan. `None` means no crossover.
    pub m_max: Option<u64>,
    pub deviation_from_published: Option<i64>,
}

/// Largest satisfying `m`, provided every `m` above it up to the scan
/// limit fails.
///
/// Same answer as testing each `m` in turn, but whole blocks are settled
/// at once: the right-hand side increases with `m`, and the left-hand side
/// over `[a, b]` lies between `(a - 2 floor(log3 b) - 34) / 18` and
/// `(b - 2 floor(log3 a) - 34) / 18`, floored. Only blocks straddling the
/// crossover get split down to single `m`.
fn crossover(reading: BoundReading) -> Option<u64> {
    match last_holding(reading, 1, BOUND_SCAN_LIMIT) {
        Some(m) if m < BOUND_SCAN_LIMIT => Some(m),
        _ => None,
    }
}

fn lhs_range(a: u64, b: u64) -> (i64, i64) {
    let lo = a as i64 - 2 * floor_log(b, 3) as i64 - 34;
    let hi = b as i64 - 2 * floor_log(a, 3) as i64 - 34;
    (Integer::div_floor(&lo, &18), Integer::div_floor(&hi, &18))
}

/// Largest `m` in `[a, b]` where the inequality holds.
fn last_holding(reading: BoundReading, a: u64, b: u64) -> Option<u64> {
    if a == b {
        return inequality_holds(reading, a).0.then_some(a);
    }
    let (lhs_lo, lhs_hi) = lhs_range(a, b);
    let rhs_b = bound_rhs(reading, b, START_BITS);
    if rhs_b.ge_point(&Rational::from_integer(lhs_lo.into())) == Some(false) {
        return None;
    }
    let rhs_a = bound_rhs(reading, a, START_BITS);
    if rhs_a.ge_point(&Rational::from_integer(lhs_hi.into())) == Some(true) {
        return Some(b);
    }
    let mid = a + (b - a) / 2;
    last_holding(reading, mid + 1, b).or_else(|| last_holding(reading, a, mid))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub m_max: u64,
    pub n_max: u64,
    pub reading: BoundReading,
    /// Inequality evaluations around the crossover, plus `m = 10`.
    pub trace: Vec<BoundRow>,
    pub index_bound_lower: f64,
    pub index_bound_upper: f64,
    pub readings: Vec<ReadingOutcome>,
    pub published_m_max: u64,
    pub published_n_max: u64,
    /// Set when the certified crossover differs from the published bounds.
    pub deviates: bool,
}

/// Largest integer strictly below every point of `x`.
fn largest_integer_below(x: &RationalInterval) -> Option<i64> {
    let hi_ceil = x.hi().ceil().to_integer();
    let lo_ceil = x.lo().ceil().to_integer();
    (hi_ceil == lo_ceil).then(|| i64::try_from(hi_ceil - 1).expect("small index"))
}

pub fn n_bound_for(m_max: u64) -> (u64, RationalInterval) {
    let mut bits = START_BITS;
    loop {
        let x = index_bound(m_max, bits);
        if let Some(n) = largest_integer_below(&x) {
            return (n.max(0) as u64, x);
        }
        assert!(bits < MAX_BITS, "index bound straddles an integer");
        bits *= 2;
    }
}

/// Derive `m_max` and `n_max` under [`BoundReading::MixedBase`], recording
/// what the other readings give.
pub fn derive_bounds() -> BoundResult {
    let readings: Vec<ReadingOutcome> = BoundReading::ALL
        .par_iter()
        .map(|&reading| {
            let m_max = crossover(reading);
            ReadingOutcome {
                reading,
                m_max,
                deviation_from_published: m_max.map(|m| m as i64 - PUBLISHED_M_MAX as i64),
            }
        })
        .collect();
    let reading = BoundReading::MixedBase;
    let m_max = readings[0]
        .m_max
        .expect("the mixed-base reading has a crossover");
    let (n_max, x) = n_bound_for(m_max);
    let mut trace = vec![bound_row(reading, 10)];
    trace.extend((m_max.saturating_sub(2).max(11)..=m_max + 2).map(|m| bound_row(reading, m)));
    BoundResult {
        m_max,
        n_max,
        reading,
        trace,
        index_bound_lower: rational_to_f64(x.lo()),
        index_bound_upper: rational_to_f64(x.hi()),
        readings,
        published_m_max: PUBLISHED_M_MAX,
        published_n_max: PUBLISHED_N_MAX,
        deviates: m_max != PUBLISHED_M_MAX || n_max != PUBLISHED_N_MAX,
    }
}

/// Outcome of a [`FactorialCursor`] lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Lookup {
    /// `x = m!`
    Factorial(u64),
    /// `below! < x < (below + 1)!`
    Between { below: u64 },
    /// `x < 0! = 1`
    BelowOne,
}

/// Running `(m, m!)` for queries in non-decreasing order; each factorial
/// is one multiplication away from the previous one.
#[derive(Debug, Clone)]
pub struct FactorialCursor {
    m: u64,
    value: BigNat,
    last_query: Option<BigNat>,
    multiplications: u64,
}

impl Default for FactorialCursor {
    fn default() -> Self {
        Self::new()
    }
}

impl FactorialCursor {
    pub fn new() -> Self {
        Self {
            m: 0,
            value: BigNat::one(),
            last_query: None,
            multiplications: 0,
        }
    }

    pub fn position(&self) -> (u64, &BigNat) {
        (self.m, &self.value)
    }

    pub fn multiplications(&self) -> u64 {
        self.multiplications
    }

    pub fn lookup(&mut self, x: &BigNat) -> Result<Lookup> {
        if self.last_query.as_ref().is_some_and(|last| x < last) {
            return Err(Error::OutOfOrder);
        }
        while &self.value < x {
            self.m += 1;
            self.value *= self.m;
            self.multiplications += 1;
        }
        self.last_query = Some(x.clone());
        Ok(match self.value.cmp(x) {
            Ordering::Equal => Lookup::Factorial(self.m),
            _ if self.m == 0 => Lookup::BelowOne,
            _ => Lookup::Between { below: self.m - 1 },
        })
    }

    /// `Some(m)` when `x = m!`.
    pub fn is_factorial(&mut self, x: &BigNat) -> Result<Option<u64>> {
        Ok(match self.lookup(x)? {
            Lookup::Factorial(m) => Some(m),
            _ => None,
        })
    }
}

fn factorial(m: u64) -> BigNat {
    (1..=m).fold(BigNat::one(), |acc, k| acc * k)
}

/// Recompute `m! + 1 = u^2` from scratch.
pub fn is_brocard_pair(m: u64, u: &BigNat) -> bool {
    factorial(m) + 1u32 == u * u
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Solution {
    pub m: u64,
    #[serde(serialize_with = "decimal::big")]
    pub u: BigNat,
    /// Narayana index with `a_n = u`, for the Narayana search.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub candidates: u64,
    /// Candidates strictly between two consecutive factorials.
    pub bracketed: u64,
    /// `m! + 1` not a perfect square.
    pub non_square: u64,
    pub factorial_steps: u64,
}

impl SearchStats {
    fn merge(self, o: SearchStats) -> SearchStats {
        SearchStats {
            candidates: self.candidates + o.candidates,
            bracketed: self.bracketed + o.bracketed,
            non_square: self.non_square + o.non_square,
            factorial_steps: self.factorial_steps + o.factorial_steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchKind {
    NarayanaIndex,
    Factorial,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    pub kind: SearchKind,
    pub from: u64,
    pub to: u64,
    pub solutions: Vec<Solution>,
    pub stats: SearchStats,
}

const SEARCH_CHUNK: u64 = 128;

fn scan_chunk(lo: u64, hi: u64) -> Result<(Vec<Solution>, SearchStats)> {
    let mut window = narayana_window(lo);
    let mut cursor = FactorialCursor::new();
    let mut stats = SearchStats::default();
    let mut solutions = Vec::new();
    for n in lo..=hi {
        let u = window.first();
        let t = u * u - 1u32;
        stats.candidates += 1;
        match cursor.lookup(&t)? {
            Lookup::Factorial(m) => {
                if is_brocard_pair(m, u) {
                    solutions.push(Solution {
                        m,
                        u: u.clone(),
                        n: Some(n),
                    });
                }
            }
            Lookup::Between { .. } | Lookup::BelowOne => stats.bracketed += 1,
        }
        window.advance();
    }
    stats.factorial_steps = cursor.multiplications();
    Ok((solutions, stats))
}

/// Every `4 <= n <= n_max` with `a_n^2 - 1` a factorial.
///
/// The range is split into contiguous chunks, each with its own window
/// (seeded by index doubling) and cursor; results merge in index order.
pub fn search_narayana(n_max: u64) -> Result<SearchOutcome> {
    if n_max < 4 {
        return Err(Error::OutOfRange(format!(
            "search needs n_max >= 4, got {n_max}"
        )));
    }
    let parts: Vec<Result<(Vec<Solution>, SearchStats)>> = chunks(4, n_max, SEARCH_CHUNK)
        .into_par_iter()
        .map(|(lo, hi)| scan_chunk(lo, hi))
        .collect();
    let mut solutions = Vec::new();
    let mut stats = SearchStats::default();
    for p in parts {
        let (s, st) = p?;
        solutions.extend(s);
        stats = stats.merge(st);
    }
    Ok(SearchOutcome {
        kind: SearchKind::NarayanaIndex,
        from: 4,
        to: n_max,
        solutions,
        stats,
    })
}

/// Every `1 <= m <= m_max` with `m! + 1` a perfect square.
pub fn search_general(m_max: u64) -> Result<SearchOutcome> {
    if m_max < 1 {
        return Err(Error::OutOfRange("search needs m_max >= 1".into()));
    }
    let mut fact = BigNat::one();
    let mut stats = SearchStats::default();
    let mut solutions = Vec::new();
    for m in 1..=m_max {
        fact *= m;
        stats.factorial_steps += 1;
        stats.candidates += 1;
        let x = &fact + 1u32;
        let u = x.sqrt();
        if &u * &u == x {
            debug_assert!(is_brocard_pair(m, &u));
            solutions.push(Solution { m, u, n: None });
        } else {
            stats.non_square += 1;
        }
    }
    Ok(SearchOutcome {
        kind: SearchKind::Factorial,
        from: 1,
        to: m_max,
        solutions,
        stats,
    })
}

/// Evidence that `a_n^2 - 1` is not a factorial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub n: u64,
    #[serde(serialize_with = "decimal::big")]
    pub t: BigNat,
    /// `below! < t < (below + 1)!`
    pub below: u64,
    /// `v3(t)` from the residue laws.
    pub combined_v3: Valuation,
    pub v3_below: Valuation,
    pub v3_above: Valuation,
    /// Neither bracketing factorial has the right 3-adic valuation, so the
    /// valuation filter alone rules the index out.
    pub excluded_by_valuation: bool,
}

impl Certificate {
    /// Re-verify every claim with fresh arithmetic.
    pub fn check(&self) -> bool {
        let u = crate::narayana::narayana(self.n);
        let t = &u * &u - 1u32;
        let lo = factorial(self.below);
        let hi = &lo * (self.below + 1);
        let v3_t = vp(&t, 3).ok();
        let v_lo = vp_factorial(self.below, 3).ok();
        let v_hi = vp_factorial(self.below + 1, 3).ok();
        t == self.t
            && lo < t
            && t < hi
            && v3_t == Some(self.combined_v3)
            && v_lo == Some(self.v3_below)
            && v_hi == Some(self.v3_above)
            && self.excluded_by_valuation
                == (self.v3_below != self.combined_v3 && self.v3_above != self.combined_v3)
    }
}

/// Certificate for index `n >= 4`, or `None` when `a_n^2 - 1` is a
/// factorial (a genuine solution).
pub fn certify_nonsolution(n: u64) -> Result<Option<Certificate>> {
    let combined_v3 = combined_v3_upper(n)?;
    let u = narayana_window(n).values[0].clone();
    let t = &u * &u - 1u32;
    let mut cursor = FactorialCursor::new();
    let below = match cursor.lookup(&t)? {
        Lookup::Factorial(_) => return Ok(None),
        Lookup::Between { below } => below,
        Lookup::BelowOne => unreachable!("a_n^2 - 1 >= 3 for n >= 4"),
    };
    let v3_below = vp_factorial(below, 3)?;
    let v3_above = vp_factorial(below + 1, 3)?;
    Ok(Some(Certificate {
        n,
        t,
        below,
        combined_v3,
        v3_below,
        v3_above,
        excluded_by_valuation: v3_below != combined_v3 && v3_above != combined_v3,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: u64) -> BigNat {
        BigNat::from(x)
    }

    #[test]
    fn combined_examples() {
        assert_eq!(combined_v3_upper(10).unwrap(), Valuation::Finite(2));
        assert_eq!(combined_v3_upper(4).unwrap(), Valuation::Finite(1));
        assert_eq!(combined_v3_upper(18).unwrap(), Valuation::Finite(4));
        assert!(combined_v3_upper(3).is_err());
    }

    #[test]
    fn lhs_is_exact() {
        // (1/9)(5 - 2 - 17) = -14/9
        assert_eq!(bound_lhs(10), -2);
        // (1/9)(110.5 - 4 - 17) = 9.94...
        assert_eq!(bound_lhs(221), 9);
        assert_eq!(bound_lhs(222), 10);
    }

    #[test]
    fn small_m_is_trivially_admissible() {
        for r in BoundReading::ALL {
            assert!(inequality_holds(r, 10).0);
        }
    }

    #[test]
    fn index_bound_at_published_m() {
        let (n, x) = n_bound_for(221);
        assert_eq!(n, 1386);
        assert!(rational_to_f64(x.lo()) > 1386.9 && rational_to_f64(x.hi()) < 1387.0);
    }

    #[test]
    fn mixed_base_crossover() {
        assert!(inequality_holds(BoundReading::MixedBase, 221).0);
        assert!(!inequality_holds(BoundReading::MixedBase, 222).0);
    }

    #[test]
    fn cursor_examples() {
        let mut c = FactorialCursor::new();
        assert_eq!(c.is_factorial(&big(24)).unwrap(), Some(4));
        assert_eq!(c.is_factorial(&big(25)).unwrap(), None);
        assert_eq!(c.is_factorial(&big(5040)).unwrap(), Some(7));
        assert_eq!(c.lookup(&big(5041)).unwrap(), Lookup::Between { below: 7 });
        assert_eq!(c.is_factorial(&big(24)), Err(Error::OutOfOrder));
        assert_eq!(c.multiplications(), 8);
        let mut fresh = FactorialCursor::new();
        assert_eq!(fresh.lookup(&big(0)).unwrap(), Lookup::BelowOne);
        assert_eq!(fresh.lookup(&big(1)).unwrap(), Lookup::Factorial(0));
    }

    #[test]
    fn general_search_small() {
        let r = search_general(10).unwrap();
        let pairs: Vec<(u64, u64)> = r
            .solutions
            .iter()
            .map(|s| (s.m, s.u.to_string().parse().unwrap()))
            .collect();
        assert_eq!(pairs, vec![(4, 5), (5, 11), (7, 71)]);
        assert!(search_general(3).unwrap().solutions.is_empty());
        assert!(search_general(0).is_err());
    }

    #[test]
    fn narayana_search_small() {
        assert!(search_narayana(4).unwrap().solutions.is_empty());
        let r = search_narayana(100).unwrap();
        assert!(r.solutions.is_empty());
        assert_eq!(r.stats.candidates, 97);
        assert!(search_narayana(3).is_err());
    }

    #[test]
    fn certificate_examples() {
        let c = certify_nonsolution(5).unwrap().unwrap();
        assert_eq!((c.t.clone(), c.below), (big(8), 3));
        assert!(c.check());
        let c = certify_nonsolution(10).unwrap().unwrap();
        assert_eq!((c.t.clone(), c.below), (big(360), 5));
        assert!(c.check());
        let c = certify_nonsolution(7).unwrap().unwrap();
        assert_eq!((c.t.clone(), c.below), (big(35), 4));
        assert!(c.check());
        assert!(certify_nonsolution(2).is_err());
    }

    #[test]
    fn tampered_certificate_fails_check() {
        let mut c = certify_nonsolution(50).unwrap().unwrap();
        assert!(c.check());
        c.below += 1;
        assert!(!c.check());
    }

    #[test]
    fn brocard_pairs() {
        assert!(is_brocard_pair(4, &big(5)));
        assert!(is_brocard_pair(7, &big(71)));
        assert!(!is_brocard_pair(6, &big(27)));
    }
}
