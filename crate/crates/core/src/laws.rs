//! Residue-class valuation laws for `v3(a_i)`, `v3(a_i - 1)` and
//! `v3(a_i + 1)`, and the machinery that checks them against brute force.
//!
//! Each law is a list of [`ResidueRule`]s keyed on `i mod 8` or `i mod 24`.
//! Two variants exist per target:
//!
//! - [`LawVariant::Literal`] reproduces the printed tables verbatim,
//!   including the `v3(a_i)` table that lists `i ≡ 0 (mod 24)` twice, never
//!   covers `i ≡ 16 (mod 24)`, and uses `v2` where the data needs `v3`.
//! - [`LawVariant::Corrected`] is the smallest edit that agrees with the
//!   oracle: `v2 -> v3` in the shift rows and the second `0 mod 24` row moved
//!   to `16 mod 24`. The `a_i - 1` and `a_i + 1` tables need no edit.
//!
//! The oracle ([`v3_oracle`]) reads `a_i mod 3^cap` from the modular
//! recurrence. A zero residue only proves `v >= cap`; callers escalate the
//! cap until the valuation is pinned.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::DefectKind;
use crate::narayana::{narayana, narayana_mod_in, narayana_window_mod, Modular, Window};
use crate::padic::vp;
use crate::{BigNat, Error, Result, Valuation};

/// Which shift of `a_i` a law describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Target {
    #[serde(rename = "a")]
    A,
    #[serde(rename = "a-1")]
    AMinus1,
    #[serde(rename = "a+1")]
    APlus1,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::A, Target::AMinus1, Target::APlus1];

    pub fn shift(self) -> i64 {
        match self {
            Target::A => 0,
            Target::AMinus1 => -1,
            Target::APlus1 => 1,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::A => "a",
            Target::AMinus1 => "a-1",
            Target::APlus1 => "a+1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawVariant {
    Literal,
    Corrected,
}

impl fmt::Display for LawVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LawVariant::Literal => "literal",
            LawVariant::Corrected => "corrected",
        })
    }
}

/// Right-hand side of a rule, evaluated at the index `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    Constant(u64),
    /// `v3(i + offset) + addend`
    ShiftV3 {
        offset: i64,
        addend: u64,
    },
    /// `v3(prod_j (i + offset_j)) + addend`
    ProductV3 {
        offsets: Vec<i64>,
        addend: u64,
    },
    /// `v2(i + offset) + addend`
    ShiftV2 {
        offset: i64,
        addend: u64,
    },
}

fn shifted_valuation(i: u64, offset: i64, p: u64) -> Valuation {
    let x = i as i128 + offset as i128;
    vp(&x, p).expect("2 and 3 are prime")
}

impl Formula {
    pub fn eval(&self, i: u64) -> Valuation {
        match self {
            Formula::Constant(c) => Valuation::Finite(*c),
            Formula::ShiftV3 { offset, addend } => shifted_valuation(i, *offset, 3) + *addend,
            Formula::ShiftV2 { offset, addend } => shifted_valuation(i, *offset, 2) + *addend,
            Formula::ProductV3 { offsets, addend } => {
                let product: BigInt = offsets
                    .iter()
                    .map(|o| BigInt::from(i as i128 + *o as i128))
                    .product();
                vp(&product, 3).expect("3 is prime") + *addend
            }
        }
    }
}

fn fmt_shift(f: &mut fmt::Formatter<'_>, offset: i64) -> fmt::Result {
    match offset {
        0 => f.write_str("i"),
        o if o > 0 => write!(f, "i+{o}"),
        o => write!(f, "i-{}", -o),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Constant(c) => write!(f, "{c}"),
            Formula::ShiftV3 { offset, addend } => {
                f.write_str("v3(")?;
                fmt_shift(f, *offset)?;
                write!(f, ")+{addend}")
            }
            Formula::ShiftV2 { offset, addend } => {
                f.write_str("v2(")?;
                fmt_shift(f, *offset)?;
                write!(f, ")+{addend}")
            }
            Formula::ProductV3 { offsets, addend } => {
                f.write_str("v3(")?;
                for o in offsets {
                    f.write_str("(")?;
                    fmt_shift(f, *o)?;
                    f.write_str(")")?;
                }
                write!(f, ")+{addend}")
            }
        }
    }
}

/// `i ≡ residue (mod modulus)  =>  formula`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidueRule {
    pub modulus: u64,
    pub residue: u64,
    pub formula: Formula,
    /// Position of the printed row this rule came from; one row such as
    /// `i ≡ 1,2,3,4,6 (mod 8)` expands to several rules.
    pub row: usize,
}

impl ResidueRule {
    pub fn matches(&self, i: u64) -> bool {
        i % self.modulus == self.residue
    }
}

impl fmt::Display for ResidueRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "i ≡ {} (mod {}): {}",
            self.residue, self.modulus, self.formula
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValuationLaw {
    pub target: Target,
    pub variant: LawVariant,
    pub rules: Vec<ResidueRule>,
}

/// One printed row: residues sharing a modulus and a formula.
struct Row(u64, &'static [u64], Formula);

fn v3(offset: i64, addend: u64) -> Formula {
    Formula::ShiftV3 { offset, addend }
}

fn v2(offset: i64, addend: u64) -> Formula {
    Formula::ShiftV2 { offset, addend }
}

fn rows_for(target: Target, variant: LawVariant) -> Vec<Row> {
    use Formula::Constant as C;
    use LawVariant::*;
    match (target, variant) {
        (Target::A, Literal) => vec![
            Row(8, &[1, 2, 3, 4, 6], C(0)),
            Row(24, &[5, 7, 13, 15], C(1)),
            Row(24, &[8], C(2)),
            Row(24, &[23], v2(1, 1)),
            Row(24, &[21], v2(3, 1)),
            Row(24, &[0], v2(0, 2)),
            Row(24, &[0], v2(8, 2)),
        ],
        (Target::A, Corrected) => vec![
            Row(8, &[1, 2, 3, 4, 6], C(0)),
            Row(24, &[5, 7, 13, 15], C(1)),
            Row(24, &[8], C(2)),
            Row(24, &[23], v3(1, 1)),
            Row(24, &[21], v3(3, 1)),
            Row(24, &[0], v3(0, 2)),
            Row(24, &[16], v3(8, 2)),
        ],
        (Target::AMinus1, _) => vec![
            Row(8, &[0, 4, 5, 7], C(0)),
            Row(8, &[1], v3(-1, 1)),
            Row(8, &[6], v3(2, 1)),
            Row(24, &[2], v3(-2, 2)),
            Row(24, &[10], C(2)),
            Row(
                24,
                &[18],
                Formula::ProductV3 {
                    offsets: vec![6, 30],
                    addend: 2,
                },
            ),
            Row(24, &[3], v3(-3, 2)),
            Row(24, &[11], v3(13, 2)),
            Row(24, &[19], v3(5, 2)),
        ],
        (Target::APlus1, _) => vec![
            Row(8, &[0, 1, 2, 3, 5, 6, 7], C(0)),
            Row(24, &[4, 12], C(1)),
            Row(24, &[20], v3(4, 1)),
        ],
    }
}

/// Residue classes mod 24 refine every modulus a table uses.
pub const CLASS_MODULUS: u64 = 24;

impl ValuationLaw {
    pub fn new(target: Target, variant: LawVariant) -> Self {
        let rules = rows_for(target, variant)
            .into_iter()
            .enumerate()
            .flat_map(|(row, Row(modulus, residues, formula))| {
                residues.iter().map(move |&residue| ResidueRule {
                    modulus,
                    residue,
                    formula: formula.clone(),
                    row,
                })
            })
            .collect();
        Self {
            target,
            variant,
            rules,
        }
    }

    pub fn matching(&self, i: u64) -> Vec<&ResidueRule> {
        self.rules.iter().filter(|r| r.matches(i)).collect()
    }

    /// Residues mod 24 matched by no rule or by more than one.
    pub fn coverage_defects(&self) -> Vec<(u64, DefectKind)> {
        (0..CLASS_MODULUS)
            .filter_map(|r| match self.matching(r).len() {
                0 => Some((r, DefectKind::Uncovered)),
                1 => None,
                _ => Some((r, DefectKind::Overlap)),
            })
            .collect()
    }

    pub fn is_total(&self) -> bool {
        self.coverage_defects().is_empty()
    }
}

fn class_label(i: u64) -> String {
    format!("{} mod {CLASS_MODULUS}", i % CLASS_MODULUS)
}

/// Value of the unique rule matching `i`.
pub fn law_eval(law: &ValuationLaw, i: u64) -> Result<Valuation> {
    match law.matching(i).as_slice() {
        [rule] => Ok(rule.formula.eval(i)),
        [] => Err(Error::TableDefect {
            index: i,
            kind: DefectKind::Uncovered,
            class: class_label(i),
        }),
        _ => Err(Error::TableDefect {
            index: i,
            kind: DefectKind::Overlap,
            class: class_label(i),
        }),
    }
}

/// Result of one oracle evaluation at a fixed cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleValue {
    Exact(Valuation),
    /// The residue vanished mod `3^cap`.
    AtLeast(u32),
}

pub const MAX_CAP: u32 = 64;
pub const MIN_CAP: u32 = 8;
/// `3^40 < 2^64`, so products of residues fit in `u128`.
const NARROW_CAP: u32 = 40;
/// Below this index a vanishing residue is settled with exact integers.
const EXACT_INDEX_LIMIT: u64 = 400;

fn pow3(e: u32) -> BigNat {
    num_traits::pow(BigNat::from(3u32), e as usize)
}

fn pow3_u128(e: u32) -> u128 {
    3u128.pow(e)
}

/// `(a_i + shift) mod 3^cap`.
fn shifted_residue(target: Target, i: u64, cap: u32) -> BigNat {
    let m = pow3(cap);
    let a = if cap <= NARROW_CAP {
        BigNat::from(narayana_mod_in(i, pow3_u128(cap)).expect("3^cap >= 3"))
    } else {
        narayana_mod_in(i, m.clone()).expect("3^cap >= 3")
    };
    match target.shift() {
        0 => a,
        1 => (a + 1u32) % &m,
        _ => (a + &m - 1u32) % &m,
    }
}

fn exact_shifted(target: Target, i: u64) -> BigInt {
    BigInt::from(narayana(i)) + target.shift()
}

fn from_residue(residue: &BigNat, cap: u32) -> OracleValue {
    if residue.is_zero() {
        OracleValue::AtLeast(cap)
    } else {
        OracleValue::Exact(vp(residue, 3).expect("3 is prime"))
    }
}

/// `v3` of the target at index `i`, read from `a_i mod 3^cap`.
///
/// Small indices whose residue vanishes are settled exactly, which is how
/// `a_i - 1 = 0` at `i = 1, 2, 3` comes out as `∞`.
pub fn v3_oracle(target: Target, i: u64, cap: u32) -> Result<OracleValue> {
    if cap < 1 {
        return Err(Error::OutOfRange("oracle cap must be positive".into()));
    }
    let residue = shifted_residue(target, i, cap);
    let value = from_residue(&residue, cap);
    if value == OracleValue::AtLeast(cap) && i < EXACT_INDEX_LIMIT {
        return Ok(OracleValue::Exact(vp(&exact_shifted(target, i), 3)?));
    }
    Ok(value)
}

/// [`v3_oracle`] with the cap doubled until the valuation is pinned.
pub fn v3_resolved(target: Target, i: u64, initial_cap: u32) -> Result<Valuation> {
    let mut cap = initial_cap.max(1);
    loop {
        match v3_oracle(target, i, cap)? {
            OracleValue::Exact(v) => return Ok(v),
            OracleValue::AtLeast(_) if cap >= MAX_CAP => {
                return Err(Error::CapExceeded { index: i, cap })
            }
            OracleValue::AtLeast(_) => cap = (cap * 2).min(MAX_CAP),
        }
    }
}

/// Starting cap for checking a predicted value.
pub fn starting_cap(prediction: Option<Valuation>, floor: u32) -> u32 {
    let predicted = match prediction {
        Some(Valuation::Finite(v)) => (v as u32).saturating_add(3),
        _ => 0,
    };
    predicted.max(MIN_CAP).max(floor).min(MAX_CAP)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub index: u64,
    pub class: String,
    /// `None` when the table defines no unique value at this index.
    pub law_value: Option<Valuation>,
    pub oracle_value: Valuation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defect: Option<DefectKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiscrepancyReport {
    pub target: Target,
    pub variant: LawVariant,
    pub from: u64,
    pub to: u64,
    pub entries: Vec<Discrepancy>,
}

impl DiscrepancyReport {
    pub fn is_clean(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of entries per residue class mod 24, split by kind.
    pub fn by_class(&self) -> BTreeMap<u64, ClassTally> {
        let mut out: BTreeMap<u64, ClassTally> = BTreeMap::new();
        for e in &self.entries {
            let t = out.entry(e.index % CLASS_MODULUS).or_default();
            match e.defect {
                Some(DefectKind::Uncovered) => t.uncovered += 1,
                Some(DefectKind::Overlap) => t.overlap += 1,
                None => t.mismatch += 1,
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassTally {
    pub mismatch: u64,
    pub uncovered: u64,
    pub overlap: u64,
}

const CHUNK: u64 = 4096;

/// Split `[from, to]` into contiguous chunks.
pub(crate) fn chunks(from: u64, to: u64, size: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut lo = from;
    while lo <= to {
        let hi = to.min(lo.saturating_add(size - 1));
        out.push((lo, hi));
        if hi == u64::MAX {
            break;
        }
        lo = hi + 1;
    }
    out
}

fn check_index(
    law: &ValuationLaw,
    i: u64,
    a_mod: u128,
    cap_floor: u32,
) -> Result<Option<Discrepancy>> {
    let (law_value, defect) = match law_eval(law, i) {
        Ok(v) => (Some(v), None),
        Err(Error::TableDefect { kind, .. }) => (None, Some(kind)),
        Err(e) => return Err(e),
    };
    let mut cap = starting_cap(law_value, cap_floor);
    let oracle_value = loop {
        let value = if cap <= NARROW_CAP {
            let m = pow3_u128(cap);
            let shifted = (a_mod % m + m).wrapping_add_signed(law.target.shift() as i128) % m;
            from_residue(&BigNat::from(shifted), cap)
        } else {
            v3_oracle(law.target, i, cap)?
        };
        match value {
            OracleValue::Exact(v) => break v,
            OracleValue::AtLeast(_) if i < EXACT_INDEX_LIMIT => {
                break vp(&exact_shifted(law.target, i), 3)?
            }
            OracleValue::AtLeast(_) if cap >= MAX_CAP => {
                return Err(Error::CapExceeded { index: i, cap })
            }
            OracleValue::AtLeast(_) => cap = (cap * 2).min(MAX_CAP),
        }
    };
    if defect.is_none() && law_value == Some(oracle_value) {
        return Ok(None);
    }
    Ok(Some(Discrepancy {
        index: i,
        class: class_label(i),
        law_value,
        oracle_value,
        defect,
    }))
}

/// Compare `law` with the oracle for every `1 <= i <= i_max`.
///
/// Chunks run in parallel, each from its own modular window; the merged
/// entries are sorted by index whatever the thread count.
pub fn verify_law(law: &ValuationLaw, i_max: u64, initial_cap: u32) -> Result<DiscrepancyReport> {
    if i_max < 1 {
        return Err(Error::OutOfRange("law sweep needs i_max >= 1".into()));
    }
    let m = pow3_u128(NARROW_CAP);
    let arith = Modular::new(m)?;
    let parts: Vec<Result<Vec<Discrepancy>>> = chunks(1, i_max, CHUNK)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut w: Window<u128> = narayana_window_mod(lo, m)?;
            let mut found = Vec::new();
            for i in lo..=hi {
                if let Some(d) = check_index(law, i, w.values[0], initial_cap)? {
                    found.push(d);
                }
                w.advance_with(&arith);
            }
            Ok(found)
        })
        .collect();
    let mut entries = Vec::new();
    for part in parts {
        entries.extend(part?);
    }
    Ok(DiscrepancyReport {
        target: law.target,
        variant: law.variant,
        from: 1,
        to: i_max,
        entries,
    })
}

/// Congruences for `a` at indices `8 s 3^n + r`, `r = 0, 1, 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CongruenceFamily {
    /// Modulo `3^(n+3)`, for `n >= 1`.
    Shallow,
    /// Modulo `3^(n+4)`, for `n >= 2`.
    Deep,
}

/// `coefficient * s * 3^(n + exponent_offset)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClaimTerm {
    pub coefficient: u64,
    pub exponent_offset: u32,
}

/// `a_(8 s 3^n + r) ≡ sum(terms) + constant (mod 3^(n + modulus_offset))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CongruenceClaim {
    pub residue_offset: u64,
    pub terms: Vec<ClaimTerm>,
    pub constant: u64,
    pub modulus_offset: u32,
}

impl CongruenceClaim {
    pub fn index(&self, s: u64, n: u32) -> Option<u64> {
        3u64.checked_pow(n)?
            .checked_mul(s)?
            .checked_mul(8)?
            .checked_add(self.residue_offset)
    }

    pub fn modulus(&self, n: u32) -> BigNat {
        pow3(n + self.modulus_offset)
    }

    /// Predicted residue in `[0, 3^(n + c))`.
    pub fn predict(&self, s: u64, n: u32) -> BigNat {
        let m = self.modulus(n);
        let total: BigNat = self
            .terms
            .iter()
            .map(|t| BigNat::from(t.coefficient) * s * pow3(n + t.exponent_offset))
            .sum::<BigNat>()
            + self.constant;
        total % m
    }
}

fn term(coefficient: u64, exponent_offset: u32) -> ClaimTerm {
    ClaimTerm {
        coefficient,
        exponent_offset,
    }
}

impl CongruenceFamily {
    pub fn min_n(self) -> u32 {
        match self {
            CongruenceFamily::Shallow => 1,
            CongruenceFamily::Deep => 2,
        }
    }

    pub fn claims(self) -> [CongruenceClaim; 3] {
        let claim = |r, terms, constant, c| CongruenceClaim {
            residue_offset: r,
            terms,
            constant,
            modulus_offset: c,
        };
        match self {
            CongruenceFamily::Shallow => [
                claim(0, vec![term(2, 2)], 0, 3),
                claim(1, vec![term(2, 2), term(1, 1)], 1, 3),
                claim(2, vec![term(2, 2)], 1, 3),
            ],
            CongruenceFamily::Deep => [
                claim(0, vec![term(2, 3), term(2, 2)], 0, 4),
                claim(1, vec![term(5, 2), term(1, 1)], 1, 4),
                claim(2, vec![term(2, 3), term(5, 2)], 1, 4),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CongruenceMismatch {
    pub s: u64,
    pub n: u32,
    pub r: u64,
    pub index: u64,
    #[serde(serialize_with = "crate::decimal::big")]
    pub expected: BigNat,
    #[serde(serialize_with = "crate::decimal::big")]
    pub actual: BigNat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CongruenceReport {
    pub family: CongruenceFamily,
    pub s_max: u64,
    pub checked: u64,
    pub entries: Vec<CongruenceMismatch>,
}

impl CongruenceReport {
    pub fn is_clean(&self) -> bool {
        self.entries.is_empty()
    }
}

fn residue_at(index: u64, modulus: &BigNat) -> BigNat {
    match modulus.to_u64() {
        Some(m) => BigNat::from(narayana_mod_in(index, m as u128).expect("modulus >= 3")),
        None => narayana_mod_in(index, modulus.clone()).expect("modulus >= 3"),
    }
}

fn sweep_congruences(
    family: CongruenceFamily,
    s_max: u64,
    pairs: Vec<(u64, u32)>,
) -> Result<CongruenceReport> {
    let claims = family.claims();
    let parts: Vec<Result<Vec<CongruenceMismatch>>> = pairs
        .par_iter()
        .map(|&(s, n)| {
            let mut out = Vec::new();
            for claim in &claims {
                let index = claim
                    .index(s, n)
                    .ok_or_else(|| Error::OutOfRange(format!("index 8*{s}*3^{n} overflows")))?;
                let modulus = claim.modulus(n);
                let expected = claim.predict(s, n);
                let actual = residue_at(index, &modulus);
                if actual != expected {
                    out.push(CongruenceMismatch {
                        s,
                        n,
                        r: claim.residue_offset,
                        index,
                        expected,
                        actual,
                    });
                }
            }
            Ok(out)
        })
        .collect();
    let mut entries = Vec::new();
    for p in parts {
        entries.extend(p?);
    }
    Ok(CongruenceReport {
        family,
        s_max,
        checked: pairs.len() as u64 * 3,
        entries,
    })
}

/// Check the family for `1 <= s <= s_max` and `min_n <= n <= n_max`.
pub fn verify_congruences(
    family: CongruenceFamily,
    s_max: u64,
    n_max: u32,
) -> Result<CongruenceReport> {
    if s_max < 1 || n_max < family.min_n() {
        return Err(Error::OutOfRange(format!(
            "congruence sweep needs s_max >= 1 and n_max >= {}",
            family.min_n()
        )));
    }
    let pairs = (1..=s_max)
        .flat_map(|s| (family.min_n()..=n_max).map(move |n| (s, n)))
        .collect();
    sweep_congruences(family, s_max, pairs)
}

/// Check the family for `1 <= s <= s_max` and every admissible `n` with
/// `8 s 3^n + 2 <= index_limit`.
pub fn verify_congruences_within(
    family: CongruenceFamily,
    s_max: u64,
    index_limit: u64,
) -> Result<CongruenceReport> {
    if s_max < 1 {
        return Err(Error::OutOfRange(
            "congruence sweep needs s_max >= 1".into(),
        ));
    }
    let mut pairs = Vec::new();
    for s in 1..=s_max {
        let mut n = family.min_n();
        while let Some(top) = 3u64
            .checked_pow(n)
            .and_then(|p| p.checked_mul(8 * s))
            .and_then(|x| x.checked_add(2))
        {
            if top > index_limit {
                break;
            }
            pairs.push((s, n));
            n += 1;
        }
    }
    sweep_congruences(family, s_max, pairs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivisibilityFailure {
    pub index: u64,
    pub class: String,
    pub required_divisor: u64,
    pub residue: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivisibilityReport {
    pub i_max: u64,
    pub checked: u64,
    pub entries: Vec<DivisibilityFailure>,
}

/// Required divisor of `a_i` by class mod 24: 9 for 16 and 21, 3 for 7.
pub fn required_divisor(i: u64) -> Option<u64> {
    match i % 24 {
        16 | 21 => Some(9),
        7 => Some(3),
        _ => None,
    }
}

/// `9 | a_i` for `i ≡ 16, 21 (mod 24)` and `3 | a_i` for `i ≡ 7 (mod 24)`,
/// over `0 <= i <= i_max`.
pub fn check_divisibility_classes(i_max: u64) -> DivisibilityReport {
    let arith = Modular::new(9u64).expect("9 >= 2");
    let mut w = Window {
        index: 0,
        values: [0u64, 1, 1],
    };
    let mut entries = Vec::new();
    let mut checked = 0;
    for i in 0..=i_max {
        if let Some(d) = required_divisor(i) {
            checked += 1;
            let residue = w.values[0] % d;
            if residue != 0 {
                entries.push(DivisibilityFailure {
                    index: i,
                    class: class_label(i),
                    required_divisor: d,
                    residue,
                });
            }
        }
        w.advance_with(&arith);
    }
    DivisibilityReport {
        i_max,
        checked,
        entries,
    }
}

/// Literal-versus-corrected comparison for one target.
#[derive(Debug, Clone, Serialize)]
pub struct LawErrata {
    pub target: Target,
    pub literal_table: Vec<String>,
    pub corrected_table: Vec<String>,
    pub literal_coverage_defects: Vec<(u64, DefectKind)>,
    pub literal_by_class: BTreeMap<u64, ClassTally>,
    pub literal_discrepancies: usize,
    pub corrected_discrepancies: usize,
    /// First few literal entries, for illustration.
    pub literal_examples: Vec<Discrepancy>,
    /// Everything the corrected table gets wrong; expected empty.
    pub corrected_entries: Vec<Discrepancy>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrataReport {
    pub i_max: u64,
    pub laws: Vec<LawErrata>,
}

impl ErrataReport {
    pub fn corrected_is_clean(&self) -> bool {
        self.laws.iter().all(|l| l.corrected_entries.is_empty())
    }
}

fn table_lines(law: &ValuationLaw) -> Vec<String> {
    let mut rows: BTreeMap<usize, (u64, Vec<u64>, String)> = BTreeMap::new();
    for r in &law.rules {
        let e = rows
            .entry(r.row)
            .or_insert_with(|| (r.modulus, Vec::new(), r.formula.to_string()));
        e.1.push(r.residue);
    }
    rows.into_values()
        .map(|(m, residues, f)| {
            let rs: Vec<String> = residues.iter().map(u64::to_string).collect();
            format!("i ≡ {} (mod {m}): {f}", rs.join(","))
        })
        .collect()
}

const ERRATA_EXAMPLES: usize = 12;

/// Run both variants of every law over `1..=i_max`.
pub fn errata(i_max: u64) -> Result<ErrataReport> {
    let mut laws = Vec::new();
    for target in Target::ALL {
        let literal = ValuationLaw::new(target, LawVariant::Literal);
        let corrected = ValuationLaw::new(target, LawVariant::Corrected);
        let lit = verify_law(&literal, i_max, MIN_CAP)?;
        let cor = verify_law(&corrected, i_max, MIN_CAP)?;
        laws.push(LawErrata {
            target,
            literal_table: table_lines(&literal),
            corrected_table: table_lines(&corrected),
            literal_coverage_defects: literal.coverage_defects(),
            literal_by_class: lit.by_class(),
            literal_discrepancies: lit.entries.len(),
            corrected_discrepancies: cor.entries.len(),
            literal_examples: lit.entries.iter().take(ERRATA_EXAMPLES).cloned().collect(),
            corrected_entries: cor.entries,
        });
    }
    Ok(ErrataReport { i_max, laws })
}

/// Exact `v3(a_i^2 - 1)`, for cross-checks at small indices.
pub fn exact_v3_square_minus_one(i: u64) -> Valuation {
    let a = BigInt::from(narayana(i));
    vp(&(&a * &a - BigInt::one()), 3).expect("3 is prime")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(v: u64) -> Valuation {
        Valuation::Finite(v)
    }

    fn law(t: Target, v: LawVariant) -> ValuationLaw {
        ValuationLaw::new(t, v)
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(
            v3_oracle(Target::A, 8, 6).unwrap(),
            OracleValue::Exact(fin(2))
        );
        assert_eq!(
            v3_oracle(Target::AMinus1, 10, 6).unwrap(),
            OracleValue::Exact(fin(2))
        );
        assert_eq!(
            v3_oracle(Target::APlus1, 20, 6).unwrap(),
            OracleValue::Exact(fin(2))
        );
        for i in 1..=3 {
            for cap in [1, 6, 40, 64] {
                assert_eq!(
                    v3_oracle(Target::AMinus1, i, cap).unwrap(),
                    OracleValue::Exact(Valuation::Infinite)
                );
            }
        }
        assert_eq!(
            v3_oracle(Target::A, 0, 5).unwrap(),
            OracleValue::Exact(Valuation::Infinite)
        );
        assert!(v3_oracle(Target::A, 3, 0).is_err());
    }

    #[test]
    fn oracle_reports_saturation_at_large_index() {
        // a_i for i = 8*3^9 has v3 = 11, so a cap of 4 saturates.
        let i = 8 * 3u64.pow(9);
        assert_eq!(v3_oracle(Target::A, i, 4).unwrap(), OracleValue::AtLeast(4));
        assert_eq!(v3_resolved(Target::A, i, 4).unwrap(), fin(11));
    }

    #[test]
    fn corrected_tables_are_total() {
        for t in Target::ALL {
            assert!(law(t, LawVariant::Corrected).is_total(), "{t}");
        }
        assert!(law(Target::AMinus1, LawVariant::Literal).is_total());
        assert!(law(Target::APlus1, LawVariant::Literal).is_total());
    }

    #[test]
    fn literal_table_defects() {
        let l = law(Target::A, LawVariant::Literal);
        assert_eq!(
            l.coverage_defects(),
            vec![(0, DefectKind::Overlap), (16, DefectKind::Uncovered)]
        );
        assert!(matches!(
            law_eval(&l, 16),
            Err(Error::TableDefect {
                kind: DefectKind::Uncovered,
                ..
            })
        ));
        assert!(matches!(
            law_eval(&l, 48),
            Err(Error::TableDefect {
                kind: DefectKind::Overlap,
                ..
            })
        ));
        assert_eq!(law_eval(&l, 23).unwrap(), fin(4));
    }

    #[test]
    fn law_examples() {
        let minus = law(Target::AMinus1, LawVariant::Corrected);
        let plus = law(Target::APlus1, LawVariant::Corrected);
        assert_eq!(law_eval(&minus, 9).unwrap(), fin(1));
        assert_eq!(law_eval(&plus, 4).unwrap(), fin(1));
        assert_eq!(law_eval(&minus, 3).unwrap(), Valuation::Infinite);
        assert_eq!(law_eval(&minus, 18).unwrap(), fin(4));
        assert_eq!(law_eval(&minus, 11).unwrap(), fin(3));
        assert_eq!(law_eval(&minus, 19).unwrap(), fin(3));
    }

    #[test]
    fn product_rule_at_multiples_of_three() {
        // i = 24k + 18 with k ≡ 0 (mod 3) gives 4
        let minus = law(Target::AMinus1, LawVariant::Corrected);
        for k in (0..300).step_by(3) {
            assert_eq!(law_eval(&minus, 24 * k + 18).unwrap(), fin(4), "k = {k}");
        }
    }

    #[test]
    fn formula_display() {
        let l = law(Target::AMinus1, LawVariant::Corrected);
        let lines = table_lines(&l);
        assert_eq!(lines[0], "i ≡ 0,4,5,7 (mod 8): 0");
        assert!(lines.contains(&"i ≡ 18 (mod 24): v3((i+6)(i+30))+2".to_string()));
        assert!(lines.contains(&"i ≡ 1 (mod 8): v3(i-1)+1".to_string()));
    }

    #[test]
    fn small_sweeps() {
        for t in Target::ALL {
            let r = verify_law(&law(t, LawVariant::Corrected), 3000, MIN_CAP).unwrap();
            assert!(
                r.is_clean(),
                "{t}: {:?}",
                &r.entries[..r.entries.len().min(5)]
            );
        }
        let r = verify_law(&law(Target::A, LawVariant::Literal), 100, MIN_CAP).unwrap();
        let i23 = r.entries.iter().find(|e| e.index == 23).unwrap();
        assert_eq!(i23.law_value, Some(fin(4)));
        assert_eq!(i23.oracle_value, fin(2));
        assert!(r
            .entries
            .iter()
            .any(|e| e.index % 24 == 16 && e.defect == Some(DefectKind::Uncovered)));
        let one = verify_law(&law(Target::A, LawVariant::Literal), 1, MIN_CAP).unwrap();
        assert_eq!((one.from, one.to), (1, 1));
        assert!(verify_law(&law(Target::A, LawVariant::Corrected), 0, 8).is_err());
    }

    #[test]
    fn congruence_examples() {
        let [c0, c1, _] = CongruenceFamily::Shallow.claims();
        assert_eq!(c0.index(1, 1), Some(24));
        assert_eq!(c0.predict(1, 1), BigNat::from(54u32));
        assert_eq!(c1.predict(1, 1), BigNat::from(64u32));
        assert_eq!(narayana_mod_in(24, 81u64).unwrap(), 54);
        assert_eq!(narayana_mod_in(25, 81u64).unwrap(), 64);
        let [d0, d1, d2] = CongruenceFamily::Deep.claims();
        assert_eq!(d0.predict(1, 2), BigNat::from(648u32));
        assert_eq!(d1.predict(1, 2), BigNat::from(433u32));
        assert_eq!(d2.predict(1, 2), BigNat::from(163u32));
        assert!(verify_congruences(CongruenceFamily::Shallow, 5, 4)
            .unwrap()
            .is_clean());
        assert!(verify_congruences(CongruenceFamily::Deep, 5, 4)
            .unwrap()
            .is_clean());
        assert!(verify_congruences(CongruenceFamily::Deep, 5, 1).is_err());
    }

    #[test]
    fn congruence_index_limit() {
        let r = verify_congruences_within(CongruenceFamily::Shallow, 1, 8 * 27 + 2).unwrap();
        assert_eq!(r.checked, 9); // n = 1, 2, 3
        let r = verify_congruences_within(CongruenceFamily::Deep, 1, 8 * 27 + 1).unwrap();
        assert_eq!(r.checked, 3); // n = 2 only
    }

    #[test]
    fn divisibility_classes() {
        let r = check_divisibility_classes(1000);
        assert!(r.entries.is_empty());
        assert_eq!(narayana(21), BigNat::from(1278u32));
        assert_eq!(narayana(16), BigNat::from(189u32));
        assert_eq!(required_divisor(7), Some(3));
        assert_eq!(required_divisor(8), None);
    }

    #[test]
    fn oracle_halves_are_coprime_and_sum() {
        for i in 4..400 {
            let m = v3_resolved(Target::AMinus1, i, MIN_CAP).unwrap();
            let p = v3_resolved(Target::APlus1, i, MIN_CAP).unwrap();
            assert_eq!(m + p, exact_v3_square_minus_one(i), "i = {i}");
            assert_eq!(m.min(p), fin(0), "i = {i}");
        }
    }

    #[test]
    fn starting_cap_policy() {
        assert_eq!(starting_cap(Some(fin(2)), 1), 8);
        assert_eq!(starting_cap(Some(fin(10)), 1), 13);
        assert_eq!(starting_cap(Some(Valuation::Infinite), 1), 8);
        assert_eq!(starting_cap(None, 20), 20);
        assert_eq!(starting_cap(Some(fin(100)), 1), MAX_CAP);
    }

    #[test]
    fn chunking_covers_range() {
        assert_eq!(chunks(1, 10, 4), vec![(1, 4), (5, 8), (9, 10)]);
        assert_eq!(chunks(5, 5, 4), vec![(5, 5)]);
        assert!(chunks(6, 5, 4).is_empty());
    }
}
