use narayana_core::brocard::{is_brocard_pair, BoundReading, Lookup};
use narayana_core::{
    certify_nonsolution, derive_bounds, search_general, search_narayana, FactorialCursor,
};

#[test]
fn every_index_is_certified_and_checks_out() {
    for n in 4..=400 {
        let c = certify_nonsolution(n)
            .unwrap()
            .unwrap_or_else(|| panic!("n = {n} uncertifiable"));
        assert!(c.check(), "n = {n}");
    }
    assert!(search_narayana(400).unwrap().solutions.is_empty());
}

#[test]
fn cursor_work_is_linear() {
    let mut cursor = FactorialCursor::new();
    let mut w = narayana_core::narayana_window(4);
    for _ in 4..=600 {
        let u = w.first();
        let t = u * u - 1u32;
        let _ = cursor.lookup(&t).unwrap();
        w.advance();
    }
    let (m, _) = cursor.position();
    assert_eq!(cursor.multiplications(), m);
}

#[test]
fn cursor_brackets_correctly() {
    let mut cursor = FactorialCursor::new();
    // 0! = 1! = 1, so start past the ambiguity
    assert_eq!(cursor.lookup(&1u32.into()).unwrap(), Lookup::Factorial(0));
    let mut fact = num_bigint::BigUint::from(1u32);
    for m in 2..=30u64 {
        fact *= m;
        let inside = &fact + 1u32;
        assert_eq!(cursor.lookup(&fact).unwrap(), Lookup::Factorial(m));
        assert_eq!(
            cursor.lookup(&inside).unwrap(),
            Lookup::Between { below: m }
        );
    }
}

#[test]
fn general_search_to_three_hundred() {
    let r = search_general(300).unwrap();
    let ms: Vec<u64> = r.solutions.iter().map(|s| s.m).collect();
    assert_eq!(ms, vec![4, 5, 7]);
    for s in &r.solutions {
        assert!(is_brocard_pair(s.m, &s.u));
    }
    assert_eq!(r.stats.non_square, 297);
}

#[test]
fn bound_derivation_is_deterministic() {
    let a = derive_bounds();
    let b = derive_bounds();
    assert_eq!(a, b);
    assert_eq!((a.m_max, a.n_max), (221, 1386));
    assert!(!a.deviates);
    let at = |m: u64| a.trace.iter().find(|r| r.m == m).unwrap();
    assert!(at(221).holds);
    assert!(!at(222).holds);
    assert!(at(10).holds && at(10).lhs <= 0);
    let by = |r: BoundReading| a.readings.iter().find(|o| o.reading == r).unwrap().m_max;
    assert_eq!(by(BoundReading::MixedBase), Some(221));
    assert_eq!(by(BoundReading::Log3), Some(167));
    assert_eq!(by(BoundReading::AsPrinted), None);
}
