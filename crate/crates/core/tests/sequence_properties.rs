use narayana_core::narayana::{narayana_checked, narayana_window_mod, Modular};
use narayana_core::{narayana, narayana_fast, narayana_mod, narayana_window, BigNat};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plain table a[0..len] by the recurrence, independent of the library.
fn table(len: usize) -> Vec<BigNat> {
    let mut a = vec![BigNat::from(0u32), BigNat::from(1u32), BigNat::from(1u32)];
    while a.len() < len {
        let k = a.len();
        let next = &a[k - 1] + &a[k - 3];
        a.push(next);
    }
    a.truncate(len);
    a
}

#[test]
fn recurrence_holds() {
    let a = table(2003);
    for n in 0..2003 {
        assert_eq!(narayana(n as u64), a[n], "n = {n}");
    }
}

#[test]
fn addition_identity_exhaustive() {
    let a = table(130);
    for m in 3..=60usize {
        for n in 0..=60usize {
            let rhs = &a[m - 1] * &a[n + 2] + &a[m - 3] * &a[n + 1] + &a[m - 2] * &a[n];
            assert_eq!(a[m + n], rhs, "m = {m}, n = {n}");
        }
    }
}

#[test]
fn addition_identity_sampled() {
    let a = table(4010);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..500 {
        let m = rng.gen_range(3..=2000usize);
        let n = rng.gen_range(0..=2000usize);
        let rhs = &a[m - 1] * &a[n + 2] + &a[m - 3] * &a[n + 1] + &a[m - 2] * &a[n];
        assert_eq!(a[m + n], rhs, "m = {m}, n = {n}");
    }
}

#[test]
fn fast_matches_iteration() {
    for n in 1..=2000 {
        assert_eq!(narayana_fast(n), narayana(n), "n = {n}");
    }
}

#[test]
fn fast_path_at_large_indices_modulo_random_moduli() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..8 {
        let n = rng.gen_range(2000..=100_000u64);
        let exact = narayana_fast(n);
        let reference = narayana(n);
        assert_eq!(exact, reference, "n = {n}");
        for _ in 0..4 {
            let m = rng.gen_range(2..=u64::MAX);
            assert_eq!(
                BigNat::from(narayana_mod(n, m).unwrap()),
                &exact % m,
                "n = {n}, m = {m}"
            );
        }
    }
}

#[test]
fn strictly_increasing_from_three() {
    let a = table(3000);
    for n in 3..2999 {
        assert!(a[n] < a[n + 1], "n = {n}");
    }
}

#[test]
fn window_iteration_matches_jump() {
    let mut w = narayana_window(0);
    for n in 0..500 {
        assert_eq!(w, narayana_window(n));
        w.advance();
    }
}

#[test]
fn fixed_width_agrees_until_overflow() {
    let mut n = 0;
    while let Some(v) = narayana_checked::<u128>(n) {
        assert_eq!(BigNat::from(v), narayana(n));
        n += 1;
    }
    assert!(n > 150, "u128 overflowed at {n}");
    assert!(BigNat::from(u128::MAX) < narayana(n));
}

proptest! {
    #[test]
    fn modular_matches_exact(n in 0u64..3000, m in 2u64..=u64::MAX) {
        prop_assert_eq!(BigNat::from(narayana_mod(n, m).unwrap()), narayana(n) % m);
    }

    #[test]
    fn modular_window_steps(start in 0u64..50_000, m in 2u64..1u64 << 40) {
        let arith = Modular::new(m as u128).unwrap();
        let mut w = narayana_window_mod(start, m as u128).unwrap();
        w.advance_with(&arith);
        prop_assert_eq!(w.values[0], narayana_mod(start + 1, m).unwrap() as u128);
    }
}
