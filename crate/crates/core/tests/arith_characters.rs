use addtwist::arith::*;
use addtwist::characters::*;
use addtwist::C64;
use approx::assert_abs_diff_eq;
use proptest::prelude::*;

fn trial_division(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while n > 1 {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    out
}

#[test]
fn factorization_examples() {
    assert!(factorize(1).unwrap().factors.is_empty());
    assert_eq!(factorize(27).unwrap().factors, vec![(3, 3)]);
    assert_eq!(factorize(6936).unwrap().factors, vec![(2, 3), (3, 1), (17, 2)]);
    assert!(factorize(0).is_err());
}

#[test]
fn multiplicative_function_examples() {
    assert_eq!(moebius(1), 1);
    assert_eq!(moebius(12), 0);
    assert_eq!(moebius(30), -1);
    assert_eq!(euler_phi(1), 1);
    assert_eq!(euler_phi(9), 6);
    let coprime = (1..=100).filter(|&a| gcd(a, 100) == 1).count() as u64;
    assert_eq!(euler_phi(100), coprime);
    assert_eq!(sigma_real(0.0, 12), 6.0);
    assert_abs_diff_eq!(sigma_real(-1.0, 6), 1.0 + 0.5 + 1.0 / 3.0 + 1.0 / 6.0, epsilon = 1e-15);
    assert_eq!(sigma_real(2.5, 1), 1.0);
}

#[test]
fn inverses() {
    assert_eq!(mod_inv(3, 11).unwrap(), 4);
    assert!(mod_inv(2, 4).is_err());
    assert_eq!(mod_inv(5, 1).unwrap(), 0);
}

#[test]
fn level_split_examples() {
    let s = level_split(27, 6);
    assert_eq!((s.m_d, s.r_d, s.big_r, s.big_r_prime), (2, 3, 27, 27));
    let s = level_split(11, 7);
    assert_eq!((s.m_d, s.r_d, s.big_r, s.big_r_prime), (7, 1, 11, 11));
    let s = level_split(27, 9);
    assert_eq!((s.m_d, s.r_d, s.big_r, s.big_r_prime), (1, 9, 27, 81));
    assert_eq!(s.conductor(), lcm(27, 81));
    assert_eq!(crt_split(5, &level_split(27, 6)).unwrap(), (1, 1));
    assert_eq!(crt_split(3, &level_split(11, 7)).unwrap(), (3, 0));
}

#[test]
fn crt_round_trip_all_small_d() {
    for q in [11u64, 27, 54, 99] {
        for d in 1..=60u64 {
            let s = level_split(q, d);
            assert_eq!(s.m_d * s.m_d * s.big_r_prime, lcm(q, d * d), "q={q} d={d}");
            for a in (0..d as i64).filter(|&a| gcd(a, d as i64) == 1) {
                let (a1, a2) = crt_split(a, &s).unwrap();
                let back = (a1 * s.r_d + a2 * s.m_d) % d;
                assert_eq!(back, a as u64 % d.max(1), "q={q} a={a} d={d}");
            }
        }
    }
}

proptest! {
    #[test]
    fn factorize_matches_trial_division(n in 1u64..200_000) {
        prop_assert_eq!(factorize(n).unwrap().factors, trial_division(n));
    }

    #[test]
    fn phi_and_mu_are_multiplicative(a in 1u64..500, b in 1u64..500) {
        prop_assume!(gcd(a as i64, b as i64) == 1);
        prop_assert_eq!(euler_phi(a * b), euler_phi(a) * euler_phi(b));
        prop_assert_eq!(moebius(a * b), moebius(a) * moebius(b));
    }

    #[test]
    fn mod_inv_inverts(a in -1000i64..1000, m in 2u64..500) {
        match mod_inv(a, m) {
            Ok(x) => prop_assert_eq!(mulmod(a, x, m), 1),
            Err(_) => prop_assert!(gcd(a, m as i64) > 1),
        }
    }

    #[test]
    fn mobius_sums_vanish(n in 2u64..5000) {
        let s: i32 = divisors(n).into_iter().map(moebius).sum();
        prop_assert_eq!(s, 0);
    }

    #[test]
    fn character_values_are_multiplicative(n in 1u64..60, i in 0usize..64, a in 0i64..200, b in 0i64..200) {
        let chars = enumerate_characters(n);
        let chi = &chars[i % chars.len()];
        let lhs = chi.eval(a * b);
        let rhs = chi.eval(a) * chi.eval(b);
        prop_assert!((lhs - rhs).norm() < 1e-12);
        prop_assert!((chi.eval(a + n as i64) - chi.eval(a)).norm() < 1e-12);
    }
}

#[test]
fn character_counts() {
    assert_eq!(enumerate_characters(1).len(), 1);
    assert_eq!(enumerate_characters(3).len(), 2);
    assert_eq!(primitive_characters(3).len(), 1);
    assert_eq!(enumerate_characters(8).len(), 4);
    assert_eq!(primitive_characters(8).len(), 2);
    for n in 1..=60u64 {
        assert_eq!(enumerate_characters(n).len() as u64, euler_phi(n));
        // Σ_{d|n} #primitive(d) = φ(n)
        let prim: usize = divisors(n).into_iter().map(|d| primitive_characters(d).len()).sum();
        assert_eq!(prim as u64, euler_phi(n));
    }
}

#[test]
fn character_values() {
    let triv = trivial_character();
    assert_eq!(triv.eval(17), C64::new(1.0, 0.0));
    let chi3 = primitive_characters(3).remove(0);
    assert_abs_diff_eq!(chi3.eval(2).re, -1.0, epsilon = 1e-15);
    for chi in enumerate_characters(12) {
        for m in [2i64, 3, 4, 6, 9, 10] {
            assert_eq!(chi.eval(m), C64::new(0.0, 0.0));
        }
    }
}

#[test]
fn gauss_sums() {
    assert_abs_diff_eq!(gauss_sum(&trivial_character()).re, 1.0, epsilon = 1e-15);
    let chi3 = primitive_characters(3).remove(0);
    let t = gauss_sum(&chi3);
    assert_abs_diff_eq!(t.re, 0.0, epsilon = 1e-14);
    assert_abs_diff_eq!(t.im, 3f64.sqrt(), epsilon = 1e-14);
    for r in 1..=100u64 {
        for chi in primitive_characters(r) {
            assert_abs_diff_eq!(gauss_sum(&chi).norm(), (r as f64).sqrt(), epsilon = 1e-9);
        }
    }
}

#[test]
fn generalized_gauss_sum_special_cases() {
    for r in 1..=40u64 {
        let triv = &enumerate_characters(r)[0];
        assert!(triv.is_trivial());
        for m in (1..3 * r as i64).filter(|&m| gcd(m, r as i64) == 1) {
            assert_abs_diff_eq!(generalized_gauss_sum(triv, m).re, moebius(r) as f64, epsilon = 1e-9);
        }
        for chi in primitive_characters(r) {
            let tau = gauss_sum(&chi);
            for m in (1..2 * r as i64).filter(|&m| gcd(m, r as i64) == 1) {
                let want = chi.eval(m).conj() * tau;
                assert!((generalized_gauss_sum(&chi, m) - want).norm() < 1e-9);
            }
        }
    }
}

#[test]
fn generalized_gauss_sum_closed_form() {
    for r in 1..=60u64 {
        for chi in enumerate_characters(r) {
            for m in 0..2 * r as i64 {
                let closed = generalized_gauss_sum(&chi, m);
                let brute = generalized_gauss_sum_brute(&chi, m);
                assert!((closed - brute).norm() < 1e-9, "r={r} chi={} m={m}", chi.label());
            }
        }
    }
}

#[test]
fn primitive_and_induced_characters() {
    for n in 1..=48u64 {
        for chi in enumerate_characters(n) {
            let star = chi.primitive();
            assert!(star.is_primitive());
            assert_eq!(n % star.modulus(), 0);
            let back = star.induce(n);
            for a in 0..n as i64 {
                assert!((back.eval(a) - chi.eval(a)).norm() < 1e-12);
            }
            assert_eq!(chi.parity(), if chi.eval(-1).re > 0.0 { 1 } else { -1 });
            let one = chi.mul(&chi.conj());
            assert!(one.is_trivial());
        }
    }
}
