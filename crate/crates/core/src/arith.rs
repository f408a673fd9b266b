//! Exact elementary number theory on 64-bit integers.

use crate::error::{Error, Result};
use num_integer::Integer;

/// Prime factorization `n = Π p^e` with strictly increasing primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// Exponent of `p` in `n` (0 when `p ∤ n`).
    pub fn ord(&self, p: u64) -> u32 {
        self.factors.iter().find(|f| f.0 == p).map_or(0, |f| f.1)
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|f| f.0)
    }
}

/// Trial division; `n = 0` is a domain error.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::Domain("factorize(0)".into()));
    }
    let mut m = n;
    let mut factors = Vec::new();
    let mut push = |m: &mut u64, p: u64| {
        let mut e = 0;
        while *m % p == 0 {
            *m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(&mut m, 2);
    push(&mut m, 3);
    let mut p = 5u64;
    while p.saturating_mul(p) <= m {
        push(&mut m, p);
        push(&mut m, p + 2);
        p += 6;
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Ok(Factorization { n, factors })
}

fn fact(n: u64) -> Factorization {
    factorize(n).expect("positive argument")
}

/// `ord_p(n)` for `n ≥ 1`.
pub fn ord(p: u64, mut n: u64) -> u32 {
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

pub fn moebius(n: u64) -> i32 {
    let f = fact(n);
    if f.factors.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.factors.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn euler_phi(n: u64) -> u64 {
    fact(n)
        .factors
        .iter()
        .map(|&(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

/// All positive divisors in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in fact(n).factors {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// `σ_s(n) = Σ_{ℓ|n} ℓ^s`.
pub fn sigma_real(s: f64, n: u64) -> f64 {
    divisors(n).into_iter().map(|l| (l as f64).powf(s)).sum()
}

pub fn sigma0(n: u64) -> u64 {
    fact(n).factors.iter().map(|&(_, e)| e as u64 + 1).product()
}

/// `sup_n σ_0(n) / n^ε`, attained on a finite product of prime powers.
pub fn divisor_bound_constant(eps: f64) -> f64 {
    assert!(eps > 0.0);
    let mut c = 1.0;
    for p in primes_up_to(1 << 20) {
        let pe = (p as f64).powf(eps);
        if pe >= 2.0 {
            break;
        }
        let mut best: f64 = 1.0;
        let mut k = 1;
        let mut pk = 1.0;
        loop {
            pk *= pe;
            let v = (k as f64 + 1.0) / pk;
            if v < best {
                break;
            }
            best = v;
            k += 1;
        }
        c *= best;
    }
    c
}

pub fn gcd(a: i64, b: i64) -> u64 {
    a.gcd(&b) as u64
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// Inverse of `a` modulo `m` in `[0, m)`; `m = 1` gives 0.
pub fn mod_inv(a: i64, m: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::Domain("modulus 0".into()));
    }
    let eg = (a.rem_euclid(m as i64) as i128).extended_gcd(&(m as i128));
    if eg.gcd != 1 {
        return Err(Error::NotInvertible { a, m });
    }
    Ok(eg.x.rem_euclid(m as i128) as u64)
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    let spf = smallest_prime_factors(n as usize);
    (2..=n).filter(|&k| spf[k as usize] as u64 == k).collect()
}

/// Smallest prime factor table for `0..=n` (entries 0 and 1 are 0 and 1).
pub fn smallest_prime_factors(n: usize) -> Vec<u32> {
    let mut spf: Vec<u32> = (0..=n as u32).collect();
    let mut i = 2;
    while i * i <= n {
        if spf[i] == i as u32 {
            let mut j = i * i;
            while j <= n {
                if spf[j] == j as u32 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
        i += 1;
    }
    spf
}

/// The invariants `(M_d, r_d, R_d, R_d')` attached to a level `q` and a denominator `d`.
///
/// `M_d` collects the primes of `d` whose exponent reaches the one in `q`; `r_d`
/// the rest. `R_d` is the exact divisor of `q` supported on the primes of `r_d`
/// and the primes of `q` not dividing `d`, and `R_d' = lcm(R_d, r_d²)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LevelSplit {
    pub q: u64,
    pub d: u64,
    pub m_d: u64,
    pub r_d: u64,
    pub big_r: u64,
    pub big_r_prime: u64,
}

impl LevelSplit {
    /// `M_d² R_d' = lcm(q, d²)`.
    pub fn conductor(&self) -> u64 {
        self.m_d * self.m_d * self.big_r_prime
    }
}

pub fn level_split(q: u64, d: u64) -> LevelSplit {
    let fq = fact(q);
    let fd = fact(d);
    let mut m_d = 1;
    for &(p, e) in &fd.factors {
        if e >= fq.ord(p) {
            m_d *= p.pow(e);
        }
    }
    let r_d = d / m_d;
    let mut big_r = 1;
    for &(p, e) in &fq.factors {
        if r_d % p == 0 || d % p != 0 {
            big_r *= p.pow(e);
        }
    }
    LevelSplit {
        q,
        d,
        m_d,
        r_d,
        big_r,
        big_r_prime: lcm(big_r, r_d * r_d),
    }
}

/// `a ≡ a1·r_d + a2·M_d (mod d)` with `a1 = a·r_d⁻¹ mod M_d` and `a2 = a·M_d⁻¹ mod r_d`.
pub fn crt_split(a: i64, split: &LevelSplit) -> Result<(u64, u64)> {
    if gcd(a, split.d as i64) != 1 {
        return Err(Error::Domain(format!("gcd({a}, {}) > 1", split.d)));
    }
    let (m, r) = (split.m_d, split.r_d);
    let a1 = mulmod(a, mod_inv(r as i64, m)?, m);
    let a2 = mulmod(a, mod_inv(m as i64, r)?, r);
    Ok((a1, a2))
}

/// `a·b mod m` in `[0, m)`.
pub fn mulmod(a: i64, b: u64, m: u64) -> u64 {
    ((a as i128).rem_euclid(m as i128) * b as i128 % m as i128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_factorizations() {
        assert!(factorize(1).unwrap().factors.is_empty());
        assert_eq!(factorize(27).unwrap().factors, vec![(3, 3)]);
        assert!(factorize(0).is_err());
    }

    #[test]
    fn mobius_phi_sigma() {
        assert_eq!((moebius(1), moebius(12), moebius(30)), (1, 0, -1));
        assert_eq!((euler_phi(1), euler_phi(9)), (1, 6));
        assert_eq!(sigma_real(0.0, 12), 6.0);
        assert_eq!(sigma_real(1.7, 1), 1.0);
    }

    #[test]
    fn inverses() {
        assert_eq!(mod_inv(1, 7).unwrap(), 1);
        assert_eq!(mod_inv(3, 11).unwrap(), 4);
        assert_eq!(mod_inv(-3, 11).unwrap(), 7);
        assert!(matches!(mod_inv(2, 4), Err(Error::NotInvertible { .. })));
        assert_eq!(mod_inv(5, 1).unwrap(), 0);
    }

    #[test]
    fn split_examples() {
        let s = level_split(27, 6);
        assert_eq!((s.m_d, s.r_d, s.big_r, s.big_r_prime), (2, 3, 27, 27));
        let s = level_split(11, 7);
        assert_eq!((s.m_d, s.r_d, s.big_r, s.big_r_prime), (7, 1, 11, 11));
        let s = level_split(27, 9);
        assert_eq!((s.m_d, s.r_d, s.big_r, s.big_r_prime), (1, 9, 27, 81));
        let s = level_split(11, 22);
        assert_eq!((s.m_d, s.r_d, s.big_r, s.big_r_prime), (22, 1, 1, 1));
        assert_eq!(crt_split(5, &level_split(27, 6)).unwrap(), (1, 1));
    }

    #[test]
    fn divisor_constant_quarter() {
        let c = divisor_bound_constant(0.25);
        assert!((c - 8.44).abs() < 0.05, "{c}");
        for n in 1..20000u64 {
            assert!(sigma0(n) as f64 <= c * (n as f64).powf(0.25) + 1e-9);
        }
    }
}
