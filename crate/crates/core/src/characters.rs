//! Dirichlet characters with exact root-of-unity values.
//!
//! A character mod `n` is stored as exponents on fixed generators of each
//! `(Z/p^e)^×` (the smallest primitive root for odd `p`; `-1` and `5` at
//! `p = 2`). Values are kept as numerators over a common denominator and turned
//! into floats only by [`DirichletCharacter::eval`].

use crate::arith::{factorize, gcd, moebius, mulmod};
use crate::{e_frac, C64};
use num_integer::Integer;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Component {
    p: u64,
    e: u32,
    pe: u64,
    gens: Vec<u64>,
    orders: Vec<u64>,
}

/// Generators of the unit group modulo `modulus`, component by component.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Group {
    modulus: u64,
    comps: Vec<Component>,
    /// Exponent of the group.
    den: u64,
    /// Discrete log of each unit as an angle numerator over `den` per generator slot.
    logs: Vec<Option<Vec<u64>>>,
}

fn pow_mod(mut b: u64, mut k: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while k > 0 {
        if k & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        k >>= 1;
    }
    r
}

fn unit_order(g: u64, m: u64, group_order: u64) -> u64 {
    let mut best = group_order;
    for t in crate::arith::divisors(group_order) {
        if pow_mod(g, t, m) == 1 {
            best = t;
            break;
        }
    }
    best
}

impl Group {
    fn new(modulus: u64) -> Self {
        let f = factorize(modulus).expect("modulus ≥ 1");
        let mut comps = Vec::new();
        for &(p, e) in &f.factors {
            let pe = p.pow(e);
            let (gens, orders) = if p == 2 {
                match e {
                    1 => (vec![], vec![]),
                    2 => (vec![3], vec![2]),
                    _ => (vec![pe - 1, 5], vec![2, pe / 4]),
                }
            } else {
                let phi = (p - 1) * p.pow(e - 1);
                let g = (2..pe)
                    .find(|&g| g % p != 0 && unit_order(g, pe, phi) == phi)
                    .expect("odd prime powers are cyclic");
                (vec![g], vec![phi])
            };
            comps.push(Component { p, e, pe, gens, orders });
        }
        let den = comps
            .iter()
            .flat_map(|c| c.orders.iter().copied())
            .fold(1u64, |a, b| a.lcm(&b));
        let mut g = Group { modulus, comps, den, logs: Vec::new() };
        g.logs = g.build_logs();
        g
    }

    fn slots(&self) -> usize {
        self.comps.iter().map(|c| c.gens.len()).sum()
    }

    fn build_logs(&self) -> Vec<Option<Vec<u64>>> {
        // Local discrete logs per component, then combine by CRT residues.
        let local: Vec<Vec<Option<Vec<u64>>>> = self
            .comps
            .iter()
            .map(|c| {
                let mut tab = vec![None; c.pe as usize];
                match c.gens.len() {
                    0 => tab[1 % c.pe as usize] = Some(vec![]),
                    1 => {
                        let mut x = 1u64;
                        for k in 0..c.orders[0] {
                            tab[x as usize] = Some(vec![k]);
                            x = x * c.gens[0] % c.pe;
                        }
                    }
                    _ => {
                        let mut x = 1u64;
                        for k1 in 0..c.orders[1] {
                            tab[x as usize] = Some(vec![0, k1]);
                            tab[(c.pe - x) as usize] = Some(vec![1, k1]);
                            x = x * c.gens[1] % c.pe;
                        }
                    }
                }
                tab
            })
            .collect();
        (0..self.modulus)
            .map(|m| {
                let mut v = Vec::with_capacity(self.slots());
                for (c, tab) in self.comps.iter().zip(&local) {
                    v.extend(tab[(m % c.pe) as usize].as_ref()?.iter().copied());
                }
                Some(v)
            })
            .collect()
    }

    /// Unit mod `modulus` congruent to `g` mod `pe` and to 1 mod the cofactor.
    fn lift(&self, pe: u64, g: u64) -> u64 {
        let other = self.modulus / pe;
        if other == 1 {
            return g % pe;
        }
        // x = g + pe·t ≡ 1 (mod other)
        let inv = crate::arith::mod_inv(pe as i64, other).unwrap();
        let t = mulmod(1 - g as i64, inv, other);
        (g + pe * t) % self.modulus
    }
}

/// A Dirichlet character modulo `modulus`.
#[derive(Clone, Debug)]
pub struct DirichletCharacter {
    group: Arc<Group>,
    /// Exponent per generator slot: `χ(g_j) = e(exps[j] / orders[j])`.
    exps: Vec<u64>,
    /// Position in the lexicographic enumeration.
    pub index: usize,
    pub conductor: u64,
    table: Arc<Vec<i64>>,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.group.modulus == other.group.modulus && self.exps == other.exps
    }
}

impl DirichletCharacter {
    fn from_exps(group: Arc<Group>, exps: Vec<u64>) -> Self {
        let orders: Vec<u64> = group.comps.iter().flat_map(|c| c.orders.clone()).collect();
        let den = group.den;
        let table: Vec<i64> = group
            .logs
            .iter()
            .map(|l| match l {
                None => -1,
                Some(l) => {
                    let mut s = 0u64;
                    for ((k, x), o) in l.iter().zip(&exps).zip(&orders) {
                        s = (s + k * x % o * (den / o)) % den;
                    }
                    s as i64
                }
            })
            .collect();
        let mut chi = DirichletCharacter {
            group,
            exps,
            index: 0,
            conductor: 0,
            table: Arc::new(table),
        };
        chi.conductor = chi.compute_conductor();
        chi.index = chi.lex_index();
        chi
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.modulus()
    }

    pub fn is_trivial(&self) -> bool {
        self.exps.iter().all(|&x| x == 0)
    }

    /// Value as the numerator `k` of `e(k/den)`, or `None` off the units.
    pub fn angle(&self, m: i64) -> Option<(u64, u64)> {
        let n = self.modulus();
        let v = self.table[m.rem_euclid(n as i64) as usize];
        (v >= 0).then_some((v as u64, self.group.den))
    }

    pub fn eval(&self, m: i64) -> C64 {
        match self.angle(m) {
            None => C64::new(0.0, 0.0),
            Some((k, den)) => e_frac(k as i64, den),
        }
    }

    /// Order of the character in the dual group.
    pub fn order(&self) -> u64 {
        let den = self.group.den;
        self.table
            .iter()
            .filter(|&&v| v >= 0)
            .fold(1u64, |o, &v| o.lcm(&(den / (v as u64).gcd(&den))))
    }

    /// `χ(-1) ∈ {1, -1}`.
    pub fn parity(&self) -> i32 {
        match self.angle(-1) {
            Some((0, _)) => 1,
            _ => -1,
        }
    }

    pub fn pow(&self, k: i64) -> Self {
        let orders = self.orders();
        let exps = self
            .exps
            .iter()
            .zip(&orders)
            .map(|(&x, &o)| mulmod(k, x, o))
            .collect();
        Self::from_exps(self.group.clone(), exps)
    }

    pub fn conj(&self) -> Self {
        self.pow(-1)
    }

    fn orders(&self) -> Vec<u64> {
        self.group.comps.iter().flat_map(|c| c.orders.clone()).collect()
    }

    fn compute_conductor(&self) -> u64 {
        let n = self.modulus();
        let mut cond = 1;
        for c in &self.group.comps {
            // smallest p^f with χ trivial on units ≡ 1 mod p^f that are ≡ 1 off this component
            let mut f = 0;
            'grow: while f < c.e {
                let pf = c.p.pow(f);
                let mut u = 1 + pf;
                while u < c.pe {
                    if u % c.p != 0 {
                        let lifted = self.group.lift(c.pe, u);
                        if self.table[lifted as usize] != 0 {
                            f += 1;
                            continue 'grow;
                        }
                    }
                    u += pf;
                }
                break;
            }
            cond *= c.p.pow(f);
        }
        debug_assert!(n % cond == 0);
        cond
    }

    /// Build the character mod `modulus` whose value on each unit is `f(m)` (an
    /// angle numerator over `den`).
    fn from_fn(modulus: u64, den: u64, f: impl Fn(u64) -> u64) -> Self {
        let group = Arc::new(Group::new(modulus));
        let mut exps = Vec::new();
        for c in &group.comps {
            for (&g, &o) in c.gens.iter().zip(&c.orders) {
                let num = f(group.lift(c.pe, g));
                let k = num * o;
                assert!(k % den == 0, "value is not an o-th root of unity");
                exps.push(k / den % o);
            }
        }
        Self::from_exps(group, exps)
    }

    fn lex_index(&self) -> usize {
        let mut idx = 0usize;
        for (x, o) in self.exps.iter().zip(self.orders()) {
            idx = idx * o as usize + *x as usize;
        }
        idx
    }

    /// The primitive character inducing `self`.
    pub fn primitive(&self) -> Self {
        let n = self.modulus();
        let c = self.conductor;
        let den = self.group.den;
        Self::from_fn(c, den, |m| {
            // any lift of m mod c that is a unit mod n
            let mut x = m;
            while gcd(x as i64, n as i64) != 1 {
                x += c;
            }
            self.angle(x as i64).unwrap().0
        })
    }

    /// The character mod `r` induced from `self` (`modulus | r`).
    pub fn induce(&self, r: u64) -> Self {
        assert!(r % self.modulus() == 0);
        let den = self.group.den;
        Self::from_fn(r, den, |m| self.angle(m as i64).unwrap().0)
    }

    /// `χ` times `ψ`, both induced to the lcm of the moduli.
    pub fn mul(&self, other: &Self) -> Self {
        let r = self.modulus().lcm(&other.modulus());
        let den = self.group.den.lcm(&other.group.den);
        Self::from_fn(r, den, |m| {
            let (a, da) = self.angle(m as i64).unwrap();
            let (b, db) = other.angle(m as i64).unwrap();
            (a * (den / da) + b * (den / db)) % den
        })
    }

    /// Short label `modulus.index`.
    pub fn label(&self) -> String {
        format!("{}.{}", self.modulus(), self.index)
    }
}

/// All `φ(n)` characters mod `n`, in lexicographic order of exponent vectors.
pub fn enumerate_characters(n: u64) -> Vec<DirichletCharacter> {
    let group = Arc::new(Group::new(n));
    let orders: Vec<u64> = group.comps.iter().flat_map(|c| c.orders.clone()).collect();
    let total: u64 = orders.iter().product();
    (0..total as usize)
        .map(|idx| {
            let mut exps = vec![0u64; orders.len()];
            let mut t = idx as u64;
            for j in (0..orders.len()).rev() {
                exps[j] = t % orders[j];
                t /= orders[j];
            }
            DirichletCharacter::from_exps(group.clone(), exps)
        })
        .collect()
}

/// Primitive characters of conductor exactly `n`.
pub fn primitive_characters(n: u64) -> Vec<DirichletCharacter> {
    enumerate_characters(n).into_iter().filter(|c| c.is_primitive()).collect()
}

pub fn trivial_character() -> DirichletCharacter {
    enumerate_characters(1).pop().unwrap()
}

/// `τ(χ) = Σ_{α mod r} χ(α) e(α/r)`.
pub fn gauss_sum(chi: &DirichletCharacter) -> C64 {
    generalized_gauss_sum_brute(chi, 1)
}

/// `c_χ(m) = Σ_{u mod r} χ(u) e(mu/r)` by direct summation.
pub fn generalized_gauss_sum_brute(chi: &DirichletCharacter, m: i64) -> C64 {
    let r = chi.modulus();
    (0..r as i64)
        .map(|u| chi.eval(u) * e_frac(m * u, r))
        .sum()
}

/// `c_χ(m)` by the closed form.
///
/// With `χ` induced from primitive `χ_*` mod `n`, let `r_n` be the product of
/// the primes dividing `r` but not `n`, and `r_2 = r/(n r_n)`. Then `c_χ(m) = 0`
/// unless `r_2 | m`, and `c_χ(m r_2) = r_2 χ_*(r_n) τ(χ_*) χ̄_*(m) μ(r_n/(r_n,m)) φ((r_n,m))`.
pub fn generalized_gauss_sum(chi: &DirichletCharacter, m: i64) -> C64 {
    let r = chi.modulus();
    let star = chi.primitive();
    let n = star.modulus();
    let rn: u64 = factorize(r)
        .unwrap()
        .primes()
        .filter(|p| n % p != 0)
        .product();
    let r2 = r / (n * rn);
    if m.rem_euclid(r2 as i64) != 0 {
        return C64::new(0.0, 0.0);
    }
    let m = m / r2 as i64;
    let g = gcd(m, rn as i64);
    let mu = moebius(rn / g);
    if mu == 0 {
        return C64::new(0.0, 0.0);
    }
    let tau = gauss_sum(&star);
    tau * star.eval(rn as i64) * star.eval(m).conj()
        * (r2 as f64 * mu as f64 * crate::arith::euler_phi(g) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(enumerate_characters(1).len(), 1);
        let c3 = enumerate_characters(3);
        assert_eq!(c3.len(), 2);
        assert_eq!(c3.iter().filter(|c| c.is_primitive()).count(), 1);
        let c8 = enumerate_characters(8);
        assert_eq!(c8.len(), 4);
        assert_eq!(c8.iter().filter(|c| c.is_primitive()).count(), 2);
    }

    #[test]
    fn quadratic_mod_3() {
        let chi = &primitive_characters(3)[0];
        assert!((chi.eval(2) - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(chi.eval(3), C64::new(0.0, 0.0));
        let tau = gauss_sum(chi);
        assert!((tau - C64::new(0.0, 3f64.sqrt())).norm() < 1e-12);
    }

    #[test]
    fn ramanujan_and_primitive_cases() {
        for r in 1..=30u64 {
            let triv = &enumerate_characters(r)[0];
            assert!(triv.is_trivial());
            assert!((generalized_gauss_sum(triv, 1).re - moebius(r) as f64).abs() < 1e-9);
        }
        for chi in primitive_characters(7) {
            let v = generalized_gauss_sum(&chi, 3);
            let w = chi.eval(3).conj() * gauss_sum(&chi);
            assert!((v - w).norm() < 1e-9);
        }
    }

    #[test]
    fn conjugate_and_powers() {
        for chi in enumerate_characters(20) {
            let c = chi.conj();
            for m in 0..20 {
                assert!((c.eval(m) - chi.eval(m).conj()).norm() < 1e-12);
                let sq = chi.pow(2);
                assert!((sq.eval(m) - chi.eval(m) * chi.eval(m)).norm() < 1e-12);
            }
        }
    }
}
