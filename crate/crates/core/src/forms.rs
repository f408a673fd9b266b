//! Fourier coefficients of cusp forms: eta quotients, coefficient files,
//! Hecke checks and truncated evaluation with certified tails.

use crate::arith::{sigma0, smallest_prime_factors};
use crate::error::{Error, Result};
use crate::{e, C64};
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

/// Coefficients `a(1..=N)` of `Σ a(n) e(nz)`. Index 0 holds 0.
#[derive(Clone, Debug)]
pub struct CoefficientSeries {
    pub label: String,
    pub level: u64,
    pub weight: u32,
    coeffs: Arc<Vec<C64>>,
    exact: Option<Arc<Vec<i64>>>,
    /// Nebentypus as `(modulus, index)` when the series is not of trivial character.
    pub character: Option<(u64, usize)>,
}

impl CoefficientSeries {
    pub fn from_integers(label: &str, level: u64, weight: u32, a: Vec<i64>) -> Self {
        let mut ints = Vec::with_capacity(a.len() + 1);
        ints.push(0);
        ints.extend(a);
        let coeffs = ints.iter().map(|&x| C64::new(x as f64, 0.0)).collect();
        CoefficientSeries {
            label: label.into(),
            level,
            weight,
            coeffs: Arc::new(coeffs),
            exact: Some(Arc::new(ints)),
            character: None,
        }
    }

    pub fn from_complex(label: &str, level: u64, weight: u32, a: Vec<C64>) -> Self {
        let mut coeffs = Vec::with_capacity(a.len() + 1);
        coeffs.push(C64::new(0.0, 0.0));
        coeffs.extend(a);
        CoefficientSeries {
            label: label.into(),
            level,
            weight,
            coeffs: Arc::new(coeffs),
            exact: None,
            character: None,
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `a(n)`, zero beyond the stored length.
    pub fn a(&self, n: usize) -> C64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    /// Slice indexed from 0 (entry 0 is 0).
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn exact(&self) -> Option<&[i64]> {
        self.exact.as_deref().map(|v| v.as_slice())
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    pub fn normalized(&self) -> bool {
        self.len() >= 1 && (self.a(1) - 1.0).norm() < 1e-12
    }

    pub fn truncate(&self, n: usize) -> Self {
        let mut s = self.clone();
        let n = n.min(self.len());
        s.coeffs = Arc::new(self.coeffs[..=n].to_vec());
        s.exact = self.exact.as_ref().map(|v| Arc::new(v[..=n].to_vec()));
        s
    }

    /// Same data with coefficient `n` replaced (for fault injection in tests).
    pub fn with_coefficient(&self, n: usize, v: C64) -> Self {
        let mut s = self.clone();
        Arc::make_mut(&mut s.coeffs)[n] = v;
        if let Some(ex) = s.exact.as_mut() {
            if v.im == 0.0 && v.re.fract() == 0.0 {
                Arc::make_mut(ex)[n] = v.re as i64;
            } else {
                s.exact = None;
            }
        }
        s
    }

    /// Coefficient-wise conjugate.
    pub fn conj(&self) -> Self {
        let mut s = self.clone();
        s.coeffs = Arc::new(self.coeffs.iter().map(|c| c.conj()).collect());
        s
    }
}

/// `Π η(m z)^{e_m}` with an integral `q`-offset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaQuotientSpec {
    pub components: Vec<(u64, i32)>,
    pub level: u64,
}

impl EtaQuotientSpec {
    pub fn new(components: Vec<(u64, i32)>, level: u64) -> Result<Self> {
        let s = EtaQuotientSpec { components, level };
        let total: i32 = s.components.iter().map(|c| c.1).sum();
        if total <= 0 || total % 2 != 0 {
            return Err(Error::Domain("exponent sum must be a positive even integer".into()));
        }
        if s.components.iter().any(|&(m, _)| m == 0 || level % m != 0) {
            return Err(Error::Domain("every multiplier must divide the level".into()));
        }
        if s.offset_24() % 24 != 0 {
            return Err(Error::Domain("fractional q-power offset".into()));
        }
        Ok(s)
    }

    /// `η(z)²η(11z)²`, the newform of level 11.
    pub fn level11() -> Self {
        EtaQuotientSpec { components: vec![(1, 2), (11, 2)], level: 11 }
    }

    /// `η(3z)²η(9z)²`, the newform of level 27.
    pub fn level27() -> Self {
        EtaQuotientSpec { components: vec![(3, 2), (9, 2)], level: 27 }
    }

    pub fn weight(&self) -> u32 {
        (self.components.iter().map(|c| c.1).sum::<i32>() / 2) as u32
    }

    fn offset_24(&self) -> i64 {
        self.components.iter().map(|&(m, e)| m as i64 * e as i64).sum()
    }

    pub fn label(&self) -> String {
        let parts: Vec<String> = self.components.iter().map(|(m, e)| format!("{m}^{e}")).collect();
        format!("eta:{}@{}", parts.join(","), self.level)
    }

    /// Parse `1^2,11^2@11` (an optional `eta:` prefix is accepted).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.strip_prefix("eta:").unwrap_or(s);
        let bad = |m: &str| Error::Parse { line: 1, msg: format!("{m} in eta spec '{s}'") };
        let (comps, level) = s.split_once('@').ok_or_else(|| bad("missing '@level'"))?;
        let level: u64 = level.trim().parse().map_err(|_| bad("bad level"))?;
        let mut components = Vec::new();
        for c in comps.split(',') {
            let (m, e) = c.split_once('^').ok_or_else(|| bad("missing '^'"))?;
            components.push((
                m.trim().parse().map_err(|_| bad("bad multiplier"))?,
                e.trim().parse().map_err(|_| bad("bad exponent"))?,
            ));
        }
        Self::new(components, level)
    }
}

/// Nonzero terms `(exponent, sign)` of `Π_{n≥1}(1 − q^n)` up to `q^n_max`.
fn pentagonal_terms(n_max: usize) -> Vec<(usize, i64)> {
    let mut out = vec![(0, 1)];
    for k in 1i64.. {
        let g1 = (k * (3 * k - 1) / 2) as usize;
        if g1 > n_max {
            break;
        }
        let sign = if k % 2 == 0 { 1 } else { -1 };
        out.push((g1, sign));
        let g2 = (k * (3 * k + 1) / 2) as usize;
        if g2 <= n_max {
            out.push((g2, sign));
        }
    }
    out.sort_unstable();
    out
}

/// Exact coefficients `a(1..=n)` of the eta quotient.
///
/// Multiplies (or divides) a dense series by the sparse pentagonal expansion of
/// `η(mz)` once per unit of exponent.
pub fn eta_quotient_coeffs(spec: &EtaQuotientSpec, n: usize) -> Result<CoefficientSeries> {
    let offset = (spec.offset_24() / 24) as usize;
    if offset == 0 {
        return Err(Error::Domain("eta quotient is not cuspidal at infinity".into()));
    }
    let len = (n + 1).saturating_sub(offset);
    let mut p = vec![0i128; len];
    if len > 0 {
        p[0] = 1;
    }
    for &(m, ex) in &spec.components {
        let m = m as usize;
        let terms: Vec<(usize, i128)> = pentagonal_terms(len / m + 1)
            .into_iter()
            .map(|(g, s)| (g * m, s as i128))
            .filter(|&(g, _)| g < len.max(1))
            .collect();
        for _ in 0..ex.unsigned_abs() {
            let max = p.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
            if ex > 0 && max.saturating_mul(terms.len() as u128) < (1u128 << 62) {
                // |new| ≤ (number of ±1 terms)·max|old|, so i64 shifted adds are exact
                let old: Vec<i64> = p.iter().map(|&v| v as i64).collect();
                let mut out = vec![0i64; len];
                for &(g, s) in &terms {
                    let src = &old[..len - g];
                    if s > 0 {
                        out[g..].iter_mut().zip(src).for_each(|(o, x)| *o += x);
                    } else {
                        out[g..].iter_mut().zip(src).for_each(|(o, x)| *o -= x);
                    }
                }
                p = out.into_iter().map(i128::from).collect();
            } else if ex > 0 {
                for i in (0..len).rev() {
                    let mut acc = 0i128;
                    for &(g, s) in &terms {
                        if g > i {
                            break;
                        }
                        acc += s * p[i - g];
                    }
                    p[i] = acc;
                }
            } else {
                for i in 0..len {
                    let mut acc = p[i];
                    for &(g, s) in terms.iter().skip(1) {
                        if g > i {
                            break;
                        }
                        acc -= s * p[i - g];
                    }
                    p[i] = acc;
                }
            }
        }
    }
    let mut a = vec![0i64; n];
    for (i, v) in p.into_iter().enumerate() {
        a[i + offset - 1] = i64::try_from(v).map_err(|_| Error::Domain("coefficient overflow".into()))?;
    }
    Ok(CoefficientSeries::from_integers(&spec.label(), spec.level, spec.weight(), a))
}

/// Parse the line-oriented coefficient format.
///
/// ```text
/// # newform <label>
/// level <q>
/// weight <k>
/// character <modulus> <index>   (optional)
/// coeffs
/// <n> <re> [<im>]
/// ```
pub fn parse_coeffs(text: &str) -> Result<CoefficientSeries> {
    let mut label = None;
    let mut level = None;
    let mut weight = None;
    let mut character = None;
    let mut in_coeffs = false;
    let mut ints: Vec<i64> = Vec::new();
    let mut vals: Vec<C64> = Vec::new();
    let mut all_int = true;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(l) = rest.trim().strip_prefix("newform") {
                label = Some(l.trim().to_string());
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !in_coeffs {
            let num = |k: usize| -> Result<u64> {
                fields
                    .get(k)
                    .and_then(|f| f.parse().ok())
                    .ok_or_else(|| err(format!("expected integer in '{line}'")))
            };
            match fields[0] {
                "level" => level = Some(num(1)?),
                "weight" => weight = Some(num(1)? as u32),
                "character" => character = Some((num(1)?, num(2)? as usize)),
                "coeffs" => in_coeffs = true,
                other => return Err(err(format!("unknown header field '{other}'"))),
            }
            continue;
        }
        if fields.len() < 2 || fields.len() > 3 {
            return Err(err(format!("expected '<n> <a_n> [<im>]', got '{line}'")));
        }
        let n: usize = fields[0].parse().map_err(|_| err(format!("bad index '{}'", fields[0])))?;
        let expected = vals.len() + 1;
        if n < expected {
            return Err(err(format!("duplicate or decreasing index {n}")));
        }
        if n > expected {
            return Err(err(format!("non-contiguous index {n}, expected {expected}")));
        }
        let re_s = fields[1];
        let im: f64 = match fields.get(2) {
            Some(s) => s.parse().map_err(|_| err(format!("bad value '{s}'")))?,
            None => 0.0,
        };
        match re_s.parse::<i64>() {
            Ok(v) if im == 0.0 => {
                ints.push(v);
                vals.push(C64::new(v as f64, 0.0));
            }
            _ => {
                let re: f64 = re_s.parse().map_err(|_| err(format!("bad value '{re_s}'")))?;
                all_int = false;
                vals.push(C64::new(re, im));
            }
        }
    }
    let missing = |f: &str| Error::Parse { line: 0, msg: format!("missing header field '{f}'") };
    let level = level.ok_or_else(|| missing("level"))?;
    let weight = weight.ok_or_else(|| missing("weight"))?;
    if !in_coeffs {
        return Err(missing("coeffs"));
    }
    if vals.is_empty() {
        return Err(Error::Parse { line: 0, msg: "empty coeffs section".into() });
    }
    let label = label.unwrap_or_else(|| format!("file@{level}"));
    let mut s = if all_int {
        CoefficientSeries::from_integers(&label, level, weight, ints)
    } else {
        CoefficientSeries::from_complex(&label, level, weight, vals)
    };
    s.character = character;
    Ok(s)
}

pub fn load_coeffs(path: impl AsRef<Path>) -> Result<CoefficientSeries> {
    parse_coeffs(&std::fs::read_to_string(path)?)
}

pub fn format_coeffs(s: &CoefficientSeries) -> String {
    let mut out = format!("# newform {}\nlevel {}\nweight {}\n", s.label, s.level, s.weight);
    if let Some((m, i)) = s.character {
        writeln!(out, "character {m} {i}").unwrap();
    }
    out.push_str("coeffs\n");
    for n in 1..=s.len() {
        match s.exact() {
            Some(ex) => writeln!(out, "{n} {}", ex[n]).unwrap(),
            None => {
                let c = s.a(n);
                if c.im == 0.0 {
                    writeln!(out, "{n} {:e}", c.re).unwrap();
                } else {
                    writeln!(out, "{n} {:e} {:e}", c.re, c.im).unwrap();
                }
            }
        }
    }
    out
}

pub fn save_coeffs(s: &CoefficientSeries, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_coeffs(s))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationClass {
    pub name: &'static str,
    pub checked: usize,
    pub failed: usize,
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeckeReport {
    pub classes: Vec<RelationClass>,
}

impl HeckeReport {
    pub fn all_pass(&self) -> bool {
        self.classes.iter().all(|c| c.failed == 0)
    }

    pub fn class(&self, name: &str) -> &RelationClass {
        self.classes.iter().find(|c| c.name == name).expect("known relation class")
    }

    pub fn failures(&self) -> Vec<String> {
        self.classes
            .iter()
            .filter(|c| c.failed > 0)
            .map(|c| format!("{}: {} failures, first {}", c.name, c.failed, c.first_failure.as_deref().unwrap_or("?")))
            .collect()
    }
}

/// Check the Hecke relations and the Deligne bound on every stored coefficient.
pub fn verify_hecke(s: &CoefficientSeries) -> HeckeReport {
    let n = s.len();
    let q = s.level;
    let k = s.weight as i32;
    let tol = |x: C64| if s.exact().is_some() { 0.5 } else { 1e-8 * (1.0 + x.norm()) };
    let spf = smallest_prime_factors(n.max(1));
    let mut classes: Vec<RelationClass> = ["coprime", "p_not_dividing_q", "p_dividing_q", "p2_divides_q", "deligne"]
        .iter()
        .map(|&name| RelationClass { name, checked: 0, failed: 0, first_failure: None })
        .collect();
    let record = |c: &mut RelationClass, ok: bool, what: String| {
        c.checked += 1;
        if !ok {
            c.failed += 1;
            c.first_failure.get_or_insert(what);
        }
    };
    for m in 2..=n {
        let p = spf[m] as usize;
        let mut pe = 1;
        while (m / pe) % p == 0 {
            pe *= p;
        }
        if pe != m {
            let rest = m / pe;
            let want = s.a(pe) * s.a(rest);
            record(&mut classes[0], (s.a(m) - want).norm() <= tol(want), format!("({pe},{rest})"));
        }
    }
    let nebentypus = |p: u64| -> C64 {
        match s.character {
            None => C64::new(1.0, 0.0),
            Some((modulus, idx)) => crate::characters::enumerate_characters(modulus)[idx].eval(p as i64),
        }
    };
    for p in crate::arith::primes_up_to(n as u64) {
        let pu = p as usize;
        if q % p != 0 {
            let psi = nebentypus(p) * (p as f64).powi(k - 1);
            let (mut prev, mut cur, mut pj) = (C64::new(1.0, 0.0), s.a(pu), pu);
            while pj * pu <= n {
                let want = s.a(pu) * cur - psi * prev;
                record(&mut classes[1], (s.a(pj * pu) - want).norm() <= tol(want), format!("p={p}, p^j={}", pj * pu));
                prev = cur;
                cur = s.a(pj * pu);
                pj *= pu;
            }
        } else {
            let mut pj = pu;
            while pj * pu <= n {
                let want = s.a(pu) * s.a(pj);
                record(&mut classes[2], (s.a(pj * pu) - want).norm() <= tol(want), format!("p={p}, p^j={}", pj * pu));
                pj *= pu;
            }
            if q % (p * p) == 0 {
                record(&mut classes[3], s.a(pu).norm() <= tol(C64::new(0.0, 0.0)), format!("p={p}"));
            }
        }
    }
    for m in 1..=n {
        let bound = sigma0(m as u64) as f64 * (m as f64).powf((k as f64 - 1.0) / 2.0);
        record(&mut classes[4], s.a(m).norm() <= bound * (1.0 + 1e-9), format!("n={m}"));
    }
    HeckeReport { classes }
}

/// Certified upper bound for `Σ_{n>N} n^p e^{-c n}`; `+∞` when `N` is below the
/// monotone range where the integral comparison applies.
pub fn power_exp_tail(p: f64, c: f64, n: usize) -> f64 {
    let nf = n.max(1) as f64;
    if p <= 0.0 {
        return nf.powf(p) * (-c * nf).exp() / c;
    }
    if nf * c < 2.0 * p {
        return f64::INFINITY;
    }
    nf.powf(p) * (-c * nf).exp() / (c - p / nf)
}

/// Smallest `N` with `power_exp_tail(p, c, N) ≤ eps`.
pub fn terms_for_tail(p: f64, c: f64, eps: f64) -> usize {
    let mut hi = 1usize;
    while power_exp_tail(p, c, hi) > eps {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if power_exp_tail(p, c, mid) > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormValue {
    pub value: C64,
    /// Tail bound plus a rounding allowance.
    pub bound: f64,
    pub terms: usize,
}

/// Terms needed so that the tail at height `y` is below `eps`, using
/// `|a(n)| ≤ σ_0(n) n^{(k-1)/2} ≤ n^{(k+1)/2}`.
pub fn terms_needed(weight: u32, y: f64, eps: f64) -> usize {
    terms_for_tail((weight as f64 + 1.0) / 2.0, TAU * y, eps)
}

fn sum_series(coeffs: &[C64], n: usize, y: f64, phase: impl Fn(usize) -> C64) -> (C64, f64) {
    const BLOCK: usize = 64;
    let r = (-TAU * y).exp();
    let mut acc = C64::new(0.0, 0.0);
    let mut mass = 0.0;
    let mut rn = 1.0;
    for m in 1..=n {
        if m % BLOCK == 0 {
            rn = (-TAU * y * m as f64).exp();
        } else {
            rn *= r;
        }
        if rn == 0.0 {
            break;
        }
        let t = coeffs[m] * phase(m) * rn;
        acc += t;
        mass += t.norm();
    }
    (acc, mass)
}

/// `f(z) = Σ a(n) e(nz)` truncated where the certified tail drops below `eps`.
pub fn evaluate_form(s: &CoefficientSeries, z: C64, eps: f64) -> Result<FormValue> {
    if z.im <= 0.0 {
        return Err(Error::Domain("Im z must be positive".into()));
    }
    let need = terms_needed(s.weight, z.im, eps);
    if need > s.len() {
        return Err(Error::Truncation { required: need, available: s.len() });
    }
    let x = z.re;
    let (value, mass) = sum_series(s.coeffs(), need, z.im, |m| e((m as f64 * x).fract()));
    let tail = power_exp_tail((s.weight as f64 + 1.0) / 2.0, TAU * z.im, need);
    Ok(FormValue { value, bound: tail + 1e-15 * mass, terms: need })
}

/// `f(a/d + iy)` using an exact phase table of period `d`.
pub fn evaluate_at_fraction(s: &CoefficientSeries, a: i64, d: u64, y: f64, eps: f64) -> Result<FormValue> {
    let phases: Vec<C64> = (0..d).map(|j| crate::e_frac(a * j as i64, d)).collect();
    evaluate_with_phases(s, &phases, y, eps)
}

/// Same as [`evaluate_at_fraction`] with a precomputed phase table `e(a j / d)`, `j mod d`.
pub fn evaluate_with_phases(s: &CoefficientSeries, phases: &[C64], y: f64, eps: f64) -> Result<FormValue> {
    let need = terms_needed(s.weight, y, eps);
    if need > s.len() {
        return Err(Error::Truncation { required: need, available: s.len() });
    }
    let d = phases.len();
    let (value, mass) = sum_series(s.coeffs(), need, y, |m| phases[m % d]);
    let tail = power_exp_tail((s.weight as f64 + 1.0) / 2.0, TAU * y, need);
    Ok(FormValue { value, bound: tail + 1e-15 * mass, terms: need })
}

/// Bundled newform of level 11 or 27 with `n` coefficients.
pub fn bundled(level: u64, n: usize) -> Result<CoefficientSeries> {
    let spec = match level {
        11 => EtaQuotientSpec::level11(),
        27 => EtaQuotientSpec::level27(),
        _ => return Err(Error::Domain(format!("no bundled form at level {level}"))),
    };
    eta_quotient_coeffs(&spec, n)
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level11_head() {
        let s = eta_quotient_coeffs(&EtaQuotientSpec::level11(), 12).unwrap();
        let want = [1, -2, -1, 2, 1, 2, -2, 0, -2, -2, 1, -2];
        assert_eq!(&s.exact().unwrap()[1..], &want);
    }

    #[test]
    fn n_one_is_unit() {
        for spec in [EtaQuotientSpec::level11(), EtaQuotientSpec::level27()] {
            assert_eq!(eta_quotient_coeffs(&spec, 1).unwrap().exact().unwrap()[1], 1);
        }
    }

    #[test]
    fn spec_validation() {
        assert!(EtaQuotientSpec::new(vec![(1, 2), (2, 2)], 2).is_err());
        assert!(EtaQuotientSpec::new(vec![(1, 2), (5, 2)], 11).is_err());
        let p = EtaQuotientSpec::parse("eta:1^2,11^2@11").unwrap();
        assert_eq!(p, EtaQuotientSpec::level11());
    }

    #[test]
    fn parse_errors() {
        assert!(parse_coeffs("level 11\nweight 2\ncoeffs\n").is_err());
        let dup = parse_coeffs("level 11\nweight 2\ncoeffs\n1 1\n1 1\n");
        assert!(matches!(dup, Err(Error::Parse { line: 5, .. })));
        let gap = parse_coeffs("level 11\nweight 2\ncoeffs\n1 1\n3 1\n");
        assert!(matches!(gap, Err(Error::Parse { line: 5, .. })));
        assert!(parse_coeffs("weight 2\ncoeffs\n1 1\n").is_err());
    }

    #[test]
    fn tail_bound_is_conservative() {
        let (p, c) = (1.5, 0.3);
        let n = 60;
        let exact: f64 = (n + 1..5000).map(|m| (m as f64).powf(p) * (-c * m as f64).exp()).sum();
        assert!(power_exp_tail(p, c, n) >= exact);
        assert!(power_exp_tail(p, c, n) < 3.0 * exact);
    }
}
