//! Multiplicative twists, Atkin–Lehner operators and contragredient series.

use crate::arith::{divisors, factorize, gcd, lcm, mod_inv, sigma0, sigma_real, LevelSplit};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::forms::{evaluate_form, power_exp_tail, CoefficientSeries};
use crate::{e_frac, C64};
use std::f64::consts::TAU;

/// `f^χ(n) = a(n) χ(n)` for `n ≤ len`, at level `lcm(q, cond(χ)²)`.
pub fn twist_coeffs(f: &CoefficientSeries, chi: &DirichletCharacter, len: usize) -> CoefficientSeries {
    let len = len.min(f.len());
    let a = (1..=len).map(|n| f.a(n) * chi.eval(n as i64)).collect();
    let level = lcm(f.level, chi.conductor * chi.conductor);
    let mut s = CoefficientSeries::from_complex(&format!("{}⊗{}", f.label, chi.label()), level, f.weight, a);
    if !chi.is_trivial() {
        let sq = chi.pow(2);
        if !sq.is_trivial() {
            s.character = Some((sq.modulus(), sq.index));
        }
    }
    s
}

/// `W_R = [[R x1, x2], [q x3, R x4]]` with `x1 ≡ 1 (mod q/R)`, `x2 ≡ 1 (mod R)`, det `R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AtkinLehnerMatrix {
    pub level: u64,
    pub r: u64,
    pub x: [i64; 4],
}

impl AtkinLehnerMatrix {
    /// `[[a, b], [c, d]]`.
    pub fn entries(&self) -> [i64; 4] {
        let (q, r) = (self.level as i64, self.r as i64);
        let [x1, x2, x3, x4] = self.x;
        [r * x1, x2, q * x3, r * x4]
    }

    pub fn det(&self) -> i64 {
        let [a, b, c, d] = self.entries();
        a * d - b * c
    }
}

/// Canonical representative: the least nonnegative `x1`, then `x2`.
pub fn atkin_lehner_matrix(q: u64, r: u64) -> Result<AtkinLehnerMatrix> {
    if r == 0 || q % r != 0 || gcd((q / r) as i64, r as i64) != 1 {
        return Err(Error::NotExactDivisor { r, q });
    }
    let qr = (q / r) as i64;
    let ri = r as i64;
    let x = if r == 1 {
        [1, 0, 0, 1]
    } else if qr == 1 {
        [0, 1, -1, 0]
    } else {
        // R x4 − (q/R) x3 = 1 with x1 = x2 = 1
        let x4 = mod_inv(ri, qr as u64)? as i64;
        let x3 = (ri * x4 - 1) / qr;
        [1, 1, x3, x4]
    };
    let m = AtkinLehnerMatrix { level: q, r, x };
    debug_assert_eq!(m.det(), ri);
    Ok(m)
}

/// `V = [[R·(Ra)⁻¹, (1 − Ra·(Ra)⁻¹)/M], [−qM/(q/R), Ra]]` with the inverse taken mod `M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlipMatrix {
    pub level: u64,
    pub r: u64,
    pub m: u64,
    pub a: i64,
    pub entries: [i64; 4],
}

pub fn flip_matrix(q: u64, r: u64, m: u64, a: i64) -> Result<FlipMatrix> {
    if q % r != 0 || gcd(r as i64, (q / r) as i64) != 1 {
        return Err(Error::NotExactDivisor { r, q });
    }
    if m % (q / r) != 0 || gcd(r as i64, m as i64) != 1 || gcd(a, m as i64) != 1 {
        return Err(Error::Domain(format!("flip matrix needs (q/R) | M, (R, M) = 1, (a, M) = 1; got q={q} R={r} M={m} a={a}")));
    }
    let (ri, mi) = (r as i64, m as i64);
    let ra = ri * a;
    let inv = mod_inv(ra, m)? as i64;
    let entries = [ri * inv, (1 - ra * inv) / mi, -(q as i64) * mi / (q / r) as i64, ra];
    debug_assert_eq!(entries[0] * entries[3] - entries[1] * entries[2], ri);
    Ok(FlipMatrix { level: q, r, m, a, entries })
}

/// `(h|γ)(z) = det^{k/2} (cz + d)^{-k} h(γz)` given `h(γz)`.
pub fn slash_factor(entries: [i64; 4], k: u32, z: C64) -> (C64, C64) {
    let [a, b, c, d] = entries.map(|x| x as f64);
    let det = a * d - b * c;
    let j = z * c + d;
    let gz = (z * a + b) / j;
    (gz, det.powf(k as f64 / 2.0) * j.powi(-(k as i32)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContragredientSource {
    NumericAL,
    Decomposition,
}

/// Coefficients `b(m)` of an Atkin–Lehner image, with per-coefficient error estimates.
#[derive(Clone, Debug)]
pub struct ContragredientSeries {
    /// Index 0 holds 0.
    pub b: Vec<C64>,
    pub err: Vec<f64>,
    pub source: ContragredientSource,
    pub level_out: u64,
    pub support_modulus: u64,
    pub weight: u32,
    pub chi_label: String,
}

impl ContragredientSeries {
    pub fn len(&self) -> usize {
        self.b.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn b(&self, m: usize) -> C64 {
        self.b.get(m).copied().unwrap_or_default()
    }

    pub fn max_err(&self) -> f64 {
        self.err.iter().copied().fold(0.0, f64::max)
    }

    /// `max_m |b(m)| / (σ_0(m) m^{(k−1)/2})` over the stored range.
    pub fn measured_constant(&self) -> f64 {
        (1..=self.len())
            .map(|m| self.b[m].norm() / (sigma0(m as u64) as f64 * (m as f64).powf((self.weight as f64 - 1.0) / 2.0)))
            .fold(0.0, f64::max)
    }

    pub fn as_series(&self, label: &str) -> CoefficientSeries {
        CoefficientSeries::from_complex(label, self.level_out, self.weight, self.b[1..].to_vec())
    }

    /// Scale every coefficient (used for the pseudo-eigenvalue normalization).
    pub fn scaled(&self, c: C64) -> Self {
        let mut s = self.clone();
        for x in s.b.iter_mut() {
            *x *= c;
        }
        for e in s.err.iter_mut() {
            *e *= c.norm();
        }
        s
    }
}

/// Default sampling height `min(1/√N, 1/(2 M_out))`.
pub fn default_height(level: u64, m_out: usize) -> f64 {
    (1.0 / (level as f64).sqrt()).min(0.5 / m_out as f64)
}

/// Recover `b(1..=m_out)` of `g|W_R` by sampling on `Im z = y0` and inverting a DFT.
///
/// `g` is treated as a form of level `g.level`. Fails with a precision error
/// when the estimated error of some coefficient exceeds `tol`.
pub fn apply_atkin_lehner_numeric(
    g: &CoefficientSeries,
    r: u64,
    m_out: usize,
    y0: Option<f64>,
    tol: f64,
) -> Result<ContragredientSeries> {
    let w = atkin_lehner_matrix(g.level, r)?;
    if r == 1 {
        let mut b = vec![C64::new(0.0, 0.0); m_out + 1];
        for (m, bm) in b.iter_mut().enumerate().skip(1) {
            *bm = g.a(m);
        }
        if m_out > g.len() {
            return Err(Error::Truncation { required: m_out, available: g.len() });
        }
        return Ok(ContragredientSeries {
            b,
            err: vec![0.0; m_out + 1],
            source: ContragredientSource::NumericAL,
            level_out: g.level,
            support_modulus: 1,
            weight: g.weight,
            chi_label: g.label.clone(),
        });
    }
    let y0 = y0.unwrap_or_else(|| default_height(g.level, m_out));
    let k = g.weight;
    let samples = (2 * m_out + 1).max((60.0 / (TAU * y0)).ceil() as usize);
    // Sample error budget: amplified by e^{2π m_out y0} at the top coefficient.
    let amp = (TAU * m_out as f64 * y0).exp();
    let eps_sample = (tol / amp * 1e-2).max(1e-17);
    let ent = w.entries();
    // Window of width 1 centred on the pole −d/c keeps |cz + d| ≤ c/2 + O(y0).
    let (c, d) = if ent[2] < 0 { (-ent[2], -ent[3]) } else { (ent[2], ent[3]) };
    let shift_num = -(2 * d + c);
    let shift_den = 2 * c as u64;
    let shift = shift_num as f64 / shift_den as f64;
    let vals = crate::par::try_map_slice(&(0..samples).collect::<Vec<_>>(), |&j| {
        let z = C64::new(shift + (j as f64 + 0.5) / samples as f64, y0);
        let (gz, factor) = slash_factor(ent, k, z);
        let v = evaluate_form(g, gz, eps_sample / factor.norm().max(1e-300)).map_err(|e| match e {
            Error::Truncation { required, available } => Error::Precision {
                target: tol,
                achieved: f64::INFINITY,
                hint: format!(
                    "series of length {available} too short at height {:.3e} (needs {required}); raise y0 above {y0:.3e} or extend the series",
                    gz.im
                ),
            },
            other => other,
        })?;
        Ok::<_, Error>((v.value * factor, v.bound * factor.norm()))
    })?;
    let sample_err = vals.iter().map(|v| v.1).fold(0.0, f64::max);
    let mut b = vec![C64::new(0.0, 0.0); m_out + 1];
    let twiddle: Vec<C64> = (0..2 * samples).map(|t| e_frac(-(t as i64), 2 * samples as u64)).collect();
    for (m, bm) in b.iter_mut().enumerate().skip(1) {
        let mut acc = C64::new(0.0, 0.0);
        for (j, v) in vals.iter().enumerate() {
            // e(−m (j + 1/2)/K) = e(−m (2j+1) / 2K)
            acc += v.0 * twiddle[(m * (2 * j + 1)) % (2 * samples)];
        }
        *bm = acc / samples as f64 * (TAU * m as f64 * y0).exp() * e_frac(-(m as i64) * shift_num, shift_den);
    }
    let p = (k as f64 + 1.0) / 2.0;
    let c_est = 10.0
        * (1..=m_out)
            .map(|m| b[m].norm() / (m as f64).powf(p))
            .fold(1.0, f64::max);
    let err: Vec<f64> = (0..=m_out)
        .map(|m| {
            if m == 0 {
                return 0.0;
            }
            let up = (TAU * m as f64 * y0).exp();
            let alias = c_est * up * power_exp_tail(p, TAU * y0, samples) * (TAU * samples as f64 * y0).exp().min(1.0);
            sample_err * up + alias + 1e-15 * b[m].norm()
        })
        .collect();
    let worst = err.iter().copied().fold(0.0, f64::max);
    if worst > tol {
        return Err(Error::Precision {
            target: tol,
            achieved: worst,
            hint: format!("try a smaller M_out or a different y0 (used {y0:.3e})"),
        });
    }
    Ok(ContragredientSeries {
        b,
        err,
        source: ContragredientSource::NumericAL,
        level_out: g.level,
        support_modulus: 1,
        weight: k,
        chi_label: g.label.clone(),
    })
}

/// `λ = b(1)` of `F|W_R` for a normalized newform `F` of level `q_f`.
pub fn pseudo_eigenvalue(f: &CoefficientSeries, q_f: u64, r: u64) -> Result<C64> {
    if r == 1 {
        return Ok(C64::new(1.0, 0.0));
    }
    let mut g = f.clone();
    g.level = q_f;
    let s = apply_atkin_lehner_numeric(&g, r, 4, Some(0.25 / (q_f as f64).sqrt()), 1e-9)?;
    Ok(s.b[1])
}

/// Decomposition `f^χ = Σ_{ℓ | r_{*0}} β(ℓ) F_χ|B_ℓ` for primitive `χ` mod `r_*`.
#[derive(Clone, Debug)]
pub struct TwistDecomposition {
    pub f_level: u64,
    pub f_coeffs: CoefficientSeries,
    pub chi: DirichletCharacter,
    /// `(ℓ, β(ℓ))` for every `ℓ | r_{*0}`.
    pub beta: Vec<(u64, C64)>,
    pub r_star0: u64,
    pub q_star: u64,
    /// Atkin–Lehner index `R R_*'/R_*` at the level of `F_χ`.
    pub al_index: u64,
    pub lambda: Option<C64>,
}

impl TwistDecomposition {
    pub fn beta_at(&self, l: u64) -> C64 {
        self.beta.iter().find(|b| b.0 == l).map_or(C64::new(0.0, 0.0), |b| b.1)
    }

    /// `ã(n)`: conjugate eigenvalues at primes of the Atkin–Lehner index, `χ̄²`-twisted elsewhere.
    pub fn dual_coefficient(&self, n: u64) -> C64 {
        let chi2 = self.chi.pow(2);
        let mut out = C64::new(1.0, 0.0);
        for (p, e) in factorize(n).unwrap().factors {
            let pe = p.pow(e) as usize;
            let a = self.f_coeffs.a(pe);
            out *= if self.al_index % p == 0 {
                a.conj()
            } else {
                chi2.eval(pe as i64).conj() * a
            };
        }
        out
    }

    pub fn compute_lambda(&mut self) -> Result<C64> {
        let l = pseudo_eigenvalue(&self.f_coeffs, self.f_level, self.al_index)?;
        self.lambda = Some(l);
        Ok(l)
    }

    /// `b(Q m) = λ Σ_{ℓ | (r_{*0}, m)} β(r_{*0}/ℓ) (r_{*0}/ℓ)^{−k/2} (Q ℓ)^{k/2} ã(m/ℓ)`, zero off multiples of `Q`.
    pub fn contragredient(&self, len: usize, level_out: u64) -> Result<ContragredientSeries> {
        let lambda = self
            .lambda
            .ok_or_else(|| Error::Invariant("pseudo-eigenvalue not computed".into()))?;
        let need = len / self.q_star as usize;
        if need > self.f_coeffs.len() {
            return Err(Error::Truncation { required: need, available: self.f_coeffs.len() });
        }
        let k = self.f_coeffs.weight as f64;
        let q = self.q_star as f64;
        let r0 = self.r_star0;
        let mut b = vec![C64::new(0.0, 0.0); len + 1];
        let mut dual = vec![C64::new(0.0, 0.0); need + 1];
        for (n, d) in dual.iter_mut().enumerate().skip(1) {
            *d = self.dual_coefficient(n as u64);
        }
        for m in 1..=need {
            let mut acc = C64::new(0.0, 0.0);
            for l in divisors(gcd(r0 as i64, m as i64)) {
                let rl = (r0 / l) as f64;
                acc += self.beta_at(r0 / l) * rl.powf(-k / 2.0) * (q * l as f64).powf(k / 2.0) * dual[m / l as usize];
            }
            b[m * self.q_star as usize] = lambda * acc;
        }
        Ok(ContragredientSeries {
            b,
            err: vec![0.0; len + 1],
            source: ContragredientSource::Decomposition,
            level_out,
            support_modulus: self.q_star,
            weight: self.f_coeffs.weight,
            chi_label: self.chi.label(),
        })
    }
}

/// Build and verify the decomposition of `f^χ` through externally supplied `F_χ` of level `q'`.
pub fn twist_decomposition(
    f: &CoefficientSeries,
    chi: &DirichletCharacter,
    big_f: &CoefficientSeries,
    q_prime: u64,
    split: &LevelSplit,
) -> Result<TwistDecomposition> {
    if !chi.is_primitive() {
        return Err(Error::Domain("twist_decomposition needs a primitive character".into()));
    }
    let q = f.level;
    let r_star = chi.modulus();
    let fq = factorize(q)?;
    let fqp = factorize(q_prime)?;
    let k = f.weight as i32;
    let r_primes: Vec<u64> = factorize(r_star)?.primes().collect();
    let big_r_star: u64 = r_primes.iter().map(|&p| p.pow(fq.ord(p))).product();
    let big_r_star_p: u64 = r_primes.iter().map(|&p| p.pow(fqp.ord(p))).product();
    if lcm(q, r_star * r_star) % q_prime != 0 || q_prime % (q / big_r_star) != 0 {
        return Err(Error::Invariant(format!("level {q_prime} incompatible with q={q}, r_*={r_star}")));
    }
    let chi2 = chi.pow(2);
    // r_{*0}: p² for p ∤ q', p for p | q' with a_χ(p) ≠ 0
    let mut r0 = 1u64;
    let mut local: Vec<(u64, Vec<(u32, C64)>)> = Vec::new();
    for &p in &r_primes {
        let ap = big_f.a(p as usize);
        let mut tab = vec![(0u32, C64::new(1.0, 0.0))];
        if q_prime % p != 0 {
            r0 *= p * p;
            tab.push((1, -ap));
            tab.push((2, -chi2.eval(p as i64) * (p as f64).powi(k - 1)));
        } else if ap.norm() > 1e-9 {
            r0 *= p;
            tab.push((1, -ap));
        }
        local.push((p, tab));
    }
    let beta: Vec<(u64, C64)> = divisors(r0)
        .into_iter()
        .map(|l| {
            let mut v = C64::new(1.0, 0.0);
            for (p, tab) in &local {
                let e = crate::arith::ord(*p, l);
                v *= tab.iter().find(|t| t.0 == e).map_or(C64::new(0.0, 0.0), |t| t.1);
            }
            (l, v)
        })
        .collect();
    let num = big_r_star as u128 * split.big_r_prime as u128;
    let den = big_r_star_p as u128 * split.big_r as u128 * r0 as u128;
    if num % den != 0 {
        return Err(Error::Invariant(format!("Q_* = {num}/{den} is not integral")));
    }
    let q_star = (num / den) as u64;
    let al_index = split.big_r * big_r_star_p / big_r_star;
    let dec = TwistDecomposition {
        f_level: q_prime,
        f_coeffs: big_f.clone(),
        chi: chi.clone(),
        beta,
        r_star0: r0,
        q_star,
        al_index,
        lambda: None,
    };
    let twisted = twist_coeffs(f, chi, f.len());
    let n_max = f.len().min(big_f.len());
    for n in 1..=n_max {
        let mut rec = C64::new(0.0, 0.0);
        for &(l, b) in &dec.beta {
            if n as u64 % l == 0 {
                rec += b * big_f.a(n / l as usize);
            }
        }
        let want = twisted.a(n);
        if (rec - want).norm() > 1e-8 * (1.0 + want.norm()) {
            return Err(Error::DataMismatch(format!(
                "reconstruction fails at n={n}: expected {want}, got {rec}"
            )));
        }
    }
    Ok(dec)
}

/// Rows `(m, |(Qm)^{−1/2} b(Qm)|, normalizer, ratio)` for the contragredient bound shape at `ε`.
pub fn contragredient_bound_report(s: &ContragredientSeries, r_star0: u64, eps: f64) -> Vec<(usize, f64, f64, f64)> {
    let q = s.support_modulus as usize;
    let r0 = r_star0 as f64;
    (1..=s.len() / q)
        .map(|m| {
            let qm = q * m;
            let lhs = s.b(qm).norm() / (qm as f64).sqrt();
            let norm = (m as f64 / r0).powf(eps) * ((q as f64) * r0).sqrt() * sigma_real(-1.0 + 2.0 * eps, r_star0);
            (m, lhs, norm, lhs / norm)
        })
        .collect()
}
