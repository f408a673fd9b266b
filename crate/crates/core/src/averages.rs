//! Averages of modular symbols over `a/M`.
//!
//! `G_M^±(x) = (1/M) Σ_{0 ≤ a ≤ Mx} ⟨a/M⟩^±` is compared with the smoothed average
//! `A_h^±(M) = Σ_n ĥ(n) (α_{−n,M} ± α_{n,M})`, where `h = h_δ` is a bump-smoothed
//! indicator of `[0, x]`, and with the limit series
//! `(1/2π) Σ a(n) sin(2πnx)/n²` and `(1/2πi) Σ a(n)(cos(2πnx) − 1)/n²`.

use crate::arith::{divisors, factorize, gcd};
use crate::error::{Error, Result};
use crate::ltwist::{lambda_via_fe, Engine, ModularSymbolPair};
use crate::quad::composite_gl;
use crate::{e_frac, C64};
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;
use std::sync::{OnceLock, RwLock};

/// A point of `[0, 1]` kept as an exact fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fraction {
    pub num: i64,
    pub den: u64,
}

impl Fraction {
    pub fn new(num: i64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        let g = gcd(num, den as i64).max(1);
        Ok(Fraction { num: num / g as i64, den: den / g })
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `⌊M·x⌋`, exact.
    pub fn floor_times(&self, m: u64) -> i64 {
        (self.num * m as i64).div_euclid(self.den as i64)
    }
}

impl FromStr for Fraction {
    type Err = Error;

    /// Accepts `p/q` or a finite decimal such as `0.25`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Domain(format!("cannot read '{s}' as a fraction"));
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: u64 = q.trim().parse().map_err(|_| bad())?;
            return Fraction::new(p, q);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10u64.pow(frac.len() as u32);
        let f: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = int.abs() * den as i64 + f;
        Fraction::new(if neg { -num } else { num }, den)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn bump_raw(t: f64) -> f64 {
    let u = 1.0 - 16.0 * t * t;
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

fn bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| composite_gl(bump_raw, -0.25, 0.25, 20, 64))
}

/// `φ(t) = c·exp(−1/(1 − 16t²))` on `(−1/4, 1/4)` with `∫φ = 1`.
pub fn phi(t: f64) -> f64 {
    bump_raw(t) / bump_mass()
}

/// `∫_{−1/4}^{u} φ`.
fn phi_cumulative(u: f64) -> f64 {
    if u <= -0.25 {
        0.0
    } else if u >= 0.25 {
        1.0
    } else if u <= 0.0 {
        composite_gl(phi, -0.25, u, 20, 16)
    } else {
        1.0 - composite_gl(phi, u, 0.25, 20, 16)
    }
}

/// Absolute accuracy of [`phi_hat`]; smaller values are rounding noise.
pub const PHI_HAT_FLOOR: f64 = 1e-14;

/// `φ̂(ξ) = ∫ φ(t) e(−ξt) dt` (real since `φ` is even).
pub fn phi_hat(xi: f64) -> f64 {
    let panels = 32 + (xi.abs() / 2.0).ceil() as usize;
    2.0 * composite_gl(|t| phi(t) * (TAU * xi * t).cos(), 0.0, 0.25, 20, panels)
}

/// `h_δ = 1_{[−δ, x+δ]} ⋆ φ_δ` on `R/Z`, with `φ_δ(t) = φ(t/δ)/δ`.
pub struct BumpFamily {
    pub x: f64,
    pub delta: f64,
    phi_hat_cache: RwLock<Vec<f64>>,
}

impl BumpFamily {
    pub fn new(x: f64, delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) || !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain(format!("need 0 ≤ x ≤ 1 and 0 < δ < 1, got x={x}, δ={delta}")));
        }
        Ok(BumpFamily { x, delta, phi_hat_cache: RwLock::new(vec![1.0]) })
    }

    /// Cumulative mass of the periodized `φ_δ` up to `y`.
    fn cumulative(&self, y: f64) -> f64 {
        let k = (y + 0.5).floor();
        k + phi_cumulative((y - k) / self.delta)
    }

    /// `h_δ(t) = ∫_{t−x−δ}^{t+δ} φ_δ`.
    pub fn h(&self, t: f64) -> f64 {
        let t = t.rem_euclid(1.0);
        self.cumulative(t + self.delta) - self.cumulative(t - self.x - self.delta)
    }

    /// `φ̂(nδ)` for `0 ≤ n ≤ n_max`, filled on demand.
    pub fn phi_hats(&self, n_max: usize) -> Vec<f64> {
        {
            let c = self.phi_hat_cache.read().unwrap();
            if c.len() > n_max {
                return c[..=n_max].to_vec();
            }
        }
        let start = self.phi_hat_cache.read().unwrap().len();
        let fresh = crate::par::map_range(n_max + 1 - start, |j| phi_hat((start + j) as f64 * self.delta));
        let mut c = self.phi_hat_cache.write().unwrap();
        if c.len() == start {
            c.extend(fresh);
        }
        c[..=n_max].to_vec()
    }

    /// `ĥ_δ(n) = (e(nδ) − e(−n(x+δ)))/(2πin) · φ̂(nδ)`, and `x + 2δ` at `n = 0`.
    pub fn h_hat(&self, n: i64) -> C64 {
        let ph = self.phi_hats(n.unsigned_abs() as usize)[n.unsigned_abs() as usize];
        self.h_hat_with(n, ph)
    }

    fn h_hat_with(&self, n: i64, phi_hat_n: f64) -> C64 {
        if n == 0 {
            return C64::new(self.x + 2.0 * self.delta, 0.0);
        }
        let nf = n as f64;
        let top = crate::e(nf * self.delta) - crate::e(-nf * (self.x + self.delta));
        top / C64::new(0.0, TAU * nf) * phi_hat_n
    }

    /// Smallest `N` with `Σ_{|n|>N} |ĥ_δ(n)| ≤ tol`, from `|ĥ_δ(n)| ≤ |φ̂(nδ)|/(π|n|)`.
    ///
    /// `φ̂` decays faster than any power; the tail is summed out to the first
    /// doubling `[n, 2n]` on which `|φ̂(nδ)|` stays under the quadrature floor.
    pub fn cutoff(&self, tol: f64) -> usize {
        let mut n_far = (8.0 / self.delta).ceil() as usize;
        loop {
            let ph = self.phi_hats(2 * n_far);
            let quiet = (n_far..=2 * n_far).all(|n| ph[n].abs() < PHI_HAT_FLOOR);
            if quiet {
                let mut tail = 0.0;
                for n in (1..=2 * n_far).rev() {
                    let next = tail + 2.0 * ph[n].abs() / (PI * n as f64);
                    if next > tol {
                        return n;
                    }
                    tail = next;
                }
                return 0;
            }
            n_far *= 2;
        }
    }

    /// `sup_n |ĥ_δ(n)|·(|n|+1)·(δ(1+|n|))^K` over `|n| ≤ n_max`.
    pub fn decay_constant(&self, k: i32, n_max: usize) -> f64 {
        let ph = self.phi_hats(n_max);
        (1..=n_max)
            .map(|n| {
                let v = self.h_hat_with(n as i64, ph[n]).norm();
                v * (n as f64 + 1.0) * (self.delta * (1.0 + n as f64)).powi(k)
            })
            .fold(self.h_hat_with(0, 1.0).norm(), f64::max)
    }
}

/// `⟨a/M⟩^±` with the fraction reduced first.
pub fn symbol(engine: &Engine, a: i64, m: u64) -> Result<ModularSymbolPair> {
    let a = a.rem_euclid(m as i64);
    let g = gcd(a, m as i64).max(1);
    engine.modular_symbol(a / g as i64, m / g)
}

/// Symbols `⟨a/M⟩^±` for `a = 0..M−1`, computed in parallel after building every dual of `d | M`.
pub fn symbols_mod(engine: &Engine, m: u64) -> Result<Vec<ModularSymbolPair>> {
    engine.prepare(&divisors(m))?;
    let reps: Vec<i64> = (0..m as i64).collect();
    crate::par::try_map_slice(&reps, |&a| symbol(engine, a, m))
}

/// `G_M^±(x) = (1/M) Σ_{0 ≤ a ≤ Mx} ⟨a/M⟩^±`.
pub fn g_m_direct(engine: &Engine, x: Fraction, m: u64) -> Result<(C64, C64)> {
    if m == 0 {
        return Err(Error::Domain("M must be positive".into()));
    }
    let top = x.floor_times(m);
    let ds: Vec<u64> = divisors(m);
    engine.prepare(&ds)?;
    let reps: Vec<i64> = (0..=top).collect();
    let syms = crate::par::try_map_slice(&reps, |&a| symbol(engine, a, m))?;
    let plus: C64 = syms.iter().map(|s| s.plus).sum();
    let minus: C64 = syms.iter().map(|s| s.minus).sum();
    Ok((plus / m as f64, minus / m as f64))
}

/// `α_{r,M} = (1/M) Σ_{a mod M} e(−ra/M) L(1, f, a/M)` for `r = 0..M−1` (periodic in `r`).
pub fn alphas(engine: &Engine, m: u64) -> Result<Vec<C64>> {
    engine.prepare(&divisors(m))?;
    let l: Vec<C64> = crate::par::try_map_slice(&(0..m as i64).collect::<Vec<_>>(), |&a| {
        let g = gcd(a, m as i64).max(1);
        engine.l1(a / g as i64, m / g)
    })?;
    Ok((0..m as i64)
        .map(|r| {
            let s: C64 = l.iter().enumerate().map(|(a, v)| v * e_frac(-r * a as i64, m)).sum();
            s / m as f64
        })
        .collect())
}

pub fn alpha(engine: &Engine, n: i64, m: u64) -> Result<C64> {
    let a = alphas(engine, m)?;
    Ok(a[n.rem_euclid(m as i64) as usize])
}

/// `A_h^±(M)` truncated at `|n| ≤ N_cut` with the discarded tail below `tol`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothedAverage {
    pub plus: C64,
    pub minus: C64,
    pub n_cut: usize,
}

pub fn a_h_pm(engine: &Engine, family: &BumpFamily, m: u64, tol: f64) -> Result<SmoothedAverage> {
    let al = alphas(engine, m)?;
    let amax = al.iter().map(|a| a.norm()).fold(0.0, f64::max).max(1e-300);
    let n_cut = family.cutoff(tol / (2.0 * amax));
    let ph = family.phi_hats(n_cut);
    let at = |n: i64| al[n.rem_euclid(m as i64) as usize];
    let mut plus = C64::new(0.0, 0.0);
    let mut minus = C64::new(0.0, 0.0);
    for n in -(n_cut as i64)..=(n_cut as i64) {
        let hh = family.h_hat_with(n, ph[n.unsigned_abs() as usize]);
        plus += hh * (at(-n) + at(n));
        minus += hh * (at(-n) - at(n));
    }
    Ok(SmoothedAverage { plus, minus, n_cut })
}

/// `(1/M) Σ_{a mod M} ⟨a/M⟩^± h(a/M)`.
pub fn weighted_symbol_average(engine: &Engine, family: &BumpFamily, m: u64) -> Result<(C64, C64)> {
    let syms = symbols_mod(engine, m)?;
    let mut plus = C64::new(0.0, 0.0);
    let mut minus = C64::new(0.0, 0.0);
    for (a, s) in syms.iter().enumerate() {
        let w = family.h(a as f64 / m as f64);
        plus += s.plus * w;
        minus += s.minus * w;
    }
    Ok((plus / m as f64, minus / m as f64))
}

/// Partial sums of the two limit series with a certified tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitValue {
    pub plus: f64,
    /// Purely imaginary.
    pub minus: C64,
    pub tail_plus: f64,
    pub tail_minus: f64,
}

/// Partial sums to `n`; tails from `|a(m)| ≤ σ_0(m)√m ≤ C m^{3/4}`, so `Σ_{m>n} |a(m)|/m² ≤ 4C n^{−1/4}`.
pub fn limit_series(f: &crate::forms::CoefficientSeries, x: f64, n: usize) -> Result<LimitValue> {
    if n > f.len() {
        return Err(Error::Truncation { required: n, available: f.len() });
    }
    let mut sp = 0.0;
    let mut sm = 0.0;
    for m in 1..=n {
        let a = f.a(m).re / (m as f64 * m as f64);
        let t = TAU * m as f64 * x;
        sp += a * t.sin();
        sm += a * (t.cos() - 1.0);
    }
    let c = crate::arith::divisor_bound_constant(0.25);
    let tail = 4.0 * c * (n as f64).powf(-0.25) / TAU;
    Ok(LimitValue { plus: sp / TAU, minus: C64::new(0.0, -sm / TAU), tail_plus: tail, tail_minus: 2.0 * tail })
}

/// `L(2, f, a/d) = 4π² Λ(2, f, a/d)` through the functional equation.
pub fn l2_twist(engine: &Engine, num: i64, den: u64) -> Result<C64> {
    let tw = engine.twist(num, den)?;
    let duals = engine.contragredients(&tw, 1.0)?;
    let lam = lambda_via_fe(&engine.f, C64::new(2.0, 0.0), &tw, &duals, engine.eps)?;
    Ok(lam * (4.0 * PI * PI))
}

/// Exact values of both limit series at a rational `x`:
/// `Σ a(n) e(nx)/n² = L(2, f, x)`, so the sine series is `Im L(2, f, x)` and the
/// cosine series is `Re L(2, f, x) − L(2, f)`.
pub fn limit_rational(engine: &Engine, x: Fraction) -> Result<LimitValue> {
    let lx = l2_twist(engine, x.num, x.den)?;
    let l0 = l2_twist(engine, 0, 1)?;
    Ok(LimitValue {
        plus: lx.im / TAU,
        minus: C64::new(0.0, -(lx.re - l0.re) / TAU),
        tail_plus: 0.0,
        tail_minus: 0.0,
    })
}

fn prime_power_product(q: u64, m: u64, keep: impl Fn(u32, u32) -> bool, power: f64) -> f64 {
    let fq = factorize(q).unwrap();
    let fm = factorize(m).unwrap();
    fm.factors
        .iter()
        .filter(|&&(p, e)| keep(e, fq.ord(p)))
        .map(|&(p, _)| (p as f64).powf(power))
        .product()
}

/// `δ_M = M^{−3/4} Π_{p | (q,M), p² | q} p^{1/4}`, clamped into `(M^{−7/8}, 1)`.
pub fn delta_schedule(m: u64, q: u64) -> f64 {
    let mf = m as f64;
    let d = mf.powf(-0.75) * prime_power_product(q, m, |_, eq| eq >= 2, 0.25);
    let lo = mf.powf(-0.875);
    d.max(lo * (1.0 + 1e-9)).min(1.0 - 1e-9)
}

/// `M^{−1/4} q^{1/4} Π_{p | M, ord_p(M) < ord_p(q)} p^{1/2}`.
pub fn predicted_error_scale(m: u64, q: u64) -> f64 {
    (m as f64).powf(-0.25) * (q as f64).powf(0.25) * prime_power_product(q, m, |em, eq| em < eq, 0.5)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub m: u64,
    pub delta: f64,
    pub g_plus: f64,
    pub g_minus_im: f64,
    pub limit_plus: f64,
    pub limit_minus_im: f64,
    pub err_plus: f64,
    pub err_minus: f64,
    pub pred_scale: f64,
}

impl ConvergenceRow {
    pub const CSV_HEADER: &'static str = "M,delta,G_plus,G_minus_im,limit_plus,limit_minus_im,err_plus,err_minus,pred_scale";

    pub fn csv(&self) -> String {
        format!(
            "{},{:.12e},{:.15e},{:.15e},{:.15e},{:.15e},{:.6e},{:.6e},{:.6e}",
            self.m,
            self.delta,
            self.g_plus,
            self.g_minus_im,
            self.limit_plus,
            self.limit_minus_im,
            self.err_plus,
            self.err_minus,
            self.pred_scale
        )
    }
}

/// `G_M^±(x)` against the limit series for each `M`.
pub fn convergence_experiment(engine: &Engine, x: Fraction, m_list: &[u64]) -> Result<Vec<ConvergenceRow>> {
    if m_list.is_empty() {
        return Err(Error::Domain("empty M list".into()));
    }
    if m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("M list must be strictly ascending".into()));
    }
    let q = engine.f.level;
    let lim = limit_rational(engine, x)?;
    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let (gp, gm) = g_m_direct(engine, x, m)?;
        rows.push(ConvergenceRow {
            m,
            delta: if m > 1 { delta_schedule(m, q) } else { 1.0 - 1e-9 },
            g_plus: gp.re,
            g_minus_im: gm.im,
            limit_plus: lim.plus,
            limit_minus_im: lim.minus.im,
            err_plus: (gp.re - lim.plus).abs(),
            err_minus: (gm.im - lim.minus.im).abs(),
            pred_scale: predicted_error_scale(m, q),
        });
    }
    Ok(rows)
}
