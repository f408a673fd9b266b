//! Additive twists `Λ(s, f, a/d) = ∫_0^∞ f(a/d + iy) y^{s−1} dy` of weight-2 newforms.
//!
//! Three routes are provided:
//!
//! * [`lambda_direct`] integrates `f` on the vertical line (the oracle);
//! * [`functional_equation_rhs`] evaluates the dual side of the functional
//!   equation from contragredient series of the twists `f^χ`;
//! * [`approx_l1`] is the approximate functional equation at `s = 1`.
//!
//! [`Engine`] owns a form, builds and caches the contragredient data and
//! serves modular symbols.

pub mod kernel;

pub use kernel::{v_smooth, KernelShape, SmoothingKernel};

use crate::arith::{crt_split, euler_phi, level_split, mod_inv, moebius, mulmod, LevelSplit};
use crate::characters::{gauss_sum, primitive_characters, DirichletCharacter};
use crate::error::{Error, Result};
use crate::forms::{evaluate_with_phases, power_exp_tail, terms_for_tail, CoefficientSeries};
use crate::quad::adaptive_gk;
use crate::special::gamma_upper;
use crate::twists::{apply_atkin_lehner_numeric, twist_coeffs, twist_decomposition, ContragredientSeries};
use crate::{e_frac, C64};
use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Arc, Mutex, OnceLock};

/// A reduced fraction `a/d` together with its level split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AdditiveTwist {
    pub a: i64,
    pub d: u64,
    pub split: LevelSplit,
    pub a1: u64,
    pub a2: u64,
}

impl AdditiveTwist {
    pub fn new(q: u64, a: i64, d: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("denominator 0".into()));
        }
        let a = a.rem_euclid(d as i64);
        let split = level_split(q, d);
        let (a1, a2) = crt_split(a, &split)?;
        Ok(AdditiveTwist { a, d, split, a1, a2 })
    }

    /// `−a/d`.
    pub fn neg(&self) -> Self {
        AdditiveTwist::new(self.split.q, -self.a, self.d).expect("negation keeps coprimality")
    }

    /// `N = M_d² R_d' = lcm(q, d²)`.
    pub fn conductor(&self) -> u64 {
        self.split.conductor()
    }

    /// `β = −(R_d' a1)⁻¹ mod M_d`.
    pub fn dual_numerator(&self) -> u64 {
        let m = self.split.m_d;
        if m == 1 {
            return 0;
        }
        let inv = mod_inv(mulmod(self.split.big_r_prime as i64, self.a1, m) as i64, m).expect("coprime");
        (m - inv) % m
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaValue {
    pub value: C64,
    pub err: f64,
}

fn divisor_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| crate::arith::divisor_bound_constant(0.25))
}

/// `|c(n)| ≤ K n^p` for a newform of weight `k` (Deligne with `σ_0(n) ≤ C n^{1/4}`).
fn newform_bound(weight: u32) -> (f64, f64) {
    (divisor_constant(), (weight as f64 - 1.0) / 2.0 + 0.25)
}

/// Terms needed so that `Σ_{n>N} K n^p |(2πn)^{−s} Γ(s, 2πnY)| ≤ eps`.
fn upper_terms(kp: (f64, f64), sigma: f64, y: f64, eps: f64) -> usize {
    let kappa = if sigma <= 1.0 { 1.0 } else { 2.0 };
    let scale = kp.0 * kappa * y.powf(sigma - 1.0) / TAU;
    let n = terms_for_tail(kp.1 - 1.0, TAU * y, eps / scale);
    n.max(((sigma - 1.0) / (std::f64::consts::PI * y)).ceil() as usize)
}

fn upper_tail(kp: (f64, f64), sigma: f64, y: f64, n: usize) -> f64 {
    let kappa = if sigma <= 1.0 { 1.0 } else { 2.0 };
    kp.0 * kappa * y.powf(sigma - 1.0) / TAU * power_exp_tail(kp.1 - 1.0, TAU * y, n)
}

/// `Σ_n c(n) phase(n) (2πn)^{−s} Γ(s, 2πnY)` with a certified tail below `eps`.
fn upper_sum(
    c: &[C64],
    phase: impl Fn(usize) -> C64,
    s: C64,
    y: f64,
    kp: (f64, f64),
    eps: f64,
) -> Result<LambdaValue> {
    let n = upper_terms(kp, s.re, y, eps);
    if n >= c.len() {
        return Err(Error::Truncation { required: n, available: c.len().saturating_sub(1) });
    }
    let mut acc = C64::new(0.0, 0.0);
    for (m, cm) in c.iter().enumerate().take(n + 1).skip(1) {
        if cm.norm() == 0.0 {
            continue;
        }
        let x = TAU * m as f64;
        acc += cm * phase(m) * (-s * x.ln()).exp() * gamma_upper(s, x * y);
    }
    Ok(LambdaValue { value: acc, err: upper_tail(kp, s.re, y, n) })
}

fn phase_table(a: i64, d: u64) -> Vec<C64> {
    (0..d).map(|j| e_frac(a * j as i64, d)).collect()
}

/// `Λ(s, f, a/d)` for each `s` by splitting at `Y0 = 1/(d√q)`: incomplete-Gamma series
/// above, adaptive quadrature of `f(a/d + iy) y^{s−1}` in `ln y` below.
pub fn lambda_direct(f: &CoefficientSeries, s: &[C64], tw: &AdditiveTwist, eps: f64) -> Result<Vec<LambdaValue>> {
    let q = f.level;
    let y0 = 1.0 / (tw.d as f64 * (q as f64).sqrt());
    let phases = phase_table(tw.a, tw.d);
    let kp = newform_bound(f.weight);
    let mut out = Vec::with_capacity(s.len());
    for &sj in s {
        out.push(upper_sum(f.coeffs(), |m| phases[m % phases.len()], sj, y0, kp, eps / 4.0)?);
    }
    let sig = s.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let point_eps = 1e-13;
    // lower cutoff: three consecutive steps of 0.8 with negligible integrand
    let mut y = y0;
    let mut quiet = 0;
    let mut last_mag;
    loop {
        y *= 0.8;
        let v = evaluate_with_phases(f, &phases, y, point_eps)?;
        last_mag = v.value.norm() * y.powf(sig);
        if last_mag < eps * 1e-3 {
            quiet += 1;
            if quiet == 3 {
                break;
            }
        } else {
            quiet = 0;
        }
        if y < 1e-12 {
            return Err(Error::Precision {
                target: eps,
                achieved: last_mag,
                hint: "integrand does not decay towards the cusp".into(),
            });
        }
    }
    let integrand = |t: f64| -> Result<Vec<C64>> {
        let yy = t.exp();
        let v = evaluate_with_phases(f, &phases, yy, point_eps)?.value;
        Ok(s.iter().map(|&sj| v * (sj * t).exp()).collect())
    };
    let (lower, qerr) = adaptive_gk(integrand, y.ln(), y0.ln(), eps / 4.0, 16, 40)?;
    for (o, l) in out.iter_mut().zip(lower) {
        o.value += l;
        o.err += qerr + last_mag * 4.0;
    }
    Ok(out)
}

/// Twisted-form data for one character in the dual sum.
#[derive(Clone, Debug)]
pub struct DualData {
    pub chi: DirichletCharacter,
    pub r_prime: u64,
    /// `f^χ`, tagged with level `R' q / R`.
    pub twisted: CoefficientSeries,
    /// Coefficients of `f^χ | W_{R'}`.
    pub dual: ContragredientSeries,
}

/// Contragredient data keyed by character label.
pub type Contragredients = HashMap<String, Arc<DualData>>;

/// Characters of the dual sum: primitive `χ` mod `n` for `n | r_d` with `r_d/n`
/// square-free and coprime to `n`.
pub fn fe_characters(split: &LevelSplit) -> Vec<(u64, DirichletCharacter)> {
    let r = split.r_d;
    let mut out = Vec::new();
    for n in crate::arith::divisors(r) {
        let rest = r / n;
        if moebius(rest) == 0 || crate::arith::gcd(n as i64, rest as i64) != 1 {
            continue;
        }
        for chi in primitive_characters(n) {
            out.push((n, chi));
        }
    }
    out
}

/// `μ(r/n) τ(χ̄) χ(a2·(r/n)⁻¹) χ(M)²`.
pub fn fe_weight(n: u64, chi: &DirichletCharacter, tw: &AdditiveTwist) -> C64 {
    let r = tw.split.r_d;
    let rest = r / n;
    let inv = mod_inv(rest as i64, n).expect("coprime");
    let arg = mulmod(tw.a2 as i64, inv, n.max(1)) as i64;
    let chim = chi.eval(tw.split.m_d as i64);
    gauss_sum(&chi.conj()) * chi.eval(arg) * chim * chim * moebius(rest) as f64
}

fn dual_bound(dual: &ContragredientSeries) -> (f64, f64) {
    let c = 2.0 * dual.measured_constant().max(1e-3);
    (c * divisor_constant(), (dual.weight as f64 - 1.0) / 2.0 + 0.25)
}

fn lookup<'a>(duals: &'a Contragredients, chi: &DirichletCharacter) -> Result<&'a DualData> {
    duals
        .get(&chi.label())
        .map(|d| d.as_ref())
        .ok_or_else(|| Error::MissingContragredient(format!("character {}", chi.label())))
}

/// Dual side of the weight-2 functional equation, normalized like `N^{s−1} Λ(s, f, a/d)`.
///
/// Each dual `Λ(2−s, f̃^χ, β/M)` is split at `Y1 = 1/√N`; the part below `Y1` is
/// flipped back onto `f^χ` at `a1/M`.
pub fn functional_equation_rhs(
    f: &CoefficientSeries,
    s: C64,
    tw: &AdditiveTwist,
    duals: &Contragredients,
    eps: f64,
) -> Result<C64> {
    let split = &tw.split;
    let n_cond = tw.conductor() as f64;
    let m = split.m_d;
    let y1 = 1.0 / n_cond.sqrt();
    let w0 = 1.0 / (n_cond * y1);
    let beta = tw.dual_numerator() as i64;
    let ph_dual = phase_table(beta, m);
    let ph_twist = phase_table(tw.a1 as i64, m);
    let kp = newform_bound(f.weight);
    let mut sum = C64::new(0.0, 0.0);
    for (n, chi) in fe_characters(split) {
        let data = lookup(duals, &chi)?;
        let ug = upper_sum(&data.dual.b, |j| ph_dual[j % m as usize], 2.0 - s, y1, dual_bound(&data.dual), eps / 4.0)?;
        let uf = upper_sum(data.twisted.coeffs(), |j| ph_twist[j % m as usize], s, w0, kp, eps / 4.0)?;
        let chim = chi.eval(m as i64).conj();
        let lam = ug.value - chim * chim * (C64::new(n_cond, 0.0).powc(s - 1.0)) * uf.value;
        sum += fe_weight(n, &chi, tw) * lam;
    }
    Ok(-sum / euler_phi(split.r_d) as f64)
}

/// `Λ(s, f, a/d)` from the functional equation: `U_f(s, a/d, 1/√N) − N^{1−s} φ(r)⁻¹ Σ_χ w_χ U_{f̃^χ}(2−s, β/M, 1/√N)`.
pub fn lambda_via_fe(f: &CoefficientSeries, s: C64, tw: &AdditiveTwist, duals: &Contragredients, eps: f64) -> Result<C64> {
    let split = &tw.split;
    let n_cond = tw.conductor() as f64;
    let m = split.m_d;
    let y = 1.0 / n_cond.sqrt();
    let ph = phase_table(tw.a, tw.d);
    let ph_dual = phase_table(tw.dual_numerator() as i64, m);
    let mut total = upper_sum(f.coeffs(), |j| ph[j % ph.len()], s, y, newform_bound(f.weight), eps / 2.0)?.value;
    let mut dual = C64::new(0.0, 0.0);
    for (n, chi) in fe_characters(split) {
        let data = lookup(duals, &chi)?;
        let ug = upper_sum(&data.dual.b, |j| ph_dual[j % m as usize], 2.0 - s, y, dual_bound(&data.dual), eps / 4.0)?;
        dual += fe_weight(n, &chi, tw) * ug.value;
    }
    total -= C64::new(n_cond, 0.0).powc(1.0 - s) * dual / euler_phi(split.r_d) as f64;
    Ok(total)
}

/// `L(1, f, a/d)` by the approximate functional equation with balance parameter `X`.
pub fn approx_l1(
    f: &CoefficientSeries,
    tw: &AdditiveTwist,
    x: f64,
    kernel: &SmoothingKernel,
    duals: &Contragredients,
    eps: f64,
) -> Result<C64> {
    let split = &tw.split;
    let root = (tw.conductor() as f64).sqrt();
    let m = split.m_d;
    let (k, p) = newform_bound(f.weight);
    let c_dir = root * x / TAU;
    let n0 = kernel.cutoff(c_dir, k, p - 1.0, eps / 2.0);
    if n0 > f.len() {
        return Err(Error::Truncation { required: n0, available: f.len() });
    }
    let ph = phase_table(tw.a, tw.d);
    let coeffs = f.coeffs();
    let mut direct = C64::new(0.0, 0.0);
    for (n, c) in coeffs.iter().enumerate().take(n0 + 1).skip(1) {
        direct += c * ph[n % ph.len()] * (kernel.value(c_dir / n as f64) / n as f64);
    }
    let c_dual = root / (TAU * x);
    let ph_dual = phase_table(tw.dual_numerator() as i64, m);
    let mut dual = C64::new(0.0, 0.0);
    for (n, chi) in fe_characters(split) {
        let data = lookup(duals, &chi)?;
        let (kd, pd) = dual_bound(&data.dual);
        let m0 = kernel.cutoff(c_dual, kd, pd - 1.0, eps / 4.0);
        if m0 > data.dual.len() {
            return Err(Error::Truncation { required: m0, available: data.dual.len() });
        }
        let mut acc = C64::new(0.0, 0.0);
        for j in 1..=m0 {
            let b = data.dual.b[j];
            if b.norm() != 0.0 {
                acc += b * ph_dual[j % m as usize] * (kernel.value(c_dual / j as f64) / j as f64);
            }
        }
        dual += fe_weight(n, &chi, tw) * acc;
    }
    Ok(direct - dual / euler_phi(split.r_d) as f64)
}

/// `⟨a/d⟩^± = (L(1, a/d) ± L(1, −a/d)) / 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModularSymbolPair {
    pub a: i64,
    pub d: u64,
    pub plus: C64,
    pub minus: C64,
}

/// Source of the contragredient coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DualMode {
    /// Numeric Atkin–Lehner image of `f^χ` by DFT sampling.
    Numeric,
    /// `f^χ` taken as the newform `F_χ`; the image comes from its conjugate
    /// coefficients and a numeric pseudo-eigenvalue, checked against a short
    /// numeric image.
    Decomposition,
    /// Decomposition when its check passes, numeric otherwise.
    Auto,
}

/// Longest dual series [`DualMode::Auto`] will sample numerically.
pub const NUMERIC_FALLBACK_MAX: usize = 20_000;

/// A form together with cached contragredient data and `L(1, a/d)` values.
pub struct Engine {
    pub f: CoefficientSeries,
    pub mode: DualMode,
    pub eps: f64,
    pub kernel: SmoothingKernel,
    duals: Mutex<HashMap<(u64, String), Arc<DualData>>>,
    l_values: Mutex<HashMap<(i64, u64), C64>>,
}

impl Engine {
    /// Unit kernel; `eps` is the per-sum truncation target.
    pub fn new(f: CoefficientSeries, mode: DualMode) -> Self {
        Engine {
            f,
            mode,
            eps: 1e-11,
            kernel: SmoothingKernel::unit(),
            duals: Mutex::new(HashMap::new()),
            l_values: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_kernel(mut self, kernel: SmoothingKernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn twist(&self, a: i64, d: u64) -> Result<AdditiveTwist> {
        AdditiveTwist::new(self.f.level, a, d)
    }

    /// Dual length that covers both the functional-equation split and the AFE with `X ≥ x_min`.
    fn dual_length(&self, tw: &AdditiveTwist, x_min: f64) -> usize {
        let root = (tw.conductor() as f64).sqrt();
        let (k, p) = newform_bound(self.f.weight);
        let fe = upper_terms((4.0 * k, p), 1.5, 1.0 / root, self.eps / 8.0);
        let afe = self.kernel.cutoff(root / (TAU * x_min), 4.0 * k, p - 1.0, self.eps / 8.0);
        fe.max(afe) * 5 / 4 + 8
    }

    /// Contragredient data for every character of the dual sum at `tw`.
    pub fn contragredients(&self, tw: &AdditiveTwist, x_min: f64) -> Result<Contragredients> {
        let len = self.dual_length(tw, x_min);
        let mut out = Contragredients::new();
        for (_, chi) in fe_characters(&tw.split) {
            let key = (tw.split.big_r_prime, chi.label());
            let cached = self.duals.lock().unwrap().get(&key).cloned();
            let data = match cached {
                Some(d) if d.dual.len() >= len => d,
                _ => {
                    let d = Arc::new(self.build_dual(tw, &chi, len)?);
                    self.duals.lock().unwrap().insert(key, d.clone());
                    d
                }
            };
            out.insert(chi.label(), data);
        }
        Ok(out)
    }

    fn build_dual(&self, tw: &AdditiveTwist, chi: &DirichletCharacter, len: usize) -> Result<DualData> {
        let split = &tw.split;
        let level = split.big_r_prime * split.q / split.big_r;
        let mut twisted = twist_coeffs(&self.f, chi, self.f.len());
        twisted.level = level;
        let numeric = |m_out: usize| apply_atkin_lehner_numeric(&twisted, split.big_r_prime, m_out, None, 1e-8);
        let dual = match self.mode {
            DualMode::Numeric => numeric(len)?,
            DualMode::Decomposition => self.decomposed(tw, chi, &twisted, len)?,
            DualMode::Auto => match self.decomposed(tw, chi, &twisted, len) {
                Ok(d) => d,
                Err(_) if len <= NUMERIC_FALLBACK_MAX => numeric(len)?,
                Err(e) => return Err(e),
            },
        };
        Ok(DualData { chi: chi.clone(), r_prime: split.big_r_prime, twisted, dual })
    }

    fn decomposed(
        &self,
        tw: &AdditiveTwist,
        chi: &DirichletCharacter,
        twisted: &CoefficientSeries,
        len: usize,
    ) -> Result<ContragredientSeries> {
        let q_f = crate::arith::lcm(self.f.level, chi.modulus() * chi.modulus());
        let mut big_f = twisted.clone();
        big_f.level = q_f;
        let mut dec = twist_decomposition(&self.f, chi, &big_f, q_f, &tw.split)?;
        dec.compute_lambda()?;
        let series = dec.contragredient(len, twisted.level)?;
        let check = apply_atkin_lehner_numeric(twisted, tw.split.big_r_prime, 24, None, 1e-8)?;
        let worst = (1..=24).map(|m| (check.b[m] - series.b(m)).norm()).fold(0.0, f64::max);
        if worst > 1e-7 {
            return Err(Error::DataMismatch(format!(
                "decomposed image of {} differs from the numeric image by {worst:e}",
                chi.label()
            )));
        }
        Ok(series)
    }

    /// `L(1, f, a/d)` by the AFE at `X = 1` with the engine's kernel, cached per reduced fraction.
    pub fn l1(&self, a: i64, d: u64) -> Result<C64> {
        let tw = self.twist(a, d)?;
        let key = (tw.a, tw.d);
        if let Some(v) = self.l_values.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let duals = self.contragredients(&tw, 1.0)?;
        let v = approx_l1(&self.f, &tw, 1.0, &self.kernel, &duals, self.eps)?;
        self.l_values.lock().unwrap().insert(key, v);
        Ok(v)
    }

    /// Build contragredients for every denominator in `ds` ahead of parallel sweeps.
    pub fn prepare(&self, ds: &[u64]) -> Result<()> {
        for &d in ds {
            let a = if d == 1 { 0 } else { 1 };
            self.contragredients(&self.twist(a, d)?, 1.0)?;
        }
        Ok(())
    }

    pub fn modular_symbol(&self, a: i64, d: u64) -> Result<ModularSymbolPair> {
        let tw = self.twist(a, d)?;
        let lp = self.l1(tw.a, d)?;
        let lm = self.l1(-tw.a, d)?;
        Ok(ModularSymbolPair { a: tw.a, d, plus: (lp + lm) / 2.0, minus: (lp - lm) / 2.0 })
    }

    /// All `φ(d)` symbols of denominator `d`, computed in parallel.
    pub fn symbols_for(&self, d: u64) -> Result<Vec<ModularSymbolPair>> {
        self.prepare(&[d])?;
        let reps: Vec<i64> = (0..d as i64).filter(|&a| crate::arith::gcd(a, d as i64) == 1).collect();
        crate::par::try_map_slice(&reps, |&a| self.modular_symbol(a, d))
    }
}

/// One row of the modular-symbol size report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModsymBoundRow {
    pub d: u64,
    pub max_abs_lambda: f64,
    pub shape: f64,
    pub ratio: f64,
}

/// `d^{1/2} q^{1/4} Π_{p | d, ord_p(d) < ord_p(q)} p^{1/4}`.
pub fn modsym_shape(q: u64, d: u64) -> f64 {
    let fd = crate::arith::factorize(d).unwrap();
    let fq = crate::arith::factorize(q).unwrap();
    let prod: f64 = fd
        .factors
        .iter()
        .filter(|&&(p, e)| e < fq.ord(p))
        .map(|&(p, _)| (p as f64).powf(0.25))
        .product();
    (d as f64).sqrt() * (q as f64).powf(0.25) * prod
}

/// For each `d ≤ d_max`: `max_a |Λ(1, f, a/d)|` against the size shape.
pub fn modsym_bound_report(engine: &Engine, d_max: u64) -> Result<Vec<ModsymBoundRow>> {
    let q = engine.f.level;
    let mut rows = Vec::new();
    for d in 1..=d_max {
        let syms = engine.symbols_for(d)?;
        let mut best: f64 = 0.0;
        for s in &syms {
            best = best.max(engine.l1(s.a, d)?.norm() / TAU);
        }
        let shape = modsym_shape(q, d);
        rows.push(ModsymBoundRow { d, max_abs_lambda: best, shape, ratio: best / shape });
    }
    Ok(rows)
}
