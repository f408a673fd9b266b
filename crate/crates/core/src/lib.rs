//! Additively twisted L-functions of weight-2 newforms.
//!
//! The crate covers the whole chain from exact arithmetic to the modular-symbol
//! averages `G_M^±(x)`:
//!
//! * [`arith`]: factorization, multiplicative functions, level splitting.
//! * [`characters`]: Dirichlet characters, Gauss sums, generalized Gauss sums.
//! * [`expsums`]: Kloosterman sums and the Weil bound.
//! * [`forms`]: eta-quotient expansions, coefficient files, Hecke checks.
//! * [`twists`]: multiplicative twists, Atkin–Lehner operators, contragredients.
//! * [`ltwist`]: `Λ(s, f, a/d)`, its functional equation, the approximate
//!   functional equation and modular symbols.
//! * [`averages`]: the bump family `h_δ`, `A_h^±(M)`, `G_M^±(x)` and the
//!   convergence experiment.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the `parallel`
//! feature is enabled and plain iterators otherwise.

pub mod arith;
pub mod averages;
pub mod characters;
pub mod error;
pub mod expsums;
pub mod forms;
pub mod ltwist;
pub mod par;
pub mod quad;
pub mod special;
pub mod twists;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// `e(x) = exp(2πix)`.
#[inline]
pub fn e(x: f64) -> C64 {
    let t = std::f64::consts::TAU * x;
    C64::new(t.cos(), t.sin())
}

/// `e(num/den)` with the fraction reduced first, so large numerators keep full precision.
#[inline]
pub fn e_frac(num: i64, den: u64) -> C64 {
    let r = num.rem_euclid(den as i64);
    e(r as f64 / den as f64)
}
